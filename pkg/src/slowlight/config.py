"""Scenario documents: line-oriented ``key = value`` settings plus ``event`` lines."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import ConfigSyntaxError, DuplicateKey, MissingRequired, UnknownKey
from .physics import PhysicalParams
from .pulses import PulseEnvelope
from .solver import ControlStep, EventSchedule, MarchOptions, RfEvent, SimGrid


@dataclass(frozen=True)
class Outputs:
    field: bool = True
    spin: bool = True
    metrics: bool = True
    oracle: bool = False
    csv_z_stride: int = 1
    csv_tau_stride: int = 10


@dataclass(frozen=True)
class ScenarioConfig:
    params: PhysicalParams
    grid: SimGrid
    input: PulseEnvelope
    schedule: EventSchedule
    march: MarchOptions = field(default_factory=MarchOptions)
    outputs: Outputs = Outputs()
    broadening_sigma: float = 0.0

    def without_events(self) -> "ScenarioConfig":
        return replace(self, schedule=EventSchedule(), params=replace(self.params, h=0.0))


REQUIRED = ("gamma", "omega", "alpha", "c")

# key -> (section, attribute, type)
_KEYS = {
    "gamma": ("params", "gamma", float),
    "omega": ("params", "omega0", float),
    "alpha": ("params", "alpha", float),
    "c": ("params", "c", float),
    "p_rf": ("params", "p_rf", float),
    "pulse_shape": ("input", "shape", str),
    "pulse_peak": ("input", "psi_max", float),
    "pulse_center": ("input", "t_center", float),
    "pulse_fwhm": ("input", "t_p1", float),
    "pulse_samples": ("input", "samples", str),
    "l_s": ("grid", "l_s", float),
    "dz": ("grid", "dz", float),
    "tau_min": ("grid", "tau_min", float),
    "tau_max": ("grid", "tau_max", float),
    "dtau": ("grid", "dtau", float),
    "save_dz": ("grid", "save_dz", "optional"),
    "save_dtau": ("grid", "save_dtau", "optional"),
    "rf_mode": ("march", "rf_mode", str),
    "uniform_tau": ("march", "uniform_tau", bool),
    "z_scheme": ("march", "z_scheme", str),
    "output_field": ("outputs", "field", bool),
    "output_spin": ("outputs", "spin", bool),
    "output_metrics": ("outputs", "metrics", bool),
    "output_oracle": ("outputs", "oracle", bool),
    "csv_z_stride": ("outputs", "csv_z_stride", int),
    "csv_tau_stride": ("outputs", "csv_tau_stride", int),
    "broadening_sigma": ("top", "broadening_sigma", float),
}

_EVENT_ARGS = {"control_step": {"t", "h"}, "rf": {"t", "area", "phase"}}
_EVENT_REQUIRED = {"control_step": {"t", "h"}, "rf": {"t", "area"}}

# Defaults for omitted optional keys: the fig1 preset values.
_DEFAULTS = {
    "p_rf": 50.0,
    "pulse_shape": "gaussian",
    "pulse_peak": 0.05,
    "pulse_center": 7000.0,
    "pulse_fwhm": 2600.0,
    "l_s": 78.0,
    "dz": 0.25,
    "tau_min": 0.0,
    "tau_max": 18500.0,
    "dtau": 0.025,
    "save_dz": 1.0,
    "save_dtau": 1.0,
}

_HEADER = """\
# Units: time in 1/Omega, length in c_ref/Omega with Omega = 1; angles in radians.
# Rates gamma, alpha, p_rf are in units of Omega; c is the vacuum speed in these units.
"""


def _to_bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _convert(kind, text: str):
    if kind == "optional":
        return None if text.lower() == "none" else _convert(float, text)
    if kind is bool:
        return _to_bool(text)
    if kind is int:
        return int(text)
    if kind is float:
        v = float(text)
        if math.isnan(v):
            raise ValueError("NaN is not allowed")
        return v
    return text


def _parse_samples(text: str):
    ts, vs = [], []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        t, _, v = item.partition(":")
        if not _:
            raise ValueError(f"sample {item!r} is not time:value")
        ts.append(float(t))
        vs.append(complex(v.strip().replace(" ", "")))
    return tuple(ts), tuple(vs)


def parse_config(text: str) -> ScenarioConfig:
    values: dict[str, object] = {}
    control: ControlStep | None = None
    rfs: list[RfEvent] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split(None, 1)
        if head[0] == "event":
            if len(head) < 2:
                raise ConfigSyntaxError(lineno, "event line needs a type")
            parts = head[1].split()
            kind, args = parts[0], {}
            if kind not in _EVENT_ARGS:
                raise UnknownKey(f"event {kind}")
            for tok in parts[1:]:
                k, eq, v = tok.partition("=")
                if not eq or not k or not v:
                    raise ConfigSyntaxError(lineno, f"expected k=v, got {tok!r}")
                if k not in _EVENT_ARGS[kind]:
                    raise UnknownKey(f"event {kind} {k}")
                if k in args:
                    raise DuplicateKey(f"event {kind} {k}")
                try:
                    args[k] = float(v)
                except ValueError:
                    raise ConfigSyntaxError(lineno, f"{k} is not a number: {v!r}") from None
            missing = _EVENT_REQUIRED[kind] - set(args)
            if missing:
                raise MissingRequired(f"event {kind} {sorted(missing)[0]}")
            if kind == "control_step":
                if control is not None:
                    raise DuplicateKey("event control_step")
                control = ControlStep(args["t"], args["h"])
            else:
                rfs.append(RfEvent(args["t"], args["area"], args.get("phase", 0.0)))
            continue
        key, eq, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not eq or not key or not value:
            raise ConfigSyntaxError(lineno, "expected 'key = value' or an event line")
        if key not in _KEYS:
            raise UnknownKey(key)
        if key in values:
            raise DuplicateKey(key)
        kind = _KEYS[key][2]
        try:
            values[key] = _parse_samples(value) if key == "pulse_samples" else _convert(kind, value)
        except ValueError as exc:
            raise ConfigSyntaxError(lineno, f"{key}: {exc}") from None
    for key in REQUIRED:
        if key not in values:
            raise MissingRequired(key)
    merged = {**_DEFAULTS, **values}
    sections: dict[str, dict] = {s: {} for s in ("params", "input", "grid", "march", "outputs", "top")}
    for key, v in merged.items():
        section, attr, _ = _KEYS[key]
        sections[section][attr] = v
    samples = sections["input"].pop("samples", None)
    if samples is not None:
        sections["input"]["sample_t"], sections["input"]["sample_v"] = samples
    rfs.sort(key=lambda e: e.time)
    schedule = EventSchedule(control, tuple(rfs))
    params = PhysicalParams(h=schedule.h, **sections["params"])
    return ScenarioConfig(
        params=params,
        grid=SimGrid(**sections["grid"]),
        input=PulseEnvelope(**sections["input"]),
        schedule=schedule,
        march=MarchOptions(**sections["march"]),
        outputs=Outputs(**sections["outputs"]),
        **sections["top"],
    )


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def serialize_config(cfg: ScenarioConfig) -> str:
    lines = [_HEADER.rstrip("\n")]
    objs = {
        "params": cfg.params,
        "input": cfg.input,
        "grid": cfg.grid,
        "march": cfg.march,
        "outputs": cfg.outputs,
        "top": cfg,
    }
    for key, (section, attr, _) in _KEYS.items():
        if key == "pulse_samples":
            if cfg.input.shape == "samples":
                pairs = ", ".join(
                    f"{t!r}:{complex(v)!r}".replace(" ", "") for t, v in zip(cfg.input.sample_t, cfg.input.sample_v)
                )
                lines.append(f"pulse_samples = {pairs}")
            continue
        value = getattr(objs[section], attr)
        lines.append(f"{key} = {_fmt(value)}")
    cs = cfg.schedule.control_step
    if cs is not None:
        lines.append(f"event control_step t={cs.t1!r} h={cs.h!r}")
    for ev in cfg.schedule.rf_events:
        lines.append(f"event rf t={ev.time!r} area={ev.area!r} phase={ev.phase!r}")
    return "\n".join(lines) + "\n"


def preset_fig1() -> str:
    """Canonical acceptance scenario: step, pi/4 split, 3pi retrieval."""
    return (
        "# fig1 preset: slow light, control step, rf split, storage and retrieval\n"
        + _HEADER
        + """gamma = 4.0
omega = 1.0
alpha = 100.0
c = 10000.0
p_rf = 50.0
pulse_shape = gaussian
pulse_peak = 0.05
pulse_center = 7000.0
pulse_fwhm = 2600.0
l_s = 78.0
dz = 0.25
tau_min = 0.0
tau_max = 18500.0
dtau = 0.025
save_dz = 1.0
save_dtau = 1.0
csv_tau_stride = 10
event control_step t=10850.0 h=0.41421356237309515
event rf t=10900.0 area=0.7853981633974483 phase=0.0
event rf t=14500.0 area=4.71238898038469 phase=0.0
"""
    )


