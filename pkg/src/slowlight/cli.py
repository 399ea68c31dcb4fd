"""Command-line entry point: ``slowlight {simulate,oracle,compare,preset,sweep}``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io
from .config import ScenarioConfig, parse_config, preset_fig1
from .errors import RuntimeFailure, SinkError, SlowLightError, ValidationError
from .report import compare_metrics, oracle_histories, protocol_metrics, simulate, validate

PRESETS = {"fig1": preset_fig1}

# sweepable keys and how to rebuild the config
_SWEEP = {
    "gamma": ("params", "gamma"),
    "omega": ("params", "omega0"),
    "alpha": ("params", "alpha"),
    "c": ("params", "c"),
    "pulse_peak": ("input", "psi_max"),
    "pulse_fwhm": ("input", "t_p1"),
    "broadening_sigma": (None, "broadening_sigma"),
}


def _load(path: str) -> ScenarioConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


def _outdir(path: str) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise SinkError(f"cannot create output directory {path}: {exc.strerror}") from None
    return out


def _write_histories(run, out: Path, prefix: str = "") -> None:
    o = run.config.outputs
    zs, ts = o.csv_z_stride, o.csv_tau_stride
    if o.field:
        io.write_field_csv(run.field, out / f"{prefix}field.csv", zs, ts)
    if o.spin:
        io.write_spin_csv(run.atoms, run.config.params.c, out / f"{prefix}spin.csv", zs, ts)


def cmd_simulate(args) -> None:
    cfg = _load(args.config)
    run = simulate(cfg)
    out = _outdir(args.out)
    _write_histories(run, out)
    metrics = protocol_metrics(run)
    oracle = None
    if cfg.outputs.oracle:
        orc = oracle_histories(cfg, run.field.z, run.field.tau)
        _write_histories(orc, out, "oracle_")
        oracle = orc.field
        metrics.update(compare_metrics(run, exact_transients=False))
    if cfg.outputs.metrics:
        io.write_metrics(metrics, out / "metrics.txt")
    if args.figures:
        from .plotting import render_run

        render_run(run, out, oracle=oracle)


def cmd_oracle(args) -> None:
    cfg = _load(args.config)
    validate(cfg)
    g = cfg.grid
    z = g.z_nodes()[:: g.z_stride]
    if z[-1] != g.l_s:
        z = np.append(z, g.l_s)
    tau = g.tau_nodes()[:: g.tau_stride]
    run = oracle_histories(cfg, z, tau, exact_transients=args.exact)
    out = _outdir(args.out)
    _write_histories(run, out, "oracle_")
    if cfg.outputs.metrics:
        io.write_metrics(protocol_metrics(run), out / "metrics.txt")
    if args.figures:
        from .plotting import render_run

        render_run(run, out, prefix="oracle_")


def cmd_compare(args) -> None:
    cfg = _load(args.config)
    run = simulate(cfg)
    out = _outdir(args.out)
    _write_histories(run, out)
    orc = oracle_histories(cfg, run.field.z, run.field.tau)
    _write_histories(orc, out, "oracle_")
    metrics = protocol_metrics(run)
    metrics.update(compare_metrics(run, exact_transients=not args.fast))
    io.write_metrics(metrics, out / "metrics.txt")
    if args.figures:
        from .plotting import render_run

        render_run(run, out, oracle=orc.field)


def cmd_preset(args) -> None:
    text = PRESETS[args.name]()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _parse_vary(spec: str):
    key, eq, rng = spec.partition("=")
    parts = rng.split(":")
    if not eq or key not in _SWEEP or len(parts) != 3:
        raise ValidationError(f"--vary expects key=a:b:n with key in {sorted(_SWEEP)}, got {spec!r}")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ValidationError(f"bad range in --vary {spec!r}") from None
    if n < 1:
        raise ValidationError("--vary needs n >= 1")
    return key, np.linspace(a, b, n)


def _with(cfg: ScenarioConfig, key: str, value: float) -> ScenarioConfig:
    section, attr = _SWEEP[key]
    if section is None:
        return replace(cfg, **{attr: value})
    return replace(cfg, **{section: replace(getattr(cfg, section), **{attr: value})})


def cmd_sweep(args) -> None:
    cfg = _load(args.config)
    key, values = _parse_vary(args.vary)
    rows = []
    for v in values:
        run = simulate(_with(cfg, key, float(v)))
        rows.append({key: float(v), **protocol_metrics(run)})
    cols = [key] + sorted({k for r in rows for k in r} - {key})
    lines = [",".join(cols)]
    for r in rows:
        lines.append(",".join("" if r.get(c) is None else format(r[c], ".9g") for c in cols))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="slowlight", description="EIT slow-light pulse processing simulator")
    ap.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = ap.add_subparsers(dest="command", required=True)

    def scenario(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True)
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--figures", action="store_true", help="also render PNG figures")
        p.set_defaults(func=func)
        return p

    scenario("simulate", cmd_simulate, "march the field and write CSVs and metrics")
    p = scenario("oracle", cmd_oracle, "evaluate the closed forms only")
    p.add_argument("--exact", action="store_true", help="quadrature inside transient windows")
    p = scenario("compare", cmd_compare, "march and closed forms with error report")
    p.add_argument("--fast", action="store_true", help="two-term forms inside transient windows")

    p = sub.add_parser("preset", help="print a built-in scenario")
    p.add_argument("name", choices=sorted(PRESETS))
    p.add_argument("--out")
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("sweep", help="metrics table across one parameter")
    p.add_argument("--config", required=True)
    p.add_argument("--vary", required=True, metavar="KEY=A:B:N")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)
    return ap


def run_cli(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (RuntimeFailure, SlowLightError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()

