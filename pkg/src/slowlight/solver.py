"""Signal-field march through the EIT sample in the retarded frame.

With tau = t - z/c the wave equation becomes dPsi/dz = alpha * Y(z, tau).  Each
z-slice of atoms is integrated over tau with the trapezoidal stepper.  The default z-step is the
trapezoidal rule as well, solved jointly with the atomic update at each tau node,
which keeps the march stable for any dz.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .atoms import fast_rate, rf_matrix, trapezoid_coeffs
from .errors import GridError, ScheduleError, StepTooLarge, UnstableMarch
from .physics import DerivedRates, PhysicalParams
from .pulses import PulseEnvelope

logger = logging.getLogger(__name__)

BLOWUP_FACTOR = 10.0
Z_SCHEMES = ("trapezoid", "heun", "euler")
_NODE_RTOL = 1e-9
_DZ_RTOL = 1e-5


@dataclass(frozen=True)
class ControlStep:
    t1: float
    h: float


@dataclass(frozen=True)
class RfEvent:
    time: float
    area: float
    phase: float = 0.0


@dataclass(frozen=True)
class EventSchedule:
    control_step: ControlStep | None = None
    rf_events: tuple[RfEvent, ...] = ()

    def __post_init__(self):
        times = [e.time for e in self.rf_events]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ScheduleError("rf events must be strictly increasing in time")
        if self.control_step is not None and times and times[0] <= self.control_step.t1:
            raise ScheduleError("control step must precede the first rf event")

    @property
    def h(self) -> float:
        return 0.0 if self.control_step is None else self.control_step.h

    def without_events(self) -> "EventSchedule":
        return EventSchedule()

    def check_completion(self, params: PhysicalParams, rates: DerivedRates, pulse_length: float):
        """Require the first rf pulse to wait until the step has swept the whole pulse."""
        if self.control_step is None or not self.rf_events:
            return
        earliest = self.control_step.t1 + rates.tau_gamma + pulse_length / params.c
        if self.rf_events[0].time < earliest:
            raise ScheduleError(
                f"first rf event at t = {self.rf_events[0].time:g} precedes "
                f"t1 + tau_gamma + l_p/c = {earliest:g}"
            )


@dataclass(frozen=True)
class SimGrid:
    l_s: float
    dz: float
    tau_min: float
    tau_max: float
    dtau: float
    # spacing of the stored history; multiples of dz and dtau
    save_dz: float | None = None
    save_dtau: float | None = None

    @property
    def n_z(self) -> int:
        return _count(self.l_s, self.dz, "l_s / dz")

    @property
    def n_tau(self) -> int:
        return _count(self.tau_max - self.tau_min, self.dtau, "tau span / dtau")

    @property
    def z_stride(self) -> int:
        return 1 if self.save_dz is None else _count(self.save_dz, self.dz, "save_dz / dz")

    @property
    def tau_stride(self) -> int:
        return 1 if self.save_dtau is None else _count(self.save_dtau, self.dtau, "save_dtau / dtau")

    def z_nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.l_s, self.n_z + 1)

    def tau_nodes(self) -> np.ndarray:
        return np.linspace(self.tau_min, self.tau_max, self.n_tau + 1)

    def refined(self, factor: int = 2) -> "SimGrid":
        """Same window with dz and dtau divided by ``factor``; stored spacing unchanged."""
        return SimGrid(
            self.l_s,
            self.dz / factor,
            self.tau_min,
            self.tau_max,
            self.dtau / factor,
            self.save_dz if self.save_dz is not None else self.dz,
            self.save_dtau if self.save_dtau is not None else self.dtau,
        )

    def validate(self, params: PhysicalParams, envelope: PulseEnvelope, v1: float) -> None:
        for name in ("l_s", "dz", "dtau"):
            if not getattr(self, name) > 0:
                raise GridError(f"{name} must be positive")
        if self.tau_max <= self.tau_min:
            raise GridError("tau_max must exceed tau_min")
        self.n_z, self.n_tau, self.z_stride, self.tau_stride  # divisibility checks
        # slack covers V1 sitting just below alpha/Omega^2 at finite c
        if self.dz > 0.01 * v1 * envelope.t_p1 * (1 + _DZ_RTOL):
            raise GridError(
                f"dz = {self.dz:g} exceeds 0.01 * V1 * t_p1 = {0.01 * v1 * envelope.t_p1:g}"
            )
        omegas = [params.omega0, params.omega_post]
        fast = max(fast_rate(w, params.gamma) for w in omegas)
        limit = min(0.1 / fast, 0.01 * envelope.t_p1)
        if self.dtau > limit * (1 + _NODE_RTOL):
            raise GridError(f"dtau = {self.dtau:g} exceeds min(0.1/gamma_plus, 0.01*t_p1) = {limit:g}")
        edge = max(abs(envelope(self.tau_min)), abs(envelope(self.tau_max)))
        if edge > 1e-8 * envelope.peak:
            raise GridError(
                f"input envelope is {edge / envelope.peak:.2e} of its peak at the tau window edge"
            )


def _count(span: float, step: float, what: str) -> int:
    n = span / step
    k = int(round(n))
    if k < 1 or abs(n - k) > 1e-6 * max(1.0, n):
        raise GridError(f"{what} = {n:g} is not a positive integer")
    return k


@dataclass
class FieldHistory:
    z: np.ndarray
    tau: np.ndarray
    psi: np.ndarray  # shape (len(z), len(tau))
    boundary: PulseEnvelope
    c: float

    def lab_time(self, iz: int) -> np.ndarray:
        return self.tau + self.z[iz] / self.c


@dataclass
class AtomicFieldHistory:
    z: np.ndarray
    tau: np.ndarray
    x: np.ndarray
    y: np.ndarray
    c_big_m: np.ndarray


@dataclass
class MarchOptions:
    rf_mode: str = "instant"  # or "finite"
    uniform_tau: bool = False
    # "trapezoid" is implicit and A-stable; the explicit "heun" and "euler"
    # schemes need dz below roughly 2 * gamma / alpha
    z_scheme: str = "trapezoid"


def control_amplitude_at(z, tau, schedule: EventSchedule, params: PhysicalParams):
    """Prescribed control Rabi frequency; the step rides at c, so it is a tau threshold."""
    tau = np.asarray(tau, dtype=float)
    if schedule.control_step is None:
        return np.full(tau.shape, params.omega0) if tau.ndim else params.omega0
    cs = schedule.control_step
    out = np.where(tau < cs.t1, params.omega0, (1.0 + cs.h) * params.omega0)
    return out if out.ndim else float(out)


def rf_duration(event: RfEvent, params: PhysicalParams) -> float:
    return abs(event.area) / params.p_rf


def rf_effective_time(event: RfEvent, params: PhysicalParams, rf_mode: str = "instant") -> float:
    """Lab time after which the rotation is complete."""
    return event.time if rf_mode == "instant" else event.time + rf_duration(event, params)


def _rf_kicks(tau_nodes, z, schedule, params, opts: MarchOptions):
    """Rotations seen by the atoms at ``z``: step index, position within the step, unitary.

    Step k runs from node k-1 to node k; a rotation at fraction f in (0, 1] of
    that step is applied between the two sub-steps, so node k is post-event
    whenever tau_k >= tau_event.
    """
    shift = 0.0 if opts.uniform_tau else z / params.c
    t0, dt = tau_nodes[0], tau_nodes[1] - tau_nodes[0]
    n = len(tau_nodes) - 1
    steps, fracs, mats = [], [], []
    for ev in schedule.rf_events:
        tau_ev = ev.time - shift
        if opts.rf_mode == "instant":
            pos = (tau_ev - t0) / dt
            k = int(math.ceil(pos - 1e-9))
            if 0 < k <= n:
                steps.append(k)
                fracs.append(min(max(1.0 - (k - pos), 0.0), 1.0))
                mats.append(rf_matrix(ev.area, ev.phase))
            continue
        # finite pulse: rotate by P * overlap at the end of each step it covers
        dur = rf_duration(ev, params)
        sign = 1.0 if ev.area >= 0 else -1.0
        k0 = max(int(math.floor((tau_ev - t0) / dt)), 0)
        k1 = min(int(math.ceil((tau_ev + dur - t0) / dt)), n)
        for k in range(k0, k1):
            lo, hi = t0 + k * dt, t0 + (k + 1) * dt
            overlap = min(hi, tau_ev + dur) - max(lo, tau_ev)
            if overlap > 0:
                steps.append(k + 1)
                fracs.append(1.0)
                mats.append(rf_matrix(sign * params.p_rf * overlap, ev.phase))
    if not steps:
        return (
            np.zeros(0, dtype=np.int64),
            np.zeros(0, dtype=np.float64),
            np.zeros((0, 2, 2), dtype=np.complex128),
        )
    order = np.lexsort((fracs, steps))
    return (
        np.asarray(steps, dtype=np.int64)[order],
        np.asarray(fracs, dtype=np.float64)[order],
        np.asarray(mats, dtype=np.complex128)[order],
    )


@numba.njit(cache=True, fastmath=True)
def _kicked_step(x, y, m, d, w, gamma, dtau, fracs, mats, p0, p1):
    """One tau step with drive ``d`` interrupted by rotations p0..p1-1 at their fractions."""
    done = 0.0
    for q in range(p0, p1):
        sub = (fracs[q] - done) * dtau
        if sub > 0:
            a00, a01, a10, a11, b0, b1 = trapezoid_coeffs(w, gamma, sub)
            x, y = a00 * x + a01 * y + b0 * d, a10 * x + a11 * y + b1 * d
        u = mats[q]
        x, m = u[0, 0] * x + u[0, 1] * m, u[1, 0] * x + u[1, 1] * m
        done = fracs[q]
    sub = (1.0 - done) * dtau
    if sub > 0:
        a00, a01, a10, a11, b0, b1 = trapezoid_coeffs(w, gamma, sub)
        x, y = a00 * x + a01 * y + b0 * d, a10 * x + a11 * y + b1 * d
    return x, y, m


@numba.njit(cache=True, fastmath=True)
def _slice_pass(psi, y_out, omega_mid, gamma, dtau, kick_steps, kick_fracs, kick_mats, keep_all, x_out, m_out):
    """Integrate one z-slice of atoms over tau, writing Y into ``y_out``.

    When ``keep_all`` is set, X and C_M are written into ``x_out``/``m_out``.
    """
    n = psi.shape[0]
    x = 0j
    y = 0j
    m = 0j
    y_out[0] = y
    if keep_all:
        x_out[0] = x
        m_out[0] = m
    p = 0
    nk = kick_steps.shape[0]
    w = omega_mid[0]
    a00, a01, a10, a11, b0, b1 = trapezoid_coeffs(w, gamma, dtau)
    for k in range(1, n):
        if omega_mid[k - 1] != w:
            w = omega_mid[k - 1]
            a00, a01, a10, a11, b0, b1 = trapezoid_coeffs(w, gamma, dtau)
        psi_mid = 0.5 * (psi[k - 1] + psi[k])
        if p < nk and kick_steps[p] == k:
            p1 = p
            while p1 < nk and kick_steps[p1] == k:
                p1 += 1
            x, y, m = _kicked_step(x, y, m, psi_mid, w, gamma, dtau, kick_fracs, kick_mats, p, p1)
            p = p1
        else:
            x, y = a00 * x + a01 * y + b0 * psi_mid, a10 * x + a11 * y + b1 * psi_mid
        y_out[k] = y
        if keep_all:
            x_out[k] = x
            m_out[k] = m


@numba.njit(cache=True, fastmath=True)
def _slice_implicit(
    psi_prev, y_prev, psi, y_out, half_gain, omega_mid, gamma, dtau,
    kick_steps, kick_fracs, kick_mats, keep_all, x_out, m_out,
):
    """Advance the field one z-step with the trapezoidal rule in both z and tau.

    Solves psi = psi_prev + half_gain * (y_prev + y) jointly with the atomic
    update, node by node; ``half_gain`` is alpha * dz / 2.  Returns max |psi|.
    """
    n = psi_prev.shape[0]
    x = 0j
    y = 0j
    m = 0j
    prev = psi_prev[0] + half_gain * y_prev[0]
    psi[0] = prev
    peak2 = prev.real * prev.real + prev.imag * prev.imag
    y_out[0] = y
    if keep_all:
        x_out[0] = x
        m_out[0] = m
    p = 0
    nk = kick_steps.shape[0]
    w = omega_mid[0]
    a00, a01, a10, a11, b0, b1 = trapezoid_coeffs(w, gamma, dtau)
    inv = 1.0 / (1.0 - 0.5 * half_gain * b1)
    for k in range(1, n):
        if omega_mid[k - 1] != w:
            w = omega_mid[k - 1]
            a00, a01, a10, a11, b0, b1 = trapezoid_coeffs(w, gamma, dtau)
            inv = 1.0 / (1.0 - 0.5 * half_gain * b1)
        if p < nk and kick_steps[p] == k:
            p1 = p
            while p1 < nk and kick_steps[p1] == k:
                p1 += 1
            # the kicked step is affine in its drive d = (prev + psi[k]) / 2
            x0, y0, m0 = _kicked_step(x, y, m, 0j, w, gamma, dtau, kick_fracs, kick_mats, p, p1)
            xd, yd, md = _kicked_step(x, y, m, 1.0 + 0j, w, gamma, dtau, kick_fracs, kick_mats, p, p1)
            xd -= x0
            yd -= y0
            md -= m0
            pk = (psi_prev[k] + half_gain * (y_prev[k] + y0 + 0.5 * yd * prev)) / (1.0 - 0.5 * half_gain * yd)
            d = 0.5 * (prev + pk)
            x, y, m = x0 + xd * d, y0 + yd * d, m0 + md * d
            p = p1
        else:
            # y_new = base + (b1 / 2) * psi[k]; psi[k] = d + half_gain * y_new
            base = a10 * x + a11 * y + 0.5 * b1 * prev
            pk = (psi_prev[k] + half_gain * (y_prev[k] + base)) * inv
            x, y = a00 * x + a01 * y + 0.5 * b0 * (prev + pk), base + 0.5 * b1 * pk
        psi[k] = pk
        prev = pk
        a2 = pk.real * pk.real + pk.imag * pk.imag
        if a2 > peak2:
            peak2 = a2
        y_out[k] = y
        if keep_all:
            x_out[k] = x
            m_out[k] = m
    return np.sqrt(peak2)


def apply_rf_across_sample(states: dict, event: RfEvent, z, c: float) -> dict:
    """Rotate a z-slice of atoms; each atom sees the pulse at tau = t_event - z/c.

    ``states`` maps "x" and "c_big_m" to arrays over ``z``; returns new arrays and
    the local retarded instants under "tau".
    """
    u = rf_matrix(event.area, event.phase)
    x = np.asarray(states["x"], dtype=complex)
    m = np.asarray(states["c_big_m"], dtype=complex)
    return {
        "x": u[0, 0] * x + u[0, 1] * m,
        "c_big_m": u[1, 0] * x + u[1, 1] * m,
        "y": states.get("y"),
        "tau": event.time - np.asarray(z, dtype=float) / c,
    }


def run_march(
    grid: SimGrid,
    schedule: EventSchedule,
    envelope: PulseEnvelope,
    params: PhysicalParams,
    options: MarchOptions | None = None,
    check_grid: bool = True,
) -> tuple[FieldHistory, AtomicFieldHistory]:
    opts = options or MarchOptions()
    if opts.rf_mode not in ("instant", "finite"):
        raise ValueError(f"rf_mode must be 'instant' or 'finite', got {opts.rf_mode!r}")
    if opts.z_scheme not in Z_SCHEMES:
        raise ValueError(f"z_scheme must be one of {Z_SCHEMES}, got {opts.z_scheme!r}")
    if check_grid:
        v1 = 1.0 / (1.0 / params.c + params.alpha / params.omega0**2)
        grid.validate(params, envelope, v1)

    tau = grid.tau_nodes()
    z = grid.z_nodes()
    dtau, dz = grid.dtau, grid.dz
    omega_mid = np.asarray(
        control_amplitude_at(0.0, 0.5 * (tau[:-1] + tau[1:]), schedule, params), dtype=float
    )
    if dtau > 0.1 / fast_rate(float(np.max(omega_mid)), params.gamma) * (1 + _NODE_RTOL) or (
        dtau > 0.1 / fast_rate(float(np.min(omega_mid)), params.gamma) * (1 + _NODE_RTOL)
    ):
        raise StepTooLarge(f"dtau = {dtau:g} exceeds 0.1/gamma_plus for the control levels used")

    zs, ts = grid.z_stride, grid.tau_stride
    z_keep = np.arange(0, len(z), zs)
    if z_keep[-1] != len(z) - 1:
        z_keep = np.append(z_keep, len(z) - 1)
    shape = (len(z_keep), len(tau[::ts]))
    psi_h = np.empty(shape, dtype=complex)
    x_h = np.empty(shape, dtype=complex)
    y_h = np.empty(shape, dtype=complex)
    m_h = np.empty(shape, dtype=complex)
    save_row = {int(iz): r for r, iz in enumerate(z_keep)}

    nt = len(tau)
    x_buf = np.empty(nt, dtype=complex)
    m_buf = np.empty(nt, dtype=complex)
    psi, psi_next = np.empty(nt, dtype=complex), np.empty(nt, dtype=complex)
    y, y_next = np.empty(nt, dtype=complex), np.empty(nt, dtype=complex)
    alpha = params.alpha

    def atoms(psi_row, y_row, iz, keep):
        steps, fracs, mats = _rf_kicks(tau, z[iz], schedule, params, opts)
        _slice_pass(psi_row, y_row, omega_mid, params.gamma, dtau, steps, fracs, mats, keep, x_buf, m_buf)

    def store(iz, psi_row, y_row):
        r = save_row.get(iz)
        if r is None:
            return
        psi_h[r] = psi_row[::ts]
        y_h[r] = y_row[::ts]
        x_h[r] = x_buf[::ts]
        m_h[r] = m_buf[::ts]

    psi[:] = envelope(tau)
    limit = BLOWUP_FACTOR * max(envelope.peak, float(np.max(np.abs(psi))))
    atoms(psi, y, 0, True)
    store(0, psi, y)
    for iz in range(1, len(z)):
        keep = iz in save_row
        if opts.z_scheme == "trapezoid":
            steps, fracs, mats = _rf_kicks(tau, z[iz], schedule, params, opts)
            peak = _slice_implicit(
                psi, y, psi_next, y_next, 0.5 * dz * alpha, omega_mid, params.gamma, dtau,
                steps, fracs, mats, keep, x_buf, m_buf,
            )
        else:
            if opts.z_scheme == "euler":
                np.add(psi, dz * alpha * y, out=psi_next)
            else:
                pred = psi + dz * alpha * y
                atoms(pred, y_next, iz, False)
                np.add(psi, 0.5 * dz * alpha * (y + y_next), out=psi_next)
            atoms(psi_next, y_next, iz, keep)
            peak = float(np.max(np.abs(psi_next)))
        psi, psi_next = psi_next, psi
        y, y_next = y_next, y
        if not math.isfinite(peak) or peak > limit:
            raise UnstableMarch(f"|Psi| = {peak:.3g} at z = {z[iz]:g} exceeds {limit:.3g}")
        store(iz, psi, y)
        if iz % max(1, len(z) // 10) == 0:
            logger.debug("march z = %.4g / %.4g", z[iz], z[-1])

    zk, tk = z[z_keep], tau[::ts]
    return (
        FieldHistory(z=zk, tau=tk, psi=psi_h, boundary=envelope, c=params.c),
        AtomicFieldHistory(z=zk, tau=tk, x=x_h, y=y_h, c_big_m=m_h),
    )
