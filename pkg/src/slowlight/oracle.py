"""Closed-form piecewise solutions of the slow-light processing protocol.

Stages, in lab time t at position z:

    S0  t < t_z = t1 + z/c          undisturbed transport at V1
    S1  t_z <= t < t3               after the control step, moving at V2
    S2  t3 <= t < t4                after the splitting rf pulse
    S3  t4 <= t < t5                during the retrieval rf pulse
    S4  t >= t5                     retrieved copy

Every stage transient comes from one generator, parameterised by the event
instant and the source profile it acts on.  Two-term approximations are
vectorised; the exact transient integrals use adaptive quadrature and are
evaluated point by point.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .errors import OutOfWindow, ScheduleError
from .physics import PhysicalParams, damping_rates, group_velocity, kx_shape, ky_shape
from .pulses import PulseEnvelope
from .solver import EventSchedule, rf_effective_time

# Transient tails beyond this many slow e-folds are dropped from quadrature.
_KERNEL_EFOLDS = 40.0


@dataclass(frozen=True)
class StageSolution:
    """Geometric constants and event instants of one protocol run."""

    v1: float
    v2: float
    kappa: float
    eta: float
    beta1: float
    beta2: float
    t1: float
    t_c: float
    z_c: float
    h: float
    omega0: float
    alpha: float
    c: float
    gamma_plus: float
    gamma_minus: float
    tau_gamma: float
    # rf bookkeeping; inf when the event is absent
    t3: float = math.inf
    t4: float = math.inf
    t5: float = math.inf
    split_cos: float = 1.0  # cos(A1), scales C_m at t3
    store: complex = 0j  # C_M(t3+) / C_m(t3-)
    retrieve: complex = 0j  # C_m(t5+) / C_M(t5-)
    retrieve_cos: float = 1.0  # cos(A2), scales the stored C_M at t5
    l_s: float = math.inf
    t_window: tuple[float, float] = (-math.inf, math.inf)

    @classmethod
    def build(
        cls,
        params: PhysicalParams,
        schedule: EventSchedule,
        rf_mode: str = "instant",
        l_s: float = math.inf,
        t_window: tuple[float, float] = (-math.inf, math.inf),
        idealized: bool = False,
    ) -> "StageSolution":
        if len(schedule.rf_events) > 2:
            raise ScheduleError("the closed-form solution covers at most two rf events")
        h = schedule.h
        if schedule.control_step is not None:
            t1 = schedule.control_step.t1
        elif schedule.rf_events:
            t1 = schedule.rf_events[0].time  # h = 0: a no-op step keeps the formulas uniform
        else:
            t1 = math.inf
        omega_post = (1.0 + h) * params.omega0
        v1 = group_velocity(params.omega0, params.alpha, params.c)
        gp, gm = damping_rates(params.gamma, omega_post)
        c = params.c
        if idealized:
            v2 = (1.0 + h) ** 2 * v1
            kappa = eta = 1.0
            t_c = t1
        else:
            v2 = group_velocity(omega_post, params.alpha, c)
            kappa = (c - v1) / (c - v2)
            eta = (c - v2) / c
            t_c = t1 * c / (c - v1) if math.isfinite(t1) else t1
        kw = dict(
            v1=v1, v2=v2, kappa=kappa, eta=eta,
            beta1=1.0 / v1 - 1.0 / c, beta2=1.0 / v2 - 1.0 / c,
            t1=t1, t_c=t_c, z_c=v1 * t_c, h=h,
            omega0=params.omega0, alpha=params.alpha, c=c,
            gamma_plus=gp, gamma_minus=gm, tau_gamma=5.0 / gm,
            l_s=l_s, t_window=t_window,
        )
        events = schedule.rf_events
        if events:
            a1 = events[0]
            kw["t3"] = rf_effective_time(a1, params, rf_mode)
            kw["split_cos"] = math.cos(a1.area)
            kw["store"] = 1j * complex(math.cos(-a1.phase), math.sin(-a1.phase)) * math.sin(a1.area)
        if len(events) == 2:
            a2 = events[1]
            kw["t4"] = a2.time
            kw["t5"] = rf_effective_time(a2, params, rf_mode)
            kw["retrieve"] = 1j * complex(math.cos(a2.phase), math.sin(a2.phase)) * math.sin(a2.area)
            kw["retrieve_cos"] = math.cos(a2.area)
        return cls(**kw)

    @property
    def omega_post(self) -> float:
        return (1.0 + self.h) * self.omega0

    @property
    def split_kick(self) -> float:
        """Fractional field drop imprinted by the splitting pulse, (1+h)(1 - cos A1)."""
        return (1.0 + self.h) * (1.0 - self.split_cos)

    @property
    def retrieval_gain(self) -> complex:
        """Amplitude of the retrieved copy relative to the input envelope."""
        return (1.0 + self.h) * self.retrieve * self.store

    # retimed arguments -------------------------------------------------
    def t_z(self, z):
        return self.t1 + np.asarray(z) / self.c

    def big_t(self, z, t):
        return self.kappa * (self.v2 / self.v1) * (np.asarray(t) - self.t_c - (np.asarray(z) - self.z_c) / self.v2)

    def big_t3(self, z):
        return (self.v2 / self.v1) * (self.t3 - self.t1 - (np.asarray(z) - self.z_c) / self.v2)

    def big_t35(self, z, t):
        return (self.v2 / self.v1) * (
            np.asarray(t) - self.t1 + self.t3 - self.t5 - (np.asarray(z) - self.z_c) / self.v2
        )

    def stage(self, z, t):
        """Integer stage label 0..4 for each (z, t)."""
        z, t = np.broadcast_arrays(np.asarray(z, float), np.asarray(t, float))
        out = np.zeros(z.shape, dtype=int)
        out[t >= self.t_z(z)] = 1
        out[t >= self.t3] = 2
        out[t >= self.t4] = 3
        out[t >= self.t5] = 4
        return out

    def event_times(self) -> list[float]:
        return [t for t in (self.t1, self.t3, self.t5) if math.isfinite(t)]

    def check_window(self, z, t):
        z, t = np.asarray(z, float), np.asarray(t, float)
        lo, hi = self.t_window
        if np.any(z < 0) or np.any(z > self.l_s * (1 + 1e-12)) or np.any(t < lo) or np.any(t > hi):
            raise OutOfWindow("oracle queried outside the simulated (z, t) window")

    def kx(self, tau):
        return kx_shape(tau, self.gamma_plus, self.gamma_minus)

    def ky(self, tau):
        return ky_shape(tau, self.gamma_plus, self.gamma_minus)


class TransientPair(NamedTuple):
    quad: complex
    approx: complex


def _complex_quad(f, a: float, b: float, epsabs: float) -> complex:
    if b <= a:
        return 0j
    # roundoff-limited subintervals still meet epsabs; silence QUADPACK's notice
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        re = quad(lambda s: f(s).real, a, b, epsabs=epsabs, epsrel=1e-10, limit=200)[0]
        im = quad(lambda s: f(s).imag, a, b, epsabs=epsabs, epsrel=1e-10, limit=200)[0]
    return complex(re, im)


def _transient_integral(geo: StageSolution, z: float, t: float, t_event: float, rides_at_c: bool, source, epsabs):
    """alpha * int_0^z ky(t - t_ev(z') - (z - z')/V2) * source(z') dz'.

    ``t_ev(z') = t_event + z'/c`` when the event front rides at c, else t_event.
    """
    # kernel argument s(z') = s_at_z - (z - z') * slope
    slope = 1.0 / geo.v2 - (1.0 / geo.c if rides_at_c else 0.0)
    s_at_z = t - t_event - (z / geo.c if rides_at_c else 0.0)
    if s_at_z <= 0:
        return 0j
    s_max = _KERNEL_EFOLDS / geo.gamma_minus
    lo = max(0.0, z - s_at_z / slope)
    hi = min(z, z - max(s_at_z - s_max, 0.0) / slope)

    def integrand(zp):
        s = s_at_z - (z - zp) * slope
        return complex(geo.ky(s)) * source(zp)

    return geo.alpha * _complex_quad(integrand, lo, hi, epsabs)


def transient_phi(z: float, t: float, geo: StageSolution, envelope: PulseEnvelope) -> TransientPair:
    """Field correction after the control step: exact integral and two-term form."""
    eps = 1e-10 * envelope.peak / geo.alpha

    def source(zp):
        return complex(envelope(geo.t1 + zp / geo.c - zp / geo.v1))

    exact = geo.h * _transient_integral(geo, z, t, geo.t1, True, source, eps)
    tz = geo.t_z(z)
    approx = geo.eta * geo.h * (
        envelope(geo.big_t(z, t)) - geo.kx(t - tz) * envelope(tz - z / geo.v1)
    )
    return TransientPair(exact, complex(approx))


def split_transient_phi(z: float, t: float, geo: StageSolution, envelope: PulseEnvelope) -> TransientPair:
    """Field correction after the splitting rf pulse (subtracted from the field)."""
    eps = 1e-10 * envelope.peak / geo.alpha
    g = geo.split_kick

    def source(zp):
        return complex(envelope(geo.big_t3(zp)))

    exact = g * _transient_integral(geo, z, t, geo.t3, False, source, eps)
    approx = geo.eta * g * (envelope(geo.big_t(z, t)) - geo.kx(t - geo.t3) * envelope(geo.big_t3(z)))
    return TransientPair(exact, complex(approx))


def retrieval_field_integral(z: float, t: float, geo: StageSolution, envelope: PulseEnvelope) -> complex:
    """Retrieved field as the exact transient integral over the stored profile."""
    eps = 1e-10 * envelope.peak / geo.alpha

    def source(zp):
        return complex(envelope(geo.big_t3(zp)))

    return geo.retrieval_gain * _transient_integral(geo, z, t, geo.t5, False, source, eps)


def retrieval_field_approx(z, t, geo: StageSolution, envelope: PulseEnvelope):
    z, t = np.asarray(z, float), np.asarray(t, float)
    on = t >= geo.t5
    return geo.eta * geo.retrieval_gain * (
        envelope(geo.big_t35(z, t)) * on - envelope(geo.big_t3(z)) * geo.kx(t - geo.t5)
    )


def _field_approx(z, t, geo: StageSolution, envelope: PulseEnvelope):
    z, t = np.broadcast_arrays(np.asarray(z, float), np.asarray(t, float))
    st = geo.stage(z, t)
    out = np.zeros(z.shape, dtype=complex)

    m = st == 0
    out[m] = envelope(t[m] - z[m] / geo.v1)

    m = st == 1
    if np.any(m):
        zz, tt = z[m], t[m]
        tz = geo.t_z(zz)
        big = envelope(geo.big_t(zz, tt))
        out[m] = big * (1 + geo.eta * geo.h) - geo.eta * geo.h * geo.kx(tt - tz) * envelope(tz - zz / geo.v1)

    m = (st == 2) | (st == 3)
    if np.any(m):
        zz, tt = z[m], t[m]
        big = envelope(geo.big_t(zz, tt))
        g = geo.split_kick
        out[m] = (1 + geo.eta * geo.h - geo.eta * g) * big + geo.eta * g * geo.kx(tt - geo.t3) * envelope(
            geo.big_t3(zz)
        )

    m = st == 4
    if np.any(m):
        out[m] = retrieval_field_approx(z[m], t[m], geo, envelope)
    return out


def in_transient(z, t, geo: StageSolution, width: float | None = None):
    """True where (z, t) lies within ``width`` (default tau_gamma) after an event."""
    w = geo.tau_gamma if width is None else width
    z, t = np.broadcast_arrays(np.asarray(z, float), np.asarray(t, float))
    out = np.zeros(z.shape, dtype=bool)
    for start in (geo.t_z(z), np.full(z.shape, geo.t3), np.full(z.shape, geo.t5)):
        out |= (t >= start) & (t < start + w)
    return out


def oracle_field(z, t, geo: StageSolution, envelope: PulseEnvelope, exact_transients: bool = False):
    """Piecewise closed-form signal field at lab time ``t``.

    With ``exact_transients`` the points inside a transient window are computed
    from the exact transient integrals instead of the two-term forms.
    """
    geo.check_window(z, t)
    z_b, t_b = np.broadcast_arrays(np.asarray(z, float), np.asarray(t, float))
    scalar = z_b.ndim == 0
    z_b, t_b = np.atleast_1d(z_b), np.atleast_1d(t_b)
    out = _field_approx(z_b, t_b, geo, envelope)
    if exact_transients:
        st = geo.stage(z_b, t_b)
        idx = np.nonzero(in_transient(z_b, t_b, geo))
        for i in zip(*idx):
            zi, ti = float(z_b[i]), float(t_b[i])
            s = st[i]
            if s == 1:
                out[i] = complex(envelope(geo.big_t(zi, ti))) + transient_phi(zi, ti, geo, envelope).quad
            elif s in (2, 3):
                out[i] = (1 + geo.eta * geo.h) * complex(envelope(geo.big_t(zi, ti))) - split_transient_phi(
                    zi, ti, geo, envelope
                ).quad
            elif s == 4:
                out[i] = retrieval_field_integral(zi, ti, geo, envelope)
    return complex(out[0]) if scalar else out


def oracle_spinwave(z, t, geo: StageSolution, envelope: PulseEnvelope):
    """Closed-form (C_m, C_M) at lab time ``t``."""
    geo.check_window(z, t)
    z, t = np.broadcast_arrays(np.asarray(z, float), np.asarray(t, float))
    st = geo.stage(z, t)
    psi = _field_approx(z, t, geo, envelope)
    cm = np.zeros(z.shape, dtype=complex)
    cbm = np.zeros(z.shape, dtype=complex)
    om, om2 = geo.omega0, geo.omega_post

    m = st == 0
    cm[m] = -psi[m] / om

    m = st == 1
    if np.any(m):
        tz = geo.t_z(z[m])
        cm[m] = -(psi[m] + geo.h * geo.kx(t[m] - tz) * envelope(tz - z[m] / geo.v1)) / om2

    m = st >= 2
    if np.any(m):
        before = -envelope(geo.big_t3(z[m])) / om  # C_m just ahead of the splitting pulse
        cbm[m] = geo.store * before

    m = (st == 2) | (st == 3)
    if np.any(m):
        g = geo.split_kick
        cm[m] = (-psi[m] + g * geo.kx(t[m] - geo.t3) * envelope(geo.big_t3(z[m]))) / om2

    m = st == 4
    if np.any(m):
        kicked = geo.retrieve * cbm[m]
        cm[m] = -psi[m] / om2 + kicked * geo.kx(t[m] - geo.t5)
        cbm[m] = geo.retrieve_cos * cbm[m]

    if cm.ndim == 0:
        return complex(cm), complex(cbm)
    return cm, cbm
