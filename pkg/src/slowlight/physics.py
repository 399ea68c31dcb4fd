"""Physical parameters, derived rates and transient kernels.

Units are dimensionless with the initial control Rabi frequency setting the
frequency scale (``omega0 = 1`` in every preset).  Lengths are whatever unit
makes ``alpha`` a frequency per length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AdiabaticityViolated,
    ComplexRates,
    EitConditionViolated,
    RfRegimeViolated,
    ValidationError,
    ZeroControlField,
)

SQRT2 = math.sqrt(2.0)
H_DOUBLE_INTENSITY = SQRT2 - 1.0

# Settling time in units of the slow transient decay time 1/gamma_minus.
SETTLING_EFOLDS = 5.0
# Relative gap below which the two decay rates are treated as degenerate.
_DEGENERATE_RTOL = 1e-8


@dataclass(frozen=True)
class PhysicalParams:
    gamma: float = 4.0
    omega0: float = 1.0
    alpha: float = 100.0
    c: float = 1.0e4
    h: float = H_DOUBLE_INTENSITY
    p_rf: float = 50.0
    tau_rf: float = math.pi / 200.0

    @property
    def omega_post(self) -> float:
        """Control amplitude after the step, (1 + h) * omega0."""
        return (1.0 + self.h) * self.omega0


@dataclass(frozen=True)
class DerivedRates:
    gamma_plus: float
    gamma_minus: float
    delta_t: float
    v1: float
    v2: float
    tau_gamma: float

    @classmethod
    def from_params(cls, p: PhysicalParams) -> "DerivedRates":
        gp, gm = damping_rates(p.gamma, p.omega_post)
        return cls(
            gamma_plus=gp,
            gamma_minus=gm,
            delta_t=transparency_width(p.omega0, p.gamma),
            v1=group_velocity(p.omega0, p.alpha, p.c),
            v2=group_velocity(p.omega_post, p.alpha, p.c),
            tau_gamma=SETTLING_EFOLDS / gm,
        )


def transparency_width(omega, gamma):
    """Width of the EIT window, 2 omega^2 / gamma."""
    return 2.0 * omega**2 / gamma


def group_velocity(omega: float, alpha: float, c: float) -> float:
    if omega == 0:
        raise ZeroControlField("group velocity undefined for a zero control field")
    return 1.0 / (1.0 / c + alpha / omega**2)


def damping_rates(gamma: float, omega_eff: float) -> tuple[float, float]:
    """Decay rates of the optical transient under a control amplitude ``omega_eff``.

    They are the roots of s^2 - gamma s + omega_eff^2, so for the intensity
    doubling step (omega_eff = sqrt(2) omega0) the discriminant reads
    gamma^2/4 - 2 omega0^2.
    """
    disc = gamma * gamma / 4.0 - omega_eff * omega_eff
    if disc < 0:
        raise ComplexRates(
            f"underdamped transient: gamma^2/4 - omega_eff^2 = {disc:.6g} < 0"
        )
    root = math.sqrt(disc)
    gp = gamma / 2.0 + root
    # product form avoids cancellation when omega_eff << gamma
    gm = omega_eff * omega_eff / gp
    return gp, gm


def _is_degenerate(gp: float, gm: float) -> bool:
    return (gp - gm) <= _DEGENERATE_RTOL * (gp + gm)


def kx_shape(tau, gamma_plus: float, gamma_minus: float):
    """Unit-amplitude spin-wave transient, equal to 1 at tau = 0 and 0 for tau < 0."""
    tau = np.asarray(tau, dtype=float)
    t = np.where(tau >= 0, tau, 0.0)
    if _is_degenerate(gamma_plus, gamma_minus):
        g = 0.5 * (gamma_plus + gamma_minus)
        val = (1.0 + g * t) * np.exp(-g * t)
    else:
        val = (gamma_plus * np.exp(-gamma_minus * t) - gamma_minus * np.exp(-gamma_plus * t)) / (
            gamma_plus - gamma_minus
        )
    return np.where(tau >= 0, val, 0.0)


def ky_shape(tau, gamma_plus: float, gamma_minus: float):
    """Unit-slope optical transient, 0 at tau = 0 with derivative 1."""
    tau = np.asarray(tau, dtype=float)
    t = np.where(tau >= 0, tau, 0.0)
    if _is_degenerate(gamma_plus, gamma_minus):
        g = 0.5 * (gamma_plus + gamma_minus)
        val = t * np.exp(-g * t)
    else:
        # expm1 keeps precision for small tau
        val = np.exp(-gamma_minus * t) * -np.expm1(-(gamma_plus - gamma_minus) * t) / (
            gamma_plus - gamma_minus
        )
    return np.where(tau >= 0, val, 0.0)


def kernel_kx(tau, rates: DerivedRates, h: float):
    return h * kx_shape(tau, rates.gamma_plus, rates.gamma_minus)


def kernel_ky(tau, rates: DerivedRates, h: float):
    return h * ky_shape(tau, rates.gamma_plus, rates.gamma_minus)


def mixing_angles(psi, omega: float, stage: str = "pre", step_factor: float = SQRT2):
    """Dark-state mixing angle for a signal amplitude ``psi``.

    ``stage="pre"`` gives atan(psi/omega); ``stage="post"`` uses the stepped
    control amplitude ``step_factor * omega``.  Complex amplitudes contribute
    through their modulus.
    """
    if omega <= 0:
        raise ZeroControlField("mixing angle needs a nonzero control field")
    if stage not in ("pre", "post"):
        raise ValueError(f"stage must be 'pre' or 'post', got {stage!r}")
    psi = np.asarray(psi)
    amp = np.abs(psi) if np.iscomplexobj(psi) else psi
    scale = omega if stage == "pre" else step_factor * omega
    return np.arctan(amp / scale)


def validate_params(
    p: PhysicalParams,
    pulse_bandwidth: float,
    adiabatic_margin: float = 0.1,
    rf_ratio: float = 50.0,
    rf_duration: float = 0.02,
) -> PhysicalParams:
    """Return ``p`` unchanged if it sits inside the regime the protocol assumes."""
    for name in ("gamma", "omega0", "alpha", "c", "p_rf", "tau_rf"):
        v = getattr(p, name)
        if not math.isfinite(v) or v <= 0:
            raise ValidationError(f"{name} must be finite and positive, got {v!r}")
    if not math.isfinite(p.h) or p.h <= -1.0:
        raise ValidationError(f"h must be finite and > -1, got {p.h!r}")
    if not math.isfinite(pulse_bandwidth) or pulse_bandwidth < 0:
        raise ValidationError(f"pulse bandwidth must be finite and >= 0, got {pulse_bandwidth!r}")

    if p.gamma <= 2.0 * SQRT2 * p.omega0:
        raise EitConditionViolated(
            f"EIT condition gamma > 2*sqrt(2)*omega0 violated: "
            f"gamma = {p.gamma:g}, 2*sqrt(2)*omega0 = {2 * SQRT2 * p.omega0:g}"
        )
    if p.gamma * p.gamma / 4.0 < p.omega_post**2:
        raise EitConditionViolated(
            f"stepped control (1+h)*omega0 = {p.omega_post:g} makes the transient underdamped"
        )
    delta_t = transparency_width(p.omega0, p.gamma)
    if pulse_bandwidth > adiabatic_margin * delta_t:
        raise AdiabaticityViolated(
            f"pulse bandwidth {pulse_bandwidth:g} exceeds {adiabatic_margin:g} * "
            f"transparency width {delta_t:g}"
        )
    if p.p_rf < rf_ratio * p.omega0:
        raise RfRegimeViolated(f"p_rf = {p.p_rf:g} < {rf_ratio:g} * omega0")
    if p.tau_rf * p.omega0 > rf_duration:
        raise RfRegimeViolated(f"tau_rf * omega0 = {p.tau_rf * p.omega0:g} > {rf_duration:g}")
    return p
