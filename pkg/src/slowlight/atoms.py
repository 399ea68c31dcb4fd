"""Single-atom amplitude dynamics in the linear-response regime (C_g = 1).

The optical pair X = C_m, Y = i C_e obeys

    dX/dt = Omega Y
    dY/dt = -gamma Y - Omega X - Psi

and the rf pulse rotates (C_m, C_M) while the optical fields are ignored.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numba
import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .errors import StepTooLarge, ZeroControlField

# Fraction of the fast decay time allowed per step.
MAX_STEP_FRACTION = 0.1


@dataclass(frozen=True)
class AtomicState:
    x: complex = 0j
    y: complex = 0j
    c_big_m: complex = 0j

    def norm2(self) -> float:
        return abs(self.x) ** 2 + abs(self.y) ** 2 + abs(self.c_big_m) ** 2


@numba.njit(cache=True)
def trapezoid_coeffs(omega, gamma, dt):
    """Crank-Nicolson update (x, y) <- A (x, y) + b * psi_mid for the optical pair."""
    hs = 0.5 * dt
    inv = 1.0 / (1.0 + hs * gamma + hs * hs * omega * omega)
    p = 1.0 - hs * gamma
    a00 = ((1.0 + hs * gamma) - hs * hs * omega * omega) * inv
    a01 = (hs * omega * (1.0 + hs * gamma) + hs * omega * p) * inv
    a10 = (-hs * omega - hs * omega) * inv
    a11 = (p - hs * hs * omega * omega) * inv
    b0 = -dt * hs * omega * inv
    b1 = -dt * inv
    return a00, a01, a10, a11, b0, b1


@numba.njit(cache=True)
def trapezoid_step(x, y, psi_mid, omega, gamma, dt):
    """One Crank-Nicolson step of the optical pair with midpoint-sampled drive."""
    a00, a01, a10, a11, b0, b1 = trapezoid_coeffs(omega, gamma, dt)
    return a00 * x + a01 * y + b0 * psi_mid, a10 * x + a11 * y + b1 * psi_mid


def fast_rate(omega: float, gamma: float) -> float:
    """Largest decay (or oscillation) rate of the optical pair at control ``omega``."""
    disc = gamma * gamma / 4.0 - omega * omega
    if disc >= 0:
        return gamma / 2.0 + math.sqrt(disc)
    return math.hypot(gamma / 2.0, math.sqrt(-disc))


def max_step(omega: float, gamma: float) -> float:
    return MAX_STEP_FRACTION / fast_rate(omega, gamma)


def step_optical(
    state: AtomicState, psi: complex, omega: float, dt: float, gamma: float
) -> AtomicState:
    """Advance (x, y) by ``dt``; ``psi`` and ``omega`` are midpoint samples."""
    limit = max_step(omega, gamma)
    if dt > limit * (1.0 + 1e-12):
        raise StepTooLarge(f"dt = {dt:g} exceeds 0.1/gamma_plus = {limit:g}")
    x1, y1 = trapezoid_step(complex(state.x), complex(state.y), complex(psi), omega, gamma, dt)
    return replace(state, x=x1, y=y1)


def exact_step(
    state: AtomicState, psi: complex, omega: float, dt: float, gamma: float
) -> AtomicState:
    """Matrix-exponential solution over ``dt`` for constant ``psi`` and ``omega``.

    Used as the reference for :func:`step_optical`; no step-size limit.
    """
    a = np.array(
        [[0.0, omega, 0.0], [-omega, -gamma, -1.0], [0.0, 0.0, 0.0]], dtype=complex
    )
    v = np.array([state.x, state.y, psi], dtype=complex)
    out = expm(a * dt) @ v
    return replace(state, x=complex(out[0]), y=complex(out[1]))


def adiabatic_state(psi: complex, psi_dot: complex, omega: float) -> AtomicState:
    """Leading-order dark-state-following amplitudes."""
    if omega == 0:
        raise ZeroControlField("adiabatic state needs a nonzero control field")
    return AtomicState(x=-psi / omega, y=-psi_dot / omega**2, c_big_m=0j)


def rf_matrix(area: float, phase: float = 0.0) -> np.ndarray:
    """Unitary acting on the column (C_m, C_M) for a pulse of area P * duration."""
    c, s = math.cos(area), math.sin(area)
    return np.array(
        [[c, 1j * cmath.exp(1j * phase) * s], [1j * cmath.exp(-1j * phase) * s, c]]
    )


def rf_rotation(state: AtomicState, area: float, phase: float = 0.0) -> AtomicState:
    u = rf_matrix(area, phase)
    cm = u[0, 0] * state.x + u[0, 1] * state.c_big_m
    cbm = u[1, 0] * state.x + u[1, 1] * state.c_big_m
    return replace(state, x=complex(cm), c_big_m=complex(cbm))


def integrate_rf(
    state: AtomicState, p_rf: float, duration: float, phase: float = 0.0, rtol: float = 1e-11
) -> AtomicState:
    """Integrate the finite-duration rf equations with the control coupling off."""
    coupling = 1j * p_rf

    def rhs(_t, v):
        cm = v[0] + 1j * v[1]
        cbm = v[2] + 1j * v[3]
        dcm = coupling * cmath.exp(1j * phase) * cbm
        dcbm = coupling * cmath.exp(-1j * phase) * cm
        return [dcm.real, dcm.imag, dcbm.real, dcbm.imag]

    v0 = [state.x.real, state.x.imag, state.c_big_m.real, state.c_big_m.imag]
    sol = solve_ivp(rhs, (0.0, duration), v0, method="DOP853", rtol=rtol, atol=rtol * 1e-3)
    v = sol.y[:, -1]
    return replace(state, x=complex(v[0], v[1]), c_big_m=complex(v[2], v[3]))
