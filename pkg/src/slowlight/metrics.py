"""Pulse observables: peak trajectories, widths, shape distances, broadening."""

from __future__ import annotations

import math

import numpy as np
from scipy.ndimage import gaussian_filter1d

from .errors import EmptySignal, NoPeak, NotUnimodal

FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


def _parabolic_peak(y: np.ndarray, i: int) -> float:
    """Sub-sample offset of the vertex through samples i-1, i, i+1."""
    if i <= 0 or i >= len(y) - 1:
        return 0.0
    a, b, c = y[i - 1], y[i], y[i + 1]
    denom = a - 2.0 * b + c
    if denom >= 0:
        return 0.0
    return 0.5 * (a - c) / denom


def peak_trajectory(history, tau_window=None, z_window=None, floor: float = 1e-12):
    """Lab time of max |Psi| for each stored z-slice.

    Returns ``(z, t_peak)`` arrays.  ``tau_window`` restricts the search in
    retarded time; ``z_window`` selects slices.
    """
    amp = np.abs(history.psi)
    tau = history.tau
    t_mask = np.ones(tau.shape, dtype=bool)
    if tau_window is not None:
        t_mask = (tau >= tau_window[0]) & (tau <= tau_window[1])
    z_sel = np.arange(len(history.z))
    if z_window is not None:
        z_sel = z_sel[(history.z >= z_window[0]) & (history.z <= z_window[1])]
    global_peak = float(amp[np.ix_(z_sel, np.nonzero(t_mask)[0])].max()) if len(z_sel) else 0.0
    if global_peak == 0.0:
        raise NoPeak("field is identically zero in the requested window")
    idx_t = np.nonzero(t_mask)[0]
    dtau = tau[1] - tau[0]
    zs, ts = [], []
    for iz in z_sel:
        row = amp[iz, idx_t]
        j = int(np.argmax(row))
        if row[j] < floor * global_peak:
            raise NoPeak(f"no field above {floor:g} of the peak at z = {history.z[iz]:g}")
        t_peak = tau[idx_t[j]] + _parabolic_peak(row, j) * dtau
        zs.append(history.z[iz])
        ts.append(t_peak + history.z[iz] / history.c)
    return np.asarray(zs), np.asarray(ts)


def fitted_velocity(z, t_peak) -> float:
    """Least-squares velocity from a peak trajectory, fitting t = z / v + t0."""
    z = np.asarray(z, float)
    t_peak = np.asarray(t_peak, float)
    if len(z) < 2:
        raise NoPeak("need at least two trajectory points to fit a velocity")
    slope, _ = np.polyfit(z, t_peak, 1)
    return 1.0 / slope


def fwhm(signal, spacing: float = 1.0) -> float:
    """Full width at half maximum of a unimodal profile, linear interpolation at the crossings."""
    y = np.abs(np.asarray(signal))
    if y.size == 0 or not np.any(y > 0):
        raise NoPeak("profile has no positive samples")
    half = 0.5 * y.max()
    above = y >= half
    edges = np.diff(above.astype(int))
    starts = np.nonzero(edges == 1)[0]
    stops = np.nonzero(edges == -1)[0]
    n_segments = len(starts) + (1 if above[0] else 0)
    if n_segments != 1:
        raise NotUnimodal(f"{n_segments} separate segments above half maximum")
    i0 = 0 if above[0] else starts[0] + 1
    i1 = len(y) - 1 if above[-1] else stops[0]

    def cross(lo, hi):
        # position between samples lo (below) and hi (above) where y = half
        return lo + (half - y[lo]) / (y[hi] - y[lo]) * (hi - lo)

    left = cross(i0 - 1, i0) if i0 > 0 else 0.0
    right = cross(i1 + 1, i1) if i1 < len(y) - 1 else float(len(y) - 1)
    return (right - left) * spacing


def spatial_length(spin_profile, dz: float) -> float:
    """Spatial FWHM of a spin-wave (or field) profile along z."""
    return fwhm(spin_profile, dz)


def best_shift(a, b) -> int:
    """Circular lag k maximising |sum a * conj(roll(b, k))|."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    corr = np.fft.ifft(np.fft.fft(a) * np.conj(np.fft.fft(b)))
    k = int(np.argmax(np.abs(corr)))
    return k if k <= len(a) // 2 else k - len(a)


def l2_distance(a, b, align: bool = True) -> tuple[float, int]:
    """Normalised L2 distance ||a - b|| / max(||a||, ||b||) and the lag applied to ``b``.

    Alignment picks the circular lag with the largest correlation magnitude,
    so an inverted copy stays at distance 2 instead of being shifted away.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError("envelopes must share a grid")
    scale = max(np.linalg.norm(a), np.linalg.norm(b))
    if scale == 0:
        raise EmptySignal("both envelopes are zero")
    k = best_shift(a, b) if align else 0
    return float(np.linalg.norm(a - np.roll(b, k)) / scale), k


def correlation_sign(a, b, shift: int = 0) -> int:
    """Sign of Re <a, roll(b, shift)>."""
    c = np.vdot(np.roll(np.asarray(b, dtype=complex), shift), np.asarray(a, dtype=complex)).real
    return 1 if c > 0 else -1 if c < 0 else 0


def gaussian_broaden(envelope, sigma: float, spacing: float = 1.0):
    """Convolve with a unit-area Gaussian of standard deviation ``sigma``."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    env = np.asarray(envelope)
    if sigma == 0:
        return env.copy()
    s = sigma / spacing
    if np.iscomplexobj(env):
        return gaussian_filter1d(env.real, s, mode="nearest", truncate=8.0) + 1j * gaussian_filter1d(
            env.imag, s, mode="nearest", truncate=8.0
        )
    return gaussian_filter1d(env.astype(float), s, mode="nearest", truncate=8.0)
