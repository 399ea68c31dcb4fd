"""Input signal envelopes Psi0(t) at the sample entrance."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

SHAPES = ("gaussian", "sech", "samples")
_SECH_HALF = math.acosh(2.0)  # sech(x) = 1/2


@dataclass(frozen=True)
class PulseEnvelope:
    shape: str = "gaussian"
    psi_max: float = 0.05
    t_center: float = 0.0
    t_p1: float = 1.0
    # only for shape="samples": sample times and complex values, zero outside
    sample_t: tuple = field(default=(), compare=True)
    sample_v: tuple = field(default=(), compare=True)

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValidationError(f"unknown pulse shape {self.shape!r}; expected one of {SHAPES}")
        if self.shape == "samples":
            if len(self.sample_t) < 2 or len(self.sample_t) != len(self.sample_v):
                raise ValidationError("sampled pulse needs >= 2 matching times and values")
            if np.any(np.diff(np.asarray(self.sample_t, dtype=float)) <= 0):
                raise ValidationError("sample times must be strictly increasing")
        elif not (self.t_p1 > 0 and math.isfinite(self.t_p1)):
            raise ValidationError(f"pulse FWHM must be positive, got {self.t_p1!r}")

    @property
    def bandwidth(self) -> float:
        """Spectral width Delta_Psi, taken as 1 / t_p1."""
        return 1.0 / self.t_p1

    @property
    def peak(self) -> float:
        if self.shape == "samples":
            return float(np.max(np.abs(self.sample_v)))
        return abs(self.psi_max)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.shape == "gaussian":
            u = (t - self.t_center) / self.t_p1
            return self.psi_max * np.exp(-4.0 * math.log(2.0) * u * u) + 0j
        if self.shape == "sech":
            x = 2.0 * _SECH_HALF * (t - self.t_center) / self.t_p1
            return self.psi_max / np.cosh(np.clip(x, -700, 700)) + 0j
        st = np.asarray(self.sample_t, dtype=float)
        sv = np.asarray(self.sample_v, dtype=complex)
        re = np.interp(t, st, sv.real, left=0.0, right=0.0)
        im = np.interp(t, st, sv.imag, left=0.0, right=0.0)
        return re + 1j * im

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        if self.shape == "gaussian":
            k = 8.0 * math.log(2.0) / self.t_p1**2
            return -k * (t - self.t_center) * self(t)
        if self.shape == "sech":
            a = 2.0 * _SECH_HALF / self.t_p1
            x = np.clip(a * (t - self.t_center), -700, 700)
            return -a * np.tanh(x) * self(t)
        eps = 1e-6 * max(1.0, float(np.ptp(self.sample_t)))
        return (self(t + eps) - self(t - eps)) / (2 * eps)
