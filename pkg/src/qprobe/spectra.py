"""Parametric bath coupling spectra G(omega) = g**2 * S(omega).

Units are fixed project-wide: angular frequencies and couplings in MHz,
times in microseconds, so ``g * tau_c`` is dimensionless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "OrnsteinUhlenbeckSpectrum",
    "OhmicSpectrum",
    "PowerLawAttenuationModel",
    "eval_ou",
    "eval_ohmic",
    "d_dtau",
    "powerlaw_attenuation",
    "ou_normalization",
]


def ou_normalization(beta):
    """Normalization constant ``beta/(2 pi) * sin(pi/beta)`` of the OU lineshape."""
    return beta / (2.0 * math.pi) * math.sin(math.pi / beta)


@dataclass(frozen=True)
class OrnsteinUhlenbeckSpectrum:
    """Generalized Ornstein-Uhlenbeck spectrum ``g^2 A tau / (1 + (omega tau)^beta)``.

    ``beta`` must be an even integer >= 2; ``beta = 2`` is the Lorentzian.
    """

    g: float
    tau_c: float
    beta: int = 2

    def __post_init__(self):
        if not (self.g > 0 and math.isfinite(self.g)):
            raise ValueError(f"coupling g must be positive, got {self.g!r}")
        if not (self.tau_c > 0 and math.isfinite(self.tau_c)):
            raise ValueError(f"tau_c must be positive, got {self.tau_c!r}")
        beta = self.beta
        if isinstance(beta, float) and beta.is_integer():
            beta = int(beta)
            object.__setattr__(self, "beta", beta)
        if not isinstance(beta, (int, np.integer)) or isinstance(beta, bool) or beta < 2 or beta % 2:
            raise ValueError(f"beta must be an even integer >= 2, got {self.beta!r}")

    family = "ou"

    @property
    def alpha(self):
        """Homogeneity degree in tau_c of the high-frequency tail."""
        return self.beta - 1

    @property
    def two_sided(self):
        return True

    def with_params(self, **kw):
        return replace(self, **kw)

    def lineshape(self, omega):
        """Normalized lineshape S(omega), integrating to one over the real line."""
        omega = np.asarray(omega, dtype=float)
        x = np.abs(omega * self.tau_c) ** self.beta
        return ou_normalization(self.beta) * self.tau_c / (1.0 + x)

    def __call__(self, omega):
        return self.g ** 2 * self.lineshape(omega)

    def d_dtau(self, omega):
        omega = np.asarray(omega, dtype=float)
        x = np.abs(omega * self.tau_c) ** self.beta
        pref = ou_normalization(self.beta) * self.g ** 2 / (1.0 + x)
        return pref * (1.0 - self.beta * x / (1.0 + x))

    def breakpoints(self):
        """Frequencies where the spectrum changes character."""
        return [1.0 / self.tau_c]


@dataclass(frozen=True)
class OhmicSpectrum:
    """Generalized Ohmic spectrum ``g^2 (s+1) omega_c^-(s+1) omega^s`` on ``(0, omega_c)``.

    The support is the open interval, so the spectrum vanishes exactly at
    ``omega = 0`` and at the cutoff ``omega_c = 1/tau_c``.
    """

    g: float
    tau_c: float
    s: float = 1.0

    def __post_init__(self):
        if not (self.g > 0 and math.isfinite(self.g)):
            raise ValueError(f"coupling g must be positive, got {self.g!r}")
        if not (self.tau_c > 0 and math.isfinite(self.tau_c)):
            raise ValueError(f"tau_c must be positive, got {self.tau_c!r}")
        if not (self.s > 0 and math.isfinite(self.s)):
            raise ValueError(f"Ohmic exponent s must be positive, got {self.s!r}")

    family = "ohmic"

    @property
    def alpha(self):
        return self.s + 1.0

    @property
    def omega_c(self):
        return 1.0 / self.tau_c

    @property
    def two_sided(self):
        return False

    def with_params(self, **kw):
        return replace(self, **kw)

    def lineshape(self, omega):
        omega = np.asarray(omega, dtype=float)
        inside = (omega > 0) & (omega < self.omega_c)
        w = np.where(inside, omega, 0.0)
        return np.where(inside, (self.s + 1.0) * self.tau_c ** (self.s + 1.0) * w ** self.s, 0.0)

    def __call__(self, omega):
        return self.g ** 2 * self.lineshape(omega)

    def d_dtau(self, omega):
        return (self.s + 1.0) * self(omega) / self.tau_c

    def edge_value(self):
        """Spectral density just below the cutoff."""
        return self.g ** 2 * (self.s + 1.0) * self.tau_c

    def breakpoints(self):
        return [self.omega_c]


@dataclass(frozen=True)
class PowerLawAttenuationModel:
    """Attenuation ``(t/T2)**gamma`` of a probe confined to a power-law region."""

    T2: float
    gamma: float

    def __post_init__(self):
        if not self.T2 > 0:
            raise ValueError(f"T2 must be positive, got {self.T2!r}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")

    def __call__(self, t):
        return powerlaw_attenuation(self, t)

    def d_dgamma(self, t):
        """Derivative of the attenuation with respect to the exponent."""
        t = np.asarray(t, dtype=float)
        ratio = t / self.T2
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(ratio > 0, ratio ** self.gamma * np.log(np.where(ratio > 0, ratio, 1.0)), 0.0)
        return out[()] if out.ndim == 0 else out


def eval_ou(spec, omega):
    return spec(omega)


def eval_ohmic(spec, omega):
    return spec(omega)


def d_dtau(spec, omega):
    """Analytic derivative of the spectrum with respect to tau_c."""
    return spec.d_dtau(omega)


def powerlaw_attenuation(model, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be non-negative")
    out = (t / model.T2) ** model.gamma
    return out[()] if out.ndim == 0 else out
