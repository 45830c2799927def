"""Probe model: a spectrum, a control family and the parameter being estimated.

This is the glue that turns ``(x, t)`` into attenuation values for the
Fisher scans and for the Bayesian likelihood.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline

from . import attenuation as att
from .control import CPMG, CW, FID, ZENO, ControlSequence, normalize_kind
from .spectra import OhmicSpectrum, OrnsteinUhlenbeckSpectrum, PowerLawAttenuationModel

__all__ = ["ProbeModel", "PowerLawProbe", "BACKENDS"]

BACKENDS = ("auto", "exact", "quadrature", "closed", "flat")


@dataclass(frozen=True)
class ProbeModel:
    """Attenuation model ``(x, t) -> J`` for one control family.

    ``backend`` selects the route:

    * ``exact``: time-domain closed form (beta=2 Lorentzian only)
    * ``quadrature``: adaptive quadrature of filter times spectrum
    * ``closed``: comb / Zeno / free-evolution closed forms
    * ``flat``: lineshape-free ``g^2 t^2 / 2N`` (FID and Zeno)
    * ``auto``: exact when available, otherwise quadrature
    """

    spectrum: object
    kind: str
    n: int = 1
    target: str = "tau_c"
    backend: str = "auto"
    _table: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", normalize_kind(self.kind))
        if self.kind == FID:
            object.__setattr__(self, "n", 1)
        if self.target not in att.TARGETS:
            raise ValueError(f"target must be one of {att.TARGETS}, got {self.target!r}")
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        if self.resolved_backend == "exact" and not self._lorentzian:
            raise ValueError("exact backend needs a beta=2 Ornstein-Uhlenbeck spectrum")
        if self.kind == CW and self.resolved_backend == "exact":
            raise ValueError("exact time-domain backend covers FID, CPMG and Zeno only")

    @property
    def _lorentzian(self):
        return isinstance(self.spectrum, OrnsteinUhlenbeckSpectrum) and self.spectrum.beta == 2

    @property
    def resolved_backend(self):
        if self.backend != "auto":
            return self.backend
        if self._lorentzian and self.kind != CW:
            return "exact"
        return "quadrature"

    @property
    def x_value(self):
        return getattr(self.spectrum, self.target)

    @property
    def alpha(self):
        """Homogeneity degree of J in the target parameter."""
        return 2.0 if self.target == "g" else float(self.spectrum.alpha)

    def with_x(self, x):
        return replace(self, spectrum=self.spectrum.with_params(**{self.target: float(x)}), _table={})

    def sequence(self, t):
        return ControlSequence(self.kind, t, self.n)

    def result(self, t):
        """AttenuationResult at the model's own parameter value."""
        seq = self.sequence(t)
        b = self.resolved_backend
        if b == "exact":
            return att.attenuation_lorentzian_exact(self.spectrum, seq, self.target)
        if b == "quadrature":
            return att.attenuation_quadrature(self.spectrum, seq, self.target)
        if b == "flat":
            return self._flat(seq)
        return att.closed_form(self.spectrum, seq, self.target)

    def _flat(self, seq):
        if seq.kind not in (FID, ZENO):
            raise ValueError("flat backend applies to FID and Zeno control only")
        res = att.attenuation_zeno(self.spectrum.g, self.spectrum.tau_c, seq.n, seq.t, self.target)
        return att.AttenuationResult(res.J, res.dJ_dx, self.target, "flat", res.valid)

    # --- vectorized evaluation over parameter grids ---------------------------

    def attenuation_values(self, xs, t):
        """J at parameter values ``xs`` (array) and a single time ``t``."""
        xs = np.asarray(xs, dtype=float)
        sp = self.spectrum
        g = xs if self.target == "g" else sp.g
        tau = xs if self.target == "tau_c" else sp.tau_c
        b = self.resolved_backend
        if b == "exact":
            return np.broadcast_to(att.lorentzian_exact_J(g, tau, self.kind, self.n, t), xs.shape).copy()
        if b == "flat" or (b == "closed" and self.kind in (FID, ZENO)):
            return np.broadcast_to(g ** 2 * t * t / (2.0 * self.n), xs.shape).copy()
        if b == "closed":
            return self._closed_values(g, tau, t, xs.shape)
        # quadrature: J = g^2 tau^2 Jhat(t / tau) for every family here
        return g ** 2 * tau ** 2 * self._scaled(t / tau)

    def _closed_values(self, g, tau, t, shape):
        sp, n = self.spectrum, self.n
        if isinstance(sp, OrnsteinUhlenbeckSpectrum):
            c = att.c_beta(sp.beta, self.kind)
            out = c * g ** 2 * t ** (sp.beta + 1) / (n ** sp.beta * np.asarray(tau, float) ** (sp.beta - 1))
            return np.broadcast_to(out, shape).copy()
        if isinstance(sp, OhmicSpectrum):
            taus = np.broadcast_to(np.asarray(tau, float), shape)
            gs = np.broadcast_to(np.asarray(g, float), shape)
            out = np.empty(shape)
            for i, (gi, ti) in enumerate(zip(gs.ravel(), taus.ravel())):
                out.flat[i] = att.attenuation_comb_ohmic(gi, ti, sp.s, n, t, self.kind).J
            return out
        raise TypeError(f"unsupported spectrum {type(sp).__name__}")

    def _scaled(self, u):
        """Dimensionless attenuation Jhat(u) = J(g=1, tau_c=1, t=u), tabulated on demand."""
        u = np.asarray(u, dtype=float)
        lo, hi = float(u.min()), float(u.max())
        spline = self._table.get("spline")
        if spline is None or lo < self._table["lo"] or hi > self._table["hi"]:
            lo2 = min(lo, self._table.get("lo", lo)) / 2.0
            hi2 = max(hi, self._table.get("hi", hi)) * 2.0
            grid = np.geomspace(lo2, hi2, max(64, int(48 * math.log10(hi2 / lo2))))
            unit = self.spectrum.with_params(g=1.0, tau_c=1.0)
            vals = np.array([att.attenuation_quadrature(unit, self.sequence(v), "g").J for v in grid])
            spline = CubicSpline(np.log(grid), np.log(vals))
            self._table.update(spline=spline, lo=lo2, hi=hi2)
        return np.exp(spline(np.log(u)))


@dataclass(frozen=True)
class PowerLawProbe:
    """Estimation of the exponent of ``J = (t/T2)^gamma``; the bound is eps1 instead of eps0/alpha."""

    law: PowerLawAttenuationModel
    target: str = "gamma"
    kind: str = "powerlaw"
    n: int = 1

    @property
    def x_value(self):
        return self.law.gamma

    @property
    def alpha(self):
        return math.nan

    def with_x(self, x):
        return replace(self, law=replace(self.law, gamma=float(x)))

    def result(self, t):
        J = float(self.law(t))
        return att.AttenuationResult(J, float(self.law.d_dgamma(t)), "gamma", "closed", True)

    def attenuation_values(self, xs, t):
        return (t / self.law.T2) ** np.asarray(xs, dtype=float)

    def ultimate_bound(self, n_measurements=1):
        from .fisher import bound_constants

        return bound_constants().eps1 / math.sqrt(n_measurements)
