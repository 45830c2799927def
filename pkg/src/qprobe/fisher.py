"""Quantum Fisher information, Cramer-Rao errors and optimal measurement times."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .attenuation import AttenuationResult, c_beta
from .control import CPMG, CW, normalize_kind
from .quadrature import golden_section_max
from .special import lambert_w0

__all__ = [
    "lambert_w0",
    "BoundConstants",
    "bound_constants",
    "error_factor",
    "qfi",
    "classical_fisher",
    "relative_error",
    "ultimate_bound",
    "t_opt_zeno",
    "zeno_n_condition",
    "t_opt_beta",
    "beta_n_condition",
    "c_s_single",
    "t_opt_ohmic",
    "ohmic_n_condition",
    "t_opt_powerlaw",
    "PrecisionReport",
    "FlatObjectiveError",
    "maximize_qfi_numeric",
    "maximize_qfi_per_time",
    "optimal_control",
    "fid_time_range",
    "minimal_error",
]


class BoundConstants(NamedTuple):
    J0: float
    eps0: float
    J1: float
    eps1: float


def error_factor(J):
    """``sqrt(1 - e^-2J) / (J e^-J)``: relative error times alpha at equality."""
    J = np.asarray(J, dtype=float)
    return np.sqrt(-np.expm1(-2.0 * J)) / (J * np.exp(-J))


def _exponent_error_factor(J):
    return math.sqrt(-math.expm1(-2.0 * J)) / (J * abs(math.log(J)) * math.exp(-J))


@lru_cache(maxsize=None)
def bound_constants():
    """Optimal attenuations and error floors for homogeneous and exponent estimation.

    ``J0`` minimizes :func:`error_factor` and is ``1 + W0(-2/e^2)/2``.
    ``J1`` minimizes the exponent-estimation factor on (0, 1); it is found
    numerically.
    """
    J0 = 1.0 + 0.5 * lambert_w0(-2.0 * math.exp(-2.0))
    eps0 = float(error_factor(J0))
    y, _ = golden_section_max(lambda v: -_exponent_error_factor(math.exp(v)), -8.0, -1e-3, xtol=1e-14)
    J1 = math.exp(y)
    return BoundConstants(J0, eps0, J1, _exponent_error_factor(J1))


def qfi(result):
    """Fisher information per measurement, ``(dJ/dx)^2 / (e^{2J} - 1)``.

    Returns ``inf`` when J = 0 but the derivative is not.
    """
    J, dJ = float(result.J), float(result.dJ_dx)
    if J < 0:
        raise ValueError("attenuation must be non-negative")
    if dJ == 0.0:
        return 0.0
    if J == 0.0:
        return math.inf
    if J > 350.0:
        return dJ * dJ * math.exp(-2.0 * J)
    return dJ * dJ / math.expm1(2.0 * J)


def classical_fisher(J, dJ_dx):
    """Two-outcome Fisher information ``sum_d (dp_d/dx)^2 / p_d`` of the sigma_x readout."""
    c = math.exp(-J)
    p_plus, p_minus = 0.5 * (1.0 + c), -0.5 * math.expm1(-J)
    dp = 0.5 * c * dJ_dx
    if p_minus == 0.0:
        return math.inf if dp else 0.0
    return dp * dp / p_plus + dp * dp / p_minus


def relative_error(fisher_information, x, n_measurements=1):
    """Cramer-Rao relative error ``1 / (x sqrt(N_m F))``; ``inf`` if F = 0."""
    if n_measurements < 1:
        raise ValueError("need at least one measurement")
    if fisher_information <= 0:
        return math.inf
    if math.isinf(fisher_information):
        return 0.0
    return 1.0 / (abs(x) * math.sqrt(n_measurements * fisher_information))


def ultimate_bound(alpha, n_measurements=1):
    if alpha <= 0:
        raise ValueError("homogeneity degree must be positive")
    return bound_constants().eps0 / (alpha * math.sqrt(n_measurements))


# --- analytic optimal times ---------------------------------------------------

def t_opt_zeno(g, N):
    """Total time ``sqrt(2 N J0) / g`` for N projections (flat-filter regime)."""
    return math.sqrt(2.0 * N * bound_constants().J0) / g


def zeno_n_condition(g, tau_c, N, margin=10.0):
    """True when ``N >= margin * 2 J0 / (g tau_c)^2``."""
    return N >= margin * 2.0 * bound_constants().J0 / (g * tau_c) ** 2


def t_opt_beta(g, tau_c, beta, N, control=CPMG):
    """Time at which the comb closed form reaches J0 on the OU tail."""
    c = c_beta(beta, control)
    J0 = bound_constants().J0
    return tau_c * (N ** beta * J0 / (c * g * g * tau_c * tau_c)) ** (1.0 / (beta + 1))


def beta_n_condition(g, tau_c, beta, N, control=CPMG, margin=10.0):
    """N large enough that the first harmonic sits deep in the power-law tail."""
    c = c_beta(beta, control)
    J0 = bound_constants().J0
    need = max(J0 / (c * g * g * tau_c * tau_c * math.pi ** (beta + 1)), 1.0)
    t = t_opt_beta(g, tau_c, beta, N, control)
    return N >= margin * need and t / (math.pi * N) <= tau_c / margin


def c_s_single(s, control):
    """Ohmic comb constant when only the first harmonic lies below the cutoff."""
    control = normalize_kind(control)
    if control == CW:
        return math.pi ** (s + 1) * (s + 1) / 2.0
    if control == CPMG:
        return 4.0 * math.pi ** (s - 1) * (s + 1)
    raise ValueError(f"no Ohmic comb constant for {control}")


def t_opt_ohmic(g, tau_c, s, N, control=CW):
    """Time at which a single sub-cutoff harmonic gives J0.

    The Ohmic case ``s = 1`` has a time-independent J and no optimum.
    """
    if abs(s - 1.0) < 1e-12:
        raise ValueError("s = 1: attenuation is time independent; tune N instead (N = J0 / (c_s g^2 tau_c^2))")
    c = c_s_single(s, control)
    J0 = bound_constants().J0
    return tau_c * (c * g * g * tau_c * tau_c * N ** s / J0) ** (1.0 / (s - 1.0))


def ohmic_n_condition(g, tau_c, s, N, control=CW, margin=10.0):
    """N-window that keeps exactly one harmonic below the cutoff and N >> 1."""
    c = c_s_single(s, control)
    J0 = bound_constants().J0
    crit = J0 * math.pi ** (s - 1) / (c * g * g * tau_c * tau_c)
    if N < margin:
        return False
    if abs(s - 1.0) < 1e-12:
        return math.isclose(N, J0 / (c * g * g * tau_c * tau_c), rel_tol=0.05)
    ok = N > crit if s > 1 else N < crit
    if normalize_kind(control) == CPMG and ok:
        ratio = t_opt_ohmic(g, tau_c, s, N, control) / (math.pi * N * tau_c)
        ok = 1.0 < ratio < 3.0
    return ok


def t_opt_powerlaw(T2, gamma):
    return T2 * bound_constants().J1 ** (1.0 / gamma)


# --- numeric optimization -----------------------------------------------------

class FlatObjectiveError(ValueError):
    """The Fisher information does not vary over the scanned time range."""


@dataclass(frozen=True)
class PrecisionReport:
    qfi: float
    relative_error: float
    ultimate_bound: float
    t_opt: float
    alpha: float
    J: float = math.nan
    n_measurements: int = 1

    @property
    def ratio_to_bound(self):
        return self.relative_error / self.ultimate_bound


def _scan(model, t_range, n_grid, per_time, refine):
    lo, hi = t_range
    if not (0 < lo < hi and math.isfinite(hi)):
        raise ValueError(f"bad time range {t_range!r}")
    ts = np.geomspace(lo, hi, n_grid)

    def objective(t):
        f = qfi(model.result(t))
        return f / t if per_time else f

    vals = np.array([objective(t) for t in ts])
    if np.nanmax(vals) - np.nanmin(vals) <= 1e-12 * abs(np.nanmax(vals)):
        raise FlatObjectiveError("Fisher information is flat over the scanned range")
    i = int(np.nanargmax(vals))
    t_best, f_best = ts[i], vals[i]
    if refine and 0 < i < n_grid - 1:
        y, fy = golden_section_max(lambda v: objective(math.exp(v)), math.log(ts[i - 1]), math.log(ts[i + 1]), xtol=1e-9)
        if fy > f_best:
            t_best, f_best = math.exp(y), fy
    return t_best


def _report(model, t, n_measurements):
    res = model.result(t)
    f = qfi(res)
    return PrecisionReport(
        qfi=f,
        relative_error=relative_error(f, model.x_value, n_measurements),
        ultimate_bound=(model.ultimate_bound(n_measurements) if hasattr(model, "ultimate_bound")
                        else ultimate_bound(model.alpha, n_measurements)),
        t_opt=t,
        alpha=model.alpha,
        J=res.J,
        n_measurements=n_measurements,
    )


def maximize_qfi_numeric(model, t_range, n_grid=400, n_measurements=1, refine=True):
    """Time maximizing the Fisher information per measurement.

    Log-spaced scan followed by golden-section refinement between the
    neighbours of the best grid point. Ties go to the smallest time.
    """
    t = _scan(model, t_range, n_grid, False, refine)
    return _report(model, t, n_measurements)


def maximize_qfi_per_time(model, t_range, n_grid=400, n_measurements=1, refine=True):
    """Same scan maximizing the Fisher information per unit time."""
    t = _scan(model, t_range, n_grid, True, refine)
    return _report(model, t, n_measurements)


# --- bound sweep helpers ------------------------------------------------------

def optimal_control(spectrum, margin=10.0, n_min=16, n_max=2 ** 20):
    """Control family and smallest power-of-two count meeting the regime conditions.

    OU spectra get CPMG with the first harmonic deep in the tail; super-Ohmic
    spectra get CW with its single harmonic at least 3x below the cutoff.
    Returns ``(kind, N, t_opt_closed_form)``.
    """
    g, tau = spectrum.g, spectrum.tau_c
    n = n_min
    while n <= n_max:
        if spectrum.family == "ou":
            if beta_n_condition(g, tau, spectrum.beta, n, CPMG, margin):
                return CPMG, n, t_opt_beta(g, tau, spectrum.beta, n, CPMG)
        elif spectrum.s > 1.0:
            if ohmic_n_condition(g, tau, spectrum.s, n, CW, margin):
                t = t_opt_ohmic(g, tau, spectrum.s, n, CW)
                if t >= 3.0 * math.pi * n * tau:
                    return CW, n, t
        else:
            raise ValueError("sweep supports OU spectra and super-Ohmic (s > 1) spectra")
        n *= 2
    raise ValueError(f"no control count up to {n_max} meets the regime conditions")


def fid_time_range(spectrum):
    g, tau = spectrum.g, spectrum.tau_c
    return 1e-2 / g, 1e2 * max(1.0 / g, 1.0 / (g * g * tau), tau)


def minimal_error(model, t_range, n_grid=160):
    """Single-measurement minimal relative error for one model."""
    return maximize_qfi_numeric(model, t_range, n_grid=n_grid)
