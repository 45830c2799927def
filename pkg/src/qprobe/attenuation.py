"""Attenuation factor J(x, t) of the probe coherence and its parameter derivatives.

Every route returns an :class:`AttenuationResult`. Regime preconditions of
the closed forms do not raise; they set ``valid=False`` so sweeps can cross
regime boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .control import CPMG, CW, FID, ZENO, ControlSequence, filter_exact, normalize_kind
from .quadrature import integrate_panels
from .special import odd_zeta
from .spectra import OhmicSpectrum, OrnsteinUhlenbeckSpectrum, ou_normalization

__all__ = [
    "AttenuationResult",
    "HarmonicCollisionError",
    "outcome_probabilities",
    "attenuation_quadrature",
    "attenuation_lorentzian_exact",
    "lorentzian_exact_J",
    "attenuation_zeno",
    "attenuation_free",
    "attenuation_comb_beta",
    "attenuation_comb_ohmic",
    "attenuation_markovian",
    "attenuation_comb",
    "c_beta",
    "c_s",
    "TARGETS",
]

TARGETS = ("tau_c", "g")


class HarmonicCollisionError(ValueError):
    """A comb harmonic sits exactly on the Ohmic cutoff frequency."""


@dataclass(frozen=True)
class AttenuationResult:
    J: float
    dJ_dx: float
    target: str = "tau_c"
    backend: str = ""
    valid: bool = True
    error: float = 0.0

    @property
    def coherence(self):
        return math.exp(-self.J)

    @property
    def p_plus(self):
        return outcome_probabilities(self.J)[0]

    @property
    def p_minus(self):
        return outcome_probabilities(self.J)[1]


def outcome_probabilities(J):
    """Probabilities ``(p+, p-) = ((1 + e^-J)/2, (1 - e^-J)/2)`` of the sigma_x readout."""
    if np.any(np.asarray(J) < 0):
        raise ValueError("attenuation must be non-negative")
    c = np.exp(-np.asarray(J, dtype=float))
    p_plus = 0.5 * (1.0 + c)
    p_minus = 0.5 * (1.0 - c)
    if np.ndim(p_plus) == 0:
        return float(p_plus), float(p_minus)
    return p_plus, p_minus


def _check_target(target):
    if target not in TARGETS:
        raise ValueError(f"target must be one of {TARGETS}, got {target!r}")


# --- quadrature --------------------------------------------------------------

def _filter_scales(seq):
    """(oscillation period scale, characteristic filter frequency)."""
    if seq.kind == FID:
        return seq.t, 2.0 * math.pi / seq.t
    if seq.kind in (CPMG, CW):
        return seq.t, max(seq.base_frequency, 2.0 * math.pi / seq.t)
    if seq.kind == ZENO:
        dt = seq.t / seq.n
        return dt, 2.0 * math.pi / dt
    raise ValueError(f"unknown control kind {seq.kind}")


def _folded(spectrum, fn, omega):
    out = fn(omega)
    if spectrum.two_sided:
        out = out + fn(-omega)
    return out


def attenuation_quadrature(spectrum, seq, target="tau_c", rtol=1e-9, tail_factor=64.0):
    """J = int F_t(w) G(w) dw by adaptive Gauss-Legendre panels.

    Panels follow a uniform grid of half the fastest filter oscillation,
    merged with a geometric grid resolving the spectrum scale ``1/tau_c``.
    For two-sided spectra the integral above ``W`` uses the
    oscillation-averaged filter ``C / w^2``. For a sharp cutoff ``1/tau_c``
    the tau derivative picks up the moving-boundary term.
    """
    _check_target(target)
    t_osc, f_char = _filter_scales(seq)
    tau = spectrum.tau_c
    h = math.pi / t_osc
    if spectrum.two_sided:
        top = tail_factor * max(1.0 / tau, f_char)
    else:
        top = spectrum.omega_c
    lo = 1e-3 * min(1.0 / tau, h)
    if seq.kind == CW:
        # one sharp lobe at w0; elsewhere the integrand is a small w^-4 ripple
        w0 = seq.base_frequency
        near = w0 + h * np.arange(-256, 257)
        far = np.geomspace(256 * h, max(top, 512 * h), 200)
        lin = np.concatenate((near, w0 - far, w0 + far))
    else:
        n_lin = int(math.ceil(top / h))
        lin = np.linspace(0.0, n_lin * h, n_lin + 1)
    lin = lin[(lin >= 0.0) & (lin <= top)]
    geo = np.geomspace(lo, top, max(2, int(math.log(top / lo) / math.log(1.15)) + 1))
    edges = np.concatenate(([0.0, top], lin, geo, spectrum.breakpoints()))
    edges = edges[(edges >= 0.0) & (edges <= top)]

    want_tau = target == "tau_c"

    def integrand(w):
        f = filter_exact(seq, w)
        if seq.kind == CW:
            # far from the lobe use the ripple-averaged filter; the switch sits on a node of sin^2
            w0 = seq.base_frequency
            far = np.abs(w - w0) > 256 * h
            f = np.where(far, 2.0 * w0 * w0 / ((w + w0) * (w - w0)) ** 2, f)
        rows = [f * _folded(spectrum, spectrum, w)]
        if want_tau:
            rows.append(f * _folded(spectrum, spectrum.d_dtau, w))
        return np.vstack(rows)

    vals, errs = integrate_panels(integrand, edges, rtol=rtol)

    if spectrum.two_sided:
        c_edge = seq.edge_power

        def tail(w):
            rows = [c_edge / w ** 2 * _folded(spectrum, spectrum, w)]
            if want_tau:
                rows.append(c_edge / w ** 2 * _folded(spectrum, spectrum.d_dtau, w))
            return np.vstack(rows)

        tvals, terrs = integrate_panels(tail, np.geomspace(top, top * 1e8, 40), rtol=1e-10)
        vals = vals + tvals
        errs = errs + terrs + 1e-3 * np.abs(tvals)

    J = float(vals[0])
    if want_tau:
        dJ = float(vals[1])
        if not spectrum.two_sided:
            wc = spectrum.omega_c
            dJ -= float(filter_exact(seq, wc)) * spectrum.edge_value() * wc / tau
    else:
        dJ = 2.0 * J / spectrum.g
    return AttenuationResult(J, dJ, target, "quadrature", True, float(errs[0]))


# --- exact Lorentzian (time domain) -------------------------------------------

def _series(x, first, coef):
    """Sum_{k>=first} coef(k) x^k for small |x|."""
    out = np.zeros_like(x)
    xk = x ** first
    for k in range(first, first + 18):
        out = out + coef(k) * xk
        xk = xk * x
    return out


def _psi(x):
    """x - 1 + e^-x, accurate for small x."""
    small = x < 0.5
    xs = np.where(small, x, 0.0)
    ser = _series(xs, 2, lambda k: (-1) ** k / math.factorial(k))
    return np.where(small, ser, x - 1.0 + np.exp(-np.where(small, 1.0, x)))


def _dpsi_tau(x):
    """2 psi(x) - x psi'(x) = x - 2 + (2 + x) e^-x."""
    small = x < 0.5
    xs = np.where(small, x, 0.0)
    ser = _series(xs, 3, lambda k: (-1) ** k * (2 - k) / math.factorial(k))
    xb = np.where(small, 1.0, x)
    return np.where(small, ser, xb - 2.0 + (2.0 + xb) * np.exp(-xb))


def _segments_for(kind, n, t):
    seq = ControlSequence(kind, t, n)
    return seq.segments()


def lorentzian_exact_J(g, tau_c, kind, n, t, derivative=False):
    """Exact attenuation for the beta=2 Lorentzian spectrum, any FID/CPMG/Zeno timing.

    Uses the exponential correlation function of the Lorentzian: J is half the
    double integral of ``g^2 exp(-|t1 - t2|/tau_c)`` against the modulation.
    Cross terms between segments i < j factor as
    ``s_i s_j exp(-gap_ij/tau) (1 - e^{-x_i}) (1 - e^{-x_j})`` and are
    accumulated in one pass over the segments.
    ``g`` and ``tau_c`` broadcast; ``t`` is a scalar. With ``derivative=True``
    returns ``(J, dJ/dtau_c)``.
    """
    kind = normalize_kind(kind)
    g = np.asarray(g, dtype=float)
    tau = np.asarray(tau_c, dtype=float)
    if kind == ZENO:
        res = lorentzian_exact_J(g, tau, FID, 1, t / n, derivative)
        if derivative:
            return n * res[0], n * res[1]
        return n * res
    if kind == CW:
        raise ValueError("CW control is only represented through its harmonic comb")
    a, b, s = _segments_for(kind, n, t)
    lengths = b - a
    diag = np.zeros_like(tau)
    ddiag = np.zeros_like(tau)
    for L in np.unique(lengths):
        count = np.count_nonzero(lengths == L)
        x = L / tau
        diag = diag + count * _psi(x)
        ddiag = ddiag + count * _dpsi_tau(x)
    # running sums over earlier segments i < j:
    #   R = sum s_i u_i E_ij, P = sum s_i u_i E_ij gap_ij/tau, Q = sum s_i x_i e^{-x_i} E_ij
    cross = np.zeros_like(tau)
    dcross = np.zeros_like(tau)
    R = np.zeros_like(tau)
    P = np.zeros_like(tau)
    Q = np.zeros_like(tau)
    cache = {}
    for L, sj in zip(lengths, s):
        if L not in cache:
            x = L / tau
            ex = np.exp(-x)
            cache[L] = (x, ex, -np.expm1(-x))
        x, ex, u = cache[L]
        cross = cross + sj * u * R
        if derivative:
            # d/dtau of tau^2 * term, divided by tau
            dcross = dcross + sj * (2.0 * u * R + u * P - u * Q - x * ex * R)
        P = (P + R * x) * ex
        R = R * ex + sj * u
        Q = Q * ex + sj * x * ex
    J = g ** 2 * tau ** 2 * (diag + cross)
    if not derivative:
        return J
    dJ = g ** 2 * tau * (ddiag + dcross)
    return J, dJ


def attenuation_lorentzian_exact(spectrum, seq, target="tau_c"):
    """Closed-form exact J for a Lorentzian (beta=2) bath under FID, CPMG or Zeno control."""
    _check_target(target)
    if not (isinstance(spectrum, OrnsteinUhlenbeckSpectrum) and spectrum.beta == 2):
        raise ValueError("exact time-domain attenuation needs a beta=2 Ornstein-Uhlenbeck spectrum")
    J, dJ = lorentzian_exact_J(spectrum.g, spectrum.tau_c, seq.kind, seq.n, seq.t, derivative=True)
    J, dJ = float(J), float(dJ)
    if target == "g":
        dJ = 2.0 * J / spectrum.g
    return AttenuationResult(J, dJ, target, "exact", True)


# --- closed forms ------------------------------------------------------------

def attenuation_zeno(g, tau_c, N, t, target="g"):
    """Flat-filter Zeno attenuation ``g^2 t^2 / 2N`` (valid for t/N << tau_c)."""
    _check_target(target)
    J = g * g * t * t / (2.0 * N)
    dJ = 2.0 * J / g if target == "g" else 0.0
    return AttenuationResult(J, dJ, target, "zeno", t / N <= tau_c / 10.0)


def attenuation_free(g, tau_c, t, target="g"):
    """Short-time free evolution ``g^2 t^2 / 2`` (valid for t << tau_c)."""
    res = attenuation_zeno(g, tau_c, 1, t, target)
    return AttenuationResult(res.J, res.dJ_dx, target, "free", t <= tau_c / 10.0)


def c_beta(beta, control):
    """Comb constant for the OU tail, ``J = c g^2 t^(beta+1) / (N^beta tau^(beta-1))``.

    CW keeps one harmonic: ``beta sin(pi/beta) / (2 pi^beta)``. CPMG sums the
    odd harmonics: ``beta sin(pi/beta) zeta(beta+2) (4 - 2^-beta) / pi^(beta+2)``.
    """
    control = normalize_kind(control)
    sn = math.sin(math.pi / beta)
    if control == CW:
        return beta * sn / (2.0 * math.pi ** beta)
    if control == CPMG:
        return 8.0 * ou_normalization(beta) * odd_zeta(beta + 2) / math.pi ** (beta + 1)
    raise ValueError(f"no comb constant for {control}")


def _k_cut(N, t, tau_c, control=CPMG):
    ratio = t / (math.pi * N * tau_c)
    k = math.floor(ratio + 1e-12)
    near = round(ratio)
    present = near == 1 if control == CW else near % 2 == 1
    if present and abs(ratio - near) <= 1e-9 * max(1.0, ratio):
        raise HarmonicCollisionError(
            f"harmonic {near} of the comb sits on the cutoff (t/(pi N tau_c) = {ratio:.12g})"
        )
    return k, ratio


def c_s(s, N, t, tau_c, control=CW):
    """Comb constant for the Ohmic power-law region, ``J = c g^2 tau^(s+1) N^s / t^(s-1)``.

    CW has a single harmonic: ``pi^(s+1) (s+1) / 2``. For CPMG the odd
    harmonics below the cutoff contribute ``4 pi^(s-1) (s+1) k^(s-2)`` each.
    """
    control = normalize_kind(control)
    kc, _ = _k_cut(N, t, tau_c, control)
    if control == CW:
        return math.pi ** (s + 1) * (s + 1) / 2.0 if kc >= 1 else 0.0
    if control == CPMG:
        k = np.arange(1, kc + 1, 2, dtype=float)
        return 4.0 * math.pi ** (s - 1) * (s + 1) * float(np.sum(k ** (s - 2)))
    raise ValueError(f"no comb constant for {control}")


def attenuation_comb_beta(g, tau_c, beta, N, t, control=CPMG, target="tau_c"):
    """Delta-comb closed form on the OU power-law tail (valid for t/(pi N) << tau_c)."""
    _check_target(target)
    c = c_beta(beta, control)
    J = c * g * g * t ** (beta + 1) / (N ** beta * tau_c ** (beta - 1))
    dJ = -(beta - 1) * J / tau_c if target == "tau_c" else 2.0 * J / g
    valid = t / (math.pi * N) <= tau_c / 10.0
    return AttenuationResult(J, dJ, target, f"comb-{normalize_kind(control)}", valid)


def attenuation_comb_ohmic(g, tau_c, s, N, t, control=CW, target="tau_c"):
    """Delta-comb closed form below the Ohmic cutoff (needs t/(pi N) > tau_c)."""
    _check_target(target)
    c = c_s(s, N, t, tau_c, control)
    J = c * g * g * tau_c ** (s + 1) * N ** s / t ** (s - 1)
    dJ = (s + 1) * J / tau_c if target == "tau_c" else 2.0 * J / g
    valid = t / (math.pi * N) > tau_c
    return AttenuationResult(J, dJ, target, f"comb-{normalize_kind(control)}", valid)


def attenuation_markovian(g, tau_c, t, target="tau_c"):
    """Markovian limit ``g^2 tau_c t`` (valid for t >> tau_c)."""
    _check_target(target)
    J = g * g * tau_c * t
    dJ = J / tau_c if target == "tau_c" else 2.0 * J / g
    return AttenuationResult(J, dJ, target, "markovian", t >= 10.0 * tau_c)


def attenuation_comb(spectrum, seq, target="tau_c"):
    """Numerical harmonic-comb sum for any spectrum (CW or CPMG)."""
    from .control import harmonic_comb

    _check_target(target)
    comb = harmonic_comb(seq)
    J = comb.attenuation(spectrum)
    if target == "g":
        dJ = 2.0 * J / spectrum.g
    else:
        w = comb.frequencies()
        d = spectrum.d_dtau(w)
        if spectrum.two_sided:
            d = d + spectrum.d_dtau(-w)
        dJ = float(np.sum(comb.weights * d))
    return AttenuationResult(J, dJ, target, "comb", True)


def closed_form(spectrum, seq, target="tau_c"):
    """Pick the closed form matching the spectrum family and control kind."""
    g, tau = spectrum.g, spectrum.tau_c
    if seq.kind in (FID, ZENO):
        res = attenuation_zeno(g, tau, seq.n, seq.t, target)
        if target == "tau_c":
            res = AttenuationResult(res.J, 0.0, target, res.backend, res.valid)
        return res
    if isinstance(spectrum, OrnsteinUhlenbeckSpectrum):
        return attenuation_comb_beta(g, tau, spectrum.beta, seq.n, seq.t, seq.kind, target)
    if isinstance(spectrum, OhmicSpectrum):
        return attenuation_comb_ohmic(g, tau, spectrum.s, seq.n, seq.t, seq.kind, target)
    raise TypeError(f"unsupported spectrum {type(spectrum).__name__}")
