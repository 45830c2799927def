"""Adaptive composite Gauss-Legendre quadrature on caller-supplied breakpoints."""

from __future__ import annotations

import numpy as np

__all__ = ["QuadratureError", "integrate_panels", "golden_section_max"]


class QuadratureError(RuntimeError):
    """Raised when the panel budget is exhausted before reaching tolerance."""

    def __init__(self, message, estimate, error):
        super().__init__(f"{message} (estimate={estimate!r}, error bound={error!r})")
        self.estimate = estimate
        self.error = error


_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(10)


def _panel_sums(f, a, b):
    """Integrate ``f`` over each panel ``[a_i, b_i]``; f maps (k,) -> (m, k)."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    vals = np.asarray(f(x.ravel()), dtype=float)
    vals = vals.reshape(vals.shape[0], len(a), len(_NODES)) if vals.ndim == 2 else vals.reshape(1, len(a), len(_NODES))
    sums = np.einsum("mpk,k->mp", vals, _WEIGHTS) * half
    abs_sums = np.einsum("mpk,k->mp", np.abs(vals), _WEIGHTS) * half
    return sums, abs_sums


def integrate_panels(f, breakpoints, rtol=1e-9, max_points=20_000_000, max_rounds=40):
    """Integrate one or several integrands over ``[breakpoints[0], breakpoints[-1]]``.

    ``f`` takes a 1-D array of abscissae and returns either a 1-D array or an
    ``(m, n)`` array holding ``m`` integrands. Each panel is checked by
    comparing a 10-point rule against the same rule on its two halves;
    panels that disagree by more than ``rtol`` of the integrand's L1 norm
    (shared evenly between panels) are bisected.

    Returns ``(values, errors)`` as arrays of length ``m``.
    """
    edges = np.unique(np.asarray(breakpoints, dtype=float))
    if len(edges) < 2:
        raise ValueError("need at least two distinct breakpoints")
    a, b = edges[:-1], edges[1:]
    done_val = 0.0
    done_abs = 0.0
    done_err = 0.0
    used = 0
    coarse, coarse_abs = _panel_sums(f, a, b)
    used += coarse.shape[1] * len(_NODES)
    for _ in range(max_rounds):
        mid = 0.5 * (a + b)
        left, left_abs = _panel_sums(f, a, mid)
        right, right_abs = _panel_sums(f, mid, b)
        used += 2 * len(a) * len(_NODES)
        fine = left + right
        fine_abs = left_abs + right_abs
        err = np.abs(fine - coarse)
        total_abs = done_abs + fine_abs.sum(axis=1)
        npan = max(len(a), 1)
        allowed = rtol * np.maximum(total_abs, 1e-300)[:, None] / npan
        ok = np.all(err <= allowed, axis=0)
        done_val = done_val + fine[:, ok].sum(axis=1)
        done_abs = done_abs + fine_abs[:, ok].sum(axis=1)
        done_err = done_err + err[:, ok].sum(axis=1)
        if np.all(ok):
            return done_val, done_err
        bad = ~ok
        if used > max_points:
            estimate = done_val + fine[:, bad].sum(axis=1)
            error = done_err + err[:, bad].sum(axis=1)
            raise QuadratureError("quadrature did not converge", estimate, error)
        # bisect the failing panels; their halves become the new coarse level
        a = np.concatenate([a[bad], mid[bad]])
        b = np.concatenate([mid[bad], b[bad]])
        coarse = np.concatenate([left[:, bad], right[:, bad]], axis=1)
        coarse_abs = np.concatenate([left_abs[:, bad], right_abs[:, bad]], axis=1)
        order = np.argsort(a)
        a, b = a[order], b[order]
        coarse, coarse_abs = coarse[:, order], coarse_abs[:, order]
    estimate = done_val + coarse.sum(axis=1)
    raise QuadratureError("quadrature exceeded refinement rounds", estimate, np.abs(estimate) * rtol)


_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(fun, lo, hi, xtol=1e-10, maxiter=200):
    """Maximize a unimodal scalar function on ``[lo, hi]``; returns ``(x, fun(x))``."""
    a, b = float(lo), float(hi)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(maxiter):
        if abs(b - a) <= xtol * max(1.0, abs(a) + abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fun(d)
    x = c if fc >= fd else d
    return x, max(fc, fd)
