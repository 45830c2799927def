"""Special functions used by the closed-form constants.

Only the two functions the bounds actually need are provided: the
principal branch of the Lambert W function and the Riemann zeta function
for real arguments greater than one.
"""

import math

__all__ = ["lambert_w0", "zeta", "odd_zeta"]

_BRANCH_POINT = -1.0 / math.e


def lambert_w0(z, tol=1e-15, maxiter=100):
    """Principal branch W0 of the Lambert function, ``w * exp(w) = z``.

    Halley iteration started from a branch-point series near ``-1/e``,
    ``log1p`` near the origin and an asymptotic log guess for large ``z``.
    """
    z = float(z)
    if math.isnan(z) or z < _BRANCH_POINT * (1.0 + 1e-15):
        raise ValueError(f"lambert_w0 is real only for z >= -1/e, got {z!r}")
    if z == 0.0:
        return 0.0
    if math.isinf(z):
        return math.inf

    if z < -0.25:
        p = math.sqrt(max(2.0 * (math.e * z + 1.0), 0.0))
        if p < 1e-8:
            return -1.0 + p - p * p / 3.0
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3
    elif z < 3.0:
        w = math.log1p(z)
        w = w * (1.0 - math.log1p(w) / (2.0 + w))
    else:
        lz = math.log(z)
        w = lz - math.log(lz)

    for _ in range(maxiter):
        ew = math.exp(w)
        f = w * ew - z
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        step = f / denom
        w -= step
        if abs(step) <= tol * (1.0 + abs(w)):
            break
    return w


def zeta(s, tol=1e-13):
    """Riemann zeta for real ``s > 1``.

    Direct summation of the first terms plus an Euler-Maclaurin tail.
    """
    s = float(s)
    if not s > 1.0:
        raise ValueError(f"zeta(s) needs s > 1, got {s!r}")
    n = 16 if s >= 4 else 64
    head = math.fsum(k ** -s for k in range(1, n))
    # tail from n to infinity: integral + half endpoint + Bernoulli corrections
    tail = n ** (1.0 - s) / (s - 1.0) + 0.5 * n ** -s
    # B2k/(2k)! * s(s+1)...(s+2k-2) * n^(-s-2k+1)
    bernoulli = (1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0)
    rising = s
    fact = 2.0
    for k, b in enumerate(bernoulli, start=1):
        term = b / fact * rising * n ** (-s - 2 * k + 1)
        tail += term
        if abs(term) < tol * head:
            break
        rising *= (s + 2 * k - 1) * (s + 2 * k)
        fact *= (2 * k + 1) * (2 * k + 2)
    return head + tail


def odd_zeta(s):
    """Sum over odd k of ``k**-s``, i.e. ``(1 - 2**-s) * zeta(s)``."""
    return (1.0 - 2.0 ** -s) * zeta(s)
