"""Probe control sequences and their filter functions.

The filter is normalized as ``F_t(w) = 1/2 |int_0^t Omega(t') e^{i w t'} dt'|^2``
so that a normalized spectrum seen through a flat filter gives
``J = g^2 t^2 / 2`` for free evolution.

CW driving with N cycles is modelled as ``Omega(t') = sqrt(2) sin(pi N t'/t)``,
which has the same mean-square power as the +/-1 pulse sequences and
vanishes at both ends, so its filter falls off as ``w^-4``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "FID",
    "CPMG",
    "CW",
    "ZENO",
    "ControlSequence",
    "HarmonicComb",
    "modulation",
    "filter_exact",
    "harmonic_comb",
]

FID = "FID"
CPMG = "CPMG"
CW = "CW"
ZENO = "Zeno"
KINDS = (FID, CPMG, CW, ZENO)

_KIND_ALIASES = {k.lower(): k for k in KINDS}


def normalize_kind(kind):
    try:
        return _KIND_ALIASES[str(kind).lower()]
    except KeyError:
        raise ValueError(f"unknown control kind {kind!r}; expected one of {KINDS}") from None


@dataclass(frozen=True)
class ControlSequence:
    """A control protocol applied over ``[0, t]``.

    ``n`` is the pulse count (CPMG), cycle count (CW) or number of
    projections (Zeno); it is ignored for FID.
    """

    kind: str
    t: float
    n: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", normalize_kind(self.kind))
        if not (self.t > 0 and math.isfinite(self.t)):
            raise ValueError(f"total time must be positive, got {self.t!r}")
        if self.kind == FID:
            object.__setattr__(self, "n", 1)
        elif int(self.n) != self.n or self.n < 1:
            raise ValueError(f"{self.kind} needs an integer count >= 1, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

    def with_time(self, t):
        return replace(self, t=t)

    @property
    def pulse_times(self):
        """Instants of the pi pulses, ``(2j-1) t / 2N``."""
        if self.kind == FID:
            return np.empty(0)
        if self.kind != CPMG:
            raise ValueError(f"{self.kind} has no pi-pulse instants")
        j = np.arange(1, self.n + 1)
        return (2 * j - 1) * self.t / (2 * self.n)

    def segments(self):
        """Piecewise-constant modulation as ``(start, stop, sign)`` arrays."""
        if self.kind not in (FID, CPMG):
            raise ValueError(f"{self.kind} control has no coherent modulation function")
        edges = np.concatenate(([0.0], self.pulse_times, [self.t]))
        signs = (-1.0) ** np.arange(len(edges) - 1)
        return edges[:-1], edges[1:], signs

    @property
    def base_frequency(self):
        """Fundamental of the harmonic comb, ``pi N / t``."""
        return math.pi * self.n / self.t

    @property
    def edge_power(self):
        """Constant C with ``<F_t(w)> ~ C / w^2`` averaged over fast oscillations."""
        if self.kind == FID:
            return 1.0
        if self.kind == CPMG:
            return 2.0 * self.n + 1.0
        if self.kind == ZENO:
            return float(self.n)
        return 0.0  # CW: smooth switch-on, tail is O(w^-4)


def modulation(seq, tprime):
    """Toggling-frame modulation: +/-1 for FID and CPMG, a sine for CW."""
    if seq.kind == ZENO:
        raise ValueError("projective (Zeno) control has no coherent modulation function")
    tprime = np.asarray(tprime, dtype=float)
    if np.any(tprime < 0) or np.any(tprime > seq.t):
        raise ValueError("modulation is defined on [0, t] only")
    if seq.kind == CW:
        out = math.sqrt(2.0) * np.sin(seq.base_frequency * tprime)
        return out[()] if out.ndim == 0 else out
    flips = np.searchsorted(seq.pulse_times, tprime, side="right")
    out = np.where(flips % 2 == 0, 1.0, -1.0)
    return out[()] if out.ndim == 0 else out


def _filter_segments(seq, omega):
    a, b, s = seq.segments()
    omega = np.asarray(omega, dtype=float)
    flat = omega.reshape(-1)
    out = np.empty_like(flat)
    small = np.abs(flat) * seq.t < 1e-8
    # w -> 0: sum of signed segment lengths
    out[small] = 0.5 * np.sum(s * (b - a)) ** 2
    w = flat[~small]
    if w.size:
        chunk = max(1, 2_000_000 // len(s))
        res = np.empty_like(w)
        for i in range(0, w.size, chunk):
            wc = w[i:i + chunk, None]
            y = np.sum(s * (np.exp(1j * wc * b) - np.exp(1j * wc * a)), axis=1) / (1j * wc[:, 0])
            res[i:i + chunk] = 0.5 * np.abs(y) ** 2
        out[~small] = res
    return out.reshape(omega.shape)


def _filter_fid(t, omega):
    z = np.asarray(omega, dtype=float) * t / 2.0
    return 0.5 * t * t * np.sinc(z / np.pi) ** 2


def _filter_cpmg(seq, omega):
    """Closed-form CPMG filter; falls back to the segment sum near removable poles."""
    omega = np.asarray(omega, dtype=float)
    n, t = seq.n, seq.t
    z = omega * t
    half = z / (2 * n)
    c = np.cos(half)
    bad = (np.abs(c) < 1e-4) | (np.abs(z) < 1e-6)
    with np.errstate(divide="ignore", invalid="ignore"):
        parity = np.sin(z / 2) ** 2 if n % 2 == 0 else np.cos(z / 2) ** 2
        val = 8.0 * np.sin(z / (4 * n)) ** 4 * parity / (c ** 2 * omega ** 2)
    if np.any(bad):
        val = np.where(bad, 0.0, val)
        val[bad] = _filter_segments(seq, omega[bad])
    return val


def _filter_cw(seq, omega):
    w = np.abs(np.asarray(omega, dtype=float))
    w0, t = seq.base_frequency, seq.t
    return (w0 * t / (w + w0)) ** 2 * np.sinc((w - w0) * t / (2.0 * np.pi)) ** 2


def filter_exact(seq, omega, method="auto"):
    """Exact filter function F_t(omega).

    ``method="segments"`` always uses the definitional segment sum; the default
    uses the equivalent closed forms for FID, CPMG and Zeno. A Zeno sequence
    of N projections is N independent free-evolution intervals of length t/N.
    """
    if seq.kind == ZENO:
        return seq.n * filter_exact(ControlSequence(FID, seq.t / seq.n), omega, method)
    if seq.kind == CW:
        return _filter_cw(seq, omega)
    if method == "segments":
        return _filter_segments(seq, omega)
    if seq.kind == FID:
        return _filter_fid(seq.t, omega)
    return _filter_cpmg(seq, omega)


@dataclass(frozen=True)
class HarmonicComb:
    """Delta-comb limit of a periodic filter.

    ``weights[i]`` is the filter area sitting at ``+harmonics[i] * omega0``;
    the mirror line at negative frequency carries the same weight.
    """

    omega0: float
    harmonics: np.ndarray
    weights: np.ndarray

    def frequencies(self):
        return self.harmonics * self.omega0

    def attenuation(self, spectrum):
        w = self.frequencies()
        total = spectrum(w)
        if spectrum.two_sided:
            total = total + spectrum(-w)
        return float(np.sum(self.weights * total))


def harmonic_comb(seq, kmax=10_000):
    """Comb representation of a CW or CPMG sequence for ``N >> 1``.

    CW carries only the first harmonic (area ``pi t / 2`` per side); CPMG
    carries odd harmonics with area ``4 t / (pi k^2)`` per side. Both
    modulations have unit mean-square power, so the total area is ``pi t``.
    """
    if seq.kind == CW:
        return HarmonicComb(seq.base_frequency, np.array([1.0]), np.array([math.pi * seq.t / 2.0]))
    if seq.kind == CPMG:
        k = np.arange(1, kmax + 1, 2, dtype=float)
        return HarmonicComb(seq.base_frequency, k, 4.0 * seq.t / (math.pi * k ** 2))
    raise ValueError(f"{seq.kind} control has no harmonic comb representation")
