"""Grid-based Bayesian adaptive estimation of a bath parameter.

Each step picks the measurement time that maximizes the expected negentropy
of the next posterior, simulates a sigma_x outcome at the true parameter and
applies Bayes' rule on a fixed grid.

Posterior weights are stored as masses ``q_i = p(x_i) mu_i`` that sum to one,
where ``mu_i`` is the trapezoidal measure of grid point ``i``. Densities and
entropies are recovered through ``mu``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .fisher import maximize_qfi_numeric

__all__ = [
    "Posterior",
    "PosteriorUnderflowError",
    "AdaptiveConfig",
    "LikelihoodTable",
    "TrajectoryRecord",
    "EnsembleResult",
    "init_prior",
    "likelihood",
    "posterior_update",
    "expected_information_gain",
    "select_time",
    "simulate_measurement",
    "estimate_t_opt",
    "candidate_times",
    "run_realization",
    "run_protocol",
]

OUTCOMES = (1, -1)


class PosteriorUnderflowError(ArithmeticError):
    """Every grid point has negligible likelihood; the prior probably excludes the truth."""


def _trapezoid_measure(grid):
    d = np.diff(grid)
    mu = np.empty_like(grid)
    mu[0] = d[0] / 2.0
    mu[-1] = d[-1] / 2.0
    mu[1:-1] = (d[:-1] + d[1:]) / 2.0
    return mu


@dataclass(frozen=True)
class Posterior:
    grid: np.ndarray
    weights: np.ndarray
    measure: np.ndarray

    def __post_init__(self):
        if self.grid.ndim != 1 or len(self.grid) < 2 or np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing with at least two points")
        if self.weights.shape != self.grid.shape or np.any(self.weights < 0):
            raise ValueError("weights must be non-negative and match the grid")
        self.grid.setflags(write=False)
        self.weights.setflags(write=False)
        self.measure.setflags(write=False)

    @property
    def density(self):
        return self.weights / self.measure

    @property
    def mean(self):
        return float(self.weights @ self.grid)

    @property
    def std(self):
        m = self.mean
        return float(math.sqrt(max(self.weights @ (self.grid - m) ** 2, 0.0)))

    @property
    def relative_error(self):
        return self.std / self.mean

    @property
    def negentropy(self):
        """``int p log p dx`` by the trapezoidal rule on the grid."""
        q = self.weights
        nz = q > 0
        return float(np.sum(q[nz] * (np.log(q[nz]) - np.log(self.measure[nz]))))

    @property
    def entropy(self):
        return -self.negentropy

    def with_weights(self, w):
        return Posterior(self.grid, w, self.measure)


def init_prior(x_range, M=512, spacing="linear"):
    """Flat prior on M points spanning ``(x_min, x_max]``."""
    lo, hi = map(float, x_range)
    if not 0 < lo < hi:
        raise ValueError(f"bad prior range {x_range!r}")
    if M < 2:
        raise ValueError("need at least two grid points")
    i = np.arange(1, M + 1) / M
    if spacing == "linear":
        grid = lo + (hi - lo) * i
    elif spacing == "log":
        grid = lo * (hi / lo) ** i
    else:
        raise ValueError(f"spacing must be 'linear' or 'log', got {spacing!r}")
    mu = _trapezoid_measure(grid)
    return Posterior(grid, mu / mu.sum(), mu)


def _outcome_probs(J):
    J = np.asarray(J, dtype=float)
    return 0.5 * (1.0 + np.exp(-J)), -0.5 * np.expm1(-J)


def likelihood(d, x, t, model):
    """p(d | x, t) for outcome ``d`` in {+1, -1}."""
    if d not in OUTCOMES:
        raise ValueError(f"outcome must be +1 or -1, got {d!r}")
    J = model.attenuation_values(np.atleast_1d(np.asarray(x, dtype=float)), t)
    pp, pm = _outcome_probs(J)
    out = pp if d == 1 else pm
    return out if np.ndim(x) else float(out[0])


def _update(post, lik):
    w = post.weights * lik
    total = w.sum()
    if not total > 1e-300 * max(len(w), 1):
        raise PosteriorUnderflowError("posterior mass underflow; the prior range may exclude the true value")
    w = w / total
    # one extra pass trims the rounding drift of the sum
    return post.with_weights(w / w.sum())


def posterior_update(post, d, t, model):
    """Bayes' rule for one outcome at time ``t``."""
    return _update(post, likelihood(d, post.grid, t, model))


def _utilities(post, lp, lm):
    """Expected posterior negentropy for likelihood columns ``lp``, ``lm`` of shape (M, T)."""
    q = post.weights
    nz = q > 0
    a = np.zeros_like(q)
    a[nz] = q[nz] * (np.log(q[nz]) - np.log(post.measure[nz]))
    out = 0.0
    for L in (lp, lm):
        with np.errstate(divide="ignore", invalid="ignore"):
            LlogL = np.where(L > 0, L * np.log(L), 0.0)
        p = q @ L
        with np.errstate(divide="ignore", invalid="ignore"):
            plogp = np.where(p > 0, p * np.log(p), 0.0)
        out = out + a @ L + q @ LlogL - plogp
    return out


def expected_information_gain(post, t, model):
    """Expected negentropy ``sum_d p(d) int p(x|d) log p(x|d) dx`` of the next posterior.

    Subtract ``post.negentropy`` to get the expected gain in nats.
    """
    J = model.attenuation_values(post.grid, t)
    pp, pm = _outcome_probs(J)
    return float(_utilities(post, pp[:, None], pm[:, None])[0])


@dataclass
class LikelihoodTable:
    """Outcome probabilities on a fixed (parameter grid) x (candidate times) lattice."""

    times: np.ndarray
    p_plus: np.ndarray
    p_minus: np.ndarray

    @classmethod
    def build(cls, model, grid, times):
        times = np.asarray(times, dtype=float)
        J = np.column_stack([model.attenuation_values(grid, t) for t in times])
        pp, pm = _outcome_probs(J)
        return cls(times, pp, pm)

    def utilities(self, post):
        return _utilities(post, self.p_plus, self.p_minus)


def _argmax_first(u, rtol=1e-12):
    best = np.max(u)
    return int(np.argmax(u >= best - rtol * max(1.0, abs(best))))


def select_time(post, candidates, model, table=None, refine=False):
    """Candidate time with the largest expected negentropy.

    Near-ties go to the smallest time. ``refine`` runs a golden-section search
    between the neighbours of the best candidate.
    """
    if table is None:
        table = LikelihoodTable.build(model, post.grid, candidates)
    u = table.utilities(post)
    i = _argmax_first(u)
    t = float(table.times[i])
    if refine and 0 < i < len(table.times) - 1:
        from .quadrature import golden_section_max

        y, fy = golden_section_max(
            lambda v: expected_information_gain(post, math.exp(v), model),
            math.log(table.times[i - 1]), math.log(table.times[i + 1]), xtol=1e-6,
        )
        if fy > u[i]:
            t = math.exp(y)
    return t


def simulate_measurement(x_true, t, model, rng):
    """Draw an outcome with the true-parameter probabilities."""
    p = likelihood(1, x_true, t, model)
    return 1 if rng.random() < p else -1


def estimate_t_opt(model, x):
    """Numerically optimal single-shot time at parameter value ``x``."""
    m = model.with_x(x)
    sp = m.spectrum
    scale = 1.0 / sp.g
    lo = 1e-3 * scale
    hi = 1e3 * scale * max(m.n, 1) * max(1.0, 1.0 / (sp.g * sp.tau_c))
    return maximize_qfi_numeric(m, (lo, hi), n_grid=400).t_opt


def candidate_times(t_center, n=200, span=20.0):
    return np.geomspace(t_center / span, t_center * span, n)


@dataclass(frozen=True)
class AdaptiveConfig:
    """Everything one adaptive run needs.

    ``model`` is the inference model; ``truth`` generates the outcomes and
    defaults to ``model``. Nuisance parameters are read from the spectrum.
    """

    model: object
    x_true: float
    prior_range: tuple
    n_measurements: int = 300
    grid_size: int = 512
    spacing: str = "linear"
    n_candidates: int = 200
    candidate_span: float = 20.0
    seed: int = 0
    realizations: int = 1
    truth: object = None
    refine: bool = False

    def __post_init__(self):
        lo, hi = self.prior_range
        if not lo < self.x_true <= hi:
            raise ValueError("true value must lie inside the prior range (x_min, x_max]")
        if self.grid_size < 64:
            raise ValueError("grid_size must be at least 64")
        if self.n_measurements < 0:
            raise ValueError("n_measurements must be non-negative")
        if self.realizations < 1:
            raise ValueError("need at least one realization")

    @property
    def truth_model(self):
        return (self.truth or self.model).with_x(self.x_true)


@dataclass
class TrajectoryRecord:
    index: int
    t: np.ndarray
    outcome: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    backend: str = ""
    posterior: Posterior = field(default=None, repr=False)

    @property
    def relative_error(self):
        return self.std / self.mean

    def __len__(self):
        return len(self.t)


@dataclass
class EnsembleResult:
    config: AdaptiveConfig
    trajectories: list
    t_opt_estimate: float

    def _stack(self, name):
        return np.vstack([getattr(r, name) for r in self.trajectories])

    @property
    def mean_t(self):
        return self._stack("t").mean(axis=0)

    @property
    def mean_relative_error(self):
        return self._stack("relative_error").mean(axis=0)

    @property
    def rmse_relative(self):
        """Root-mean-square error of the posterior mean relative to the truth."""
        x = self.config.x_true
        return np.sqrt(np.mean((self._stack("mean") - x) ** 2, axis=0)) / x


def _setup(config):
    prior = init_prior(config.prior_range, config.grid_size, config.spacing)
    t_est = estimate_t_opt(config.model, prior.mean)
    times = candidate_times(t_est, config.n_candidates, config.candidate_span)
    table = LikelihoodTable.build(config.model, prior.grid, times)
    return prior, t_est, table


def run_realization(config, index, prior=None, table=None):
    """One sequential adaptive run; RNG stream derived from (seed, index)."""
    if prior is None or table is None:
        prior, _, table = _setup(config)
    rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(index,)))
    truth = config.truth_model
    n = config.n_measurements
    ts, ds, means, stds = (np.empty(n) for _ in range(4))
    post = prior
    col = {t: j for j, t in enumerate(table.times)}
    for m in range(n):
        t = select_time(post, table.times, config.model, table, config.refine)
        d = simulate_measurement(config.x_true, t, truth, rng)
        j = col.get(t)
        if j is None:
            post = posterior_update(post, d, t, config.model)
        else:
            post = _update(post, table.p_plus[:, j] if d == 1 else table.p_minus[:, j])
        ts[m], ds[m], means[m], stds[m] = t, d, post.mean, post.std
    return TrajectoryRecord(index, ts, ds, means, stds, config.model.resolved_backend, post)


def _run_chunk(config, indices):
    prior, _, table = _setup(config)
    out = []
    for i in indices:
        rec = run_realization(config, i, prior, table)
        rec.posterior = None
        out.append(rec)
    return out


def run_protocol(config, threads=1):
    """Run ``config.realizations`` independent realizations.

    Realizations are split across ``threads`` worker processes; results are
    ordered by realization index, so output does not depend on scheduling.
    """
    prior, t_est, table = _setup(config)
    idx = list(range(config.realizations))
    if threads <= 1 or len(idx) == 1:
        recs = [run_realization(config, i, prior, table) for i in idx]
    else:
        chunks = [idx[k::threads] for k in range(threads) if idx[k::threads]]
        with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            parts = pool.map(_run_chunk, [config] * len(chunks), chunks)
            recs = sorted((r for part in parts for r in part), key=lambda r: r.index)
    return EnsembleResult(config, recs, t_est)
