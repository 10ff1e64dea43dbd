"""The estimator family for union probabilities and tail functionals.

Monte Carlo estimators are built from per-replicate values: the estimate
is their mean, the reported ``sample_std`` their per-replicate standard
deviation and ``stderr = sample_std / sqrt(replicates)``.  For the
partition-based estimators one "replicate" is a full sweep that draws one
conditional sample per index cell; the total sampling effort is then
``cells * replicates``, mirroring how the per-cell budget is allocated.

Degeneration means a sample variance of exactly zero: every drawn value
was identical, and the estimator collapses to its deterministic part.
That is detected by exact min/max comparison and never approximated, so a
degenerated first-order estimator is bit-identical to the Bonferroni
upper bound.

The partially deterministic estimators ``alpha_n`` are equivalent to
attaching unit-weight control variates built from the exceedance count to
crude Monte Carlo; an optimized control-variate weight is intentionally
not implemented.

Replicates are processed in fixed-size chunks with one derived substream
per chunk, and chunk statistics are merged in chunk order, so results are
bit-reproducible for a given (model, gamma, replicates, seed) regardless
of scheduling.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import events as ev
from ._rng import derive_generator, iter_chunks
from .errors import CapabilityError
from .models import DependenceModel, FinitePatternModel

__all__ = [
    "EstimateResult",
    "BonferroniBounds",
    "Payoff",
    "bonferroni_bounds",
    "estimate_cmc",
    "estimate_alpha_n",
    "estimate_alpha_1_is",
    "estimate_alpha_2_is",
    "estimate_beta_n",
    "estimate_beta_dagger_alpha",
    "ESTIMATOR_NAMES",
    "run_estimator",
    "exhaustive_estimator_mean",
    "exhaustive_residual_second_moment",
    "exhaustive_variance_components",
]


@dataclass(frozen=True)
class EstimateResult:
    estimate: float
    sample_std: float
    stderr: float
    replicates: int
    degenerate: bool
    seed: int
    wall_ms: float

    def to_json(self) -> dict:
        return {
            "estimate": self.estimate,
            "sample_std": self.sample_std,
            "stderr": self.stderr,
            "replicates": self.replicates,
            "degenerate": self.degenerate,
            "seed": self.seed,
            "wall_ms": self.wall_ms,
        }


class BonferroniBounds(NamedTuple):
    upper: float
    second: float


@dataclass(frozen=True)
class Payoff:
    """The random factor Y in tail functionals ``E[Y 1{E >= n}]``.

    ``constant_one`` recovers plain probabilities.  ``residual_alternating(m)``
    is the alternating binomial sum ``sum_{i<=m} (-1)^i C(E, i)`` of the
    exceedance count, the payoff that turns a partition estimator into a
    union-probability estimator.  ``custom`` wraps any deterministic
    function of the sampled vector and its event pattern.
    """

    kind: str
    order: Optional[int] = None
    fn: Optional[Callable] = None

    @staticmethod
    def constant_one() -> "Payoff":
        return Payoff(kind="constant_one")

    @staticmethod
    def residual_alternating(order: int) -> "Payoff":
        if order < 0:
            raise ValueError("order must be non-negative")
        return Payoff(kind="residual_alternating", order=int(order))

    @staticmethod
    def custom(fn: Callable) -> "Payoff":
        return Payoff(kind="custom", fn=fn)

    def values(self, x, patterns) -> np.ndarray:
        patterns = np.atleast_2d(patterns)
        if self.kind == "constant_one":
            return np.ones(patterns.shape[0])
        if self.kind == "residual_alternating":
            table = ev.payoff_alternating_table(patterns.shape[1], self.order)
            return table[patterns.sum(axis=1)]
        return np.asarray(self.fn(x, patterns), dtype=float)

    __call__ = values


class _Stats:
    """Streaming mean/variance/min/max merged in fixed chunk order."""

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0
        self.vmin = math.inf
        self.vmax = -math.inf

    def update(self, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        nb = values.size
        if nb == 0:
            return
        mb = float(values.mean())
        m2b = float(((values - mb) ** 2).sum())
        if self.n == 0:
            self.n, self.mean, self.m2 = nb, mb, m2b
        else:
            n = self.n + nb
            delta = mb - self.mean
            self.mean += delta * nb / n
            self.m2 += m2b + delta * delta * self.n * nb / n
            self.n = n
        self.vmin = min(self.vmin, float(values.min()))
        self.vmax = max(self.vmax, float(values.max()))

    @property
    def degenerate(self) -> bool:
        return self.n > 0 and self.vmin == self.vmax

    def result(self, seed: int, t0: float) -> EstimateResult:
        if self.n == 0:
            raise ValueError("no replicate values accumulated")
        if self.degenerate:
            estimate = self.vmin
            std = 0.0
        else:
            estimate = self.mean
            std = math.sqrt(self.m2 / (self.n - 1)) if self.n > 1 else 0.0
        stderr = std / math.sqrt(self.n) if self.n > 0 else 0.0
        return EstimateResult(
            estimate=estimate,
            sample_std=std,
            stderr=stderr,
            replicates=self.n,
            degenerate=self.degenerate,
            seed=int(seed),
            wall_ms=(time.perf_counter() - t0) * 1e3,
        )


def _deterministic_result(value: float, replicates: int, seed: int, t0: float) -> EstimateResult:
    return EstimateResult(
        estimate=float(value),
        sample_std=0.0,
        stderr=0.0,
        replicates=int(replicates),
        degenerate=True,
        seed=int(seed),
        wall_ms=(time.perf_counter() - t0) * 1e3,
    )


def _check_replicates(replicates: int) -> int:
    replicates = int(replicates)
    if replicates < 1:
        raise ValueError("replicates must be at least 1")
    return replicates


def _marginals(model: DependenceModel, gamma: float) -> np.ndarray:
    if not model.capabilities.marginal_prob:
        raise CapabilityError(f"{type(model).__name__} cannot compute marginal probabilities")
    return np.array([model.marginal_survival(i, gamma) for i in range(model.d)])


def _pair_values(model: DependenceModel, gamma: float):
    if not model.capabilities.pair_prob:
        raise CapabilityError(f"{type(model).__name__} cannot compute pairwise probabilities")
    pairs = [(i, j) for i in range(model.d) for j in range(i + 1, model.d)]
    vals = np.array([model.pair_survival(i, j, gamma) for i, j in pairs])
    return pairs, vals


def bonferroni_bounds(model: DependenceModel, gamma: float) -> BonferroniBounds:
    """First two inclusion-exclusion truncations: the upper bound
    ``sum_i P(A_i)`` and the lower bound with pairwise terms subtracted."""
    margs = _marginals(model, gamma)
    upper = float(np.sum(margs))
    _, pair_vals = _pair_values(model, gamma)
    second = upper - float(np.sum(pair_vals))
    return BonferroniBounds(upper=upper, second=second)


def _run_chunks(values_for_chunk, replicates: int, seed: int) -> _Stats:
    stats = _Stats()
    for chunk, count in iter_chunks(replicates):
        rng = derive_generator(seed, chunk)
        stats.update(values_for_chunk(rng, count))
    return stats


def _run_composite(det: float, terms, sweeps: int, seed: int) -> _Stats:
    """Sweep values ``det + sum_k w_k z_k`` with one substream per (term, chunk)."""
    stats = _Stats()
    for chunk, count in iter_chunks(sweeps):
        v = np.full(count, det, dtype=float)
        for k, (weight, zfn) in enumerate(terms):
            rng = derive_generator(seed, k + 1, chunk)
            v = v + weight * zfn(rng, count)
        stats.update(v)
    return stats


# ---------------------------------------------------------------------------
# Crude and partially deterministic estimators


def estimate_cmc(model: DependenceModel, gamma: float, replicates: int, seed: int) -> EstimateResult:
    """Crude Monte Carlo: mean of the union indicator ``1{E >= 1}``."""
    replicates = _check_replicates(replicates)
    t0 = time.perf_counter()

    def chunk_values(rng, count):
        x = model.sample(rng, count)
        counts = model.exceedance_patterns(x, gamma).sum(axis=1)
        return (counts >= 1).astype(float)

    return _run_chunks(chunk_values, replicates, seed).result(seed, t0)


def estimate_alpha_n(model: DependenceModel, gamma: float, n: int, replicates: int, seed: int) -> EstimateResult:
    """Deterministic inclusion-exclusion head of depth n plus the sampled
    alternating remainder.

    ``n=1`` computes the marginal sum exactly and estimates the rest;
    ``n=2`` also computes the pairwise layer.  The remainder vanishes
    unless a replicate has more than n exceedances, so deep in the tail
    the estimator degenerates to the corresponding Bonferroni bound.
    """
    replicates = _check_replicates(replicates)
    if n not in (1, 2):
        raise ValueError("only the first- and second-order variants are implemented")
    t0 = time.perf_counter()
    bounds = bonferroni_bounds(model, gamma)
    det = bounds.upper if n == 1 else bounds.second
    table = ev.residual_term_table(model.d, n)

    def chunk_values(rng, count):
        x = model.sample(rng, count)
        counts = model.exceedance_patterns(x, gamma).sum(axis=1)
        return det + table[counts]

    return _run_chunks(chunk_values, replicates, seed).result(seed, t0)


# ---------------------------------------------------------------------------
# Importance sampling through conditioning mixtures


def _grouped_mixture_values(rng, count, handles, probs, value_fn):
    """Draw mixture components, then sample each group's conditional law.

    Groups are processed in index order with the same chunk stream, so the
    draw is reproducible.  ``value_fn(k, x)`` maps component index and
    conditional samples to per-replicate values.
    """
    out = np.empty(count)
    picks = rng.choice(len(handles), size=count, p=probs)
    for k, handle in enumerate(handles):
        sel = np.where(picks == k)[0]
        if sel.size == 0:
            continue
        x = handle.draw(rng, sel.size)
        out[sel] = value_fn(k, x)
    return out


def estimate_alpha_1_is(model: DependenceModel, gamma: float, replicates: int, seed: int) -> EstimateResult:
    """First-order conditioning-mixture importance sampler.

    Picks an event with probability proportional to its marginal
    probability, samples the law given that event, and averages
    ``abar / E`` where ``abar`` is the marginal sum.  The union event has
    probability one under the mixture, so no replicate is wasted.
    """
    replicates = _check_replicates(replicates)
    if not model.capabilities.conditional_single:
        raise CapabilityError(f"{type(model).__name__} cannot sample conditioned on one event")
    t0 = time.perf_counter()
    margs = _marginals(model, gamma)
    abar = float(np.sum(margs))
    if abar <= 0.0:
        raise ValueError("the mixture is undefined when every marginal probability is zero")
    probs = margs / abar
    handles = [model.conditional_given_exceedance(i, gamma) for i in range(model.d)]

    def chunk_values(rng, count):
        def value(_, x):
            counts = model.exceedance_patterns(x, gamma).sum(axis=1)
            return abar / counts

        return _grouped_mixture_values(rng, count, handles, probs, value)

    return _run_chunks(chunk_values, replicates, seed).result(seed, t0)


def estimate_alpha_2_is(model: DependenceModel, gamma: float, replicates: int, seed: int) -> EstimateResult:
    """Second-order conditioning-mixture importance sampler.

    Picks an event pair proportionally to its joint probability, samples
    given both events, and averages ``abar - 2 q / E`` with ``q`` the sum
    of the pairwise probabilities.  When ``q`` is exactly zero there is
    nothing to sample: the value is the marginal sum, flagged degenerate.
    """
    replicates = _check_replicates(replicates)
    if not model.capabilities.conditional_pair:
        raise CapabilityError(f"{type(model).__name__} cannot sample conditioned on event pairs")
    t0 = time.perf_counter()
    margs = _marginals(model, gamma)
    abar = float(np.sum(margs))
    pairs, pair_vals = _pair_values(model, gamma)
    q = float(np.sum(pair_vals))
    if q == 0.0:
        return _deterministic_result(abar, 0, seed, t0)
    probs = pair_vals / q
    handles = [model.conditional_given_pair_exceedance(i, j, gamma) for i, j in pairs]

    def chunk_values(rng, count):
        def value(_, x):
            counts = model.exceedance_patterns(x, gamma).sum(axis=1)
            return abar - 2.0 * q / counts

        return _grouped_mixture_values(rng, count, handles, probs, value)

    return _run_chunks(chunk_values, replicates, seed).result(seed, t0)


# ---------------------------------------------------------------------------
# Partition estimators


def _cell_handles(model: DependenceModel, gamma: float, n: int):
    """Cells of the order-n partition with their probabilities and samplers."""
    cells = ev.partition_cells(model.d, n)
    if n == 1:
        if not model.capabilities.conditional_single:
            raise CapabilityError(f"{type(model).__name__} cannot sample conditioned on one event")
        weights = [model.marginal_survival(c.events[0], gamma) for c in cells]
        handles = [model.conditional_given_exceedance(c.events[0], gamma) for c in cells]
    elif n == 2:
        if not model.capabilities.conditional_pair:
            raise CapabilityError(f"{type(model).__name__} cannot sample conditioned on event pairs")
        weights = [model.pair_survival(*c.events, gamma) for c in cells]
        handles = [model.conditional_given_pair_exceedance(*c.events, gamma) for c in cells]
    else:
        raise ValueError("partition estimation is implemented for cell sizes 1 and 2")
    return cells, weights, handles


def estimate_beta_n(
    model: DependenceModel,
    gamma: float,
    n: int,
    payoff: Payoff,
    replicates: int,
    seed: int,
) -> EstimateResult:
    """Partition estimator of ``E[Y 1{E >= n}]``.

    Decomposes ``{E >= n}`` into the disjoint cells indexed by n-subsets,
    samples each cell's conditional law, and recombines with the exact
    cell probabilities.  Each of the ``C(d, n)`` cells receives
    ``ceil(replicates / C(d, n))`` draws.
    """
    replicates = _check_replicates(replicates)
    t0 = time.perf_counter()
    cells, weights, handles = _cell_handles(model, gamma, n)
    sweeps = -(-replicates // len(cells))

    def term(cell, handle):
        def zfn(rng, count):
            x = handle.draw(rng, count)
            patterns = model.exceedance_patterns(x, gamma)
            return payoff.values(x, patterns) * cell.blocked_clear(patterns)

        return zfn

    terms = [(w, term(c, h)) for c, w, h in zip(cells, weights, handles)]
    return _run_composite(0.0, terms, sweeps, seed).result(seed, t0)


def estimate_beta_dagger_alpha(
    model: DependenceModel, gamma: float, n: int, replicates: int, seed: int
) -> EstimateResult:
    """Union probability through the order-n partition estimator.

    ``n=1``: the first cell's conditional expectation is identically one,
    so its contribution is the exact ``P(A_1)`` and only the remaining
    ``d - 1`` cells are sampled (each with ``ceil(replicates / (d-1))``
    draws).  ``n=2``: the marginal layer is exact and the pair cells
    estimate the alternating remainder with payoff ``1 - E``; the cell
    constraint indicator keeps the partition cells disjoint, which is what
    makes the estimator unbiased beyond two dimensions.
    """
    replicates = _check_replicates(replicates)
    if n not in (1, 2):
        raise ValueError("only the first- and second-order variants are implemented")
    t0 = time.perf_counter()
    if n == 1:
        margs = _marginals(model, gamma)
        if not model.capabilities.conditional_single:
            raise CapabilityError(f"{type(model).__name__} cannot sample conditioned on one event")
        det = float(margs[0])
        if model.d == 1:
            return _deterministic_result(det, 0, seed, t0)
        cells = ev.partition_cells(model.d, 1)[1:]
        sweeps = -(-replicates // (model.d - 1))

        def term(cell):
            i = cell.events[0]
            handle = model.conditional_given_exceedance(i, gamma)

            def zfn(rng, count):
                x = handle.draw(rng, count)
                patterns = model.exceedance_patterns(x, gamma)
                return cell.blocked_clear(patterns).astype(float)

            return zfn

        terms = [(float(margs[c.events[0]]), term(c)) for c in cells]
        return _run_composite(det, terms, sweeps, seed).result(seed, t0)

    bounds = bonferroni_bounds(model, gamma)
    cells, weights, handles = _cell_handles(model, gamma, 2)
    sweeps = -(-replicates // len(cells))
    payoff = Payoff.residual_alternating(1)  # 1 - E

    def term(cell, handle):
        def zfn(rng, count):
            x = handle.draw(rng, count)
            patterns = model.exceedance_patterns(x, gamma)
            return payoff.values(x, patterns) * cell.blocked_clear(patterns)

        return zfn

    terms = [(w, term(c, h)) for c, w, h in zip(cells, weights, handles)]
    return _run_composite(bounds.upper, terms, sweeps, seed).result(seed, t0)


# ---------------------------------------------------------------------------
# Registry used by the command line harness

ESTIMATOR_NAMES = (
    "cmc",
    "alpha1",
    "alpha2",
    "alpha1_is",
    "alpha2_is",
    "beta1_alpha",
    "beta2_alpha",
    "bonferroni",
)


def run_estimator(name: str, model: DependenceModel, gamma: float, replicates: int, seed: int) -> EstimateResult:
    """Run a Monte Carlo estimator by its registry name."""
    if name == "cmc":
        return estimate_cmc(model, gamma, replicates, seed)
    if name == "alpha1":
        return estimate_alpha_n(model, gamma, 1, replicates, seed)
    if name == "alpha2":
        return estimate_alpha_n(model, gamma, 2, replicates, seed)
    if name == "alpha1_is":
        return estimate_alpha_1_is(model, gamma, replicates, seed)
    if name == "alpha2_is":
        return estimate_alpha_2_is(model, gamma, replicates, seed)
    if name == "beta1_alpha":
        return estimate_beta_dagger_alpha(model, gamma, 1, replicates, seed)
    if name == "beta2_alpha":
        return estimate_beta_dagger_alpha(model, gamma, 2, replicates, seed)
    raise ValueError(f"unknown estimator {name!r}; valid names: {ESTIMATOR_NAMES}")


# ---------------------------------------------------------------------------
# Exhaustive expectations over finite pattern models
#
# Every estimator above has a closed-form expectation on a finite pattern
# distribution, obtained by enumerating the patterns.  These are the
# oracles behind the unbiasedness and variance-inequality test suites.


def _finite(model) -> FinitePatternModel:
    if not isinstance(model, FinitePatternModel):
        raise TypeError("exhaustive expectations require a finite pattern model")
    return model


def exhaustive_estimator_mean(
    name: str,
    model: FinitePatternModel,
    *,
    n: Optional[int] = None,
    payoff: Optional[Payoff] = None,
) -> float:
    """Exact expectation of an estimator under a finite pattern model."""
    model = _finite(model)
    pmf = model.pmf
    patterns = model.patterns
    counts = patterns.sum(axis=1)
    d = model.d

    if name == "cmc":
        return float(pmf[counts >= 1].sum())

    if name in ("alpha1", "alpha2"):
        order = 1 if name == "alpha1" else 2
        bounds = bonferroni_bounds(model, 0.0)
        det = bounds.upper if order == 1 else bounds.second
        table = ev.residual_term_table(d, order)
        return det + float((pmf * table[counts]).sum())

    if name == "alpha1_is":
        margs = np.array([model.marginal_survival(i) for i in range(d)])
        abar = float(margs.sum())
        total = 0.0
        for i in range(d):
            mask = patterns[:, i]
            cond = pmf[mask] / margs[i]
            total += (margs[i] / abar) * float((cond * (abar / counts[mask])).sum())
        return total

    if name == "alpha2_is":
        margs = np.array([model.marginal_survival(i) for i in range(d)])
        abar = float(margs.sum())
        pairs = [(i, j) for i in range(d) for j in range(i + 1, d)]
        pvals = np.array([model.pair_survival(i, j) for i, j in pairs])
        q = float(pvals.sum())
        if q == 0.0:
            return abar
        total = 0.0
        for (i, j), pv in zip(pairs, pvals):
            mask = patterns[:, i] & patterns[:, j]
            cond = pmf[mask] / pv
            total += (pv / q) * float((cond * (abar - 2.0 * q / counts[mask])).sum())
        return total

    if name == "beta_n":
        if n is None or payoff is None:
            raise ValueError("beta_n needs both n and payoff")
        cells = ev.partition_cells(d, n)
        y = payoff.values(patterns.astype(float), patterns)
        total = 0.0
        for cell in cells:
            req = cell.required_mask(patterns)
            z = y * cell.blocked_clear(patterns)
            total += float((pmf[req] * z[req]).sum())  # P(B_I) E[z | B_I]
        return total

    if name == "beta1_alpha":
        margs = np.array([model.marginal_survival(i) for i in range(d)])
        total = float(margs[0])
        for cell in ev.partition_cells(d, 1)[1:]:
            i = cell.events[0]
            mask = patterns[:, i]
            if margs[i] == 0.0:
                continue
            cond = pmf[mask] / margs[i]
            z = cell.blocked_clear(patterns)[mask].astype(float)
            total += margs[i] * float((cond * z).sum())
        return total

    if name == "beta2_alpha":
        bounds = bonferroni_bounds(model, 0.0)
        total = bounds.upper
        y = ev.payoff_alternating_table(d, 1)[counts]  # 1 - E
        for cell in ev.partition_cells(d, 2):
            i, j = cell.events
            pv = model.pair_survival(i, j)
            if pv == 0.0:
                continue
            mask = patterns[:, i] & patterns[:, j]
            cond = pmf[mask] / pv
            z = (y * cell.blocked_clear(patterns))[mask]
            total += pv * float((cond * z).sum())
        return total

    raise ValueError(f"unknown estimator {name!r}")


def exhaustive_residual_second_moment(model: FinitePatternModel, n: int = 1) -> float:
    """Exact ``E[R_n^2]`` of the alternating remainder."""
    model = _finite(model)
    counts = model.patterns.sum(axis=1)
    table = ev.residual_term_table(model.d, n)
    vals = table[counts]
    return float((model.pmf * vals * vals).sum())


def exhaustive_variance_components(model: FinitePatternModel, n: int, payoff: Payoff) -> dict:
    """Exact per-sweep variances of the partition estimator and its crude form.

    Returns the conditional sweep variance
    ``sum_I P(B_I)^2 Var(Y 1{C_I} | B_I)``, the crude sweep variance
    ``sum_I Var(Y 1{B_I C_I})`` and ``max_I P(B_I)``.
    """
    model = _finite(model)
    pmf = model.pmf
    patterns = model.patterns
    y = payoff.values(patterns.astype(float), patterns)
    conditional = 0.0
    crude = 0.0
    max_cell = 0.0
    for cell in ev.partition_cells(model.d, n):
        req = cell.required_mask(patterns)
        w = float(pmf[req].sum())
        max_cell = max(max_cell, w)
        z = y * cell.blocked_clear(patterns)
        zb = z * req  # Y 1{B_I C_I}
        m_unc = float((pmf * zb).sum())
        v_unc = float((pmf * zb * zb).sum()) - m_unc * m_unc
        crude += v_unc
        if w > 0.0:
            cond = pmf[req] / w
            m_c = float((cond * z[req]).sum())
            v_c = float((cond * z[req] * z[req]).sum()) - m_c * m_c
            conditional += w * w * v_c
    return {
        "conditional_sweep_var": conditional,
        "crude_sweep_var": crude,
        "max_cell_prob": max_cell,
    }
