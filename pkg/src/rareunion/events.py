"""Event-pattern algebra for unions of dependent events.

A *pattern* is a boolean vector recording which of the events
``A_1, ..., A_d`` occurred in one realization; its sum is the exceedance
count ``E``.  This module provides the exact integer identities used by
the estimators (binomial event-count terms, alternating residual terms),
the disjoint partition of ``{E >= m}`` into cells indexed by m-subsets,
and exhaustive enumeration oracles over finite pattern distributions.

Events are indexed from 0 internally; serialized forms are 1-based.
Pattern enumeration order is lexicographic with event 0 as the most
significant bit: index ``k`` has bit ``i`` set iff ``(k >> (d-1-i)) & 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "count_exceedances",
    "binomial_term",
    "residual_term",
    "residual_term_table",
    "payoff_alternating_table",
    "enumerate_patterns",
    "pattern_lex_index",
    "PartitionCell",
    "partition_cells",
    "cell_for_pattern",
    "brute_force_union",
    "brute_force_tail_expectation",
]

MAX_EVENTS = 64


def _as_pattern(pattern) -> np.ndarray:
    arr = np.asarray(pattern, dtype=bool)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("a pattern must be a non-empty boolean vector")
    return arr


def count_exceedances(pattern) -> int:
    """Number of events that occurred in ``pattern``."""
    return int(_as_pattern(pattern).sum())


def binomial_term(count: int, order: int) -> int:
    """``C(E, i) * 1{E >= i}`` with exact integer arithmetic.

    Summing this over one realization counts the i-subsets of occurred
    events, which is what ties the inclusion-exclusion summands to the
    exceedance count.
    """
    count = int(count)
    order = int(order)
    if count < 0 or order < 0:
        raise ValueError("count and order must be non-negative")
    if count > MAX_EVENTS:
        raise ValueError(f"supported up to {MAX_EVENTS} events, got count={count}")
    if count < order:
        return 0
    return math.comb(count, order)


def residual_term(count: int, order: int) -> int:
    """Alternating remainder ``[sum_{i<=n} (-1)^i C(E, i)] * 1{E >= n+1}``.

    This is the random term left over after the first ``n`` layers of the
    inclusion-exclusion expansion are computed deterministically.  It
    vanishes unless at least ``n + 1`` events occurred.
    """
    count = int(count)
    order = int(order)
    if count < 0:
        raise ValueError("count must be non-negative")
    if order < 0:
        raise ValueError("order must be non-negative")
    if count <= order:
        return 0
    total = 0
    for i in range(order + 1):
        total += (-1) ** i * binomial_term(count, i)
    return total


def residual_term_table(d: int, order: int) -> np.ndarray:
    """``residual_term(E, order)`` for ``E = 0..d``, as floats.

    The table is built in exact integer arithmetic and converted once, so
    vectorized estimators can index it by observed counts.
    """
    return np.array([residual_term(e, order) for e in range(d + 1)], dtype=float)


def payoff_alternating_table(d: int, order: int) -> np.ndarray:
    """``sum_{i<=order} (-1)^i C(E, i)`` for ``E = 0..d`` (no indicator)."""
    vals = []
    for e in range(d + 1):
        vals.append(sum((-1) ** i * binomial_term(e, i) for i in range(order + 1)))
    return np.array(vals, dtype=float)


@lru_cache(maxsize=None)
def _patterns_cached(d: int) -> np.ndarray:
    if not 1 <= d <= 20:
        raise ValueError(f"pattern enumeration supports 1 <= d <= 20, got {d}")
    idx = np.arange(1 << d, dtype=np.uint32)
    cols = [(idx >> (d - 1 - i)) & 1 for i in range(d)]
    out = np.stack(cols, axis=1).astype(bool)
    out.setflags(write=False)
    return out


def enumerate_patterns(d: int) -> np.ndarray:
    """All ``2**d`` patterns as a read-only boolean array in lexicographic order."""
    return _patterns_cached(d)


def pattern_lex_index(pattern) -> int:
    """Position of ``pattern`` in the lexicographic enumeration."""
    arr = _as_pattern(pattern)
    d = arr.size
    return int(sum(int(b) << (d - 1 - i) for i, b in enumerate(arr)))


@dataclass(frozen=True)
class PartitionCell:
    """One cell ``B_I C_I`` of the disjoint decomposition of ``{E >= m}``.

    ``events`` is the index set I (all must occur); ``blocked`` are the
    indices outside I that precede max(I) in the event order and must all
    fail.  Together the cells with ``|I| = m`` partition ``{E >= m}``.
    """

    events: tuple[int, ...]
    blocked: tuple[int, ...]

    def required_mask(self, patterns: np.ndarray) -> np.ndarray:
        """1{B_I}: all events in the cell's index set occurred."""
        patterns = np.atleast_2d(patterns)
        return patterns[:, list(self.events)].all(axis=1)

    def blocked_clear(self, patterns: np.ndarray) -> np.ndarray:
        """1{C_I}: none of the blocked indices occurred."""
        patterns = np.atleast_2d(patterns)
        if not self.blocked:
            return np.ones(patterns.shape[0], dtype=bool)
        return ~patterns[:, list(self.blocked)].any(axis=1)

    def contains(self, patterns: np.ndarray) -> np.ndarray:
        """1{B_I C_I}."""
        return self.required_mask(patterns) & self.blocked_clear(patterns)


def _check_permutation(d: int, permutation: Optional[Sequence[int]]) -> tuple[int, ...]:
    if permutation is None:
        return tuple(range(d))
    perm = tuple(int(p) for p in permutation)
    if sorted(perm) != list(range(d)):
        raise ValueError(f"permutation must reorder 0..{d - 1}, got {permutation}")
    return perm


def partition_cells(d: int, m: int, permutation: Optional[Sequence[int]] = None) -> list[PartitionCell]:
    """All ``C(d, m)`` cells partitioning ``{E >= m}``.

    The cells depend on the order in which events are scanned; reordering
    gives a different, equally valid partition.  ``permutation`` lists
    event indices in scan order (identity by default).
    """
    if not 1 <= m <= d:
        raise ValueError(f"need 1 <= m <= d, got m={m}, d={d}")
    perm = _check_permutation(d, permutation)
    rank = {event: pos for pos, event in enumerate(perm)}
    cells = []
    for combo in _combinations_lex(d, m):
        max_rank = max(rank[e] for e in combo)
        blocked = tuple(
            e for e in perm if rank[e] < max_rank and e not in combo
        )
        cells.append(PartitionCell(events=combo, blocked=tuple(sorted(blocked))))
    return cells


def _combinations_lex(d: int, m: int):
    import itertools

    return itertools.combinations(range(d), m)


def cell_for_pattern(pattern, m: int, permutation: Optional[Sequence[int]] = None) -> Optional[PartitionCell]:
    """The unique cell containing ``pattern``, or None when fewer than m events occurred.

    The containing cell's index set consists of the first m occurred events
    in scan order; all earlier non-occurrences are then blocked indices.
    """
    arr = _as_pattern(pattern)
    d = arr.size
    perm = _check_permutation(d, permutation)
    hits = [e for e in perm if arr[e]]
    if len(hits) < m:
        return None
    chosen = tuple(sorted(hits[:m]))
    rank = {event: pos for pos, event in enumerate(perm)}
    max_rank = max(rank[e] for e in chosen)
    blocked = tuple(sorted(e for e in perm if rank[e] < max_rank and e not in chosen))
    return PartitionCell(events=chosen, blocked=blocked)


def _model_pmf(model) -> tuple[int, np.ndarray]:
    d = int(model.d)
    pmf = np.asarray(model.pmf, dtype=float)
    if d > 20:
        raise ValueError("exhaustive enumeration supports d <= 20")
    if pmf.shape != (1 << d,):
        raise ValueError("pmf length must be 2**d")
    if abs(pmf.sum() - 1.0) > 1e-12 or (pmf < 0).any():
        raise ValueError("pmf must be a probability vector summing to 1 within 1e-12")
    return d, pmf


def brute_force_union(model) -> float:
    """Exact union probability of a finite pattern distribution."""
    d, pmf = _model_pmf(model)
    counts = enumerate_patterns(d).sum(axis=1)
    return float(pmf[counts >= 1].sum())


def brute_force_tail_expectation(model, n: int, payoff: Optional[Callable] = None) -> float:
    """Exact ``E[Y 1{E >= n}]`` over a finite pattern distribution.

    ``payoff`` is called as ``payoff(x, patterns)`` on the full enumeration
    (with x the patterns as floats) and must return one value per pattern;
    None means Y identically one.
    """
    d, pmf = _model_pmf(model)
    patterns = enumerate_patterns(d)
    counts = patterns.sum(axis=1)
    if payoff is None:
        y = np.ones(patterns.shape[0])
    else:
        y = np.asarray(payoff(patterns.astype(float), patterns), dtype=float)
    mask = counts >= n
    return float((pmf[mask] * y[mask]).sum())
