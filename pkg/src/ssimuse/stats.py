"""Rank statistics for the replication benchmark.

Self-contained Kruskal-Wallis test: pooled mid-rank ties, the tie-corrected
H statistic, and a chi-square survival function evaluated through the
regularized upper incomplete gamma (power series below the a+1 crossover,
modified Lentz continued fraction above). Keeping the p-value in-package
avoids a statistics dependency and leaves scipy free to act as an
independent oracle in the tests.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

_EPS = 1e-15
_MAX_ITER = 10_000


def rank_with_ties(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """1-based ranks with tied values sharing their mid rank.

    Returns (ranks, tie_sizes); tie_sizes lists the size of every run of
    equal values (singletons included), as needed by the tie correction.
    """
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.size, dtype=np.float64)
    sorted_values = values[order]
    run_starts = np.concatenate([[0], np.nonzero(np.diff(sorted_values))[0] + 1])
    run_ends = np.concatenate([run_starts[1:], [values.size]])
    for start, end in zip(run_starts, run_ends):
        ranks[order[start:end]] = 0.5 * (start + end - 1) + 1.0
    return ranks, run_ends - run_starts


def _lower_gamma_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) for x < a + 1."""
    term = 1.0 / a
    total = term
    denom = a
    for _ in range(_MAX_ITER):
        denom += 1.0
        term *= x / denom
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _upper_gamma_contfrac(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) for x >= a + 1 (Lentz)."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def reg_gamma_q(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x), clamped to [0, 1]."""
    if a <= 0 or x < 0:
        raise ValueError(f"need a > 0 and x >= 0, got a={a}, x={x}")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        q = 1.0 - _lower_gamma_series(a, x)
    else:
        q = _upper_gamma_contfrac(a, x)
    return min(max(q, 0.0), 1.0)


def chi2_sf(x: float, df: int) -> float:
    """Chi-square survival function P(X >= x) with df degrees of freedom."""
    if df < 1:
        raise ValueError(f"df must be >= 1, got {df}")
    if x <= 0:
        return 1.0
    return reg_gamma_q(df / 2.0, x / 2.0)


def kruskal_wallis(groups: Sequence[Sequence[float]]) -> tuple[float, int, float]:
    """Kruskal-Wallis H statistic, degrees of freedom, and p-value.

    Pools all observations, ranks with mid-rank ties, and applies the tie
    correction 1 - sum(t^3 - t) / (N^3 - N). When every observation is
    identical the test carries no information and (H=0, df, p=1) is returned.
    """
    sizes = [len(g) for g in groups]
    if len(groups) < 2 or min(sizes) < 1 or sum(sizes) < 3:
        raise ValueError("need >= 2 groups, each nonempty, with >= 3 observations total")
    pooled = np.concatenate([np.asarray(g, dtype=np.float64) for g in groups])
    total = pooled.size
    df = len(groups) - 1
    ranks, tie_sizes = rank_with_ties(pooled)
    correction = 1.0 - float((tie_sizes**3 - tie_sizes).sum()) / (total**3 - total)
    if correction == 0.0:  # every observation identical
        return 0.0, df, 1.0
    h = 0.0
    offset = 0
    for size in sizes:
        rank_sum = float(ranks[offset : offset + size].sum())
        h += rank_sum * rank_sum / size
        offset += size
    h = (12.0 / (total * (total + 1)) * h - 3.0 * (total + 1)) / correction
    return h, df, chi2_sf(h, df)
