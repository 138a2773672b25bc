"""Ranking construction, inversion-loss metric, and ranking-quality bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb, lgamma
from typing import NamedTuple

__all__ = [
    "RankEntry",
    "RankingReport",
    "rank_items",
    "inversion_loss",
    "gumbel_cdf",
    "binomial_cdf",
    "loss_bound_probability",
]

TIE_TOL = 1e-9


class RankEntry(NamedTuple):
    item_id: str
    index: float
    rank: int


@dataclass(frozen=True)
class RankingReport:
    """Ordered items with competition ranks; ties share the smaller rank."""

    entries: tuple[RankEntry, ...]
    ties: tuple[tuple[str, ...], ...]
    reference: tuple[str, ...] | None = None
    inversion_loss: int | None = None
    validity: float | None = None


def rank_items(scores) -> RankingReport:
    """Sort (item_id, index) pairs descending by index with competition ranks.

    Ties are detected at TIE_TOL on adjacent sorted scores and broken by
    item_id lexicographic order in the listing.
    """
    scores = [(str(i), float(v)) for i, v in scores]
    ids = [i for i, _ in scores]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate item_ids")
    ordered = sorted(scores, key=lambda p: (-p[1], p[0]))
    entries: list[RankEntry] = []
    tie_groups: list[tuple[str, ...]] = []
    pos = 0
    while pos < len(ordered):
        end = pos + 1
        while end < len(ordered) and ordered[end - 1][1] - ordered[end][1] <= TIE_TOL:
            end += 1
        group = ordered[pos:end]
        for item_id, index in group:
            entries.append(RankEntry(item_id, index, pos + 1))
        if len(group) > 1:
            tie_groups.append(tuple(i for i, _ in group))
        pos = end
    return RankingReport(entries=tuple(entries), ties=tuple(tie_groups))


def inversion_loss(estimated, truth) -> int:
    """Number of unordered pairs {i, j} ordered oppositely by the two score
    vectors.  Ties in the estimated scores never count; ties in the truth are
    rejected."""
    est = {str(i): float(v) for i, v in estimated}
    tru = {str(i): float(v) for i, v in truth}
    if len(est) != len(list(estimated)) or len(tru) != len(list(truth)):
        raise ValueError("duplicate item_ids")
    if set(est) != set(tru):
        raise ValueError("estimated and truth must cover the same item_ids")
    if len(set(tru.values())) != len(tru):
        raise ValueError("truth scores must be tie-free")
    ids = sorted(est)
    count = 0
    for a in range(len(ids)):
        for b in range(a + 1, len(ids)):
            de = est[ids[a]] - est[ids[b]]
            dt = tru[ids[a]] - tru[ids[b]]
            if de * dt < 0.0:
                count += 1
    return count


def gumbel_cdf(x: float, location: float, scale: float) -> float:
    """exp(-exp(-(x - location)/scale))."""
    if not scale > 0.0:
        raise ValueError(f"scale={scale} must be positive")
    z = (x - location) / scale
    if z < -700.0:
        return 0.0
    return math.exp(-math.exp(-z))


def binomial_cdf(e: int, n: int, p: float) -> float:
    """P(X <= e) for X ~ Binomial(n, p); exact rationals for n <= 64, else
    log-space summation."""
    if not 0 <= e <= n:
        raise ValueError(f"e={e} outside [0, {n}]")
    p = min(1.0, max(0.0, p))
    if p == 0.0:
        return 1.0
    if p == 1.0:
        return 1.0 if e == n else 0.0
    if n <= 64:
        pf = Fraction(p)
        qf = 1 - pf
        total = sum(comb(n, i) * pf**i * qf ** (n - i) for i in range(e + 1))
        return float(total)
    logp, logq = math.log(p), math.log1p(-p)
    logs = [
        lgamma(n + 1) - lgamma(i + 1) - lgamma(n - i + 1) + i * logp + (n - i) * logq
        for i in range(e + 1)
    ]
    m = max(logs)
    return min(1.0, math.exp(m) * sum(math.exp(v - m) for v in logs))


def loss_bound_probability(
    items: int,
    e: int,
    gap_c: float,
    kappa_prime: float,
    iters: int,
    literal: bool = False,
) -> float:
    """P(inversion loss <= e) for an online run of `iters` steps.

    The per-pair inversion probability is the Gumbel tail above the minimal
    ranking separation gap_c, with location kappa_prime/iters and unit scale;
    the loss is Binomial over the C(items, 2) pairs.  `literal` swaps the
    binomial orientation to the printed (1-p)^i * p^(n-i) form.
    """
    if items < 2:
        raise ValueError("items must be >= 2")
    if not gap_c > 0.0:
        raise ValueError("gap_c must be positive")
    if iters < 1:
        raise ValueError("iters must be >= 1")
    n = comb(items, 2)
    if not 0 <= e <= n:
        raise ValueError(f"e={e} outside [0, {n}]")
    p_inv = 1.0 - gumbel_cdf(gap_c, kappa_prime / iters, 1.0)
    return binomial_cdf(e, n, 1.0 - p_inv if literal else p_inv)
