"""Satisficing index of a batch by bisection on the level alpha.

The index is 1 - alpha_star where alpha_star is the feasibility boundary of

    m(alpha) = inf_eta { eta + f(alpha) * mean(phi*(d - tau - eta)) } <= threshold

with threshold 0 (the target is already embedded in the objective).  Under
f(alpha) = 1/alpha the risk is nonincreasing in alpha, so the feasible set
sits above the boundary and bisection returns its smallest feasible level.
Under f(alpha) = 1/(1-alpha) the geometry mirrors: the feasible set sits
below the boundary and bisection returns its largest feasible level; the
index is 1 - alpha_star in both cases.

For the CVaR kind the whole problem collapses to maximizing the concave
map alpha -> mean(min{-alpha*(d - tau), 1}), which this module solves as an
independent second route.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .divergence import DivergenceSpec
from .ranking import RankingReport, rank_items
from .risk_core import (
    ALPHA_MIN,
    ItemBatch,
    RegretScaling,
    empirical_oce_risk,
    golden_section_min,
)

__all__ = [
    "EPS_FEAS",
    "BatchSolution",
    "satisficing_binary_search",
    "cvar_satisficing_direct",
    "solve_items",
    "rank_batch",
]

# absolute slack on the constraint evaluation, propagated from the inner solver
EPS_FEAS = 1e-9


@dataclass(frozen=True)
class BatchSolution:
    item_id: str
    alpha_star: float
    index: float
    eta_star: float
    feasible_at_alpha_star: bool
    bisection_steps: int
    scaling: RegretScaling
    spec: DivergenceSpec


def satisficing_binary_search(
    batch: ItemBatch,
    spec: DivergenceSpec,
    scaling: RegretScaling = RegretScaling.INVERSE_ALPHA,
    epsilon: float = 1e-4,
    threshold: float = 0.0,
) -> BatchSolution:
    """Bisection on alpha until the interval width is <= epsilon.

    Returns the feasible side of the final interval.  Degenerate batches
    short-circuit: infeasible at every level gives index 0 under 1/alpha
    (alpha_star = 1) and index ~1 under 1/(1-alpha); feasible at every level
    gives the opposite ends.
    """
    if not epsilon > 0.0:
        raise ValueError("epsilon must be positive")

    def solve(alpha):
        return empirical_oce_risk(batch, alpha, spec, scaling)

    def feasible(result):
        return result.value <= threshold + EPS_FEAS

    def solution(alpha, result, steps):
        return BatchSolution(
            item_id=batch.item_id,
            alpha_star=alpha,
            index=1.0 - alpha,
            eta_star=result.eta_star,
            feasible_at_alpha_star=feasible(result),
            bisection_steps=steps,
            scaling=scaling,
            spec=spec,
        )

    if scaling is RegretScaling.INVERSE_ALPHA:
        # feasibility is nondecreasing in alpha
        lo, hi = ALPHA_MIN, 1.0
        r_hi = solve(hi)
        if not feasible(r_hi):
            return solution(1.0, r_hi, 0)
        r_lo = solve(lo)
        if feasible(r_lo):
            return solution(lo, r_lo, 0)
        steps = 0
        while hi - lo > epsilon:
            mid = 0.5 * (lo + hi)
            steps += 1
            if feasible(solve(mid)):
                hi = mid
            else:
                lo = mid
        return solution(hi, solve(hi), steps)

    # 1/(1-alpha): feasibility is nonincreasing in alpha; mirror the search
    lo, hi = ALPHA_MIN, 1.0 - ALPHA_MIN
    r_lo = solve(lo)
    if not feasible(r_lo):
        return solution(lo, r_lo, 0)
    r_hi = solve(hi)
    if feasible(r_hi):
        return solution(hi, r_hi, 0)
    steps = 0
    while hi - lo > epsilon:
        mid = 0.5 * (lo + hi)
        steps += 1
        if feasible(solve(mid)):
            lo = mid
        else:
            hi = mid
    return solution(lo, solve(lo), steps)


def cvar_satisficing_direct(batch: ItemBatch) -> float:
    """Index of the CVaR satisficing problem by direct concave maximization
    of mean(min{-alpha*(d - tau), 1}) over alpha in (0, 1], clipped at 0.

    Independent of the bisection route; the two must agree to within the
    bisection tolerance.
    """
    x = batch.samples - batch.target

    def negated(alpha: float) -> float:
        return -float(np.mean(np.minimum(-alpha * x, 1.0)))

    _, best, _ = golden_section_min(negated, 0.0, 1.0, 1e-8)
    return min(1.0, max(0.0, -best))


def solve_items(
    items: list[ItemBatch],
    spec: DivergenceSpec,
    scaling: RegretScaling = RegretScaling.INVERSE_ALPHA,
    epsilon: float = 1e-4,
    threshold: float = 0.0,
) -> list[BatchSolution]:
    """Independent per-item solves with distinct-id validation."""
    if not items:
        raise ValueError("need at least one item")
    ids = [b.item_id for b in items]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate item_ids")
    return [satisficing_binary_search(b, spec, scaling, epsilon, threshold) for b in items]


def rank_batch(
    items: list[ItemBatch],
    spec: DivergenceSpec,
    scaling: RegretScaling = RegretScaling.INVERSE_ALPHA,
    epsilon: float = 1e-4,
    threshold: float = 0.0,
) -> RankingReport:
    """Solve each item independently and rank descending by index."""
    solutions = solve_items(items, spec, scaling, epsilon, threshold)
    return rank_items([(s.item_id, s.index) for s in solutions])
