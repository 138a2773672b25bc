"""Solution-quality machinery for the batch solver.

Implements the Lagrangian candidate solve, the resampling acceptance test for
a candidate level, the multi-group bound estimate, and the two closed-form
calculators that relate sample size to ranking validity.

The candidate test validates statistical feasibility of a fixed level on a
large fresh sample; the group estimate averages Lagrangian solves over
independent groups.  With f(alpha) = 1/(1-alpha) the two reports sandwich the
index with the stated confidences (the orientation that the Table-2-style
replication exercises); with f(alpha) = 1/alpha the same formulas are
reported under the same names, where standard weak duality orients them the
opposite way around the value 1 - alpha*.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .batch_solver import BatchSolution, satisficing_binary_search
from .divergence import DivergenceSpec, conjugate_domain, conjugate_value_array
from .errors import InfeasibleParametersError, ParseError
from .risk_core import (
    ALPHA_MIN,
    ItemBatch,
    RegretScaling,
    empirical_oce_risk,
    eta_bracket,
    golden_section_min,
    regret_scale,
)

__all__ = [
    "BoundParams",
    "UpperBoundReport",
    "LowerBoundReport",
    "SampleSizeResult",
    "normal_cdf",
    "normal_quantile",
    "solve_lagrangian",
    "upper_bound_check",
    "aggregate_group_values",
    "lower_bound_estimate",
    "estimate_dual",
    "shrinking_upper_bound",
    "required_sample_size",
    "ranking_validity_probability",
    "load_bound_params",
]

_PI_CAP = 1e6


def normal_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def normal_quantile(p: float) -> float:
    """z with NormalCDF(z) = p, by bisection on the erf-based CDF to 1e-10."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p={p} outside (0, 1)")
    lo, hi = -13.0, 13.0
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if normal_cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class BoundParams:
    """Constants of the sample-size and ranking-probability calculators.

    All are user-supplied model constants (variance envelope, Lipschitz
    moduli, separation, ...), never estimated from data here.
    """

    sigma2: float
    psi_bar: float
    phi_bar: float
    diameter: float
    lipschitz_pi: float
    tau_gap: float
    gap_c: float
    big_m: float
    beta: float
    gamma: float
    delta: float
    epsilon: float
    m_groups: int

    def __post_init__(self):
        positive = (
            "sigma2", "psi_bar", "phi_bar", "diameter",
            "lipschitz_pi", "big_m", "gap_c", "epsilon",
        )
        for name in positive:
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")
        for name in ("beta", "gamma", "delta"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ValueError(f"{name} must lie in (0, 1)")
        if self.tau_gap < 0.0:
            raise ValueError("tau_gap must be nonnegative")
        if self.epsilon > self.gap_c:
            raise ValueError("epsilon must not exceed gap_c")
        if not self.epsilon > self.lipschitz_pi * self.tau_gap:
            raise ValueError("epsilon must exceed lipschitz_pi * tau_gap")
        if int(self.m_groups) < 1:
            raise ValueError("m_groups must be a positive integer")
        object.__setattr__(self, "m_groups", int(self.m_groups))


@dataclass(frozen=True)
class UpperBoundReport:
    q_tilde: float
    s_q: float
    z_delta: float
    accepted: bool
    confidence: float


@dataclass(frozen=True)
class LowerBoundReport:
    l_tilde: float
    s_l: float
    lb: float
    confidence: float
    group_values: tuple[float, ...]


@dataclass(frozen=True)
class SampleSizeResult:
    n: int
    v1: float
    v2: float
    v3: float


def _alpha_interval(scaling: RegretScaling) -> tuple[float, float]:
    if scaling is RegretScaling.INVERSE_ALPHA:
        return ALPHA_MIN, 1.0
    return ALPHA_MIN, 1.0 - ALPHA_MIN


def _inner_value(batch, alpha, spec, scaling, literal_sup):
    if not literal_sup:
        return empirical_oce_risk(batch, alpha, spec, scaling).value
    # sup of the convex inner objective over the eta bracket: an endpoint
    f_scale = regret_scale(scaling, alpha)
    x = batch.samples - batch.target
    lo, hi = eta_bracket(batch.samples, batch.target, conjugate_domain(spec))

    def h(eta):
        return eta + f_scale * float(np.mean(conjugate_value_array(spec, x - eta)))

    return max(h(lo), h(hi))


def solve_lagrangian(
    batch: ItemBatch,
    pi_tilde: float,
    spec: DivergenceSpec,
    scaling: RegretScaling = RegretScaling.INVERSE_ALPHA,
    sense: str = "max",
    literal_sup: bool = False,
) -> tuple[float, float]:
    """Optimize 1 - alpha + pi_tilde * g_N(alpha) over the level interval.

    `sense` is "max" (the printed form, the valid relaxation under 1/alpha
    with pi_tilde <= 0) or "min" (the mirror, valid under 1/(1-alpha) with
    pi_tilde >= 0).  Returns (arg, value).
    """
    if not math.isfinite(pi_tilde):
        raise ValueError("pi_tilde must be finite")
    if sense not in ("max", "min"):
        raise ValueError(f"sense must be 'max' or 'min', got {sense!r}")
    lo, hi = _alpha_interval(scaling)
    sign = -1.0 if sense == "max" else 1.0

    def objective(alpha: float) -> float:
        val = 1.0 - alpha + pi_tilde * _inner_value(batch, alpha, spec, scaling, literal_sup)
        return sign * val

    alpha, best, _ = golden_section_min(objective, lo, hi, 1e-6)
    return alpha, sign * best


def upper_bound_check(
    alpha_tilde: float,
    resample: ItemBatch,
    spec: DivergenceSpec,
    scaling: RegretScaling = RegretScaling.INVERSE_ALPHA,
    delta: float = 0.05,
    literal_sup: bool = False,
) -> UpperBoundReport:
    """Statistical feasibility of a fixed level on a large resample.

    q_tilde is the inner-minimized risk at alpha_tilde, its standard error
    comes from the per-sample objective values at the optimizing eta, and
    acceptance requires z = (0 - q_tilde)/S to clear the 1-delta normal
    quantile.  S = 0 degenerates to accepting iff q_tilde <= 0.
    """
    if resample.size < 30:
        raise ValueError("resample must contain at least 30 observations")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta={delta} outside (0, 1)")
    f_scale = regret_scale(scaling, alpha_tilde)
    x = resample.samples - resample.target
    if literal_sup:
        lo, hi = eta_bracket(resample.samples, resample.target, conjugate_domain(spec))

        def h(eta):
            return eta + f_scale * float(np.mean(conjugate_value_array(spec, x - eta)))

        eta = lo if h(lo) >= h(hi) else hi
    else:
        eta = empirical_oce_risk(resample, alpha_tilde, spec, scaling).eta_star
    per_sample = eta + f_scale * conjugate_value_array(spec, x - eta)
    q = float(np.mean(per_sample))
    if not math.isfinite(q):
        return UpperBoundReport(q, math.inf, -math.inf, False, 1.0 - delta)
    n = per_sample.size
    s = float(math.sqrt(np.sum((per_sample - q) ** 2) / (n * (n - 1))))
    if s == 0.0:
        z = math.inf if q <= 0.0 else -math.inf
    else:
        z = (0.0 - q) / s
    accepted = z >= normal_quantile(1.0 - delta)
    return UpperBoundReport(q_tilde=q, s_q=s, z_delta=z, accepted=accepted, confidence=1.0 - delta)


def aggregate_group_values(values, gamma: float) -> LowerBoundReport:
    """Mean, standard error, and one-sided bound of per-group solve values:
    S^2 = sum (v - mean)^2 / (M(M-1)), lb = mean - z_{gamma/2} * S."""
    values = tuple(float(v) for v in values)
    m = len(values)
    if m < 2:
        raise ValueError("need at least 2 groups")
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma={gamma} outside (0, 1)")
    l_tilde = sum(values) / m
    s2 = sum((v - l_tilde) ** 2 for v in values) / (m * (m - 1))
    s = math.sqrt(s2)
    lb = l_tilde - normal_quantile(1.0 - gamma / 2.0) * s
    return LowerBoundReport(
        l_tilde=l_tilde, s_l=s, lb=lb, confidence=1.0 - gamma, group_values=values
    )


def lower_bound_estimate(
    groups: list[ItemBatch],
    pi_tilde: float,
    spec: DivergenceSpec,
    scaling: RegretScaling = RegretScaling.INVERSE_ALPHA,
    gamma: float = 0.05,
    sense: str = "max",
    literal_sup: bool = False,
) -> LowerBoundReport:
    """Lagrangian solve per independent group, aggregated into a bound."""
    if len(groups) < 2:
        raise ValueError("need at least 2 groups")
    values = [
        solve_lagrangian(g, pi_tilde, spec, scaling, sense, literal_sup)[1] for g in groups
    ]
    return aggregate_group_values(values, gamma)


def estimate_dual(
    batch: ItemBatch,
    alpha_star: float,
    spec: DivergenceSpec,
    scaling: RegretScaling = RegretScaling.INVERSE_ALPHA,
    step: float = 1e-3,
) -> float:
    """Multiplier estimate 1 / g_N'(alpha_star) by central differences.

    Negative under 1/alpha (g_N decreasing), positive under 1/(1-alpha);
    0 when the constraint is locally flat (inactive), capped at |1e6|.
    """
    lo, hi = _alpha_interval(scaling)
    a_plus = min(alpha_star + step, hi)
    a_minus = max(alpha_star - step, lo)
    if a_plus - a_minus < 1e-9:
        return 0.0

    def g(alpha):
        return empirical_oce_risk(batch, alpha, spec, scaling).value

    slope = (g(a_plus) - g(a_minus)) / (a_plus - a_minus)
    if not math.isfinite(slope) or abs(slope) < 1e-12:
        return 0.0
    return max(-_PI_CAP, min(_PI_CAP, 1.0 / slope))


def shrinking_upper_bound(
    batch: ItemBatch,
    resample: ItemBatch,
    spec: DivergenceSpec,
    scaling: RegretScaling = RegretScaling.INVERSE_ALPHA,
    delta: float = 0.05,
    epsilon: float = 1e-4,
    max_rounds: int = 20,
) -> tuple[BatchSolution, UpperBoundReport, int]:
    """Candidate solve with the threshold-shrink loop.

    Solve at threshold 0; while the resample check rejects, tighten the
    threshold by 0.1 * |threshold - q_tilde| and re-solve, at most
    `max_rounds` times.  Returns the last (solution, report, rounds_used);
    the report says whether acceptance was reached.
    """
    threshold = 0.0
    sol = satisficing_binary_search(batch, spec, scaling, epsilon, threshold)
    report = upper_bound_check(sol.alpha_star, resample, spec, scaling, delta)
    rounds = 0
    while not report.accepted and rounds < max_rounds:
        threshold = threshold - 0.1 * abs(threshold - report.q_tilde)
        sol = satisficing_binary_search(batch, spec, scaling, epsilon, threshold)
        report = upper_bound_check(sol.alpha_star, resample, spec, scaling, delta)
        rounds += 1
    return sol, report, rounds


def _nets_and_denoms(params: BoundParams):
    z = normal_quantile(1.0 - params.gamma / 2.0)
    denom2 = params.epsilon - params.lipschitz_pi * params.tau_gap
    denom3 = params.gap_c - params.epsilon - z * params.big_m**2 / 4.0
    if denom3 <= 0.0:
        raise InfeasibleParametersError(
            "gap_c - epsilon - z_{gamma/2} * M^2/4 must be positive "
            f"(got {denom3})"
        )
    psum = params.psi_bar + params.phi_bar
    v1 = 1.0 / (4.0 * psum / params.epsilon + 2.0)
    v2 = 1.0 / (4.0 * psum * params.lipschitz_pi / denom2 + 2.0)
    v3 = 1.0 / (4.0 * psum / denom3 + 2.0)
    return z, denom2, denom3, v1, v2, v3


def required_sample_size(params: BoundParams) -> SampleSizeResult:
    """Per-item sample size making the batch ranking valid with the stated
    confidences: max of the two covering-number log terms plus the group
    term times m_groups, rounded up."""
    _, denom2, denom3, v1, v2, v3 = _nets_and_denoms(params)
    d, beta, s2, c = params.diameter, params.beta, params.sigma2, params.lipschitz_pi
    t1 = (8.0 * s2 / params.epsilon**2) * math.log((2.0 / beta) * (2.0 + d / v1**2))
    t2 = (8.0 * s2 * c**2 / denom2**2) * math.log((2.0 / beta) * (2.0 + d / v2**2))
    t3 = (8.0 * s2 * c**2 / denom3**2) * math.log((2.0 / beta) * (2.0 + d / v3**2)) * params.m_groups
    return SampleSizeResult(n=math.ceil(max(t1, t2) + t3), v1=v1, v2=v2, v3=v3)


def ranking_validity_probability(n1: int, n2: int, items: int, params: BoundParams) -> float:
    """Probability that the batch ranking of `items` items is the true one,
    given n1 main samples and n2 per group.  Each bracket is clamped to
    [0, 1] before the exponentiation, so the result is a probability."""
    if n1 < 1 or n2 < 1:
        raise ValueError("n1 and n2 must be >= 1")
    if items < 2:
        raise ValueError("items must be >= 2")
    _, denom2, denom3, v1, v2, v3 = _nets_and_denoms(params)
    d, s2, c = params.diameter, params.sigma2, params.lipschitz_pi

    def clamp(v):
        return min(1.0, max(0.0, v))

    b1 = clamp(1.0 - 2.0 * (2.0 + d / v1**2) * math.exp(-n1 * params.epsilon**2 / (8.0 * s2)))
    b2 = clamp(1.0 - 2.0 * (2.0 + d / v2**2) * math.exp(-n1 * denom2**2 / (8.0 * s2 * c**2)))
    b3 = clamp(1.0 - 2.0 * (2.0 + d / v3**2) * math.exp(-n2 * denom3**2 / (8.0 * s2)))
    return min(b1, b2) ** items * b3**items


def load_bound_params(path) -> BoundParams:
    """Read BoundParams from a key-value file: one `name = value` per line,
    '#' comments and blank lines allowed."""
    names = {f.name for f in fields(BoundParams)}
    raw: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ParseError(f"expected 'name = value', got {text!r}", line=lineno)
            key, _, value = text.partition("=")
            key = key.strip()
            if key not in names:
                raise ParseError(f"unknown parameter {key!r}", line=lineno)
            try:
                raw[key] = float(value.strip())
            except ValueError:
                raise ParseError(f"bad numeric value for {key!r}", line=lineno) from None
    missing = sorted(names - raw.keys())
    if missing:
        raise ParseError(f"missing parameters: {', '.join(missing)}")
    return BoundParams(**raw)
