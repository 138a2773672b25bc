"""Empirical OCE-style risk of a sample batch via 1-D convex minimization.

The inner problem for a batch d_1..d_N with target tau at level alpha is

    inf_eta  eta + f(alpha) * (1/N) * sum phi*(d_n - tau - eta)

minimized by derivative-free golden-section search over a bracket derived
from the sample range, so kinks and flat regions of phi* need no special
casing.  A sorted-tail closed form for the CVaR kind serves as an
independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .divergence import DivergenceSpec, ConjugateDomain, conjugate_domain, conjugate_value_array
from .errors import InfeasibleEvaluationError

__all__ = [
    "ALPHA_MIN",
    "ItemBatch",
    "RegretScaling",
    "InnerSolveResult",
    "regret_scale",
    "eta_bracket",
    "empirical_oce_risk",
    "cvar_closed_form",
    "golden_section_min",
]

# representation of the open endpoint of the level interval (0, 1]
ALPHA_MIN = 1e-6

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class RegretScaling(str, Enum):
    """Regret scale f(alpha) applied to the conjugate expectation."""

    INVERSE_ALPHA = "inv_alpha"
    INVERSE_ONE_MINUS_ALPHA = "inv_one_minus_alpha"


@dataclass(frozen=True, eq=False)
class ItemBatch:
    """One item's scalar loss observations plus its aspiration target."""

    item_id: str
    samples: np.ndarray
    target: float

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64).ravel()
        if samples.size == 0:
            raise ValueError(f"batch {self.item_id!r}: samples must be nonempty")
        if not np.all(np.isfinite(samples)):
            raise ValueError(f"batch {self.item_id!r}: samples must all be finite")
        if not math.isfinite(self.target):
            raise ValueError(f"batch {self.item_id!r}: target must be finite")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "target", float(self.target))

    @property
    def size(self) -> int:
        return int(self.samples.size)


@dataclass(frozen=True)
class InnerSolveResult:
    value: float
    eta_star: float
    iterations: int
    bracket: tuple[float, float]


def regret_scale(scaling: RegretScaling, alpha: float) -> float:
    """f(alpha): 1/alpha or 1/(1-alpha)."""
    if scaling is RegretScaling.INVERSE_ALPHA:
        if not 0.0 < alpha <= 1.0:
            raise ValueError(f"alpha={alpha} outside (0, 1]")
        return 1.0 / alpha
    if scaling is RegretScaling.INVERSE_ONE_MINUS_ALPHA:
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"alpha={alpha} outside (0, 1)")
        return 1.0 / (1.0 - alpha)
    raise ValueError(f"unknown scaling {scaling!r}")


def regret_scale_derivative(scaling: RegretScaling, alpha: float) -> float:
    """d f(alpha) / d alpha, needed by the online subgradient."""
    if scaling is RegretScaling.INVERSE_ALPHA:
        return -1.0 / (alpha * alpha)
    if scaling is RegretScaling.INVERSE_ONE_MINUS_ALPHA:
        return 1.0 / ((1.0 - alpha) * (1.0 - alpha))
    raise ValueError(f"unknown scaling {scaling!r}")


def golden_section_min(f, lo: float, hi: float, tol: float, max_iter: int = 200):
    """Golden-section minimum of a unimodal extended-real function on [lo, hi].

    +inf values are ordinary points; a +inf region must touch at most one end
    of the bracket (callers with a possibly two-sided infinite objective
    pre-scan for the finite window first).  Returns (x_best, f_best,
    iterations) over every point probed, endpoints included, so f_best never
    exceeds the endpoint values.
    """
    best_x, best_f = lo, f(lo)
    fh = f(hi)
    if fh < best_f:
        best_x, best_f = hi, fh
    a, b = float(lo), float(hi)
    iters = 0
    if b - a > tol:
        c = b - _INVPHI * (b - a)
        d = a + _INVPHI * (b - a)
        fc, fd = f(c), f(d)
        if fc < best_f:
            best_x, best_f = c, fc
        if fd < best_f:
            best_x, best_f = d, fd
        while (b - a) > tol and iters < max_iter:
            if fc <= fd:
                b, d, fd = d, c, fc
                c = b - _INVPHI * (b - a)
                fc = f(c)
                if fc < best_f:
                    best_x, best_f = c, fc
            else:
                a, c, fc = c, d, fd
                d = a + _INVPHI * (b - a)
                fd = f(d)
                if fd < best_f:
                    best_x, best_f = d, fd
            iters += 1
    mid = 0.5 * (a + b)
    fm = f(mid)
    if fm < best_f:
        best_x, best_f = mid, fm
    return best_x, best_f, iters


def eta_bracket(losses: np.ndarray, target: float, domain: ConjugateDomain) -> tuple[float, float]:
    """Search interval for eta: shifted sample range padded by range+1,
    then clipped so every d_n - target - eta stays strictly inside the
    conjugate's finite region (a ~1e-9-scale margin guards the endpoints)."""
    x = np.asarray(losses, dtype=np.float64) - target
    xmin, xmax = float(x.min()), float(x.max())
    pad = (xmax - xmin) + 1.0
    lo, hi = xmin - pad, xmax + pad
    margin = 1e-9 * (1.0 + max(abs(lo), abs(hi)))
    if math.isfinite(domain.upper):
        lo = max(lo, xmax - domain.upper + margin)
    if math.isfinite(domain.lower):
        hi = min(hi, xmin - domain.lower - margin)
    if not lo < hi:
        raise InfeasibleEvaluationError(
            f"conjugate domain leaves no room for eta (bracket [{lo}, {hi}])"
        )
    return lo, hi


def _shrink_to_finite(f, lo: float, hi: float, npts: int):
    """Coarse scan for the finite window of f; None when every probe is +inf."""
    xs = np.linspace(lo, hi, npts)
    vals = [f(float(x)) for x in xs]
    finite = [i for i, v in enumerate(vals) if v < math.inf]
    if not finite:
        return None
    i0, i1 = finite[0], finite[-1]
    k = min(range(len(vals)), key=lambda i: vals[i])
    return float(xs[max(i0 - 1, 0)]), float(xs[min(i1 + 1, npts - 1)]), float(xs[k]), vals[k]


def empirical_oce_risk(
    batch: ItemBatch,
    alpha: float,
    spec: DivergenceSpec,
    scaling: RegretScaling = RegretScaling.INVERSE_ALPHA,
) -> InnerSolveResult:
    """Minimize eta + f(alpha) * mean(phi*(d - tau - eta)) over the bracket.

    Equals the empirical risk of the target-embedded outcome at level alpha;
    +inf objective values (conjugate domain violations) compare greater than
    any finite value.  Raises InfeasibleEvaluationError when no probe in the
    bracket is finite.
    """
    if not ALPHA_MIN <= alpha <= 1.0:
        raise ValueError(f"alpha={alpha} outside [{ALPHA_MIN}, 1]")
    f_scale = regret_scale(scaling, alpha)
    x = batch.samples - batch.target
    lo, hi = eta_bracket(batch.samples, batch.target, conjugate_domain(spec))

    def objective(eta: float) -> float:
        m = float(np.mean(conjugate_value_array(spec, x - eta)))
        return eta + f_scale * m

    scan_x, scan_f = None, math.inf
    glo, ghi = lo, hi
    if objective(lo) == math.inf or objective(hi) == math.inf:
        window = _shrink_to_finite(objective, lo, hi, 33)
        if window is None:
            window = _shrink_to_finite(objective, lo, hi, 257)
        if window is None:
            raise InfeasibleEvaluationError(
                f"objective is +inf everywhere on [{lo}, {hi}] "
                f"(kind={spec.kind.value}, alpha={alpha})"
            )
        glo, ghi, scan_x, scan_f = window

    tol = 1e-8 * (1.0 + (ghi - glo))
    eta_star, value, iters = golden_section_min(objective, glo, ghi, tol)
    if scan_f < value:
        eta_star, value = scan_x, scan_f
    return InnerSolveResult(value=value, eta_star=eta_star, iterations=iters, bracket=(lo, hi))


def cvar_closed_form(batch: ItemBatch, alpha: float) -> float:
    """Exact discrete CVaR of samples - target at level alpha via the sorted
    tail: (1/(alpha N)) * [sum of the k-1 largest + (alpha N - (k-1)) * k-th
    largest], k = ceil(alpha N).  Independent oracle for the cvar kind."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha={alpha} outside (0, 1]")
    x = np.sort(batch.samples - batch.target)[::-1]
    n = x.size
    an = alpha * n
    # ceil with a guard so exact-integer alpha*N survives binary rounding
    k = min(max(int(math.ceil(an - 1e-9)), 1), n)
    return float((x[: k - 1].sum() + (an - (k - 1)) * x[k - 1]) / an)
