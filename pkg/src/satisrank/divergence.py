"""Catalog of phi-divergence convex conjugates and their subgradients.

Each divergence generator phi induces a convex conjugate phi* that selects
which convex risk functional the optimized-certainty-equivalent evaluation
realizes.  The catalog:

    kind          phi*(s)                                   finite for
    ------------  ----------------------------------------  --------------------
    kl            exp(s) - 1                                all s
    burg          -log(1 - s)                               s < 1
    chi2          2 - 2*sqrt(1 - s)                         s < 1
    mod_chi2      -1 if s < -2 else s + s^2/4               all s
    hellinger     s / (1 - s)                               s < 1
    chi_div       s + (theta+1) * (|s|/theta)^q             all s        (theta > 1)
    variation     max(-1, s)                                s <= 1
    cressie_read  (1/theta) * b^q - 1/theta                 b = 1 - s(1-theta) > 0
    cvar          s if s > 0 else 0                         all s

with q = theta/(theta-1).  Outside its finite region a conjugate evaluates to
+inf; solvers treat +inf as an ordinary extended-real value, never an
exception.  Values beyond float range saturate to +inf as well.

Subgradients at the three kink points are pinned to the smaller-magnitude
side: cvar at 0 -> 0, variation at -1 -> 0, mod_chi2 at -2 -> 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigurationError, DomainError

__all__ = [
    "DivergenceKind",
    "DivergenceSpec",
    "ConjugateDomain",
    "conjugate_value",
    "conjugate_value_array",
    "conjugate_subgradient",
    "conjugate_domain",
]

# math.exp overflows just above this; saturate to +inf instead of raising
_EXP_MAX = 709.0


class DivergenceKind(str, Enum):
    KULLBACK_LEIBLER = "kl"
    BURG_ENTROPY = "burg"
    CHI_SQUARED = "chi2"
    MODIFIED_CHI_SQUARED = "mod_chi2"
    HELLINGER = "hellinger"
    CHI_DIVERGENCE = "chi_div"
    VARIATION_DISTANCE = "variation"
    CRESSIE_READ = "cressie_read"
    CVAR_INDICATOR = "cvar"


_THETA_KINDS = {DivergenceKind.CHI_DIVERGENCE, DivergenceKind.CRESSIE_READ}


@dataclass(frozen=True)
class DivergenceSpec:
    """Which conjugate is in force, with its shape parameter where one exists."""

    kind: DivergenceKind
    theta: float | None = None

    def __post_init__(self):
        kind = DivergenceKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind in _THETA_KINDS:
            if self.theta is None or not math.isfinite(self.theta):
                raise ConfigurationError(f"{kind.value} requires a finite theta")
            if kind is DivergenceKind.CHI_DIVERGENCE and self.theta <= 1.0:
                raise ConfigurationError("chi_div requires theta > 1")
            if kind is DivergenceKind.CRESSIE_READ and self.theta in (0.0, 1.0):
                raise ConfigurationError("cressie_read requires theta not in {0, 1}")
        elif self.theta is not None:
            raise ConfigurationError(f"{kind.value} takes no theta")


@dataclass(frozen=True)
class ConjugateDomain:
    """Finite region of a conjugate: (lower, upper) or (lower, upper].

    All printed kinds have lower = -inf; only cressie_read with theta > 1 has
    a finite lower cut (the printed table column lists upper limits only).
    """

    upper: float
    closed_upper: bool = False
    lower: float = -math.inf

    def contains(self, s: float) -> bool:
        if s <= self.lower:
            return False
        return s <= self.upper if self.closed_upper else s < self.upper

    def strictly_contains(self, s: float) -> bool:
        return self.lower < s < self.upper


def conjugate_domain(spec: DivergenceSpec) -> ConjugateDomain:
    """Interval on which phi* is finite; solvers clip eta searches with it."""
    kind = spec.kind
    if kind in (
        DivergenceKind.BURG_ENTROPY,
        DivergenceKind.CHI_SQUARED,
        DivergenceKind.HELLINGER,
    ):
        return ConjugateDomain(upper=1.0)
    if kind is DivergenceKind.VARIATION_DISTANCE:
        return ConjugateDomain(upper=1.0, closed_upper=True)
    if kind is DivergenceKind.CRESSIE_READ:
        theta = spec.theta
        if theta < 1.0:
            return ConjugateDomain(upper=1.0 / (1.0 - theta))
        return ConjugateDomain(upper=math.inf, lower=1.0 / (1.0 - theta))
    return ConjugateDomain(upper=math.inf)


def _scalar_fns(spec: DivergenceSpec):
    """(value, subgradient) closures for one spec; the hot-loop building block.

    The value closure returns +inf outside the finite region; the subgradient
    closure is only called at points where the value is finite.
    """
    kind = spec.kind
    if kind is DivergenceKind.KULLBACK_LEIBLER:
        def value(s):
            return math.inf if s > _EXP_MAX else math.exp(s) - 1.0

        def grad(s):
            return math.inf if s > _EXP_MAX else math.exp(s)

    elif kind is DivergenceKind.BURG_ENTROPY:
        def value(s):
            return -math.log(1.0 - s) if s < 1.0 else math.inf

        def grad(s):
            return 1.0 / (1.0 - s)

    elif kind is DivergenceKind.CHI_SQUARED:
        def value(s):
            return 2.0 - 2.0 * math.sqrt(1.0 - s) if s < 1.0 else math.inf

        def grad(s):
            return 1.0 / math.sqrt(1.0 - s)

    elif kind is DivergenceKind.MODIFIED_CHI_SQUARED:
        def value(s):
            return -1.0 if s < -2.0 else s + 0.25 * s * s

        def grad(s):
            return 0.0 if s <= -2.0 else 1.0 + 0.5 * s

    elif kind is DivergenceKind.HELLINGER:
        def value(s):
            return s / (1.0 - s) if s < 1.0 else math.inf

        def grad(s):
            return 1.0 / ((1.0 - s) * (1.0 - s))

    elif kind is DivergenceKind.CHI_DIVERGENCE:
        theta = spec.theta
        q = theta / (theta - 1.0)
        coef = theta + 1.0

        def value(s):
            try:
                return s + coef * (abs(s) / theta) ** q
            except OverflowError:
                return math.inf

        def grad(s):
            if s == 0.0:
                return 1.0
            try:
                return 1.0 + coef * q * (abs(s) / theta) ** (q - 1.0) * math.copysign(1.0, s) / theta
            except OverflowError:
                return math.copysign(math.inf, s)

    elif kind is DivergenceKind.VARIATION_DISTANCE:
        def value(s):
            return max(-1.0, s) if s <= 1.0 else math.inf

        def grad(s):
            return 0.0 if s <= -1.0 else 1.0

    elif kind is DivergenceKind.CRESSIE_READ:
        theta = spec.theta
        q = theta / (theta - 1.0)
        inv = 1.0 / theta

        def value(s):
            b = 1.0 - s * (1.0 - theta)
            if b <= 0.0:
                return math.inf
            try:
                return inv * b**q - inv
            except OverflowError:
                return math.inf

        def grad(s):
            b = 1.0 - s * (1.0 - theta)
            try:
                return b ** (1.0 / (theta - 1.0))
            except OverflowError:
                return math.inf

    elif kind is DivergenceKind.CVAR_INDICATOR:
        def value(s):
            return s if s > 0.0 else 0.0

        def grad(s):
            return 1.0 if s > 0.0 else 0.0

    else:  # pragma: no cover
        raise ConfigurationError(f"unknown kind {kind!r}")
    return value, grad


def conjugate_value(spec: DivergenceSpec, s: float) -> float:
    """phi*(s); +inf when s lies outside the finite region."""
    value, _ = _scalar_fns(spec)
    return value(float(s))


def conjugate_value_array(spec: DivergenceSpec, s: np.ndarray) -> np.ndarray:
    """Vectorized phi* over an array of points (the solver hot path)."""
    s = np.asarray(s, dtype=np.float64)
    kind = spec.kind
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if kind is DivergenceKind.KULLBACK_LEIBLER:
            return np.exp(s) - 1.0
        if kind is DivergenceKind.BURG_ENTROPY:
            out = np.full(s.shape, np.inf)
            ok = s < 1.0
            out[ok] = -np.log(1.0 - s[ok])
            return out
        if kind is DivergenceKind.CHI_SQUARED:
            out = np.full(s.shape, np.inf)
            ok = s < 1.0
            out[ok] = 2.0 - 2.0 * np.sqrt(1.0 - s[ok])
            return out
        if kind is DivergenceKind.MODIFIED_CHI_SQUARED:
            return np.where(s < -2.0, -1.0, s + 0.25 * s * s)
        if kind is DivergenceKind.HELLINGER:
            out = np.full(s.shape, np.inf)
            ok = s < 1.0
            out[ok] = s[ok] / (1.0 - s[ok])
            return out
        if kind is DivergenceKind.CHI_DIVERGENCE:
            theta = spec.theta
            q = theta / (theta - 1.0)
            return s + (theta + 1.0) * (np.abs(s) / theta) ** q
        if kind is DivergenceKind.VARIATION_DISTANCE:
            out = np.full(s.shape, np.inf)
            ok = s <= 1.0
            out[ok] = np.maximum(-1.0, s[ok])
            return out
        if kind is DivergenceKind.CRESSIE_READ:
            theta = spec.theta
            q = theta / (theta - 1.0)
            b = 1.0 - s * (1.0 - theta)
            out = np.full(s.shape, np.inf)
            ok = b > 0.0
            out[ok] = (b[ok] ** q - 1.0) / theta
            return out
        if kind is DivergenceKind.CVAR_INDICATOR:
            return np.maximum(s, 0.0)
    raise ConfigurationError(f"unknown kind {kind!r}")  # pragma: no cover


def conjugate_subgradient(spec: DivergenceSpec, s: float) -> float:
    """One element of the subdifferential of phi* at s.

    Raises DomainError outside the finite region (the open upper endpoint of
    an open domain counts as outside; the closed endpoint of `variation` is
    allowed and returns the left derivative).
    """
    s = float(s)
    dom = conjugate_domain(spec)
    if not dom.contains(s):
        raise DomainError(f"s={s} outside conjugate domain of {spec.kind.value}")
    _, grad = _scalar_fns(spec)
    return grad(s)
