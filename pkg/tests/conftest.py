import numpy as np
import pytest

from satisrank.divergence import DivergenceKind, DivergenceSpec

# one spec per kind, plus the three Cressie-Read theta regimes
ALL_SPECS = [
    DivergenceSpec(DivergenceKind.KULLBACK_LEIBLER),
    DivergenceSpec(DivergenceKind.BURG_ENTROPY),
    DivergenceSpec(DivergenceKind.CHI_SQUARED),
    DivergenceSpec(DivergenceKind.MODIFIED_CHI_SQUARED),
    DivergenceSpec(DivergenceKind.HELLINGER),
    DivergenceSpec(DivergenceKind.CHI_DIVERGENCE, theta=3.0),
    DivergenceSpec(DivergenceKind.VARIATION_DISTANCE),
    DivergenceSpec(DivergenceKind.CRESSIE_READ, theta=0.5),
    DivergenceSpec(DivergenceKind.CRESSIE_READ, theta=2.0),
    DivergenceSpec(DivergenceKind.CRESSIE_READ, theta=-1.0),
    DivergenceSpec(DivergenceKind.CVAR_INDICATOR),
]

# kink locations of the conjugates that have one
KINKS = {
    DivergenceKind.CVAR_INDICATOR: (0.0,),
    DivergenceKind.VARIATION_DISTANCE: (-1.0,),
    DivergenceKind.MODIFIED_CHI_SQUARED: (-2.0,),
}


def spec_label(spec: DivergenceSpec) -> str:
    return spec.kind.value if spec.theta is None else f"{spec.kind.value}[{spec.theta}]"


def interior_interval(spec: DivergenceSpec, edge_margin: float = 0.05) -> tuple[float, float]:
    """A sampling window strictly inside the conjugate's finite region,
    kept away from blow-up edges so finite differences stay well-scaled."""
    from satisrank.divergence import conjugate_domain

    dom = conjugate_domain(spec)
    hi = 6.0 if dom.upper == np.inf else dom.upper - edge_margin
    lo = max(hi - 12.0, dom.lower + edge_margin)
    return lo, hi


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
