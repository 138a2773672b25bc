import math

import numpy as np
import pytest

from conftest import ALL_SPECS, KINKS, interior_interval, spec_label
from satisrank.divergence import (
    DivergenceKind,
    DivergenceSpec,
    conjugate_domain,
    conjugate_subgradient,
    conjugate_value,
    conjugate_value_array,
)
from satisrank.errors import ConfigurationError, DomainError

K = DivergenceKind


class TestConjugateValue:
    @pytest.mark.parametrize(
        "kind,s,expected",
        [
            (K.KULLBACK_LEIBLER, 0.0, 0.0),
            (K.MODIFIED_CHI_SQUARED, -3.0, -1.0),
            (K.VARIATION_DISTANCE, -2.0, -1.0),
            (K.CVAR_INDICATOR, 2.0, 2.0),
            (K.CVAR_INDICATOR, -1.0, 0.0),
            (K.MODIFIED_CHI_SQUARED, 2.0, 3.0),
        ],
    )
    def test_table_values(self, kind, s, expected):
        assert conjugate_value(DivergenceSpec(kind), s) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize(
        "kind", [K.BURG_ENTROPY, K.CHI_SQUARED, K.HELLINGER]
    )
    def test_open_domains_hit_infinity(self, kind):
        spec = DivergenceSpec(kind)
        assert conjugate_value(spec, 1.0) == math.inf
        assert conjugate_value(spec, 5.0) == math.inf
        assert math.isfinite(conjugate_value(spec, 0.999))

    def test_variation_closed_at_one(self):
        spec = DivergenceSpec(K.VARIATION_DISTANCE)
        assert conjugate_value(spec, 1.0) == 1.0
        assert conjugate_value(spec, 1.0 + 1e-12) == math.inf

    def test_cressie_read_domains(self):
        low = DivergenceSpec(K.CRESSIE_READ, theta=0.5)
        assert math.isfinite(conjugate_value(low, 1.9))
        assert conjugate_value(low, 2.0) == math.inf
        high = DivergenceSpec(K.CRESSIE_READ, theta=2.0)
        assert math.isfinite(conjugate_value(high, 100.0))
        assert conjugate_value(high, -1.5) == math.inf

    def test_normalization_at_zero(self):
        for spec in ALL_SPECS:
            assert conjugate_value(spec, 0.0) <= 1e-12

    def test_saturates_instead_of_overflowing(self):
        assert conjugate_value(DivergenceSpec(K.KULLBACK_LEIBLER), 1e4) == math.inf
        assert conjugate_value(DivergenceSpec(K.CHI_DIVERGENCE, theta=1.1), 1e300) == math.inf


class TestConjugateSubgradient:
    @pytest.mark.parametrize(
        "spec,s,expected",
        [
            (DivergenceSpec(K.KULLBACK_LEIBLER), 0.0, 1.0),
            (DivergenceSpec(K.CVAR_INDICATOR), 0.0, 0.0),
            (DivergenceSpec(K.HELLINGER), 0.5, 4.0),
            (DivergenceSpec(K.VARIATION_DISTANCE), -1.0, 0.0),
            (DivergenceSpec(K.MODIFIED_CHI_SQUARED), -2.0, 0.0),
        ],
    )
    def test_pinned_values(self, spec, s, expected):
        assert conjugate_subgradient(spec, s) == pytest.approx(expected, abs=1e-9)

    def test_outside_domain_raises(self):
        with pytest.raises(DomainError):
            conjugate_subgradient(DivergenceSpec(K.BURG_ENTROPY), 1.5)
        with pytest.raises(DomainError):
            conjugate_subgradient(DivergenceSpec(K.CRESSIE_READ, theta=2.0), -3.0)
        # the closed endpoint of variation is inside its domain
        assert conjugate_subgradient(DivergenceSpec(K.VARIATION_DISTANCE), 1.0) == 1.0

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=spec_label)
    def test_finite_difference_agreement(self, spec, rng):
        h = 1e-5
        lo, hi = interior_interval(spec)
        kinks = KINKS.get(spec.kind, ())
        checked = 0
        while checked < 100:
            s = rng.uniform(lo, hi)
            if any(abs(s - k) <= 2 * h for k in kinks):
                continue
            fd = (conjugate_value(spec, s + h) - conjugate_value(spec, s - h)) / (2 * h)
            assert conjugate_subgradient(spec, s) == pytest.approx(fd, abs=1e-4)
            checked += 1

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=spec_label)
    def test_monotone_nondecreasing(self, spec, rng):
        lo, hi = interior_interval(spec)
        points = np.sort(rng.uniform(lo, hi, size=200))
        grads = [conjugate_subgradient(spec, s) for s in points]
        for g1, g2 in zip(grads, grads[1:]):
            assert g1 <= g2 + 1e-10


class TestConvexity:
    @pytest.mark.parametrize("spec", ALL_SPECS, ids=spec_label)
    def test_three_point_convexity(self, spec, rng):
        lo, hi = interior_interval(spec)
        for _ in range(200):
            s1, s2, s3 = np.sort(rng.uniform(lo, hi, size=3))
            if s3 - s1 < 1e-9:
                continue
            lam = (s3 - s2) / (s3 - s1)
            bound = lam * conjugate_value(spec, s1) + (1 - lam) * conjugate_value(spec, s3)
            assert conjugate_value(spec, s2) <= bound + 1e-10


class TestDomain:
    def test_examples(self):
        burg = conjugate_domain(DivergenceSpec(K.BURG_ENTROPY))
        assert burg.upper == 1.0 and not burg.closed_upper
        kl = conjugate_domain(DivergenceSpec(K.KULLBACK_LEIBLER))
        assert kl.upper == math.inf
        cr = conjugate_domain(DivergenceSpec(K.CRESSIE_READ, theta=0.5))
        assert cr.upper == pytest.approx(2.0) and not cr.closed_upper
        var = conjugate_domain(DivergenceSpec(K.VARIATION_DISTANCE))
        assert var.upper == 1.0 and var.closed_upper

    def test_contains_matches_finiteness(self, rng):
        for spec in ALL_SPECS:
            dom = conjugate_domain(spec)
            for s in rng.uniform(-8.0, 8.0, size=200):
                inside = dom.contains(s)
                finite = math.isfinite(conjugate_value(spec, s))
                assert inside == finite, (spec_label(spec), s)


class TestArrayAgreement:
    @pytest.mark.parametrize("spec", ALL_SPECS, ids=spec_label)
    def test_matches_scalar(self, spec, rng):
        s = rng.uniform(-8.0, 8.0, size=500)
        vec = conjugate_value_array(spec, s)
        for si, vi in zip(s, vec):
            ref = conjugate_value(spec, si)
            if math.isinf(ref):
                assert math.isinf(vi)
            else:
                assert vi == pytest.approx(ref, rel=1e-12, abs=1e-12)


class TestSpecValidation:
    def test_theta_requirements(self):
        with pytest.raises(ConfigurationError):
            DivergenceSpec(K.CHI_DIVERGENCE)
        with pytest.raises(ConfigurationError):
            DivergenceSpec(K.CHI_DIVERGENCE, theta=1.0)
        with pytest.raises(ConfigurationError):
            DivergenceSpec(K.CRESSIE_READ, theta=1.0)
        with pytest.raises(ConfigurationError):
            DivergenceSpec(K.CRESSIE_READ, theta=float("nan"))
        with pytest.raises(ConfigurationError):
            DivergenceSpec(K.KULLBACK_LEIBLER, theta=2.0)

    def test_kind_coercion_from_wire_name(self):
        spec = DivergenceSpec("cvar")
        assert spec.kind is K.CVAR_INDICATOR
