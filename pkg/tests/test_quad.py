import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from annuchar.funcdsl import constant, parse, rational
from annuchar.quad import (
    TWO_PI,
    Arc,
    ArcLabel,
    QuadConfig,
    arc_integrate,
    classify_circle,
    periodic_integrate,
)

from conftest import random_rational


class TestPeriodicIntegrate:
    def test_sin_squared(self):
        res = periodic_integrate(lambda th: np.sin(th) ** 2)
        assert abs(res.value - math.pi) <= 1e-12
        assert res.converged

    def test_constant_one(self):
        res = periodic_integrate(lambda th: np.ones_like(th))
        assert res.value == pytest.approx(TWO_PI, abs=1e-14)

    @pytest.mark.filterwarnings("ignore:divide by zero")
    def test_log_singular_jensen_value(self):
        # Classical value of the mean of log|z - 1| on the unit circle is 0;
        # brute-force oracle: composite rule on a million nodes, skipping the
        # singular node (its cell contributes O(h log h)).
        theta = TWO_PI * (np.arange(1, 10**6)) / 10**6
        oracle = np.log(np.abs(np.exp(1j * theta) - 1)).sum() * (TWO_PI / 10**6)
        assert abs(oracle) < 1e-3

        res = periodic_integrate(lambda th: np.log(np.abs(np.exp(1j * th) - 1)))
        assert res.near_singular
        assert abs(res.value) < 1e-8
        assert abs(res.value - oracle) < 1e-3

    def test_trig_polynomial_exactness(self):
        # degree < 32 is integrated exactly by the 64-node periodic rule
        def g(th):
            return 1.5 + np.cos(31 * th) - 2 * np.sin(17 * th) + np.sin(th) * np.cos(2 * th)

        res = periodic_integrate(g)
        assert abs(res.value - 1.5 * TWO_PI) <= 1e-13

    def test_nonconvergence_flagged(self):
        cfg = QuadConfig(tol=1e-10, max_nodes=128)

        def jagged(th):
            return np.abs(np.sin(257 * th)) ** 0.3

        res = periodic_integrate(jagged, cfg)
        assert not res.converged

    def test_declared_singular_angle(self):
        res = periodic_integrate(
            lambda th: np.log(np.abs(np.exp(1j * th) - 1)), singular_angles=[0.0]
        )
        assert abs(res.value) < 1e-8


class TestArcIntegrate:
    def test_unit_over_half_circle(self):
        res = arc_integrate(lambda th: np.ones_like(th), [(0.0, math.pi)])
        assert res.value == pytest.approx(math.pi, abs=1e-12)

    def test_cosine_quarter(self):
        res = arc_integrate(np.cos, [(0.0, math.pi / 2)])
        assert res.value == pytest.approx(1.0, abs=1e-10)

    def test_index_integrand_full_circle(self):
        f = rational(2, [(0, 1)])  # 2z, f'/f = 1/z

        def g(th):
            z = np.exp(1j * th)
            return (z * f.log_deriv_array(z)).real

        res = arc_integrate(g, [(0.0, TWO_PI)])
        assert res.value == pytest.approx(TWO_PI, abs=1e-10)

    def test_multiple_arcs_sum(self):
        res = arc_integrate(np.sin, [(0.0, math.pi / 2), (math.pi, 3 * math.pi / 2)])
        # int sin over [0, pi/2] is 1, over [pi, 3pi/2] is -1
        assert res.value == pytest.approx(0.0, abs=1e-10)


class TestClassifyCircle:
    def test_double_modulus(self):
        part = classify_circle(rational(2, [(0, 1)]), 1.0)
        assert len(part.arcs) == 1
        assert part.arcs[0].label is ArcLabel.PLUS

    def test_unimodular_power(self):
        part = classify_circle(rational(1, [(0, 5)]), 1.0)
        assert len(part.arcs) == 1
        assert part.arcs[0].label is ArcLabel.ZERO

    def test_far_zero(self):
        part = classify_circle(rational(1, [(3, 1)]), 1.0)
        assert [a.label for a in part.arcs] == [ArcLabel.PLUS]

    def test_mixed_arcs_boundaries(self):
        # |e^{i t} - 0.5|^2 = 1.25 - cos t crosses 1 at cos t = 1/4
        f = rational(1, [(0.5, 1)])
        part = classify_circle(f, 1.0)
        labels = [a.label for a in part.arcs]
        assert ArcLabel.PLUS in labels and ArcLabel.MINUS in labels
        crossing = math.acos(0.25)
        boundaries = sorted(a.start for a in part.arcs if a.start > 0.0)
        assert any(abs(b - crossing) < 1e-9 for b in boundaries)
        assert any(abs(b - (TWO_PI - crossing)) < 1e-9 for b in boundaries)

    def test_partition_covers_circle(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            f = random_rational(rng)
            part = classify_circle(f, 1.3)
            assert part.total_length == pytest.approx(TWO_PI, abs=1e-12)
            starts = [a.start for a in part.arcs]
            assert starts == sorted(starts)
            for left, right in zip(part.arcs, part.arcs[1:]):
                assert left.end == pytest.approx(right.start, abs=1e-15)
                assert left.label is not right.label

    def test_reciprocal_swaps_labels(self):
        rng = np.random.default_rng(23)
        swap = {ArcLabel.PLUS: ArcLabel.MINUS, ArcLabel.MINUS: ArcLabel.PLUS,
                ArcLabel.ZERO: ArcLabel.ZERO}
        for _ in range(8):
            f = random_rational(rng)
            p1 = classify_circle(f, 1.1)
            p2 = classify_circle(f.reciprocal(), 1.1)
            assert len(p1.arcs) == len(p2.arcs)
            for a1, a2 in zip(p1.arcs, p2.arcs):
                assert a2.label is swap[a1.label]
                assert a1.start == pytest.approx(a2.start, abs=1e-9)
                assert a1.end == pytest.approx(a2.end, abs=1e-9)

    def test_pole_samples_count_as_plus(self):
        # pole at z = 1 sits on the sampled circle; the surrounding arc,
        # including the non-finite sample at theta = 0, must be PLUS
        part = classify_circle(parse("1/(z-1)"), 1.0)
        assert part.arcs[0].label is ArcLabel.PLUS
        assert part.arcs[-1].label is ArcLabel.PLUS
        assert ArcLabel.MINUS in [a.label for a in part.arcs]


class TestQuadConfig:
    def test_defaults(self):
        cfg = QuadConfig()
        assert cfg.tol == 1e-10
        assert cfg.max_nodes == 1 << 20
        assert cfg.unit_tol == 1e-9
        assert cfg.singularity_padding == 1e-4

    def test_max_nodes_shape(self):
        QuadConfig(max_nodes=64)
        QuadConfig(max_nodes=2048)
        with pytest.raises(ValueError):
            QuadConfig(max_nodes=96)
        with pytest.raises(ValueError):
            QuadConfig(tol=-1)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_constant_modulus_is_single_arc(seed):
    rng = np.random.default_rng(seed)
    c = rng.uniform(0.2, 3.0)
    part = classify_circle(constant(c), 1.0)
    assert len(part.arcs) == 1
    expected = ArcLabel.PLUS if c > 1 + 1e-9 else (
        ArcLabel.MINUS if c < 1 - 1e-9 else ArcLabel.ZERO
    )
    assert part.arcs[0].label is expected


def test_arc_dataclass_length():
    arc = Arc(0.5, 2.0, ArcLabel.PLUS)
    assert arc.length == pytest.approx(1.5)
