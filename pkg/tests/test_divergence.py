import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from divupdate import (
    QUADRATIC,
    ConvexPotential,
    DimensionMismatch,
    bregman,
    hellinger_sq,
    hellinger_sq_halfsquares,
    is_strictly_convex,
    quadratic_bregman,
    shannon_entropy,
)

EXP = ConvexPotential(np.exp, np.exp, name="exp")


def simplex_pairs(seed, count=100, size=None):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        k = size or int(rng.integers(2, 10))
        alpha = rng.choice([0.2, 1.0, 5.0])
        yield rng.dirichlet(np.full(k, alpha)), rng.dirichlet(np.full(k, alpha))


class TestHellinger:
    def test_identity(self):
        a = np.array([0.2, 0.3, 0.5])
        assert hellinger_sq(a, a) == pytest.approx(0.0, abs=1e-15)

    def test_disjoint_supports(self):
        assert hellinger_sq([0.5, 0.5, 0, 0], [0, 0, 0.3, 0.7]) == 1.0

    def test_hand_value(self):
        assert hellinger_sq([0.5, 0.5], [1.0, 0.0]) == pytest.approx(1 - math.sqrt(0.5), abs=1e-15)
        assert hellinger_sq([0.5, 0.5], [1.0, 0.0]) == pytest.approx(0.2928932, abs=1e-7)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            hellinger_sq([1.0], [0.5, 0.5])

    def test_two_forms_symmetry_and_bounds(self):
        for a, b in simplex_pairs(0):
            d = hellinger_sq(a, b)
            assert 0.0 <= d <= 1.0
            assert abs(d - hellinger_sq_halfsquares(a, b)) < 1e-12
            assert abs(d - hellinger_sq(b, a)) < 1e-14


class TestBregman:
    def test_quadratic_is_strictly_convex(self):
        assert is_strictly_convex(QUADRATIC)
        assert is_strictly_convex(EXP)
        assert not is_strictly_convex(ConvexPotential(lambda u: u, lambda u: np.ones_like(u)))

    @pytest.mark.parametrize("a, b, expected", [
        ([1.0, 0.0], [0.0, 1.0], 1.0),
        ([0.7, 0.3], [0.5, 0.5], 0.04),
    ])
    def test_hand_values(self, a, b, expected):
        assert bregman(QUADRATIC, a, b) == pytest.approx(expected, abs=1e-15)
        assert quadratic_bregman(a, b) == pytest.approx(expected, abs=1e-15)

    def test_quadratic_against_uniform(self):
        assert quadratic_bregman([1, 0, 0, 0], [0.25] * 4) == pytest.approx(0.375, abs=1e-15)

    def test_identity(self):
        a = [0.1, 0.9]
        assert bregman(QUADRATIC, a, a) == 0.0
        assert bregman(EXP, a, a) == 0.0
        assert quadratic_bregman(a, a) == 0.0

    def test_quadratic_form_agrees_with_general_form(self):
        for a, b in simplex_pairs(1):
            assert abs(quadratic_bregman(a, b) - bregman(QUADRATIC, a, b)) < 1e-15
            assert quadratic_bregman(a, b) == pytest.approx(quadratic_bregman(b, a), abs=1e-16)

    def test_nonnegative_and_bounded(self):
        for a, b in simplex_pairs(2):
            assert 0.0 <= quadratic_bregman(a, b) <= 1.0
            assert bregman(EXP, a, b) >= -1e-15

    def test_zero_only_at_equality(self):
        for a, b in simplex_pairs(3, count=50):
            d = bregman(QUADRATIC, a, b)
            if np.max(np.abs(a - b)) > 1e-12:
                assert d > 0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            bregman(QUADRATIC, [1.0], [0.5, 0.5])


@settings(max_examples=100, deadline=None, derandomize=True)
@given(st.lists(st.floats(0.0, 1.0), min_size=2, max_size=12).filter(lambda v: sum(v) > 1e-3))
def test_hellinger_symmetric_property(raw):
    a = np.array(raw) / sum(raw)
    b = a[::-1].copy()
    assert hellinger_sq(a, b) == pytest.approx(hellinger_sq(b, a), abs=1e-14)
    assert hellinger_sq(a, b) == pytest.approx(hellinger_sq_halfsquares(a, b), abs=1e-12)


class TestEntropy:
    def test_point_mass(self):
        assert shannon_entropy([0.0, 1.0, 0.0]) == 0.0

    def test_uniform(self):
        assert shannon_entropy([0.25] * 4) == pytest.approx(math.log(4), abs=1e-15)
        assert shannon_entropy([0.25] * 4) == pytest.approx(1.3862944, abs=1e-7)

    def test_hand_value(self):
        assert shannon_entropy([0.5, 0.25, 0.25]) == pytest.approx(1.5 * math.log(2), abs=1e-15)
        assert shannon_entropy([0.5, 0.25, 0.25]) == pytest.approx(1.0397208, abs=1e-7)

    def test_uniform_is_maximal(self):
        for a, _ in simplex_pairs(4, size=5):
            assert shannon_entropy(a) <= math.log(5) + 1e-15
