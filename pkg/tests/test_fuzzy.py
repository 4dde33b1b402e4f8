import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuzzydfs.errors import FuzzyDomainError, GridMismatchError
from fuzzydfs.fuzzy import (
    AlphaGrid,
    Interval,
    LevelwiseFuzzyVector,
    TriangularFuzzyNumber,
    alpha_cut,
    componentwise_distance,
    distance_E,
    distance_EN,
    hausdorff_interval,
    support_width,
)

from conftest import tfns

T = TriangularFuzzyNumber


def _hausdorff_oracle(a: Interval, b: Interval, m: int = 2001) -> float:
    """Brute-force sup/inf over dense samples of both intervals."""
    xa = np.linspace(a.lo, a.hi, m)
    xb = np.linspace(b.lo, b.hi, m)
    d = np.abs(xa[:, None] - xb[None, :])
    return max(d.min(axis=1).max(), d.min(axis=0).max())


def _fv(*ts):
    return LevelwiseFuzzyVector.from_tfns(list(ts))


class TestTFN:
    def test_rejects_unordered(self):
        with pytest.raises(FuzzyDomainError):
            T(1, 0, 2)

    @pytest.mark.parametrize("alpha,expected", [(0.0, (4, 7)), (1.0, (5, 5)), (0.5, (4.5, 6))])
    def test_alpha_cut(self, alpha, expected):
        cut = alpha_cut(T(4, 5, 7), alpha)
        assert (cut.lo, cut.hi) == pytest.approx(expected)

    def test_alpha_out_of_range(self):
        with pytest.raises(FuzzyDomainError):
            alpha_cut(T(0, 1, 2), 1.5)

    @given(tfns(), st.floats(0, 1), st.floats(0, 1))
    def test_cuts_nest(self, t, a, b):
        lo, hi = sorted((a, b))
        outer, inner = alpha_cut(t, lo), alpha_cut(t, hi)
        assert outer.lo <= inner.lo + 1e-12 and inner.hi <= outer.hi + 1e-12


class TestHausdorff:
    @pytest.mark.parametrize(
        "a,b,expected",
        [((0, 1), (0, 1), 0.0), ((0, 1), (2, 5), 4.0), ((1, 3), (2, 3), 1.0)],
    )
    def test_examples(self, a, b, expected):
        A, B = Interval(*a), Interval(*b)
        assert hausdorff_interval(A, B) == expected
        assert hausdorff_interval(A, B) == pytest.approx(_hausdorff_oracle(A, B), abs=1e-2)

    @settings(max_examples=200)
    @given(st.lists(st.floats(-5, 5), min_size=4, max_size=4))
    def test_matches_sampling_oracle(self, v):
        A, B = Interval(*sorted(v[:2])), Interval(*sorted(v[2:]))
        assert hausdorff_interval(A, B) == pytest.approx(_hausdorff_oracle(A, B), abs=1e-2)


class TestGrid:
    def test_uniform_default(self):
        g = AlphaGrid.uniform()
        assert len(g) == 11 and g.levels[0] == 0.0 and g.levels[-1] == 1.0
        assert g.index(0.3) == 3

    @pytest.mark.parametrize("levels", [(0.1, 1.0), (0.0, 0.5), (0.0, 0.6, 0.4, 1.0)])
    def test_invalid(self, levels):
        with pytest.raises(ValueError):
            AlphaGrid(levels)

    def test_mismatched_grids(self):
        x = LevelwiseFuzzyVector.from_tfns([T(0, 1, 2)], AlphaGrid.uniform(5))
        y = LevelwiseFuzzyVector.from_tfns([T(0, 1, 2)], AlphaGrid.uniform(11))
        with pytest.raises(GridMismatchError):
            distance_EN(x, y)


class TestDistances:
    def test_identical(self):
        x = _fv(T(0, 1, 3))
        assert distance_E(x, x) == 0.0
        assert distance_EN(x, x) == 0.0

    def test_crisp_points(self):
        assert distance_E(_fv(T(0, 0, 0)), _fv(T(1, 1, 1))) == 1.0

    def test_sup_taken_at_support(self):
        # |lower| gap is 0 everywhere; |upper| gap is 2 at alpha=0 and 1 at alpha=1
        x, y = _fv(T(0, 1, 2)), _fv(T(0, 2, 4))
        per_level = np.maximum(np.abs(x.lower - y.lower), np.abs(x.upper - y.upper))[:, 0]
        assert per_level[0] == 2.0 and per_level[-1] == 1.0
        assert distance_E(x, y) == 2.0

    def test_additive_over_components(self):
        x = _fv(T(0, 0, 0), T(5, 5, 5))
        y = _fv(T(1, 1, 1), T(4, 4, 4))
        assert distance_EN(x, y) == 2.0

    def test_scalar_only(self):
        with pytest.raises(GridMismatchError):
            distance_E(_fv(T(0, 0, 0), T(1, 1, 1)), _fv(T(0, 0, 0), T(1, 1, 1)))

    @given(st.lists(tfns(), min_size=6, max_size=6))
    def test_en_is_sum_of_componentwise_oracle(self, ts):
        x, y = _fv(*ts[:3]), _fv(*ts[3:])
        oracle = 0.0
        for i in range(3):
            oracle += max(
                hausdorff_interval(alpha_cut(ts[i], a), alpha_cut(ts[3 + i], a)) for a in x.grid.levels
            )
        assert distance_EN(x, y) == pytest.approx(oracle, abs=1e-12)

    @given(tfns(), tfns(), tfns())
    def test_metric_axioms(self, a, b, c):
        x, y, z = _fv(a), _fv(b), _fv(c)
        assert distance_E(x, y) == distance_E(y, x)
        assert distance_E(x, y) >= 0
        assert distance_E(x, z) <= distance_E(x, y) + distance_E(y, z) + 1e-12
        if distance_E(x, y) == 0:
            assert np.array_equal(x.lower, y.lower) and np.array_equal(x.upper, y.upper)


class TestLevelwiseVector:
    @given(st.lists(tfns(), min_size=1, max_size=5))
    def test_from_tfns_nested(self, ts):
        assert _fv(*ts).invariant_violations(1e-12) == 0

    @given(st.lists(tfns(), min_size=1, max_size=5))
    def test_tfn_round_trip(self, ts):
        x = _fv(*ts)
        for t, back in zip(ts, x.tfns()):
            assert back.as_tuple() == pytest.approx(t.as_tuple(), abs=1e-12)

    def test_support_width(self):
        x = _fv(T(0.695, 0.7, 0.705), T(0, 0.1, 0.2), T(3, 3, 3))
        assert support_width(x) == pytest.approx([0.01, 0.2, 0.0])

    def test_read_only(self):
        x = _fv(T(0, 1, 2))
        with pytest.raises(ValueError):
            x.lower[0, 0] = 5.0

    def test_negative_scaling_rejected(self):
        with pytest.raises(FuzzyDomainError):
            _fv(T(0, 1, 2)).scaled(-1)

    def test_violation_counter(self):
        g = AlphaGrid((0.0, 1.0))
        bad = LevelwiseFuzzyVector(g, np.array([[0.0], [2.0]]), np.array([[1.0], [1.5]]))
        # lower > upper at alpha=1, and the upper endpoint does not shrink
        assert bad.invariant_violations() == 2

    def test_componentwise_shape(self):
        x = _fv(T(0, 1, 2), T(1, 1, 1))
        assert componentwise_distance(x, x).shape == (2,)
