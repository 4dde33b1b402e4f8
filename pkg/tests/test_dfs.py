import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuzzydfs.dfs import (
    LinearDFS,
    levelwise_step,
    perron_root,
    simulate_crisp,
    simulate_dfs,
    split_pos_neg,
    spectral_radius,
    stability_report,
    write_trajectory_csv,
)
from fuzzydfs.errors import GridMismatchError
from fuzzydfs.fuzzy import AlphaGrid, LevelwiseFuzzyVector, TriangularFuzzyNumber, distance_EN
from fuzzydfs.iim import CASE_STUDY_A, IIMModel, extend

from conftest import matrices, tfns

T = TriangularFuzzyNumber


def corner_oracle(F: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact image of the box [lo, hi] under z -> F z, by enumerating its 2^N corners."""
    images = np.array([F @ np.where(mask, hi, lo) for mask in itertools.product([False, True], repeat=lo.size)])
    return images.min(axis=0), images.max(axis=0)


class TestSplit:
    def test_mixed(self):
        Fp, Fm = split_pos_neg(np.array([[0.5, -0.2], [0, 1]]))
        assert np.array_equal(Fp, [[0.5, 0], [0, 1]])
        assert np.array_equal(Fm, [[0, -0.2], [0, 0]])

    def test_signs(self):
        F = np.array([[0.3, 0.1], [0.2, 0.0]])
        assert np.array_equal(split_pos_neg(F)[0], F) and not split_pos_neg(F)[1].any()
        assert np.array_equal(split_pos_neg(-F)[1], -F) and not split_pos_neg(-F)[0].any()

    def test_non_square(self):
        with pytest.raises(ValueError):
            split_pos_neg(np.ones((2, 3)))

    @given(matrices(3))
    def test_parts_recombine(self, F):
        Fp, Fm = split_pos_neg(F)
        assert np.array_equal(Fp + Fm, F) and np.array_equal(Fp - Fm, np.abs(F))


class TestStep:
    def test_identity(self):
        x = LevelwiseFuzzyVector.from_tfns([T(0, 1, 2), T(-1, 0, 3)])
        assert levelwise_step(LinearDFS(np.eye(2)), x).allclose(x, atol=0)

    def test_crisp_nonnegative(self):
        F = np.array([[0.2, 0.5], [0.1, 0.3]])
        z = np.array([1.0, -2.0])
        y = levelwise_step(LinearDFS(F), LevelwiseFuzzyVector.crisp(z))
        assert np.allclose(y.lower, F @ z) and np.allclose(y.upper, F @ z)

    def test_swap_negation(self):
        g = AlphaGrid((0.0, 1.0))
        x = LevelwiseFuzzyVector(g, np.array([[0.0, 0.0], [0.5, 0.5]]), np.array([[1.0, 1.0], [0.5, 0.5]]))
        y = levelwise_step(LinearDFS(np.array([[0.0, -1.0], [-1.0, 0.0]])), x)
        assert np.array_equal(y.lower[0], [-1, -1]) and np.array_equal(y.upper[0], [0, 0])

    def test_dimension_mismatch(self):
        with pytest.raises(GridMismatchError):
            levelwise_step(LinearDFS(np.eye(3)), LevelwiseFuzzyVector.from_tfns([T(0, 0, 0)]))

    @settings(max_examples=300)
    @given(st.integers(1, 3).flatmap(lambda n: st.tuples(matrices(n, -2, 2), st.lists(tfns(-5, 5), min_size=n, max_size=n))))
    def test_corner_oracle(self, case):
        F, ts = case
        x = LevelwiseFuzzyVector.from_tfns(ts, AlphaGrid.uniform(5))
        y = levelwise_step(LinearDFS(F), x)
        for k in range(len(x.grid)):
            lo, hi = corner_oracle(F, x.lower[k], x.upper[k])
            assert np.max(np.abs(y.lower[k] - lo)) <= 1e-12
            assert np.max(np.abs(y.upper[k] - hi)) <= 1e-12

    @given(st.integers(1, 4).flatmap(lambda n: st.tuples(matrices(n, -2, 2), st.lists(tfns(-5, 5), min_size=n, max_size=n))))
    def test_preserves_order_and_nesting(self, case):
        F, ts = case
        x = LevelwiseFuzzyVector.from_tfns(ts)
        for _ in range(3):
            x = levelwise_step(LinearDFS(F), x)
            assert x.invariant_violations(1e-9 * max(1.0, np.abs(x.upper).max())) == 0


class TestSimulate:
    def test_zero_steps(self):
        x = LevelwiseFuzzyVector.from_tfns([T(0, 1, 2)])
        assert simulate_dfs(LinearDFS(np.eye(1)), x, 0) == [x]

    def test_contraction(self):
        F = np.array([[0.3, 0.2], [0.1, 0.4]])
        x0 = LevelwiseFuzzyVector.from_tfns([T(1, 2, 3), T(0, 1, 4)])
        traj = simulate_dfs(LinearDFS(F), x0, 200)
        zero = LevelwiseFuzzyVector.zeros(2)
        assert distance_EN(traj[-1], zero) < 1e-8 < distance_EN(x0, zero)

    def test_peak_matches_crisp_for_extended_iim(self):
        At = extend(IIMModel(CASE_STUDY_A)).Atilde
        ts = [T(0.05, 0.1, 0.15), T(0, 0, 0), T(0, 0, 0), T(0.05, 0.1, 0.15), T(0, 0, 0), T(0, 0, 0)]
        x0 = LevelwiseFuzzyVector.from_tfns(ts)
        traj = simulate_dfs(LinearDFS(At), x0, 100)
        crisp = simulate_crisp(At, x0.peak(), 100)
        peaks = np.array([x.peak() for x in traj])
        assert np.max(np.abs(peaks - crisp)) <= 1e-12

    @given(st.integers(1, 4).flatmap(lambda n: st.tuples(matrices(n, 0, 0.4), st.lists(st.floats(-3, 3), min_size=n, max_size=n))))
    def test_crisp_input_reproduces_crisp_recursion(self, case):
        F, z = case
        traj = simulate_dfs(LinearDFS(F), LevelwiseFuzzyVector.crisp(z), 10)
        ref = simulate_crisp(F, np.asarray(z, dtype=float), 10)
        for x, r in zip(traj, ref):
            assert np.array_equal(x.lower, x.upper) and np.all(x.lower == r)

    @given(st.integers(1, 4).flatmap(lambda n: st.tuples(matrices(n, -2, 2), st.lists(tfns(-5, 5), min_size=n, max_size=n))))
    def test_peak_slice_is_bit_identical_to_crisp(self, case):
        F, ts = case
        x0 = LevelwiseFuzzyVector.from_tfns(ts)
        traj = simulate_dfs(LinearDFS(F), x0, 15)
        assert np.array_equal(np.array([x.peak() for x in traj]), simulate_crisp(F, x0.peak(), 15))


class TestStability:
    def test_scaled_identity(self):
        rep = stability_report(0.5 * np.eye(3))
        assert rep.rho_F == pytest.approx(0.5) and rep.rho_absF == pytest.approx(0.5) and rep.fuzzy_stable

    def test_case_study_matrix(self):
        rep = stability_report(CASE_STUDY_A)
        assert rep.rho_F == pytest.approx(0.4791, abs=1e-4) and rep.fuzzy_stable and rep.monotone

    def test_unstable_swap(self):
        rep = stability_report(np.array([[0.0, -1.05], [-1.05, 0.0]]))
        assert rep.rho_F == pytest.approx(1.05) and not rep.fuzzy_stable and not rep.monotone

    def test_fuzzy_unstable_though_crisp_stable(self):
        # F has eigenvalues 0.5 +- 0.6i (modulus 0.78); |F| has Perron root 1.1
        F = np.array([[0.5, -0.6], [0.6, 0.5]])
        rep = stability_report(F)
        assert rep.rho_F < 1 < rep.rho_absF and not rep.fuzzy_stable

    @given(matrices(4, -1, 1))
    def test_rho_bounded_by_abs(self, F):
        assert spectral_radius(F) <= spectral_radius(np.abs(F)) + 1e-9

    @settings(max_examples=100)
    @given(matrices(4, 0, 1))
    def test_power_iteration_agrees(self, F):
        assert perron_root(F) == pytest.approx(spectral_radius(F), abs=1e-5)

    @given(st.integers(1, 3).flatmap(lambda n: st.tuples(matrices(n, -0.3, 0.3), st.lists(tfns(-5, 5), min_size=n, max_size=n))))
    def test_stable_trajectories_vanish(self, case):
        F, ts = case
        if not stability_report(F).fuzzy_stable:
            return
        x0 = LevelwiseFuzzyVector.from_tfns(ts)
        traj = simulate_dfs(LinearDFS(F), x0, 400)
        zero = LevelwiseFuzzyVector.zeros(len(ts))
        assert distance_EN(traj[-1], zero) <= 1e-8


def test_trajectory_csv(tmp_path):
    x0 = LevelwiseFuzzyVector.from_tfns([T(0, 1, 2), T(1, 1, 1)], AlphaGrid((0.0, 1.0)))
    traj = simulate_dfs(LinearDFS(np.eye(2) * 0.5), x0, 1)
    path = tmp_path / "t.csv"
    write_trajectory_csv(path, traj, [(1, 0), (2, 0)])
    lines = path.read_text().splitlines()
    assert lines[0] == "step,agent,alpha,component,lower,upper"
    assert len(lines) == 1 + 2 * 2 * 2
    assert lines[-1] == "1,2,1,0,0.5,0.5"
