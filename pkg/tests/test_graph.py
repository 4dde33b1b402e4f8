import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import null_space
from scipy.sparse.csgraph import connected_components

from fuzzydfs.errors import ConsensusValueError
from fuzzydfs.graph import (
    LaplacianMatrix,
    WeightedDigraph,
    bipartite5,
    has_directed_spanning_tree,
    iim3,
    is_balanced,
    is_strongly_connected,
    laplacian,
    left_null_weights,
    preset,
    ring5,
    spanning_tree_roots,
    zero_eigenvalue_multiplicity,
)

from conftest import adjacency

L_A = [[2, 0, 0, -1, -1], [0, 2, 0, -1, -1], [0, 0, 2, -1, -1], [-1, -1, -1, 3, 0], [-1, -1, -1, 0, 3]]
L_B = [[1, -1, 0, 0, 0], [0, 1, -1, 0, 0], [0, 0, 1, -1, 0], [0, 0, 0, 1, -1], [-1, 0, 0, 0, 1]]


def _reach_oracle(g: np.ndarray, root: int) -> set[int]:
    """Nodes whose state depends on ``root``: i reads j when g[i, j] > 0."""
    seen, stack = {root}, [root]
    while stack:
        j = stack.pop()
        for i in range(g.shape[0]):
            if g[i, j] > 0 and i not in seen:
                seen.add(i)
                stack.append(i)
    return seen


def _null_oracle(L: np.ndarray) -> np.ndarray:
    ns = null_space(L.T)
    assert ns.shape[1] == 1
    r = ns[:, 0]
    return r / r.sum()


class TestLaplacian:
    def test_case_study_matrices(self):
        assert np.array_equal(laplacian(bipartite5()).L, L_A)
        assert np.array_equal(laplacian(ring5()).L, L_B)
        assert np.array_equal(laplacian(iim3()).L, [[1, -1, 0], [-1, 3, -2], [0, -2, 2]])

    def test_empty_graph(self):
        assert np.array_equal(laplacian(WeightedDigraph(np.zeros((3, 3)))).L, np.zeros((3, 3)))

    def test_l_star_and_l_min(self):
        L = laplacian(bipartite5())
        assert L.l_star == 3 and L.l_min == 2

    def test_from_edges_bounds(self):
        with pytest.raises(ValueError):
            WeightedDigraph.from_edges(2, [(1, 3, 1.0)])

    @pytest.mark.parametrize("bad", [[[0, -1], [1, 0]], [[1, 0], [0, 0]], [[0, 1, 0]]])
    def test_invalid_adjacency(self, bad):
        with pytest.raises(ValueError):
            WeightedDigraph(np.array(bad, dtype=float))

    def test_unknown_preset(self):
        with pytest.raises(ValueError, match="bipartite5"):
            preset("nope")

    @given(st.integers(1, 7).flatmap(adjacency))
    def test_row_sums_zero(self, g):
        L = laplacian(WeightedDigraph(g)).L
        assert np.max(np.abs(L.sum(axis=1))) <= 1e-12

    @given(st.integers(1, 7).flatmap(adjacency))
    def test_spectrum_in_closed_right_half_plane(self, g):
        assert np.all(np.linalg.eigvals(laplacian(WeightedDigraph(g)).L).real >= -1e-10)

    @given(st.integers(1, 7).flatmap(adjacency))
    def test_zero_multiplicity_counts_components_undirected(self, g):
        g = np.maximum(g, g.T)
        ncomp, _ = connected_components(g > 0, directed=False)
        assert zero_eigenvalue_multiplicity(laplacian(WeightedDigraph(g))) == ncomp


class TestPredicates:
    def test_bipartite(self):
        g = bipartite5()
        assert is_strongly_connected(g) and is_balanced(g) and has_directed_spanning_tree(g)

    def test_ring(self):
        g = ring5()
        assert is_strongly_connected(g) and is_balanced(g)
        assert all(len(_reach_oracle(g.adjacency, v)) == 5 for v in range(5))

    def test_two_isolated_nodes(self):
        g = WeightedDigraph(np.zeros((2, 2)))
        assert not is_strongly_connected(g)
        assert not has_directed_spanning_tree(g)
        # in-degree equals out-degree (both zero), so the graph counts as balanced
        assert is_balanced(g)

    def test_spanning_tree_direction(self):
        # node 1 reads node 0 only: node 0 is the root
        g = WeightedDigraph(np.array([[0.0, 0.0], [1.0, 0.0]]))
        assert spanning_tree_roots(g) == [0]
        assert not is_strongly_connected(g)

    @given(st.integers(1, 6).flatmap(adjacency))
    def test_roots_match_reachability_oracle(self, g):
        roots = [v for v in range(g.shape[0]) if len(_reach_oracle(g, v)) == g.shape[0]]
        assert spanning_tree_roots(WeightedDigraph(g)) == roots


class TestLeftNullWeights:
    def test_uniform_for_case_study(self):
        assert left_null_weights(laplacian(bipartite5())) == pytest.approx([0.2] * 5, abs=1e-12)
        assert left_null_weights(laplacian(ring5())) == pytest.approx([0.2] * 5, abs=1e-12)

    def test_star_reading_center(self):
        # leaves 1..3 read the center 0: the center's value is imposed on everyone
        g = WeightedDigraph.from_edges(4, [(i, 0, 1.0) for i in (1, 2, 3)], one_based=False)
        r = left_null_weights(laplacian(g))
        assert r == pytest.approx(_null_oracle(laplacian(g).L), abs=1e-12)
        assert r == pytest.approx([1, 0, 0, 0], abs=1e-12)

    def test_no_spanning_tree(self):
        with pytest.raises(ConsensusValueError):
            left_null_weights(np.zeros((2, 2)))

    @settings(max_examples=200)
    @given(st.integers(2, 8).flatmap(adjacency))
    def test_matches_null_space_oracle(self, g):
        wg = WeightedDigraph(g)
        if not has_directed_spanning_tree(wg):
            return
        L = laplacian(wg).L
        r = left_null_weights(L)
        assert r == pytest.approx(_null_oracle(L), abs=1e-9)
        assert np.all(r >= -1e-12) and r.sum() == pytest.approx(1.0)

    @settings(max_examples=200)
    @given(st.integers(2, 8).flatmap(lambda p: adjacency(p, (0.0, 1.0))))
    def test_balanced_strongly_connected_gives_uniform(self, g):
        g = np.maximum(g, g.T)  # symmetric implies balanced
        wg = WeightedDigraph(g)
        if not is_strongly_connected(wg):
            return
        p = g.shape[0]
        assert left_null_weights(laplacian(wg)) == pytest.approx(np.full(p, 1 / p), abs=1e-9)

    def test_accepts_wrapped_laplacian(self):
        L = LaplacianMatrix(np.array(L_A, dtype=float))
        assert left_null_weights(L).sum() == pytest.approx(1.0)
