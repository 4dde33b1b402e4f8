"""Weighted digraphs, their Laplacians and the connectivity predicates.

Convention: ``adjacency[i, j] > 0`` is an arc from node i to node j, and
node i then reads node j's state (``j`` is in i's neighbourhood). The
Laplacian uses out-degrees, ``L = D_out - Gamma``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse.csgraph import breadth_first_order, connected_components

from .errors import ConsensusValueError


@dataclass(frozen=True, eq=False)
class WeightedDigraph:
    adjacency: np.ndarray

    def __post_init__(self):
        g = np.array(self.adjacency, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {g.shape}")
        if np.any(g < 0):
            raise ValueError("adjacency weights must be nonnegative")
        if np.any(np.diag(g) != 0):
            raise ValueError("adjacency must have a zero diagonal (no self loops)")
        g.flags.writeable = False
        object.__setattr__(self, "adjacency", g)

    @classmethod
    def from_edges(cls, p: int, edges: Iterable[Sequence[float]], one_based: bool = True) -> "WeightedDigraph":
        """Build from ``[from, to, weight]`` triples (node numbers 1..p by default)."""
        g = np.zeros((p, p))
        off = 1 if one_based else 0
        for e in edges:
            if len(e) == 2:
                i, j, w = e[0], e[1], 1.0
            else:
                i, j, w = e
            i, j = int(i) - off, int(j) - off
            if not (0 <= i < p and 0 <= j < p):
                raise ValueError(f"edge {list(e)} references a node outside 1..{p}")
            g[i, j] = w
        return cls(g)

    @classmethod
    def from_laplacian(cls, L: np.ndarray) -> "WeightedDigraph":
        L = np.asarray(L, dtype=float)
        g = -L.copy()
        np.fill_diagonal(g, 0.0)
        return cls(g)

    @property
    def p(self) -> int:
        return self.adjacency.shape[0]

    @property
    def out_degree(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    @property
    def in_degree(self) -> np.ndarray:
        return self.adjacency.sum(axis=0)


@dataclass(frozen=True, eq=False)
class LaplacianMatrix:
    L: np.ndarray

    @property
    def p(self) -> int:
        return self.L.shape[0]

    @property
    def l_star(self) -> float:
        """Largest diagonal entry (maximum weighted out-degree)."""
        return float(np.max(np.diag(self.L)))

    @property
    def l_min(self) -> float:
        return float(np.min(np.diag(self.L)))

    def __array__(self, dtype=None, copy=None):
        return self.L if dtype is None else self.L.astype(dtype)


def laplacian(g: WeightedDigraph) -> LaplacianMatrix:
    L = -g.adjacency.copy()
    # diagonal set to minus the off-diagonal row sum keeps rows summing to exactly 0
    np.fill_diagonal(L, 0.0)
    np.fill_diagonal(L, -L.sum(axis=1))
    L.flags.writeable = False
    return LaplacianMatrix(L)


def _as_L(L) -> np.ndarray:
    return L.L if isinstance(L, LaplacianMatrix) else np.asarray(L, dtype=float)


def is_strongly_connected(g: WeightedDigraph) -> bool:
    if g.p == 1:
        return True
    n, _ = connected_components(g.adjacency > 0, directed=True, connection="strong")
    return n == 1


def is_balanced(g: WeightedDigraph, tol: float = 1e-12) -> bool:
    return bool(np.allclose(g.in_degree, g.out_degree, rtol=0, atol=tol))


def spanning_tree_roots(g: WeightedDigraph) -> list[int]:
    """Nodes whose state reaches every other node through the protocol.

    Information travels against the arc direction (node i reads j when
    ``adjacency[i, j] > 0``), so we search the transposed graph.
    """
    flow = (g.adjacency.T > 0).astype(float)
    roots = []
    for v in range(g.p):
        reached = breadth_first_order(flow, v, directed=True, return_predecessors=False)
        if reached.size == g.p:
            roots.append(v)
    return roots


def has_directed_spanning_tree(g: WeightedDigraph) -> bool:
    return len(spanning_tree_roots(g)) > 0


def left_null_weights(L) -> np.ndarray:
    """Return r >= 0 with ``r^T L = 0`` and ``sum(r) = 1``.

    Raises:
        ConsensusValueError: if 0 is not a simple eigenvalue of ``L``.
    """
    L = _as_L(L)
    p = L.shape[0]
    g = WeightedDigraph.from_laplacian(L)
    if not has_directed_spanning_tree(g):
        raise ConsensusValueError(
            "graph has no directed spanning tree: zero is a repeated Laplacian eigenvalue"
        )
    M = np.vstack([L.T, np.ones((1, p))])
    rhs = np.zeros(p + 1)
    rhs[-1] = 1.0
    r, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    r[np.abs(r) < 1e-15] = 0.0
    return r


def zero_eigenvalue_multiplicity(L, tol: float = 1e-9) -> int:
    return int(np.count_nonzero(np.abs(np.linalg.eigvals(_as_L(L))) <= tol))


# topologies used by the case studies

def bipartite5() -> WeightedDigraph:
    """Nodes 1..3 each linked both ways with nodes 4 and 5, unit weights."""
    g = np.zeros((5, 5))
    g[:3, 3:] = 1.0
    g[3:, :3] = 1.0
    return WeightedDigraph(g)


def ring5() -> WeightedDigraph:
    """Directed ring: node i reads node i+1 (mod 5)."""
    return WeightedDigraph.from_edges(5, [(i + 1, (i + 1) % 5 + 1, 1.0) for i in range(5)])


def iim3() -> WeightedDigraph:
    """Weighted undirected three-node chain coupling the interdependency models."""
    return WeightedDigraph.from_edges(3, [(1, 2, 1), (2, 1, 1), (2, 3, 2), (3, 2, 2)])


PRESETS = {"bipartite5": bipartite5, "ring5": ring5, "iim3": iim3}


def preset(name: str) -> WeightedDigraph:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ValueError(f"unknown topology {name!r}; choose from {sorted(PRESETS)}") from None
