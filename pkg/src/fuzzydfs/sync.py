"""Output-coupled synchronization of identical positive linear systems.

Each of p copies runs ``z_i(k+1) = A z_i(k) + Omega C sum_j gamma_ij (z_j - z_i)``.
Stacking the copies gives ``z(k+1) = (I (x) A - L (x) Omega C) z(k)``. With
``Omega = K C^dagger`` the coupling reduces to a diagonal gain ``K`` no matter
which output matrix is shared, provided ``C^T C`` is invertible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .dfs import LinearDFS, levelwise_step, spectral_radius
from .errors import RankDeficientError, SyncPreconditionError
from .fuzzy import LevelwiseFuzzyVector, componentwise_distance
from .graph import LaplacianMatrix, WeightedDigraph, laplacian, left_null_weights


OmegaMethod = Literal["left", "moore-penrose"]


def _L(L) -> np.ndarray:
    return L.L if isinstance(L, LaplacianMatrix) else np.asarray(L, dtype=float)


def pseudo_inverse(C: np.ndarray) -> np.ndarray:
    """Left pseudo-inverse ``(C^T C)^-1 C^T``."""
    C = np.asarray(C, dtype=float)
    rank = np.linalg.matrix_rank(C)
    if rank < C.shape[1]:
        raise RankDeficientError(
            f"C^T C is singular: C ({C.shape[0]}x{C.shape[1]}) has rank {rank} < {C.shape[1]} columns"
        )
    return np.linalg.solve(C.T @ C, C.T)


def build_omega(K: np.ndarray, C: np.ndarray, method: OmegaMethod = "left") -> np.ndarray:
    """``Omega = K C^dagger`` so that ``Omega C = K``.

    ``method="moore-penrose"`` substitutes ``pinv(C)`` for rank-deficient C;
    then ``Omega C = K P`` with P the projector onto C's row space, and the
    identity ``Omega C = K`` no longer holds.
    """
    K = np.asarray(K, dtype=float)
    if np.any(K != np.diag(np.diag(K))):
        raise ValueError("gain K must be diagonal")
    if method == "moore-penrose":
        return K @ np.linalg.pinv(np.asarray(C, dtype=float))
    return K @ pseudo_inverse(C)


def build_stacked(A: np.ndarray, K: np.ndarray, L) -> np.ndarray:
    """``I_p (x) A - L (x) K``; pass ``K = Omega C`` for a general coupling."""
    A = np.asarray(A, dtype=float)
    L = _L(L)
    return np.kron(np.eye(L.shape[0]), A) - np.kron(L, np.asarray(K, dtype=float))


@dataclass
class GershgorinReport:
    """Disc centers/radii per (block row q, row i) of the stacked matrix."""

    centers: np.ndarray  # (p, n)
    radii: np.ndarray  # (p, n)
    all_centers_nonneg: bool
    all_bounded: bool
    violations: list[str] = field(default_factory=list)
    diagonal_gain_condition: bool = False  # k_ii <= a_ii / l_min for every i
    spectral_radius: float | None = None

    @property
    def preconditions_ok(self) -> bool:
        return not self.violations

    @property
    def pass_(self) -> bool:
        return self.all_centers_nonneg and self.all_bounded and self.preconditions_ok

    def as_dict(self) -> dict:
        return {
            "centers": self.centers.tolist(),
            "radii": self.radii.tolist(),
            "all_centers_nonneg": self.all_centers_nonneg,
            "all_bounded": self.all_bounded,
            "pass": self.pass_,
            "violations": list(self.violations),
            "diagonal_gain_condition": self.diagonal_gain_condition,
            "spectral_radius": self.spectral_radius,
        }


def gershgorin_check(A: np.ndarray, K: np.ndarray, L, tol: float = 1e-12) -> GershgorinReport:
    """Sufficient stability test for the stacked matrix.

    Centers ``a_ii - l_qq k_ii`` and radii ``sum_{j != i} a_ij + l_qq k_ii``;
    passes when every center is >= 0 and every disc stays inside [.., 1].
    Precondition breaches (negative entries, row sums above 1, non-diagonal
    or negative K) are listed in ``violations`` and fail the check.
    """
    A = np.asarray(A, dtype=float)
    K = np.asarray(K, dtype=float)
    L = _L(L)
    violations = []
    for i, j in zip(*np.nonzero(A < 0)):
        violations.append(f"A[{i},{j}] = {A[i, j]:.6g} < 0")
    for i, s in enumerate(A.sum(axis=1)):
        if s > 1 + tol:
            violations.append(f"row {i} of A sums to {s:.6g} > 1")
    if np.any(K != np.diag(np.diag(K))):
        violations.append("K is not diagonal")
    k = np.diag(K)
    for i in np.flatnonzero(k < 0):
        violations.append(f"k[{i}] = {k[i]:.6g} < 0")

    a = np.diag(A)
    off = A.sum(axis=1) - a
    lqq = np.diag(L)
    centers = a[None, :] - lqq[:, None] * k[None, :]
    radii = off[None, :] + lqq[:, None] * k[None, :]
    l_min = lqq.min() if lqq.size else 0.0
    diag_cond = bool(np.all(k >= 0) and (l_min == 0 or np.all(k <= a / l_min + tol)))
    return GershgorinReport(
        centers=centers,
        radii=radii,
        all_centers_nonneg=bool(np.all(centers >= -tol)),
        all_bounded=bool(np.all(centers + radii <= 1 + tol)),
        violations=violations,
        diagonal_gain_condition=diag_cond,
        spectral_radius=spectral_radius(build_stacked(A, K, L)),
    )


def sync_disagreement_radius(A: np.ndarray, gain: np.ndarray, L) -> float:
    """Spectral radius of the stacked matrix on the disagreement subspace.

    ``(I - 1 r^T) (x) I`` commutes with ``I (x) A - L (x) gain`` because
    ``r^T L = 0`` and ``L 1 = 0``; the copies synchronize iff this is < 1.
    """
    L = _L(L)
    r = left_null_weights(L)
    p = r.size
    n = np.asarray(A).shape[0]
    Pi = np.kron(np.eye(p) - np.outer(np.ones(p), r), np.eye(n))
    return spectral_radius(build_stacked(A, gain, L) @ Pi)


@dataclass(frozen=True, eq=False)
class SyncConfig:
    A: np.ndarray
    C: np.ndarray
    K: np.ndarray
    graph: WeightedDigraph
    tolerance: float = 1e-4
    max_steps: int = 600
    omega_method: OmegaMethod = "left"

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        C = np.array(self.C, dtype=float)
        K = np.array(self.K, dtype=float)
        if A.shape[0] != A.shape[1] or C.shape[1] != A.shape[0] or K.shape != A.shape:
            raise ValueError(f"inconsistent shapes: A {A.shape}, C {C.shape}, K {K.shape}")
        if np.any(K != np.diag(np.diag(K))) or np.any(np.diag(K) < 0):
            raise ValueError("K must be diagonal with nonnegative entries")
        if self.omega_method == "left":
            pseudo_inverse(C)  # raises if C^T C is singular
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "K", K)

    @property
    def laplacian(self) -> LaplacianMatrix:
        return laplacian(self.graph)

    @property
    def omega(self) -> np.ndarray:
        return build_omega(self.K, self.C, self.omega_method)

    @property
    def coupling(self) -> np.ndarray:
        """``Omega C`` as actually realised (equals K up to rounding)."""
        return self.omega @ self.C

    def stacked(self) -> np.ndarray:
        return build_stacked(self.A, self.coupling, self.laplacian)


@dataclass
class SyncResult:
    synchronized: bool
    steps_to_sync: int | None
    trajectory: list[LevelwiseFuzzyVector] = field(repr=False)
    predicted: list[LevelwiseFuzzyVector] = field(repr=False)
    disagreement: list[float] = field(repr=False)
    r: np.ndarray
    p: int
    n: int
    report: dict

    def system_state(self, i: int, step: int = -1) -> LevelwiseFuzzyVector:
        return self.trajectory[step].take(np.arange(i * self.n, (i + 1) * self.n))


def _pairwise_system_distance(x: LevelwiseFuzzyVector, p: int, n: int) -> float:
    d = 0.0
    blocks = [x.take(np.arange(i * n, (i + 1) * n)) for i in range(p)]
    for i in range(p):
        for j in range(i + 1, p):
            d = max(d, float(componentwise_distance(blocks[i], blocks[j]).sum()))
    return d


def predict_sync(A: np.ndarray, L, x0: Sequence[LevelwiseFuzzyVector], k: int) -> LevelwiseFuzzyVector:
    """Synchronized state at step k: ``A^k sum_j r_j x_j(0)`` per cut endpoint.

    Valid for entrywise nonnegative ``A`` (endpoints do not mix).
    """
    A = np.asarray(A, dtype=float)
    r = left_null_weights(L)
    if len(x0) != r.size:
        raise ValueError(f"expected {r.size} initial states, got {len(x0)}")
    lo = sum(rj * xj.lower for rj, xj in zip(r, x0))
    hi = sum(rj * xj.upper for rj, xj in zip(r, x0))
    Ak = np.linalg.matrix_power(A, k)
    return LevelwiseFuzzyVector(x0[0].grid, lo @ Ak.T, hi @ Ak.T)


def uncertainty_evolution(A: np.ndarray, L, x0: Sequence[LevelwiseFuzzyVector], steps: int) -> np.ndarray:
    """Support width of the synchronized evolution, shape ``(steps + 1, n)``."""
    A = np.asarray(A, dtype=float)
    r = left_null_weights(L)
    w = sum(rj * (xj.upper[0] - xj.lower[0]) for rj, xj in zip(r, x0))
    out = np.empty((steps + 1, A.shape[0]))
    out[0] = w
    for k in range(steps):
        out[k + 1] = A @ out[k]
    return out


def run_sync(
    cfg: SyncConfig,
    x0: Sequence[LevelwiseFuzzyVector],
    check: Literal["gershgorin", "spectral", "none"] = "gershgorin",
    steps: int | None = None,
) -> SyncResult:
    """Evolve the stacked fuzzy system for ``steps`` (default ``cfg.max_steps``).

    The stability precondition is verified first: ``"gershgorin"`` requires
    the disc test to pass; ``"spectral"`` instead requires a nonnegative
    stacked matrix whose disagreement radius is below 1.

    Raises:
        SyncPreconditionError: if the selected check fails.
    """
    p = cfg.graph.p
    n = cfg.A.shape[0]
    if len(x0) != p or any(x.n != n for x in x0):
        raise ValueError(f"need {p} initial states with {n} components each")
    M = cfg.stacked()
    gers = gershgorin_check(cfg.A, cfg.K, cfg.laplacian)
    dis_rad = sync_disagreement_radius(cfg.A, cfg.coupling, cfg.laplacian)
    report = gers.as_dict()
    report.update(disagreement_radius=dis_rad, stacked_nonnegative=bool(np.all(M >= -1e-15)), check=check)
    if check == "gershgorin" and not gers.pass_:
        raise SyncPreconditionError(f"Gershgorin check failed: {gers.violations or 'disc outside unit interval'}")
    if check == "spectral" and not (report["stacked_nonnegative"] and dis_rad < 1):
        raise SyncPreconditionError(
            f"spectral check failed: disagreement radius {dis_rad:.6g}, nonnegative={report['stacked_nonnegative']}"
        )

    steps = cfg.max_steps if steps is None else steps
    sys = LinearDFS(M)
    x = LevelwiseFuzzyVector.concat(list(x0))
    r = left_null_weights(cfg.laplacian)
    traj = [x]
    dis = [_pairwise_system_distance(x, p, n)]
    first = 0 if dis[0] <= cfg.tolerance else None
    for k in range(steps):
        x = levelwise_step(sys, x)
        traj.append(x)
        dis.append(_pairwise_system_distance(x, p, n))
        if first is None and dis[-1] <= cfg.tolerance:
            first = k + 1
    predicted = []
    A = cfg.A
    lo = sum(rj * xj.lower for rj, xj in zip(r, x0))
    hi = sum(rj * xj.upper for rj, xj in zip(r, x0))
    for k in range(steps + 1):
        predicted.append(LevelwiseFuzzyVector(x0[0].grid, lo, hi))
        lo, hi = lo @ A.T, hi @ A.T
    return SyncResult(
        synchronized=first is not None,
        steps_to_sync=first,
        trajectory=traj,
        predicted=predicted,
        disagreement=dis,
        r=r,
        p=p,
        n=n,
        report=report,
    )
