"""Fuzzy average consensus for networks of single and double integrators.

Single integrators step with the Perron matrix ``P = I - tau L``. Double
integrators stack positions over velocities,

    [y(k+1)]   [I - tau L    tau I  ] [y(k)]
    [v(k+1)] = [    0      I - tau L] [v(k)],

so velocities run an ordinary single-integrator consensus and positions
drift with the agreed velocity. As long as these matrices are entrywise
nonnegative the lower and upper cut endpoints evolve independently.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np

from .dfs import LinearDFS, levelwise_step
from .fuzzy import AlphaGrid, LevelwiseFuzzyVector, TriangularFuzzyNumber
from .graph import LaplacianMatrix, WeightedDigraph, has_directed_spanning_tree, laplacian, left_null_weights

Order = Literal["single", "double"]

# a run whose agent disagreement grows past this factor of its start value is declared divergent
DIVERGENCE_FACTOR = 1e6


@dataclass(frozen=True)
class ConsensusConfig:
    graph: WeightedDigraph
    tau: float
    order: Order = "single"
    tolerance: float = 1e-3
    max_steps: int = 500

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"sampling time tau must be > 0, got {self.tau}")
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be > 0, got {self.tolerance}")
        if self.order not in ("single", "double"):
            raise ValueError(f"order must be 'single' or 'double', got {self.order!r}")
        if self.max_steps < 0:
            raise ValueError("max_steps must be >= 0")

    @property
    def laplacian(self) -> LaplacianMatrix:
        return laplacian(self.graph)


@dataclass
class ConsensusResult:
    converged: bool
    steps_to_consensus: int | None
    final_state: LevelwiseFuzzyVector
    predicted_consensus: LevelwiseFuzzyVector | None
    order: Order
    p: int
    trajectory: list[LevelwiseFuzzyVector] = field(repr=False, default_factory=list)
    disagreement: list[float] = field(repr=False, default_factory=list)
    diverged: bool = False

    def agent_state(self, i: int, step: int | None = None) -> LevelwiseFuzzyVector:
        x = self.final_state if step is None else self.trajectory[step]
        return x.take(agent_indices(self.order, self.p, i))


def _L(L) -> np.ndarray:
    return L.L if isinstance(L, LaplacianMatrix) else np.asarray(L, dtype=float)


def perron(tau: float, L) -> np.ndarray:
    L = _L(L)
    return np.eye(L.shape[0]) - tau * L


def is_row_stochastic(P: np.ndarray, tol: float = 1e-12) -> bool:
    """Nonnegative entries and unit row sums."""
    return bool(np.all(P >= 0) and np.allclose(P.sum(axis=1), 1.0, rtol=0, atol=tol))


def _l_star(L) -> Fraction:
    L = L if isinstance(L, LaplacianMatrix) else LaplacianMatrix(_L(L))
    ls = L.l_star
    if ls <= 0:
        raise ValueError("edgeless graph: l* = 0, so no sampling-time bound exists")
    return Fraction(ls)


def max_tau_single(L) -> Fraction:
    """``1 / l*``: largest tau keeping the Perron matrix nonnegative."""
    return 1 / _l_star(L)


def max_tau_double(L) -> Fraction:
    """``1 / (l* + 1)``, the double-integrator bound used by the case studies.

    The looser ``1 / l*`` (see :func:`max_tau_double_theorem`) still keeps the
    block matrix nonnegative; both are exposed.
    """
    return 1 / (_l_star(L) + 1)


def max_tau_double_theorem(L) -> Fraction:
    return 1 / _l_star(L)


def disagreement_radius(F: np.ndarray, L) -> float:
    """Spectral radius of ``F`` on the disagreement subspace.

    With ``r^T L = 0`` the projector ``I - 1 r^T`` commutes with ``I - tau L``
    (and blockwise with the double-integrator matrix), so agents reach
    agreement iff this radius is below 1.
    """
    r = left_null_weights(L)
    p = r.size
    Pi = np.eye(p) - np.outer(np.ones(p), r)
    if F.shape[0] == 2 * p:
        Pi = np.kron(np.eye(2), Pi)
    return float(np.max(np.abs(np.linalg.eigvals(F @ Pi))))


def build_single_integrator(cfg: ConsensusConfig) -> LinearDFS:
    return LinearDFS(perron(cfg.tau, cfg.laplacian))


def build_double_integrator(cfg: ConsensusConfig) -> LinearDFS:
    P = perron(cfg.tau, cfg.laplacian)
    p = P.shape[0]
    F = np.block([[P, cfg.tau * np.eye(p)], [np.zeros((p, p)), P]])
    return LinearDFS(F)


def build_system(cfg: ConsensusConfig) -> LinearDFS:
    return build_single_integrator(cfg) if cfg.order == "single" else build_double_integrator(cfg)


def agent_indices(order: Order, p: int, i: int) -> list[int]:
    """Stacked-state indices owned by agent ``i`` (position before velocity)."""
    return [i] if order == "single" else [i, p + i]


def agent_labels(order: Order, p: int) -> list[tuple[int, int]]:
    """``(agent, component)`` for every stacked index, 1-based agents."""
    if order == "single":
        return [(i + 1, 0) for i in range(p)]
    return [(i + 1, 0) for i in range(p)] + [(i + 1, 1) for i in range(p)]


def pairwise_disagreement(x: LevelwiseFuzzyVector, order: Order, p: int) -> float:
    """Largest d_E^q between any two agents (q = 1 or 2 state variables each)."""
    q = 1 if order == "single" else 2
    lo = x.lower.reshape(x.lower.shape[0], q, p)
    hi = x.upper.reshape(x.upper.shape[0], q, p)
    # (levels, q, p, p): Hausdorff distance of every pair of cuts
    d = np.maximum(
        np.abs(lo[:, :, :, None] - lo[:, :, None, :]),
        np.abs(hi[:, :, :, None] - hi[:, :, None, :]),
    )
    return float(d.max(axis=0).sum(axis=0).max())


def stack_initial(
    x0, order: Order, grid: AlphaGrid | None = None
) -> LevelwiseFuzzyVector:
    """Normalise initial conditions to one stacked fuzzy vector.

    ``x0`` may already be a stacked vector, a sequence of TFNs (single), or a
    ``(positions, velocities)`` pair of TFN sequences (double).
    """
    if isinstance(x0, LevelwiseFuzzyVector):
        return x0
    if order == "single":
        return LevelwiseFuzzyVector.from_tfns(_tfns(x0), grid)
    pos, vel = x0
    return LevelwiseFuzzyVector.from_tfns(_tfns(pos) + _tfns(vel), grid)


def _tfns(seq) -> list[TriangularFuzzyNumber]:
    return [t if isinstance(t, TriangularFuzzyNumber) else TriangularFuzzyNumber.from_sequence(t) for t in seq]


def predict_consensus(L, x0: LevelwiseFuzzyVector, order: Order, tau: float, step: int = 0) -> LevelwiseFuzzyVector:
    """Closed-form agreement value per alpha level.

    Single integrators: every endpoint goes to ``sum_j r_j x_j(0)``. Double
    integrators: velocities agree on ``v* = sum_j r_j v_j(0)`` and positions
    on ``sum_j r_j y_j(0) + step * tau * v*``. Returns one agent's state
    (1 or 2 components).

    Raises:
        ConsensusValueError: when the graph has no directed spanning tree.
    """
    r = left_null_weights(L)
    p = r.size
    if order == "single":
        if x0.n != p:
            raise ValueError(f"expected {p} agents, got {x0.n}")
        return LevelwiseFuzzyVector(x0.grid, x0.lower @ r, x0.upper @ r)
    if x0.n != 2 * p:
        raise ValueError(f"expected {2 * p} stacked states, got {x0.n}")
    v_lo, v_hi = x0.lower[:, p:] @ r, x0.upper[:, p:] @ r
    y_lo = x0.lower[:, :p] @ r + step * tau * v_lo
    y_hi = x0.upper[:, :p] @ r + step * tau * v_hi
    return LevelwiseFuzzyVector(x0.grid, np.stack([y_lo, v_lo], axis=1), np.stack([y_hi, v_hi], axis=1))


def run_consensus(cfg: ConsensusConfig, x0, grid: AlphaGrid | None = None, keep_trajectory: bool = True) -> ConsensusResult:
    """Evolve the fuzzy agents until every pair is within ``cfg.tolerance``.

    Stops at the first step where the largest pairwise distance drops to the
    tolerance, when the disagreement blows up (divergence), or after
    ``cfg.max_steps`` steps.
    """
    x = stack_initial(x0, cfg.order, grid)
    p = cfg.graph.p
    expected = p if cfg.order == "single" else 2 * p
    if x.n != expected:
        raise ValueError(f"{cfg.order} integrators on {p} agents need {expected} initial states, got {x.n}")
    sys = build_system(cfg)
    traj = [x]
    dis = [pairwise_disagreement(x, cfg.order, p)]
    start = max(dis[0], cfg.tolerance)
    converged = dis[0] <= cfg.tolerance
    diverged = False
    k = 0
    while not converged and k < cfg.max_steps:
        x = levelwise_step(sys, x)
        k += 1
        d = pairwise_disagreement(x, cfg.order, p)
        if keep_trajectory:
            traj.append(x)
        dis.append(d)
        if d <= cfg.tolerance:
            converged = True
        elif not math.isfinite(d) or d > DIVERGENCE_FACTOR * start:
            diverged = True
            break

    predicted = None
    if has_directed_spanning_tree(cfg.graph):
        predicted = predict_consensus(cfg.laplacian, traj[0], cfg.order, cfg.tau, step=k)
    if not keep_trajectory:
        traj = [traj[0], x]
    return ConsensusResult(
        converged=converged,
        steps_to_consensus=k if converged else None,
        final_state=x,
        predicted_consensus=predicted,
        order=cfg.order,
        p=p,
        trajectory=traj,
        disagreement=dis,
        diverged=diverged,
    )


@dataclass(frozen=True)
class SweepRow:
    tau: float
    steps: int | None
    time_to_consensus: float | None
    status: str  # "converged" | "divergent" | "max_steps"
    disagreement_radius: float


def tau_sweep(cfg: ConsensusConfig, tau_values: Sequence[float], x0, grid: AlphaGrid | None = None) -> list[SweepRow]:
    """Time to consensus ``tau * k*`` for every sampling time in ``tau_values``.

    A run that never reaches the tolerance is ``"divergent"`` when its
    disagreement blew up or the crisp disagreement radius is >= 1 (no
    agreement is possible), and ``"max_steps"`` otherwise.
    """
    rows = []
    L = cfg.laplacian
    for tau in tau_values:
        if not 0 < tau <= 1:
            raise ValueError(f"sweep values must lie in (0, 1], got {tau}")
        c = replace(cfg, tau=float(tau))
        rad = disagreement_radius(build_system(c).F, L)
        res = run_consensus(c, x0, grid, keep_trajectory=False)
        if res.converged:
            rows.append(SweepRow(float(tau), res.steps_to_consensus, tau * res.steps_to_consensus, "converged", rad))
        else:
            status = "divergent" if res.diverged or rad >= 1 - 1e-12 else "max_steps"
            rows.append(SweepRow(float(tau), None, None, status, rad))
    return rows


def write_sweep_csv(path, rows: Sequence[SweepRow], extra: dict | None = None) -> None:
    extra = extra or {}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([*extra.keys(), "tau", "steps", "time_to_consensus", "status", "disagreement_radius"])
        for r in rows:
            w.writerow([
                *extra.values(),
                f"{r.tau:.12g}",
                "" if r.steps is None else r.steps,
                "" if r.time_to_consensus is None else f"{r.time_to_consensus:.12g}",
                r.status,
                f"{r.disagreement_radius:.12g}",
            ])
