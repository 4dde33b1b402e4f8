"""Level-wise evolution of linear discrete-time fuzzy systems.

For ``x(k+1) = F x(k)`` with fuzzy state, every alpha-cut evolves through

    lower' = F+ lower + F- upper
    upper' = F- lower + F+ upper

where ``F+ = max(F, 0)`` and ``F- = min(F, 0)``. In the coordinates
``(upper - lower, upper + lower)`` this block matrix is ``diag(|F|, F)``, so
the fuzzy system is stable iff both ``F`` and ``|F|`` are; ``rho(F) <= rho(|F|)``
makes the latter the binding test.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import GridMismatchError
from .fuzzy import LevelwiseFuzzyVector

log = logging.getLogger(__name__)


def split_pos_neg(F: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    F = np.asarray(F, dtype=float)
    if F.ndim != 2 or F.shape[0] != F.shape[1]:
        raise ValueError(f"dynamics matrix must be square, got shape {F.shape}")
    return np.maximum(F, 0.0), np.minimum(F, 0.0)


@dataclass(frozen=True, eq=False)
class LinearDFS:
    F: np.ndarray

    def __post_init__(self):
        F = np.array(self.F, dtype=float)
        Fp, Fm = split_pos_neg(F)
        for m in (F, Fp, Fm):
            m.flags.writeable = False
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "F_plus", Fp)
        object.__setattr__(self, "F_minus", Fm)
        absF = np.abs(F)
        absF.flags.writeable = False
        object.__setattr__(self, "F_abs", absF)

    @property
    def n(self) -> int:
        return self.F.shape[0]

    @property
    def monotone(self) -> bool:
        return not np.any(self.F < 0)

    def step(self, x: LevelwiseFuzzyVector) -> LevelwiseFuzzyVector:
        return levelwise_step(self, x)


def _apply(F: np.ndarray, X: np.ndarray) -> np.ndarray:
    # one matrix-vector product per level, the same kernel as simulate_crisp,
    # so a crisp slice evolves bit for bit like the crisp recursion
    return np.stack([F @ row for row in X])


def levelwise_step(sys: LinearDFS, x: LevelwiseFuzzyVector) -> LevelwiseFuzzyVector:
    """One step of the F+/F- recursion, written in width form.

    ``lower' = F lower + F- w`` and ``upper' = lower' + |F| w`` with
    ``w = upper - lower >= 0``; this equals the split recursion and keeps
    ``lower' <= upper'`` exact in floating point.
    """
    if x.n != sys.n:
        raise GridMismatchError(f"state has {x.n} components, system has {sys.n}")
    lo = np.ascontiguousarray(x.lower)
    w = np.ascontiguousarray(x.upper - x.lower)
    lower = _apply(sys.F, lo)
    if not sys.monotone:
        lower = lower + _apply(sys.F_minus, w)
    upper = lower + _apply(sys.F_abs, w)
    return LevelwiseFuzzyVector(x.grid, lower, upper)


def simulate_dfs(sys: LinearDFS, x0: LevelwiseFuzzyVector, steps: int) -> list[LevelwiseFuzzyVector]:
    if steps < 0:
        raise ValueError("steps must be >= 0")
    traj = [x0]
    for _ in range(steps):
        traj.append(levelwise_step(sys, traj[-1]))
    return traj


def simulate_crisp(F: np.ndarray, z0: np.ndarray, steps: int) -> np.ndarray:
    """Plain ``z(k+1) = F z(k)``; returns shape ``(steps + 1, n)``."""
    F = np.asarray(F, dtype=float)
    out = np.empty((steps + 1, F.shape[0]))
    out[0] = z0
    for k in range(steps):
        out[k + 1] = F @ out[k]
    return out


@dataclass(frozen=True)
class StabilityReport:
    rho_F: float
    rho_absF: float
    monotone: bool
    fuzzy_stable: bool

    def as_dict(self) -> dict:
        return {
            "rho_F": self.rho_F,
            "rho_absF": self.rho_absF,
            "monotone": self.monotone,
            "fuzzy_stable": self.fuzzy_stable,
        }


def spectral_radius(M: np.ndarray) -> float:
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def perron_root(M: np.ndarray, tol: float = 1e-10, max_iter: int = 100_000) -> float:
    """Perron root of a nonnegative matrix by power iteration on ``M + I``.

    The unit shift makes irreducible matrices primitive so the iteration
    converges even for periodic patterns such as rings.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    S = M + np.eye(n)
    v = np.ones(n) / n
    lam = 0.0
    for _ in range(max_iter):
        w = S @ v
        s = w.sum()
        if s == 0.0:
            return 0.0
        w /= s
        lam_new = float((S @ w).sum())
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)) and np.max(np.abs(w - v)) <= tol:
            return lam_new - 1.0
        v, lam = w, lam_new
    return lam - 1.0


def stability_report(F: np.ndarray) -> StabilityReport:
    F = np.asarray(F, dtype=float)
    rho_F = spectral_radius(F)
    absF = np.abs(F)
    rho_abs = spectral_radius(absF)
    check = perron_root(absF)
    # defective (Jordan) spectra slow power iteration to O(1/k), hence the loose gate
    if abs(check - rho_abs) > 1e-3 * max(1.0, rho_abs):
        log.warning("eigenvalue and power-iteration estimates of rho(|F|) disagree: %g vs %g", rho_abs, check)
    return StabilityReport(
        rho_F=rho_F,
        rho_absF=rho_abs,
        monotone=not bool(np.any(F < 0)),
        fuzzy_stable=rho_abs < 1.0,
    )


def write_trajectory_csv(
    path,
    trajectory: Sequence[LevelwiseFuzzyVector],
    agents: Sequence[tuple[int, int]] | None = None,
) -> None:
    """Write ``step,agent,alpha,component,lower,upper`` rows.

    ``agents`` maps each stacked state index to ``(agent, component)``; by
    default every index is its own agent with component 0.
    """
    n = trajectory[0].n
    agents = agents or [(i, 0) for i in range(n)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "agent", "alpha", "component", "lower", "upper"])
        for k, x in enumerate(trajectory):
            for a_idx, alpha in enumerate(x.alphas):
                for i in range(n):
                    agent, comp = agents[i]
                    w.writerow([k, agent, f"{alpha:.12g}", comp, repr(float(x.lower[a_idx, i])), repr(float(x.upper[a_idx, i]))])
