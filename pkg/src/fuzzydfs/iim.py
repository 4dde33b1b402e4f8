"""Input-Output Inoperability Model (IIM) with fuzzy perturbations.

``q(k+1) = A q(k) + B c``, where ``q`` is the fractional inoperability of
each infrastructure and ``c`` a constant induced perturbation. Treating
``c`` as extra state gives the autonomous extended system
``w = [q; c]``, ``w(k+1) = [[A, B], [0, I]] w(k)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dfs import spectral_radius
from .errors import RankDeficientError, UnstableModelError
from .fuzzy import AlphaGrid, LevelwiseFuzzyVector, TriangularFuzzyNumber

# interdependency matrix of the three-infrastructure case study
CASE_STUDY_A = np.array([
    [0.1, 0.1, 0.3],
    [0.2, 0.1, 0.1],
    [0.2, 0.1, 0.2],
])


@dataclass(frozen=True, eq=False)
class IIMModel:
    """A (n x n) influence matrix; ``a_ij`` is how much j's inoperability feeds i's.

    ``B`` defaults to the identity. ``c`` is an optional fuzzy perturbation.
    """

    A: np.ndarray
    B: np.ndarray | None = None
    c: LevelwiseFuzzyVector | None = None

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got shape {A.shape}")
        if np.any(A < 0):
            raise ValueError("IIM influence matrix must be entrywise nonnegative")
        B = np.eye(A.shape[0]) if self.B is None else np.array(self.B, dtype=float)
        if B.shape != A.shape:
            raise ValueError(f"B must be {A.shape}, got {B.shape}")
        if self.c is not None and self.c.n != A.shape[0]:
            raise ValueError(f"perturbation has {self.c.n} components, model has {A.shape[0]}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def rho(self) -> float:
        return spectral_radius(self.A)

    def transfer(self) -> np.ndarray:
        """``H = (I - A)^-1 B``, the steady-state response to a unit perturbation."""
        if self.rho >= 1.0:
            raise UnstableModelError(f"no stable equilibrium: rho(A) = {self.rho:.6g} >= 1")
        return np.linalg.solve(np.eye(self.n) - self.A, self.B)


@dataclass(frozen=True, eq=False)
class ExtendedIIM:
    Atilde: np.ndarray
    n: int


def iim_equilibrium(m: IIMModel, c: np.ndarray) -> np.ndarray:
    return m.transfer() @ np.asarray(c, dtype=float)


def iim_equilibrium_fuzzy(m: IIMModel, c: LevelwiseFuzzyVector) -> LevelwiseFuzzyVector:
    """Endpoint-wise equilibrium; exact because ``(I - A)^-1 = sum A^k >= 0``."""
    H = m.transfer()
    if np.any(H < -1e-15):
        raise ValueError("(I - A)^-1 B has negative entries; endpoint-wise equilibrium is not valid")
    return LevelwiseFuzzyVector(c.grid, c.lower @ H.T, c.upper @ H.T)


def extend(m: IIMModel) -> ExtendedIIM:
    n = m.n
    At = np.block([[m.A, m.B], [np.zeros((n, n)), np.eye(n)]])
    return ExtendedIIM(At, n)


def eir(m: IIMModel, c: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Expected inoperability ratio: predicted steady state minus current estimate."""
    return m.transfer() @ np.asarray(c, dtype=float) - np.asarray(q, dtype=float)


def reduced_output_matrix(m: IIMModel) -> np.ndarray:
    """``C = [[-I, H], [1/n ... 1/n, 0 ... 0]]`` of shape ``(n + 1, 2n)``.

    Applied to ``w = [q; c]`` it yields the EIR vector followed by mean(q).
    """
    H = m.transfer()
    n = m.n
    if abs(np.linalg.det(H)) < 1e-14:
        raise RankDeficientError("H = (I - A)^-1 B is singular; C^T C would be singular too")
    top = np.hstack([-np.eye(n), H])
    bottom = np.hstack([np.full((1, n), 1.0 / n), np.zeros((1, n))])
    return np.vstack([top, bottom])


def local_perturbation(
    system: int, d: TriangularFuzzyNumber, n: int, grid: AlphaGrid | None = None
) -> LevelwiseFuzzyVector:
    """Fuzzy vector holding ``d`` at position ``system`` (1-based) and crisp 0 elsewhere."""
    if not 1 <= system <= n:
        raise IndexError(f"system index {system} outside 1..{n}")
    tfns = [TriangularFuzzyNumber.crisp(0.0)] * n
    tfns[system - 1] = d
    return LevelwiseFuzzyVector.from_tfns(tfns, grid)


def warn_out_of_range(x: LevelwiseFuzzyVector, what: str = "inoperability") -> bool:
    """Warn (no clamping) when an endpoint leaves [0, 1]. Returns True if it did."""
    bad = bool(np.any(x.lower < -1e-12) or np.any(x.upper > 1 + 1e-12))
    if bad:
        warnings.warn(f"{what} endpoint outside [0, 1]: min {x.lower.min():.4g}, max {x.upper.max():.4g}")
    return bad
