"""Triangular fuzzy numbers, alpha-cuts and level-wise fuzzy vectors.

A fuzzy vector is stored by its alpha-cuts on a finite, ascending grid of
levels: for every level we keep the lower and the upper endpoint of each
component's interval. Linear nonnegative dynamics act on each level
independently, so this is all the state the simulators need.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import FuzzyDomainError, GridMismatchError

DEFAULT_LEVELS = 11


@dataclass(frozen=True)
class TriangularFuzzyNumber:
    """TFN given by the abscissae of its vertices, ``l <= c <= r``."""

    l: float
    c: float
    r: float

    def __post_init__(self):
        if not (self.l <= self.c <= self.r):
            raise FuzzyDomainError(f"TFN vertices must satisfy l <= c <= r, got {self.as_tuple()}")

    @classmethod
    def crisp(cls, value: float) -> "TriangularFuzzyNumber":
        return cls(value, value, value)

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> "TriangularFuzzyNumber":
        if len(values) != 3:
            raise FuzzyDomainError(f"a TFN literal needs 3 numbers, got {len(values)}")
        return cls(*(float(v) for v in values))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.l, self.c, self.r)

    @property
    def width(self) -> float:
        return self.r - self.l

    def cut(self, alpha: float) -> "Interval":
        return alpha_cut(self, alpha)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise FuzzyDomainError(f"interval with lo > hi: [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class AlphaGrid:
    """Strictly increasing alpha levels, from 0 to 1 inclusive."""

    levels: tuple[float, ...]

    def __post_init__(self):
        lv = np.asarray(self.levels, dtype=float)
        if lv.ndim != 1 or lv.size < 2:
            raise FuzzyDomainError("an alpha grid needs at least the levels 0 and 1")
        if lv[0] != 0.0 or lv[-1] != 1.0:
            raise FuzzyDomainError("an alpha grid must start at 0 and end at 1")
        if np.any(np.diff(lv) <= 0):
            raise FuzzyDomainError("alpha levels must be strictly increasing")
        object.__setattr__(self, "levels", tuple(float(a) for a in lv))

    @classmethod
    def uniform(cls, n_levels: int = DEFAULT_LEVELS) -> "AlphaGrid":
        return cls(tuple(np.round(np.linspace(0.0, 1.0, n_levels), 12)))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.levels)

    def __len__(self) -> int:
        return len(self.levels)

    def index(self, alpha: float) -> int:
        """Position of ``alpha`` in the grid (exact match up to 1e-12)."""
        hits = np.flatnonzero(np.abs(self.array - alpha) <= 1e-12)
        if hits.size == 0:
            raise FuzzyDomainError(f"alpha={alpha} is not a grid level")
        return int(hits[0])


def alpha_cut(t: TriangularFuzzyNumber, alpha: float) -> Interval:
    if not 0.0 <= alpha <= 1.0:
        raise FuzzyDomainError(f"alpha must lie in [0, 1], got {alpha}")
    return Interval(t.c - (1.0 - alpha) * (t.c - t.l), t.c + (1.0 - alpha) * (t.r - t.c))


def hausdorff_interval(a: Interval, b: Interval) -> float:
    """Hausdorff distance between two closed real intervals."""
    return max(abs(a.lo - b.lo), abs(a.hi - b.hi))


@dataclass(frozen=True, eq=False)
class LevelwiseFuzzyVector:
    """N fuzzy numbers stored as alpha-cut endpoints.

    ``lower`` and ``upper`` have shape ``(len(grid), n)``; row ``k`` holds the
    cut at ``grid.levels[k]``.
    """

    grid: AlphaGrid
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lower, dtype=float)
        hi = np.array(self.upper, dtype=float)
        if lo.ndim == 1:
            lo = lo[:, None]
            hi = hi[:, None]
        if lo.shape != hi.shape or lo.shape[0] != len(self.grid):
            raise GridMismatchError(
                f"endpoint arrays {lo.shape}/{hi.shape} do not match a grid of {len(self.grid)} levels"
            )
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    # construction

    @classmethod
    def from_tfns(
        cls, tfns: Iterable[TriangularFuzzyNumber], grid: AlphaGrid | None = None
    ) -> "LevelwiseFuzzyVector":
        grid = grid or AlphaGrid.uniform()
        t = np.array([x.as_tuple() for x in tfns], dtype=float).reshape(-1, 3)
        a = grid.array[:, None]
        lower = t[:, 1] - (1.0 - a) * (t[:, 1] - t[:, 0])
        upper = t[:, 1] + (1.0 - a) * (t[:, 2] - t[:, 1])
        return cls(grid, lower, upper)

    @classmethod
    def crisp(cls, values: Sequence[float], grid: AlphaGrid | None = None) -> "LevelwiseFuzzyVector":
        grid = grid or AlphaGrid.uniform()
        z = np.tile(np.asarray(values, dtype=float), (len(grid), 1))
        return cls(grid, z, z.copy())

    @classmethod
    def zeros(cls, n: int, grid: AlphaGrid | None = None) -> "LevelwiseFuzzyVector":
        return cls.crisp(np.zeros(n), grid)

    @classmethod
    def concat(cls, parts: Sequence["LevelwiseFuzzyVector"]) -> "LevelwiseFuzzyVector":
        grid = parts[0].grid
        for p in parts[1:]:
            if p.grid != grid:
                raise GridMismatchError("cannot concatenate vectors on different alpha grids")
        return cls(
            grid,
            np.concatenate([p.lower for p in parts], axis=1),
            np.concatenate([p.upper for p in parts], axis=1),
        )

    # views

    @property
    def n(self) -> int:
        return self.lower.shape[1]

    @property
    def alphas(self) -> np.ndarray:
        return self.grid.array

    def take(self, idx) -> "LevelwiseFuzzyVector":
        idx = np.atleast_1d(idx)
        return LevelwiseFuzzyVector(self.grid, self.lower[:, idx], self.upper[:, idx])

    def scaled(self, factor: float) -> "LevelwiseFuzzyVector":
        if factor < 0:
            raise FuzzyDomainError("negative scaling swaps endpoints; use a DFS step instead")
        return LevelwiseFuzzyVector(self.grid, self.lower * factor, self.upper * factor)

    def cut(self, i: int, alpha: float) -> Interval:
        k = self.grid.index(alpha)
        return Interval(self.lower[k, i], self.upper[k, i])

    def peak(self) -> np.ndarray:
        """Alpha = 1 slice (lower endpoint; equal to the upper one for proper fuzzy numbers)."""
        return self.lower[-1].copy()

    def tfn(self, i: int) -> TriangularFuzzyNumber:
        """Read component ``i`` back as a TFN from its support and its peak."""
        return TriangularFuzzyNumber(float(self.lower[0, i]), float(self.lower[-1, i]), float(self.upper[0, i]))

    def tfns(self) -> list[TriangularFuzzyNumber]:
        return [self.tfn(i) for i in range(self.n)]

    def allclose(self, other: "LevelwiseFuzzyVector", atol: float = 1e-12) -> bool:
        _check_compatible(self, other)
        return bool(
            np.allclose(self.lower, other.lower, rtol=0, atol=atol)
            and np.allclose(self.upper, other.upper, rtol=0, atol=atol)
        )

    def invariant_violations(self, tol: float = 0.0) -> int:
        """Count breaches of endpoint ordering and of alpha-cut nesting."""
        order = np.count_nonzero(self.lower > self.upper + tol)
        nest_lo = np.count_nonzero(np.diff(self.lower, axis=0) < -tol)
        nest_hi = np.count_nonzero(np.diff(self.upper, axis=0) > tol)
        return int(order + nest_lo + nest_hi)

    def __repr__(self) -> str:
        body = ", ".join(f"{{{t.l:.6g}, {t.c:.6g}, {t.r:.6g}}}" for t in self.tfns())
        return f"LevelwiseFuzzyVector(n={self.n}, levels={len(self.grid)}, tfns=[{body}])"


def _check_compatible(x: LevelwiseFuzzyVector, y: LevelwiseFuzzyVector) -> None:
    if x.grid != y.grid:
        raise GridMismatchError("fuzzy vectors are defined on different alpha grids")
    if x.n != y.n:
        raise GridMismatchError(f"dimension mismatch: {x.n} vs {y.n}")


def componentwise_distance(x: LevelwiseFuzzyVector, y: LevelwiseFuzzyVector) -> np.ndarray:
    """d_E for every component at once, shape ``(n,)``.

    The sup over alpha > 0 is taken over the grid including alpha = 0: cut
    endpoints are continuous in alpha, so the limit at 0 is the supremum's
    closure value.
    """
    _check_compatible(x, y)
    per_level = np.maximum(np.abs(x.lower - y.lower), np.abs(x.upper - y.upper))
    return per_level.max(axis=0)


def distance_E(x: LevelwiseFuzzyVector, y: LevelwiseFuzzyVector) -> float:
    """Metric on scalar fuzzy numbers (both arguments must have ``n == 1``)."""
    if x.n != 1 or y.n != 1:
        raise GridMismatchError("distance_E compares scalar fuzzy numbers; use distance_EN for vectors")
    return float(componentwise_distance(x, y)[0])


def distance_EN(x: LevelwiseFuzzyVector, y: LevelwiseFuzzyVector) -> float:
    return float(componentwise_distance(x, y).sum())


def support_width(x: LevelwiseFuzzyVector) -> np.ndarray:
    return x.upper[0] - x.lower[0]
