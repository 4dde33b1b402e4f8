"""Exception types raised by fuzzydfs."""


class FuzzyDomainError(ValueError):
    """An argument lies outside the domain of a fuzzy operation (e.g. alpha not in [0, 1])."""


class GridMismatchError(ValueError):
    """Two level-wise objects are defined on different alpha grids or dimensions."""


class ConsensusValueError(ValueError):
    """Zero is not a simple Laplacian eigenvalue, so the agreement value is not unique."""


class RankDeficientError(ValueError):
    """C^T C is singular, so C has no left pseudo-inverse."""


class UnstableModelError(ValueError):
    """The interdependency matrix has spectral radius >= 1; no stable equilibrium exists."""


class SyncPreconditionError(ValueError):
    """The stacked synchronization system failed its stability check."""


class ScenarioError(ValueError):
    """A scenario file failed to parse or validate."""
