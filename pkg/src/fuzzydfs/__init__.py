"""Discrete-time fuzzy systems: level-wise dynamics, fuzzy consensus and
synchronization of networked fuzzy IIM models."""

from .consensus import (
    ConsensusConfig,
    ConsensusResult,
    disagreement_radius,
    max_tau_double,
    max_tau_single,
    predict_consensus,
    run_consensus,
    tau_sweep,
)
from .dfs import LinearDFS, levelwise_step, simulate_dfs, stability_report
from .errors import (
    ConsensusValueError,
    FuzzyDomainError,
    GridMismatchError,
    RankDeficientError,
    ScenarioError,
    SyncPreconditionError,
    UnstableModelError,
)
from .fuzzy import (
    AlphaGrid,
    Interval,
    LevelwiseFuzzyVector,
    TriangularFuzzyNumber,
    alpha_cut,
    distance_E,
    distance_EN,
    hausdorff_interval,
    support_width,
)
from .graph import WeightedDigraph, laplacian, left_null_weights, preset
from .iim import IIMModel, eir, extend, iim_equilibrium, reduced_output_matrix
from .linguistic import LinguisticAssessment, encode_assessment
from .scenario import Scenario, builtin, load_scenario, run_scenario
from .sync import SyncConfig, gershgorin_check, pseudo_inverse, run_sync

__version__ = "0.1.0"
