"""Scenario files, the built-in case studies and their artifact emission.

A scenario is a JSON document with a versioned ``schema`` field. Matrices are
row-major lists of rows; a fuzzy quantity is either a plain number (crisp) or
a ``[left, peak, right]`` triple. Running a scenario writes a trajectory CSV,
a stability report and a summary JSON, each replaced atomically.
"""

from __future__ import annotations

import contextlib
import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Literal

import jsonschema
import numpy as np

from .consensus import (
    ConsensusConfig,
    SweepRow,
    agent_labels,
    build_system,
    disagreement_radius,
    max_tau_double,
    max_tau_double_theorem,
    max_tau_single,
    run_consensus,
    stack_initial,
    tau_sweep,
    write_sweep_csv,
)
from .dfs import LinearDFS, simulate_dfs, stability_report, write_trajectory_csv
from .errors import RankDeficientError, ScenarioError, SyncPreconditionError
from .fuzzy import AlphaGrid, LevelwiseFuzzyVector, TriangularFuzzyNumber, componentwise_distance
from .graph import (
    WeightedDigraph,
    has_directed_spanning_tree,
    is_balanced,
    is_strongly_connected,
    laplacian,
    left_null_weights,
    preset,
)
from .iim import CASE_STUDY_A, IIMModel, extend, iim_equilibrium_fuzzy, reduced_output_matrix, warn_out_of_range
from .linguistic import LinguisticAssessment, encode_assessment, table4_growth_tfns, table4_severity_tfns
from .sync import SyncConfig, gershgorin_check, run_sync, sync_disagreement_radius

SCHEMA_VERSION = "fuzzydfs.scenario/1"

Kind = Literal["consensus-single", "consensus-double", "sync-iim", "iim-isolated", "tau-sweep"]
OutputMode = Literal["full", "reduced", "reduced-mp"]

_fuzzy = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3},
    ]
}
_matrix = {"type": "array", "items": {"type": "array", "items": {"type": "number"}}, "minItems": 1}
_topology = {
    "oneOf": [
        {"type": "string"},
        {
            "type": "object",
            "properties": {"adjacency": _matrix},
            "required": ["adjacency"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "p": {"type": "integer", "minimum": 1},
                "edges": {"type": "array", "items": {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}},
            },
            "required": ["p", "edges"],
            "additionalProperties": False,
        },
    ]
}
_agent = {
    "oneOf": [
        _fuzzy,
        {
            "type": "object",
            "properties": {"position": _fuzzy, "velocity": _fuzzy},
            "required": ["position", "velocity"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "severity": {"type": "string"},
                "confidence": {"type": "integer", "minimum": 1, "maximum": 5},
                "growth": {"type": "string"},
                "sign": {"enum": ["growth", "reduction"]},
                "growth_confidence": {"type": "integer", "minimum": 1, "maximum": 5},
            },
            "required": ["severity", "confidence"],
            "additionalProperties": False,
        },
    ]
}
_rational = {"oneOf": [{"type": "number", "exclusiveMinimum": 0}, {"type": "string", "pattern": r"^\s*\d+\s*(/\s*\d+\s*)?$"}]}

SCENARIO_SCHEMA: dict[str, Any] = {
    "type": "object",
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "kind": {"enum": ["consensus-single", "consensus-double", "sync-iim", "iim-isolated", "tau-sweep"]},
        "topology": _topology,
        "tau": _rational,
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
        "max_steps": {"type": "integer", "minimum": 0},
        "levels": {"type": "integer", "minimum": 2},
        "agents": {"type": "array", "items": _agent, "minItems": 1},
        "iim": {
            "type": "object",
            "properties": {
                "A": _matrix,
                "B": _matrix,
                "systems": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "properties": {"c": {"type": "array", "items": _fuzzy}, "q0": {"type": "array", "items": _fuzzy}},
                        "required": ["c", "q0"],
                        "additionalProperties": False,
                    },
                },
                "gain": {"oneOf": [{"type": "number", "minimum": 0}, {"type": "array", "items": {"type": "number", "minimum": 0}}]},
                "output_mode": {"enum": ["full", "reduced", "reduced-mp"]},
                "scale_initial": {"type": "number", "exclusiveMinimum": 0},
                "check": {"enum": ["gershgorin", "spectral", "none"]},
            },
            "required": ["A", "systems"],
            "additionalProperties": False,
        },
        "sweep": {
            "type": "object",
            "properties": {
                "topologies": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                "orders": {"type": "array", "items": {"enum": ["single", "double"]}, "minItems": 1},
                "points": {"type": "integer", "minimum": 1},
                "tau_from": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "tau_to": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "markers": {"type": "object", "additionalProperties": _rational},
                "jobs": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "outputs": {
            "type": "object",
            "properties": {"dir": {"type": "string"}, "prefix": {"type": "string"}},
            "additionalProperties": False,
        },
    },
    "required": ["schema", "kind"],
    "additionalProperties": False,
    "allOf": [
        {
            "if": {"properties": {"kind": {"enum": ["consensus-single", "consensus-double"]}}},
            "then": {"required": ["topology", "tau", "agents"]},
        },
        {"if": {"properties": {"kind": {"const": "sync-iim"}}}, "then": {"required": ["topology", "iim"]}},
        {"if": {"properties": {"kind": {"const": "iim-isolated"}}}, "then": {"required": ["iim"]}},
        {"if": {"properties": {"kind": {"const": "tau-sweep"}}}, "then": {"required": ["agents", "sweep"]}},
    ],
}


@dataclass(frozen=True, eq=False)
class IIMSection:
    A: np.ndarray
    B: np.ndarray | None
    c: list[list[TriangularFuzzyNumber]]  # per system
    q0: list[list[TriangularFuzzyNumber]]
    gain: np.ndarray  # diagonal of K, length 2n
    output_mode: OutputMode = "full"
    scale_initial: float = 1.0
    check: Literal["gershgorin", "spectral", "none"] = "spectral"


@dataclass(frozen=True)
class SweepSection:
    topologies: tuple[str, ...] = ("bipartite5", "ring5")
    orders: tuple[str, ...] = ("single", "double")
    points: int = 300
    tau_from: float | None = None  # defaults to 1 / points
    tau_to: float = 1.0
    markers: dict[str, Fraction] = field(default_factory=dict)
    jobs: int = 1

    def tau_values(self) -> np.ndarray:
        lo = self.tau_from if self.tau_from is not None else self.tau_to / self.points
        return np.linspace(lo, self.tau_to, self.points)


@dataclass(frozen=True, eq=False)
class Scenario:
    """Parsed, validated scenario.

    ``agents`` holds one entry per agent: a single TFN for single integrators
    or ``(position, velocity)`` for double integrators and sweeps. Sweeps with
    ``orders`` containing ``"single"`` use only the positions.
    """

    kind: Kind
    name: str = "scenario"
    graph: WeightedDigraph | None = None
    topology_name: str | None = None
    tau: Fraction | None = None
    tolerance: float = 1e-3
    max_steps: int = 500
    levels: int = 11
    agents: list = field(default_factory=list)
    iim: IIMSection | None = None
    sweep: SweepSection | None = None
    output_dir: str | None = None
    prefix: str | None = None

    @property
    def grid(self) -> AlphaGrid:
        return AlphaGrid.uniform(self.levels)

    @property
    def order(self) -> str:
        return "double" if self.kind == "consensus-double" else "single"

    def initial_state(self, order: str | None = None) -> LevelwiseFuzzyVector:
        order = order or self.order
        if order == "single":
            return stack_initial([_position(a) for a in self.agents], "single", self.grid)
        if any(not isinstance(a, tuple) for a in self.agents):
            raise ScenarioError("double integrators need a position and a velocity for every agent")
        return stack_initial(([a[0] for a in self.agents], [a[1] for a in self.agents]), "double", self.grid)

    def consensus_config(self, order: str | None = None, graph: WeightedDigraph | None = None) -> ConsensusConfig:
        return ConsensusConfig(
            graph=graph or self.graph,
            tau=float(self.tau),
            order=order or self.order,
            tolerance=self.tolerance,
            max_steps=self.max_steps,
        )


def _position(a):
    return a[0] if isinstance(a, tuple) else a


# -- parsing ---------------------------------------------------------------


def _to_tfn(v, where: str) -> TriangularFuzzyNumber:
    try:
        if isinstance(v, (int, float)):
            return TriangularFuzzyNumber.crisp(float(v))
        return TriangularFuzzyNumber.from_sequence(v)
    except ValueError as exc:
        raise ScenarioError(f"{where}: {exc}") from exc


def _to_fraction(v, where: str) -> Fraction:
    try:
        f = Fraction(v.replace(" ", "")) if isinstance(v, str) else Fraction(v).limit_denominator(10**9)
    except (ValueError, ZeroDivisionError) as exc:
        raise ScenarioError(f"{where}: cannot read {v!r} as a positive number") from exc
    if f <= 0:
        raise ScenarioError(f"{where}: must be > 0, got {v!r}")
    return f


def _parse_topology(t, where: str = "topology") -> tuple[WeightedDigraph, str | None]:
    try:
        if isinstance(t, str):
            return preset(t), t
        if "adjacency" in t:
            return WeightedDigraph(np.array(t["adjacency"], dtype=float)), None
        return WeightedDigraph.from_edges(t["p"], t["edges"]), None
    except (ValueError, KeyError, IndexError) as exc:
        raise ScenarioError(f"{where}: {exc}") from exc


def _parse_agent(a, i: int):
    where = f"agents[{i}]"
    if isinstance(a, dict) and "severity" in a:
        try:
            la = LinguisticAssessment(
                severity_label=a["severity"],
                confidence=a["confidence"],
                growth_label=a.get("growth"),
                growth_sign=a.get("sign", "growth"),
                growth_confidence=a.get("growth_confidence"),
            )
        except ValueError as exc:
            raise ScenarioError(f"{where}: {exc}") from exc
        sev, gro = encode_assessment(la)
        return sev if gro is None else (sev, gro)
    if isinstance(a, dict):
        return (_to_tfn(a["position"], f"{where}.position"), _to_tfn(a["velocity"], f"{where}.velocity"))
    return _to_tfn(a, where)


def _parse_iim(d: dict) -> IIMSection:
    A = np.array(d["A"], dtype=float)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n:
        raise ScenarioError(f"iim.A: must be square, got shape {A.shape}")
    B = None if "B" not in d else np.array(d["B"], dtype=float)
    cs, qs = [], []
    for s, sysd in enumerate(d["systems"]):
        for key, dest in (("c", cs), ("q0", qs)):
            vals = sysd[key]
            if len(vals) != n:
                raise ScenarioError(f"iim.systems[{s}].{key}: expected {n} entries, got {len(vals)}")
            dest.append([_to_tfn(v, f"iim.systems[{s}].{key}[{j}]") for j, v in enumerate(vals)])
    gain = d.get("gain", 0.03)
    gain = np.full(2 * n, float(gain)) if isinstance(gain, (int, float)) else np.array(gain, dtype=float)
    if gain.shape != (2 * n,):
        raise ScenarioError(f"iim.gain: expected a scalar or {2 * n} entries, got {gain.size}")
    return IIMSection(
        A=A,
        B=B,
        c=cs,
        q0=qs,
        gain=gain,
        output_mode=d.get("output_mode", "full"),
        scale_initial=float(d.get("scale_initial", 1.0)),
        check=d.get("check", "spectral"),
    )


def _parse_sweep(d: dict) -> SweepSection:
    markers = {k: _to_fraction(v, f"sweep.markers.{k}") for k, v in d.get("markers", {}).items()}
    s = SweepSection(
        topologies=tuple(d.get("topologies", ("bipartite5", "ring5"))),
        orders=tuple(d.get("orders", ("single", "double"))),
        points=d.get("points", 300),
        tau_from=d.get("tau_from"),
        tau_to=d.get("tau_to", 1.0),
        markers=markers,
        jobs=d.get("jobs", 1),
    )
    for t in s.topologies:
        _parse_topology(t, "sweep.topologies")
    if s.tau_from is not None and s.tau_from > s.tau_to:
        raise ScenarioError("sweep: tau_from must not exceed tau_to")
    return s


def parse_scenario(doc: dict) -> Scenario:
    """Validate a decoded scenario document and build a :class:`Scenario`."""
    validator = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        msgs = []
        for e in errors:
            path = "/".join(str(p) for p in e.absolute_path) or "<root>"
            msgs.append(f"{path}: {e.message}")
        raise ScenarioError("invalid scenario:\n  " + "\n  ".join(msgs))
    kind = doc["kind"]
    graph, tname = (None, None)
    if "topology" in doc:
        graph, tname = _parse_topology(doc["topology"])
    agents = [_parse_agent(a, i) for i, a in enumerate(doc.get("agents", []))]
    sc = Scenario(
        kind=kind,
        name=doc.get("name", kind),
        graph=graph,
        topology_name=tname,
        tau=_to_fraction(doc["tau"], "tau") if "tau" in doc else None,
        tolerance=doc.get("tolerance", 1e-4 if kind == "sync-iim" else 1e-3),
        max_steps=doc.get("max_steps", 600 if kind in ("sync-iim", "iim-isolated") else 500),
        levels=doc.get("levels", 11),
        agents=agents,
        iim=_parse_iim(doc["iim"]) if "iim" in doc else None,
        sweep=_parse_sweep(doc["sweep"]) if "sweep" in doc else None,
        output_dir=doc.get("outputs", {}).get("dir"),
        prefix=doc.get("outputs", {}).get("prefix"),
    )
    _check_consistency(sc)
    return sc


def _check_consistency(sc: Scenario) -> None:
    if sc.kind in ("consensus-single", "consensus-double"):
        if len(sc.agents) != sc.graph.p:
            raise ScenarioError(f"agents: topology has {sc.graph.p} nodes but {len(sc.agents)} agents are given")
        if sc.kind == "consensus-double":
            sc.initial_state("double")
    if sc.kind == "tau-sweep" and "double" in sc.sweep.orders:
        sc.initial_state("double")
    if sc.kind == "sync-iim" and len(sc.iim.c) != sc.graph.p:
        raise ScenarioError(f"iim.systems: topology has {sc.graph.p} nodes but {len(sc.iim.c)} systems are given")
    if sc.kind == "iim-isolated" and len(sc.iim.c) != 1:
        raise ScenarioError("iim.systems: an isolated run takes exactly one system")


def load_scenario(path) -> Scenario:
    """Read and validate a scenario file.

    Raises:
        ScenarioError: with line/column for malformed JSON or the field path
            for schema violations.
    """
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    try:
        return parse_scenario(doc)
    except ScenarioError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


# -- built-in case studies ----------------------------------------------------

_Q11 = (0.1, 0.2, 0.3)
_DISTURBANCES = [(0.05, 0.1, 0.15), (0.0, 0.05, 0.1), (0.25, 0.35, 0.55)]
_ISOLATED_C = (0.05, 0.1, 0.15)
_ISOLATED_Q0 = (0.05, 0.1, 0.15)

BUILTINS = ("bipartite-single", "ring-single", "bipartite-double", "ring-double", "iim-sync", "iim-isolated", "tau-sweep")


def _local(n: int, i: int, v) -> list:
    out = [0.0] * n
    out[i] = list(v)
    return out


def builtin_document(name: str) -> dict:
    """The JSON document behind :func:`builtin` (useful as a template)."""
    sev = [list(t.as_tuple()) for t in table4_severity_tfns()]
    gro = [list(t.as_tuple()) for t in table4_growth_tfns()]
    doc: dict[str, Any] = {"schema": SCHEMA_VERSION, "name": name}
    if name in ("bipartite-single", "ring-single", "bipartite-double", "ring-double"):
        topo, order = name.split("-")
        doc.update(
            kind=f"consensus-{order}",
            topology=f"{topo}5",
            tau="1/4",
            tolerance=1e-3,
            max_steps=500,
            agents=sev if order == "single" else [{"position": s, "velocity": g} for s, g in zip(sev, gro)],
        )
    elif name == "iim-sync":
        n = 3
        doc.update(
            kind="sync-iim",
            topology="iim3",
            tolerance=1e-4,
            max_steps=600,
            iim={
                "A": CASE_STUDY_A.tolist(),
                "systems": [
                    {"c": _local(n, i, d), "q0": _local(n, 0, _Q11) if i == 0 else [0.0] * n}
                    for i, d in enumerate(_DISTURBANCES)
                ],
                "gain": 0.03,
                "output_mode": "full",
                "scale_initial": 3,
                "check": "spectral",
            },
        )
    elif name == "iim-isolated":
        doc.update(
            kind="iim-isolated",
            max_steps=600,
            iim={"A": CASE_STUDY_A.tolist(), "systems": [{"c": _local(3, 0, _ISOLATED_C), "q0": _local(3, 0, _ISOLATED_Q0)}]},
        )
    elif name == "tau-sweep":
        doc.update(
            kind="tau-sweep",
            tolerance=1e-3,
            max_steps=20000,
            agents=[{"position": s, "velocity": g} for s, g in zip(sev, gro)],
            sweep={
                "topologies": ["bipartite5", "ring5"],
                "orders": ["single", "double"],
                "points": 300,
                "tau_to": 1.0,
                # vertical reference lines of the sweep figure
                "markers": {"bipartite5": "1/3", "ring5": "1/2"},
            },
        )
    else:
        raise ScenarioError(f"unknown builtin {name!r}; choose from {', '.join(BUILTINS)}")
    return doc


def builtin(name: str) -> Scenario:
    return parse_scenario(builtin_document(name))


# -- running --------------------------------------------------------------------


@contextlib.contextmanager
def atomic_path(path):
    """Yield a temporary sibling of ``path`` and move it into place on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    os.close(fd)
    try:
        yield tmp
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def write_json(path, obj) -> None:
    with atomic_path(path) as tmp, open(tmp, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, float) and not np.isfinite(o):
        return str(o)
    return o


def _levels(x: LevelwiseFuzzyVector) -> list[dict]:
    return [
        {"alpha": float(a), "lower": x.lower[k].tolist(), "upper": x.upper[k].tolist()}
        for k, a in enumerate(x.alphas)
    ]


@dataclass
class RunOutcome:
    """Exit status (0 success, 1 no agreement, 2 precondition failure) and artifacts."""

    status: int
    paths: dict[str, str]
    summary: dict
    report: dict
    result: Any = None


def _paths(sc: Scenario, out_dir, extra: tuple[str, ...] = ()) -> dict[str, Path]:
    out = Path(out_dir or sc.output_dir or ".")
    stem = sc.prefix or sc.name
    names = {"trajectory": f"{stem}_trajectory.csv", "report": f"{stem}_report.json", "summary": f"{stem}_summary.json"}
    for e in extra:
        names[e] = f"{stem}_{e}.csv"
    return {k: out / v for k, v in names.items()}


def _graph_report(g: WeightedDigraph) -> dict:
    L = laplacian(g)
    rep = {
        "laplacian": L.L,
        "l_star": L.l_star,
        "strongly_connected": is_strongly_connected(g),
        "balanced": is_balanced(g),
        "directed_spanning_tree": has_directed_spanning_tree(g),
    }
    if rep["directed_spanning_tree"]:
        rep["consensus_weights"] = left_null_weights(L)
    return rep


def consensus_report(sc: Scenario, order: str | None = None) -> dict:
    cfg = sc.consensus_config(order)
    L = cfg.laplacian
    F = build_system(cfg).F
    rep = _graph_report(cfg.graph)
    rep.update(
        kind=sc.kind,
        tau=sc.tau,
        order=cfg.order,
        stability=stability_report(F).as_dict(),
        row_stochastic_perron=bool(np.all(F >= 0)),
    )
    if L.l_star > 0:
        rep.update(
            max_tau_single=max_tau_single(L),
            max_tau_double=max_tau_double(L),
            max_tau_double_theorem=max_tau_double_theorem(L),
        )
        bound = max_tau_single(L) if cfg.order == "single" else max_tau_double(L)
        rep["tau_within_bound"] = sc.tau <= bound
    if rep["directed_spanning_tree"]:
        rep["disagreement_radius"] = disagreement_radius(F, L)
    return rep


def _run_consensus(sc: Scenario, paths: dict) -> RunOutcome:
    report = consensus_report(sc)
    write_json(paths["report"], report)
    cfg = sc.consensus_config()
    res = run_consensus(cfg, sc.initial_state(), sc.grid)
    with atomic_path(paths["trajectory"]) as tmp:
        write_trajectory_csv(tmp, res.trajectory, agent_labels(cfg.order, cfg.graph.p))
    summary = {
        "name": sc.name,
        "kind": sc.kind,
        "converged": res.converged,
        "diverged": res.diverged,
        "steps_to_consensus": res.steps_to_consensus,
        "time_to_consensus": None if not res.converged else float(sc.tau) * res.steps_to_consensus,
        "final_disagreement": res.disagreement[-1],
        "invariant_violations": sum(x.invariant_violations(1e-12) for x in res.trajectory),
    }
    if res.predicted_consensus is not None:
        pred = res.predicted_consensus
        gap = max(float(componentwise_distance(res.agent_state(i), pred).sum()) for i in range(res.p))
        summary.update(predicted_consensus=_levels(pred), predicted_tfns=[t.as_tuple() for t in pred.tfns()], prediction_gap=gap)
    summary["simulated_final"] = [[t.as_tuple() for t in res.agent_state(i).tfns()] for i in range(res.p)]
    write_json(paths["summary"], summary)
    return RunOutcome(0 if res.converged else 1, {k: str(v) for k, v in paths.items()}, summary, report, res)


def sync_config(sc: Scenario, output_mode: OutputMode | None = None, gain=None) -> SyncConfig:
    """Stacked synchronization setup for a ``sync-iim`` scenario.

    ``full`` shares the whole extended state (C = I); ``reduced`` shares the
    EIR vector and mean inoperability with the left pseudo-inverse;
    ``reduced-mp`` uses the Moore-Penrose inverse for the same C.
    """
    s = sc.iim
    mode = output_mode or s.output_mode
    model = IIMModel(s.A, s.B)
    n = model.n
    k = s.gain if gain is None else (np.full(2 * n, float(gain)) if np.ndim(gain) == 0 else np.asarray(gain, dtype=float))
    C = np.eye(2 * n) if mode == "full" else reduced_output_matrix(model)
    return SyncConfig(
        A=extend(model).Atilde,
        C=C,
        K=np.diag(k),
        graph=sc.graph,
        tolerance=sc.tolerance,
        max_steps=sc.max_steps,
        omega_method="moore-penrose" if mode == "reduced-mp" else "left",
    )


def sync_initial(sc: Scenario) -> list[LevelwiseFuzzyVector]:
    """Per-system ``w_i(0) = [q_i(0); c_i]`` scaled by ``scale_initial``."""
    s = sc.iim
    return [
        LevelwiseFuzzyVector.from_tfns(q + c, sc.grid).scaled(s.scale_initial) for q, c in zip(s.q0, s.c)
    ]


def _run_sync(sc: Scenario, paths: dict, output_mode=None, gain=None) -> RunOutcome:
    s = sc.iim
    try:
        cfg = sync_config(sc, output_mode, gain)
    except RankDeficientError as exc:
        report = {"kind": sc.kind, "output_mode": output_mode or s.output_mode, "error": str(exc), "pass": False}
        write_json(paths["report"], report)
        return RunOutcome(2, {"report": str(paths["report"])}, {}, report)
    x0 = sync_initial(sc)
    try:
        res = run_sync(cfg, x0, check=s.check)
    except SyncPreconditionError as exc:
        report = gershgorin_check(cfg.A, cfg.K, cfg.laplacian).as_dict()
        report.update(kind=sc.kind, error=str(exc), check=s.check)
        report["disagreement_radius"] = sync_disagreement_radius(cfg.A, cfg.coupling, cfg.laplacian)
        write_json(paths["report"], report)
        return RunOutcome(2, {"report": str(paths["report"])}, {}, report)
    n = cfg.A.shape[0]
    report = dict(res.report, kind=sc.kind, output_mode=output_mode or s.output_mode, gain=np.diag(cfg.K))
    write_json(paths["report"], report)
    labels = [(i + 1, j) for i in range(res.p) for j in range(n)]
    with atomic_path(paths["trajectory"]) as tmp:
        write_trajectory_csv(tmp, res.trajectory, labels)
    final_pred = res.predicted[-1]
    gap = max(float(np.max(np.abs(np.concatenate([
        res.system_state(i).lower - final_pred.lower, res.system_state(i).upper - final_pred.upper
    ])))) for i in range(res.p))
    m = IIMModel(s.A, s.B)
    c_sum = final_pred.take(np.arange(m.n, 2 * m.n))
    eq = iim_equilibrium_fuzzy(m, c_sum)
    q_final = res.system_state(0).take(np.arange(m.n))
    summary = {
        "name": sc.name,
        "kind": sc.kind,
        "synchronized": res.synchronized,
        "steps_to_sync": res.steps_to_sync,
        "steps_simulated": len(res.trajectory) - 1,
        "final_disagreement": res.disagreement[-1],
        "prediction_gap": gap,
        "equilibrium": _levels(eq),
        "equilibrium_peak": eq.peak(),
        "simulated_q_final": _levels(q_final),
        "equilibrium_gap": float(np.max(np.abs(np.concatenate([q_final.lower - eq.lower, q_final.upper - eq.upper])))),
        "invariant_violations": sum(x.invariant_violations(1e-12) for x in res.trajectory),
        "out_of_unit_range": bool(np.any(eq.lower < -1e-12) or np.any(eq.upper > 1 + 1e-12)),
    }
    write_json(paths["summary"], summary)
    return RunOutcome(0 if res.synchronized else 1, {k: str(v) for k, v in paths.items()}, summary, report, res)


def _run_isolated(sc: Scenario, paths: dict) -> RunOutcome:
    s = sc.iim
    m = IIMModel(s.A, s.B)
    ext = extend(m)
    rep = stability_report(ext.Atilde).as_dict()
    rep.update(kind=sc.kind, rho_A=m.rho, stable=m.rho < 1, eigenvalues_A=np.sort(np.linalg.eigvals(m.A).real)[::-1])
    write_json(paths["report"], rep)
    if m.rho >= 1:
        return RunOutcome(2, {"report": str(paths["report"])}, {}, rep)
    x0 = LevelwiseFuzzyVector.from_tfns(s.q0[0] + s.c[0], sc.grid).scaled(s.scale_initial)
    traj = simulate_dfs(LinearDFS(ext.Atilde), x0, sc.max_steps)
    with atomic_path(paths["trajectory"]) as tmp:
        write_trajectory_csv(tmp, traj, [(1, j) for j in range(2 * m.n)])
    c = x0.take(np.arange(m.n, 2 * m.n))
    eq = iim_equilibrium_fuzzy(m, c)
    q_final = traj[-1].take(np.arange(m.n))
    warn_out_of_range(eq)
    summary = {
        "name": sc.name,
        "kind": sc.kind,
        "steps_simulated": sc.max_steps,
        "equilibrium": _levels(eq),
        "equilibrium_peak": eq.peak(),
        "simulated_q_final": _levels(q_final),
        "equilibrium_gap": float(np.max(np.abs(np.concatenate([q_final.lower - eq.lower, q_final.upper - eq.upper])))),
        "invariant_violations": sum(x.invariant_violations(1e-12) for x in traj),
    }
    write_json(paths["summary"], summary)
    return RunOutcome(0, {k: str(v) for k, v in paths.items()}, summary, rep, traj)


def _sweep_one(args):
    sc, topo, order, taus = args
    graph, _ = _parse_topology(topo)
    cfg = sc.consensus_config(order, graph) if sc.tau is not None else ConsensusConfig(
        graph=graph, tau=0.25, order=order, tolerance=sc.tolerance, max_steps=sc.max_steps
    )
    return tau_sweep(cfg, taus, sc.initial_state(order), sc.grid)


def sweep_statistics(rows: list[SweepRow], marker: float | None) -> dict:
    """Flatness below ``marker / 2``, convergence beyond ``marker``, divergence flags."""
    out: dict[str, Any] = {"marker": marker}
    conv = [r for r in rows if r.status == "converged"]
    if marker is not None:
        flat = [r.time_to_consensus for r in rows if r.tau <= marker / 2 + 1e-12]
        if flat and all(t is not None for t in flat):
            out["flat_variation"] = (max(flat) - min(flat)) / min(flat)
        else:
            out["flat_variation"] = None
        # margin keeps grid points that only round past the marker out
        beyond = [r.tau for r in conv if r.tau > marker + 1e-9]
        out["converged_beyond_marker"] = beyond
    out["largest_converged_tau"] = max((r.tau for r in conv), default=None)
    unstable = [r for r in rows if r.disagreement_radius >= 1 - 1e-12]
    out["spectral_boundary"] = min((r.tau for r in unstable), default=None)
    out["unstable_flagged_divergent"] = all(r.status == "divergent" for r in unstable)
    out["counts"] = {s: sum(r.status == s for r in rows) for s in ("converged", "divergent", "max_steps")}
    return out


def _run_sweep(sc: Scenario, paths: dict, taus=None, jobs: int | None = None) -> RunOutcome:
    sw = sc.sweep
    taus = sw.tau_values() if taus is None else np.asarray(taus, dtype=float)
    jobs = jobs or sw.jobs
    tasks = [(sc, t, o, taus) for t in sw.topologies for o in sw.orders]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_sweep_one, tasks))
    else:
        results = [_sweep_one(t) for t in tasks]
    sweeps = {}
    with atomic_path(paths["sweep"]) as tmp:
        with open(tmp, "w", newline="") as fh:
            fh.write("topology,order,tau,steps,time_to_consensus,status,disagreement_radius\n")
        for (_, topo, order, _), rows in zip(tasks, results):
            part = tmp + ".part"
            write_sweep_csv(part, rows, {"topology": topo, "order": order})
            with open(part) as src, open(tmp, "a", newline="") as dst:
                next(src)
                dst.write(src.read())
            os.unlink(part)
            marker = sw.markers.get(topo)
            sweeps[f"{topo}/{order}"] = sweep_statistics(rows, None if marker is None else float(marker))
    summary = {"name": sc.name, "kind": sc.kind, "points": len(taus), "sweeps": sweeps}
    write_json(paths["summary"], summary)
    report = {
        "kind": sc.kind,
        "topologies": {t: _graph_report(_parse_topology(t)[0]) for t in sw.topologies},
    }
    write_json(paths["report"], report)
    out_paths = {k: str(v) for k, v in paths.items() if k != "trajectory"}
    return RunOutcome(0, out_paths, summary, report, dict(zip([f"{t}/{o}" for _, t, o, _ in tasks], results)))


def run(sc: Scenario, out_dir=None, **overrides) -> RunOutcome:
    """Dispatch a parsed scenario and write its artifacts under ``out_dir``."""
    if sc.kind in ("consensus-single", "consensus-double"):
        return _run_consensus(sc, _paths(sc, out_dir))
    if sc.kind == "sync-iim":
        return _run_sync(sc, _paths(sc, out_dir), overrides.get("output_mode"), overrides.get("gain"))
    if sc.kind == "iim-isolated":
        return _run_isolated(sc, _paths(sc, out_dir))
    if sc.kind == "tau-sweep":
        return _run_sweep(sc, _paths(sc, out_dir, ("sweep",)), overrides.get("taus"), overrides.get("jobs"))
    raise ScenarioError(f"unknown kind {sc.kind!r}")


def run_scenario(path, out_dir=None) -> RunOutcome:
    """Load ``path`` and run it; see :class:`RunOutcome` for the exit status."""
    return run(load_scenario(path), out_dir)


__all__ = [
    "BUILTINS",
    "SCENARIO_SCHEMA",
    "SCHEMA_VERSION",
    "RunOutcome",
    "Scenario",
    "builtin",
    "builtin_document",
    "load_scenario",
    "parse_scenario",
    "run",
    "run_scenario",
]
