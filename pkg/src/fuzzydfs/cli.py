"""Command-line entry point: ``fuzzydfs <subcommand> ...``.

Exit status is 0 on success, 1 when a run finishes without agreement and 2
for invalid input or a failed stability precondition.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

from .errors import ScenarioError
from .graph import preset
from .linguistic import (
    GROWTH,
    SEVERITY,
    TABLE4_GROWTH,
    TABLE4_SEVERITY,
    LinguisticAssessment,
    anomaly_note,
    encode_assessment,
    encode_growth,
    encode_severity,
)
from .scenario import BUILTINS, Scenario, _jsonable, _to_fraction, builtin, builtin_document, load_scenario, run


def _load(args, default_builtin: str) -> Scenario:
    if getattr(args, "scenario", None):
        return load_scenario(args.scenario)
    return builtin(getattr(args, "builtin", None) or default_builtin)


def _emit(outcome) -> int:
    print(json.dumps(_jsonable({"status": outcome.status, "artifacts": outcome.paths}), indent=2))
    return outcome.status


def cmd_run(args) -> int:
    return _emit(run(load_scenario(args.file), args.out))


def cmd_consensus(args) -> int:
    sc = _load(args, "bipartite-single" if args.order != "double" else "bipartite-double")
    if not sc.kind.startswith("consensus"):
        raise ScenarioError(f"scenario kind {sc.kind!r} is not a consensus run")
    changes = {}
    if args.topology:
        changes.update(graph=preset(args.topology), topology_name=args.topology)
    if args.order:
        changes["kind"] = f"consensus-{args.order}"
    if args.tau is not None:
        changes["tau"] = _to_fraction(args.tau, "--tau")
    if args.tol is not None:
        changes["tolerance"] = args.tol
    if args.max_steps is not None:
        changes["max_steps"] = args.max_steps
    sc = replace(sc, **changes)
    if args.name or changes:
        sc = replace(sc, name=args.name or f"{(sc.topology_name or 'custom').rstrip('5')}-{sc.order}")
    outcome = run(sc, args.out)
    s = outcome.summary
    print(f"{sc.name}: converged={s['converged']} steps={s['steps_to_consensus']} gap={s.get('prediction_gap')}", file=sys.stderr)
    return _emit(outcome)


def cmd_sweep(args) -> int:
    sc = _load(args, "tau-sweep")
    if sc.kind != "tau-sweep":
        raise ScenarioError(f"scenario kind {sc.kind!r} is not a tau sweep")
    sw = sc.sweep
    changes = {}
    if args.topology:
        changes["topologies"] = tuple(args.topology)
    if args.order:
        changes["orders"] = tuple(args.order)
    if args.points is not None:
        changes["points"] = args.points
    if args.tau_from is not None:
        changes["tau_from"] = args.tau_from
    if args.tau_to is not None:
        changes["tau_to"] = args.tau_to
    sc = replace(sc, sweep=replace(sw, **changes))
    if args.max_steps is not None:
        sc = replace(sc, max_steps=args.max_steps)
    return _emit(run(sc, args.out, jobs=args.jobs))


def cmd_sync(args) -> int:
    sc = _load(args, "iim-sync")
    if sc.kind != "sync-iim":
        raise ScenarioError(f"scenario kind {sc.kind!r} is not a synchronization run")
    iim = sc.iim
    if args.check:
        iim = replace(iim, check=args.check)
    sc = replace(sc, iim=iim)
    if args.max_steps is not None:
        sc = replace(sc, max_steps=args.max_steps)
    outcome = run(sc, args.out, output_mode=args.output_mode, gain=args.gain)
    rep = outcome.report
    keys = ("centers", "radii", "pass", "spectral_radius", "disagreement_radius", "violations", "error")
    print(json.dumps(_jsonable({k: rep[k] for k in keys if k in rep}), indent=2))
    return _emit(outcome)


def cmd_builtin(args) -> int:
    if args.dump:
        print(json.dumps(builtin_document(args.name), indent=2))
        return 0
    return _emit(run(builtin(args.name), args.out))


def cmd_encode(args) -> int:
    rows = []
    if args.table4:
        for (sl, conf, printed), (gl, sign, gconf, gprinted) in zip(TABLE4_SEVERITY, TABLE4_GROWTH):
            sev = encode_severity(sl, conf).as_tuple()
            gro = encode_growth(gl, sign, gconf).as_tuple()
            rows.append({
                "severity": sl, "confidence": conf, "encoded": sev, "printed": printed, "match": sev == printed,
            })
            rows.append({
                "growth": gl, "sign": sign, "confidence": gconf, "encoded": gro, "printed": gprinted,
                "match": gro == gprinted, "anomaly": anomaly_note(gl),
            })
    else:
        if not args.severity:
            raise ScenarioError("encode needs --severity (or --table4)")
        a = LinguisticAssessment(args.severity, args.confidence, args.growth, args.sign, args.growth_confidence)
        sev, gro = encode_assessment(a)
        row = {"severity": sev.as_tuple()}
        if gro is not None:
            row["growth"] = gro.as_tuple()
            row["anomaly"] = anomaly_note(args.growth)
        rows.append(row)
    for r in rows:
        print(json.dumps(r))
    return 0 if all(r.get("match", True) for r in rows) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fuzzydfs", description="Fuzzy consensus and synchronization experiments.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario file")
    r.add_argument("file")
    r.add_argument("--out", default=None, help="output directory (default: scenario outputs.dir or .)")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("consensus", help="fuzzy consensus of single or double integrators")
    src = c.add_mutually_exclusive_group()
    src.add_argument("--scenario")
    src.add_argument("--builtin", choices=[b for b in BUILTINS if b.split("-")[-1] in ("single", "double")])
    c.add_argument("--topology", choices=["bipartite5", "ring5", "iim3"])
    c.add_argument("--order", choices=["single", "double"])
    c.add_argument("--tau", help="sampling time, e.g. 0.25 or 1/4")
    c.add_argument("--tol", type=float)
    c.add_argument("--max-steps", type=int)
    c.add_argument("--name")
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_consensus)

    t = sub.add_parser("tau-sweep", help="time to consensus over a grid of sampling times")
    t.add_argument("--scenario")
    t.add_argument("--topology", action="append", choices=["bipartite5", "ring5"])
    t.add_argument("--order", action="append", choices=["single", "double"])
    t.add_argument("--from", dest="tau_from", type=float)
    t.add_argument("--to", dest="tau_to", type=float)
    t.add_argument("--points", type=int)
    t.add_argument("--max-steps", type=int)
    t.add_argument("--jobs", type=int, default=None, help="worker processes")
    t.add_argument("--out", default=None)
    t.set_defaults(func=cmd_sweep)

    s = sub.add_parser("sync", help="synchronize networked fuzzy IIM copies")
    s.add_argument("--scenario")
    s.add_argument("--gain", type=float, help="uniform diagonal gain k")
    s.add_argument("--output-mode", choices=["full", "reduced", "reduced-mp"])
    s.add_argument("--check", choices=["gershgorin", "spectral", "none"])
    s.add_argument("--max-steps", type=int)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_sync)

    b = sub.add_parser("builtin", help="run (or --dump) a built-in case study")
    b.add_argument("name", choices=BUILTINS)
    b.add_argument("--dump", action="store_true", help="print the scenario JSON instead of running it")
    b.add_argument("--out", default=None)
    b.set_defaults(func=cmd_builtin)

    e = sub.add_parser("encode", help="linguistic labels to TFNs")
    e.add_argument("--severity", help=f"one of: {', '.join(SEVERITY)}")
    e.add_argument("--confidence", type=int, default=1, help="stars, 1..5")
    e.add_argument("--growth", help=f"one of: {', '.join(GROWTH)}")
    e.add_argument("--sign", choices=["growth", "reduction"], default="growth")
    e.add_argument("--growth-confidence", type=int)
    e.add_argument("--table4", action="store_true", help="re-encode the case-study initial conditions")
    e.set_defaults(func=cmd_encode)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
