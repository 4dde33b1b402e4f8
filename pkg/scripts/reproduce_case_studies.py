"""Run every built-in case study and print a one-line digest per run.

Usage: python scripts/reproduce_case_studies.py [--out results]
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from fuzzydfs.scenario import BUILTINS, builtin, run


def digest(name: str, outcome) -> str:
    s = outcome.summary
    if name.startswith(("bipartite", "ring")):
        return f"steps={s['steps_to_consensus']} time={s['time_to_consensus']} prediction_gap={s['prediction_gap']:.1e}"
    if name == "iim-sync":
        peak = np.round(s["equilibrium_peak"], 4).tolist()
        return f"steps_to_sync={s['steps_to_sync']} prediction_gap={s['prediction_gap']:.1e} q_peak={peak}"
    if name == "iim-isolated":
        return f"q_peak={np.round(s['equilibrium_peak'], 4).tolist()} equilibrium_gap={s['equilibrium_gap']:.1e}"
    parts = []
    for key, st in sorted(s["sweeps"].items()):
        parts.append(f"{key}: flat={st['flat_variation']:.1%} boundary={st['spectral_boundary']}")
    return "; ".join(parts)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--skip-sweep", action="store_true", help="leave out the (slowest) tau sweep")
    args = ap.parse_args(argv)
    worst = 0
    for name in BUILTINS:
        if args.skip_sweep and name == "tau-sweep":
            continue
        outcome = run(builtin(name), Path(args.out))
        worst = max(worst, outcome.status)
        print(f"{name:18s} status={outcome.status} {digest(name, outcome)}")
    return worst


if __name__ == "__main__":
    raise SystemExit(main())
