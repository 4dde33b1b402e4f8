"""Time to consensus over the sampling time, with an optional figure.

Usage: python scripts/tau_sweep.py [--points 300] [--jobs 4] [--plot sweep.png]

``--plot`` needs matplotlib (``pip install .[plot]``).
"""

from __future__ import annotations

import argparse
import csv
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

from fuzzydfs.scenario import builtin, run


def plot(csv_path: Path, markers: dict, png: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = list(csv.DictReader(open(csv_path)))
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    for ax, topo in zip(axes, ("bipartite5", "ring5")):
        for order, style in (("single", "-"), ("double", "--")):
            pts = [(float(r["tau"]), float(r["time_to_consensus"])) for r in rows
                   if r["topology"] == topo and r["order"] == order and r["status"] == "converged"]
            if pts:
                ax.plot(*zip(*pts), style, label=order)
        if topo in markers:
            ax.axvline(float(Fraction(markers[topo])), color="grey", lw=0.8)
        ax.set(title=topo, xlabel="tau", yscale="log")
        ax.legend()
    axes[0].set_ylabel("time to consensus")
    fig.tight_layout()
    fig.savefig(png, dpi=150)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=None)
    ap.add_argument("--max-steps", type=int, default=None)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="results")
    ap.add_argument("--plot", default=None, help="write a PNG figure to this path")
    args = ap.parse_args(argv)
    sc = builtin("tau-sweep")
    if args.points:
        sc = replace(sc, sweep=replace(sc.sweep, points=args.points))
    if args.max_steps:
        sc = replace(sc, max_steps=args.max_steps)
    outcome = run(sc, Path(args.out), jobs=args.jobs)
    for key, st in sorted(outcome.summary["sweeps"].items()):
        print(
            f"{key:18s} flat={st['flat_variation']:.1%} largest_converged={st['largest_converged_tau']:.4f} "
            f"boundary={st['spectral_boundary']} flagged={st['unstable_flagged_divergent']} counts={st['counts']}"
        )
    if args.plot:
        plot(Path(outcome.paths["sweep"]), sc.sweep.markers, Path(args.plot))
        print(f"figure: {args.plot}")
    return outcome.status


if __name__ == "__main__":
    raise SystemExit(main())
