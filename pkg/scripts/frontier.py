#!/usr/bin/env python
"""Cost/energy frontier of the reference fleet in deficit (700 kWh)."""
import argparse
from pathlib import Path

from dispatchkit import pareto_frontier, reference_problem
from dispatchkit.analysis import lambda_grid
from dispatchkit.plotting import frontier_figure
from dispatchkit.problem_io import frontier_table, write_atomic


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default="outputs")
    parser.add_argument("--points", type=int, default=101)
    args = parser.parse_args()

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    points = pareto_frontier(reference_problem(), lambda_grid(args.points))
    write_atomic(outdir / "frontier.csv", frontier_table(points))
    write_atomic(outdir / "frontier.svg", frontier_figure(points))
    for p in points:
        span = f"{p.lam:.2f}" if p.lam == p.lambda_end else f"{p.lam:.2f}-{p.lambda_end:.2f}"
        print(f"lambda {span:>10}: energy {p.total_energy:8.2f} kWh, cost {p.total_cost:9.2f}")


if __name__ == "__main__":
    main()
