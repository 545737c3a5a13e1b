"""Static SVG figures for sweeps and frontiers."""

from __future__ import annotations

import io
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .analysis import SweepParameter, SweepResult  # noqa: E402
from .core import ParetoPoint  # noqa: E402

# fixed metadata keeps repeated renders byte-identical
_SVG_META = {"Date": None, "Creator": "dispatchkit"}


def _to_svg(fig) -> bytes:
    buf = io.BytesIO()
    matplotlib.rcParams["svg.hashsalt"] = "dispatchkit"
    fig.savefig(buf, format="svg", metadata=_SVG_META, bbox_inches="tight")
    plt.close(fig)
    return buf.getvalue()


def sweep_figure(result: SweepResult) -> bytes:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    x = result.values
    energies = result.energies
    for j, cid in enumerate(result.ids):
        ax.plot(x, energies[:, j], label=cid, linewidth=1.5)
    for bp in result.breakpoints:
        ax.axvline(bp, color="0.6", linestyle=":", linewidth=0.8)
    if result.parameter is SweepParameter.LAMBDA:
        ax.set_xlabel("weight on cost, lambda (dimensionless)")
        ax.set_title("Relaxed dispatch vs. lambda")
    else:
        ax.set_xlabel("shortage demand (kWh)")
        ax.set_title("Least-cost dispatch vs. demand")
    ax.set_ylabel("dispatched energy (kWh)")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    return _to_svg(fig)


def frontier_figure(points: Sequence[ParetoPoint]) -> bytes:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    energy = [p.total_energy for p in points]
    cost = [p.total_cost for p in points]
    ax.plot(energy, cost, marker="o", markersize=3, linewidth=1.2)
    ax.set_xlabel("total energy delivered (kWh)")
    ax.set_ylabel("total cost (cost-units)")
    ax.set_title("Cost / energy frontier")
    ax.grid(True, alpha=0.3)
    return _to_svg(fig)
