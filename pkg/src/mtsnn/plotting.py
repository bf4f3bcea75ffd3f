"""Report figures. Uses the Agg backend; every function writes one file."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

EXC_COLOR = "#1f4e9c"
INH_COLOR = "#c0392b"
GEN_COLOR = "#7f7f7f"


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_raster(times, ids, bounds, path, t_max=None, title="Spike raster"):
    """Banded raster: groups stacked by partition, inhibitory in red."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    times = np.asarray(times)
    ids = np.asarray(ids)
    for b in bounds:
        sel = (ids >= b["start"]) & (ids < b["stop"])
        color = GEN_COLOR if b["generator"] else (INH_COLOR if b["polarity"] == "inh" else EXC_COLOR)
        ax.scatter(times[sel], ids[sel], s=1.0, c=color, marker="|", linewidths=0.5)
        ax.axhline(b["stop"] - 0.5, color="0.85", lw=0.5)
    ticks = [(b["start"] + b["stop"]) / 2 for b in bounds]
    ax.set_yticks(ticks)
    ax.set_yticklabels([b["group"] for b in bounds], fontsize=7)
    if t_max is not None:
        ax.set_xlim(0, t_max)
    ax.set_xlabel("model time (ms)")
    ax.set_title(title)
    _save(fig, path)


def plot_sweep(report, path):
    threads = [r.threads for r in report.rows]
    sf = [r.speed_factor for r in report.rows]
    gain = [r.performance_gain if r.performance_gain is not None else 1.0 for r in report.rows]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    x = np.arange(len(threads))
    ax.bar(x - 0.2, sf, width=0.4, label="speed factor")
    ax.bar(x + 0.2, gain, width=0.4, label="performance gain")
    ax.axhline(1.0, color="k", lw=0.7, ls="--")
    ax.set_xticks(x)
    ax.set_xticklabels([str(t) for t in threads])
    ax.set_xlabel("threads")
    ax.set_ylabel("x")
    ax.legend(frameon=False, fontsize=8)
    phys = report.machine.get("physical_cores")
    ax.set_title(f"{report.network.get('name', '')} sweep ({phys} physical cores)", fontsize=9)
    _save(fig, path)


def plot_dca(trace, path, budget_ms=1.0):
    ms = np.array([r.model_ms for r in trace])
    wall = np.array([r.wall_ms for r in trace])
    workers = np.array([r.workers for r in trace])
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 4), sharex=True)
    ax1.plot(ms, wall, lw=0.5)
    ax1.axhline(budget_ms, color="r", lw=0.8, ls="--")
    ax1.set_ylabel("wall ms / model ms")
    ax2.step(ms, workers, where="post")
    ax2.set_ylabel("workers")
    ax2.set_xlabel("model time (ms)")
    _save(fig, path)
