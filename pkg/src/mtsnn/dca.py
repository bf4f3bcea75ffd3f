"""Dynamic core assignment: keep the fewest workers that meet the real-time budget.

A windowed-mean threshold controller with hysteresis and a cooldown. Growing
is triggered by the measured mean; shrinking by the mean rescaled with a
predicted slowdown for one worker fewer.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum


class Decision(str, Enum):
    HOLD = "hold"
    GROW = "grow"
    SHRINK = "shrink"


@dataclass(frozen=True)
class DcaConfig:
    budget_ms: float = 1.0
    window: int = 50
    up_threshold: float = 0.9
    down_threshold: float = 0.5
    cooldown_ms: int = 100
    min_workers: int = 1
    max_workers: int | None = None  # None: the kernel's thread count
    # samples either side of a change used to measure its speed ratio
    probe: int = 10

    def __post_init__(self):
        if not 0 < self.down_threshold < self.up_threshold <= 1:
            raise ValueError("need 0 < down_threshold < up_threshold <= 1")
        if self.min_workers < 1:
            raise ValueError("min_workers must be >= 1")
        if self.cooldown_ms < 1:
            raise ValueError("cooldown_ms must be >= 1")
        if self.window < 1 or self.probe < 1:
            raise ValueError("window and probe must be >= 1")
        if self.budget_ms <= 0:
            raise ValueError("budget_ms must be > 0")
        if self.max_workers is not None and self.max_workers < self.min_workers:
            raise ValueError("max_workers < min_workers")

    def bounded(self, max_workers: int) -> "DcaConfig":
        from dataclasses import replace

        return replace(self, max_workers=max_workers if self.max_workers is None else self.max_workers)


@dataclass
class TraceRow:
    """``workers`` were active during ``model_ms``; ``decision`` applies from the next ms."""

    model_ms: int
    wall_ms: float
    workers: int
    decision: Decision


@dataclass
class DcaState:
    workers: int
    samples: deque = field(default_factory=deque)
    since_change: int = 0
    # workers -> mean ms per model ms, normalised to the load seen when the
    # table was anchored; only ratios between entries are meaningful
    table: dict[int, float] = field(default_factory=dict)
    pending: tuple[int, int, float] | None = None  # (from, to, mean before change)


def efficiency_estimate(state: DcaState, src: int, dst: int) -> float:
    """Predicted wall-time multiplier when moving from ``src`` to ``dst`` workers."""
    if src == dst:
        return 1.0
    t = state.table
    if src in t and dst in t and t[src] > 0:
        return t[dst] / t[src]
    return src / dst  # linear speedup


class DcaController:
    def __init__(self, config: DcaConfig, initial_workers: int | None = None):
        if config.max_workers is None:
            raise ValueError("DcaConfig.max_workers must be set (see DcaConfig.bounded)")
        self.config = config
        w = config.max_workers if initial_workers is None else initial_workers
        if not config.min_workers <= w <= config.max_workers:
            raise ValueError(f"initial workers {w} outside bounds")
        self.state = DcaState(workers=w, samples=deque(maxlen=config.window))
        self.trace: list[TraceRow] = []
        self._ms = 0

    @property
    def workers(self) -> int:
        return self.state.workers

    def _record_ratio(self):
        st, cfg = self.state, self.config
        if st.pending is None or st.since_change < cfg.probe:
            return
        src, dst, before = st.pending
        st.pending = None
        recent = list(st.samples)[-cfg.probe :]
        after = sum(recent) / len(recent)
        if before <= 0 or after <= 0:
            return
        if src not in st.table:
            st.table[src] = before
        st.table[dst] = st.table[src] * (after / before)

    def observe(self, wall_ms: float, model_ms: int | None = None) -> Decision:
        if not math.isfinite(wall_ms) or wall_ms < 0:
            raise ValueError(f"rejecting non-finite or negative sample {wall_ms!r}")
        st, cfg = self.state, self.config
        st.samples.append(float(wall_ms))
        st.since_change += 1
        self._record_ratio()
        model_ms = self._ms if model_ms is None else model_ms
        self._ms = model_ms + 1

        active = st.workers
        decision = Decision.HOLD
        if len(st.samples) == cfg.window and st.since_change >= cfg.cooldown_ms:
            mean = sum(st.samples) / cfg.window
            budget = cfg.budget_ms
            if mean > cfg.up_threshold * budget and st.workers < cfg.max_workers:
                decision = Decision.GROW
            elif st.workers > cfg.min_workers:
                predicted = mean * efficiency_estimate(st, st.workers, st.workers - 1)
                if predicted < cfg.down_threshold * budget:
                    decision = Decision.SHRINK
        if decision is not Decision.HOLD:
            recent = list(st.samples)[-cfg.probe :]
            new = st.workers + (1 if decision is Decision.GROW else -1)
            st.pending = (st.workers, new, sum(recent) / len(recent))
            st.workers = new
            st.since_change = 0
        self.trace.append(TraceRow(model_ms, float(wall_ms), active, decision))
        return decision


def observe(state_or_controller: DcaController, wall_ms: float) -> Decision:
    return state_or_controller.observe(wall_ms)


def simulate_trace(controller: DcaController, load) -> list[TraceRow]:
    """Drive ``controller`` with ``load(model_ms, workers) -> wall_ms`` for as
    many ms as ``load`` has (``len(load)``) or until it raises StopIteration."""
    for t in range(len(load)):
        controller.observe(load(t, controller.workers), t)
    return controller.trace


class StepLoad:
    """Synthetic per-ms load: ``levels[k]`` ms of work per model ms at
    ``ref_workers`` workers from ``edges[k-1]`` on, scaled by ideal speedup."""

    def __init__(self, levels, edges, duration_ms: int, ref_workers: int = 1):
        if len(levels) != len(edges) + 1:
            raise ValueError("need one more level than edges")
        self.levels = list(levels)
        self.edges = list(edges)
        self.duration_ms = duration_ms
        self.ref_workers = ref_workers

    def __len__(self):
        return self.duration_ms

    def base(self, t: int) -> float:
        k = sum(1 for e in self.edges if t >= e)
        return self.levels[k]

    def __call__(self, t: int, workers: int) -> float:
        return self.base(t) * self.ref_workers / workers


def worker_ms(trace) -> int:
    """Integral of allocated workers over model ms (energy proxy)."""
    return int(sum(r.workers for r in trace))


def check_cooldown(trace, cooldown_ms: int) -> bool:
    """At most one change per ``cooldown_ms`` model ms."""
    changes = [r.model_ms for r in trace if r.decision is not Decision.HOLD]
    return all(b - a >= cooldown_ms for a, b in zip(changes, changes[1:]))


def write_trace_csv(trace, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["model_ms", "wall_ms", "workers", "decision"])
        for r in trace:
            w.writerow([r.model_ms, repr(r.wall_ms), r.workers, r.decision.value])


def read_trace_csv(path) -> list[TraceRow]:
    with open(path, newline="") as f:
        return [
            TraceRow(int(r["model_ms"]), float(r["wall_ms"]), int(r["workers"]), Decision(r["decision"]))
            for r in csv.DictReader(f)
        ]
