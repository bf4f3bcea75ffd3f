"""Spike raster and per-ms performance monitors plus benchmark metrics."""

from __future__ import annotations

import csv
import os
import tempfile
from dataclasses import dataclass

import numpy as np

DEFAULT_RECORD_CAP = 10**7


class SpikeMonitor:
    """Spike raster kept as ``(time_ms, neuron_id)`` records.

    Records beyond ``cap`` in memory are spilled to a binary file and read back
    on export.
    """

    def __init__(self, cap: int = DEFAULT_RECORD_CAP, spill_dir: str | None = None):
        self.cap = cap
        self.spill_dir = spill_dir
        self._times: list[np.ndarray] = []
        self._ids: list[np.ndarray] = []
        self._in_memory = 0
        self._spilled = 0
        self._spill_path: str | None = None
        self.count = 0

    def __len__(self):
        return self.count

    def record_spike(self, neuron: int, t: int) -> None:
        self.record(t, np.array([neuron], dtype=np.int64))

    def record(self, t: int, ids: np.ndarray) -> None:
        n = len(ids)
        if n == 0:
            return
        self._times.append(np.full(n, t, dtype=np.int64))
        self._ids.append(np.asarray(ids, dtype=np.int64))
        self._in_memory += n
        self.count += n
        if self._in_memory > self.cap:
            self._spill()

    def _spill(self):
        if self._spill_path is None:
            fd, self._spill_path = tempfile.mkstemp(prefix="raster-", suffix=".bin", dir=self.spill_dir)
            os.close(fd)
        pairs = np.stack([np.concatenate(self._times), np.concatenate(self._ids)], axis=1)
        with open(self._spill_path, "ab") as f:
            pairs.astype(np.int64).tofile(f)
        self._spilled += len(pairs)
        self._times.clear()
        self._ids.clear()
        self._in_memory = 0

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """``(times, ids)`` sorted by (time, id)."""
        ts, ids = [], []
        if self._spilled:
            pairs = np.fromfile(self._spill_path, dtype=np.int64).reshape(-1, 2)
            ts.append(pairs[:, 0])
            ids.append(pairs[:, 1])
        ts += self._times
        ids += self._ids
        if not ts:
            e = np.zeros(0, dtype=np.int64)
            return e, e.copy()
        t, i = np.concatenate(ts), np.concatenate(ids)
        order = np.lexsort((i, t))
        return t[order], i[order]

    def records(self) -> list[tuple[int, int]]:
        t, i = self.arrays()
        return list(zip(t.tolist(), i.tolist()))

    def counts_per_ms(self, duration_ms: int, t0: int = 0) -> np.ndarray:
        t, _ = self.arrays()
        return np.bincount(t - t0, minlength=duration_ms)[:duration_ms]

    def to_csv(self, path) -> None:
        t, i = self.arrays()
        write_raster_csv(path, t, i)

    def close(self):
        if self._spill_path and os.path.exists(self._spill_path):
            os.unlink(self._spill_path)
        self._spill_path = None

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass


def write_raster_csv(path, times, ids) -> None:
    with open(path, "w", newline="") as f:
        f.write("time_ms,neuron_id\n")
        if len(times):
            np.savetxt(f, np.stack([times, ids], axis=1), fmt="%d", delimiter=",")


def read_raster_csv(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path) as f:
        header = f.readline().strip()
        if header != "time_ms,neuron_id":
            raise ValueError(f"{path}: unexpected raster header {header!r}")
        data = np.loadtxt(f, dtype=np.int64, delimiter=",", ndmin=2)
    if data.size == 0:
        e = np.zeros(0, dtype=np.int64)
        return e, e.copy()
    return data[:, 0], data[:, 1]


class PerfMonitor:
    """One sample per simulated ms: wall time (ns, monotonic clock), active
    workers and spikes emitted."""

    def __init__(self, capacity: int = 0):
        self.model_ms = np.zeros(capacity, dtype=np.int64)
        self.wall_ns = np.zeros(capacity, dtype=np.int64)
        self.workers = np.zeros(capacity, dtype=np.int64)
        self.spikes = np.zeros(capacity, dtype=np.int64)
        self.n = 0

    def __len__(self):
        return self.n

    def _grow(self):
        cap = max(16, 2 * len(self.model_ms))
        for name in ("model_ms", "wall_ns", "workers", "spikes"):
            arr = getattr(self, name)
            new = np.zeros(cap, dtype=np.int64)
            new[: self.n] = arr[: self.n]
            setattr(self, name, new)

    def sample(self, model_ms: int, wall_ns: int, workers: int, spikes: int) -> None:
        if wall_ns < 0:
            raise ValueError("wall_ns must be >= 0")
        if self.n and model_ms <= self.model_ms[self.n - 1]:
            raise ValueError("perf samples must be strictly increasing in model time")
        if self.n == len(self.model_ms):
            self._grow()
        i = self.n
        self.model_ms[i], self.wall_ns[i], self.workers[i], self.spikes[i] = model_ms, wall_ns, workers, spikes
        self.n += 1

    def wall_ms(self) -> np.ndarray:
        return self.wall_ns[: self.n] / 1e6

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["model_ms", "wall_ns", "workers", "spikes"])
            for row in zip(*(getattr(self, k)[: self.n].tolist() for k in ("model_ms", "wall_ns", "workers", "spikes"))):
                w.writerow(row)

    def worker_ms(self) -> int:
        return int(self.workers[: self.n].sum())


def speed_factor(t_model: float, t_execution: float) -> float:
    """Model seconds simulated per wall-clock second (1.0 = real time)."""
    if not t_execution > 0:
        raise ValueError(f"execution time must be > 0, got {t_execution}")
    return t_model / t_execution


def performance_gain(multi: float, single: float) -> float:
    if not single > 0:
        raise ValueError(f"baseline speed factor must be > 0, got {single}")
    return multi / single


def realtime_compliance(wall_ms, budget_ms: float = 1.0) -> float:
    """Fraction of ms samples whose wall time is within ``budget_ms``."""
    wall_ms = np.asarray(wall_ms, dtype=float)
    if wall_ms.size == 0:
        raise ValueError("empty trace")
    return float(np.count_nonzero(wall_ms <= budget_ms)) / wall_ms.size


@dataclass
class BenchMetrics:
    threads: int
    t_model_s: float
    t_execution_s: float
    speed_factor: float
    performance_gain: float | None
    total_spikes: int

    @classmethod
    def from_run(cls, threads: int, t_model_s: float, t_execution_s: float, total_spikes: int, baseline: float | None):
        sf = speed_factor(t_model_s, t_execution_s)
        gain = None if baseline is None else performance_gain(sf, baseline)
        return cls(threads, t_model_s, t_execution_s, sf, gain, total_spikes)
