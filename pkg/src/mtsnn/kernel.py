"""Multi-threaded simulation loop.

Per model ms: generator spikes are injected, the ms's delivery slot becomes
the synaptic input, then ``steps_per_ms`` integration steps run. In each step
every neuron group is split into contiguous chunks dealt round-robin to the
workers; a barrier separates steps. At the ms boundary the coordinator
pushes the fan-out of all spikes (in ascending id order) into the delay ring.

Each neuron is updated by exactly one worker and every floating point
accumulation happens in an order fixed by the network, so rasters and final
state are bitwise identical for any worker count or worker-count schedule.
"""

from __future__ import annotations

import logging
import math
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from mtsnn import _kernels
from mtsnn.dca import DcaConfig, DcaController, Decision, TraceRow
from mtsnn.monitors import DEFAULT_RECORD_CAP, PerfMonitor, SpikeMonitor
from mtsnn.network import Network
from mtsnn.neuron import SPIKE_THRESHOLD
from mtsnn.synapse import COBA, CUBA, SYNAPSE_MODES, CobaParams, DelayedSpikeBuffer

log = logging.getLogger(__name__)

INTEGRATORS = ("euler", "rk4")


class KernelError(RuntimeError):
    pass


@dataclass
class KernelConfig:
    steps_per_ms: int = 2
    threads: int = 1
    integrator: str = "euler"
    synapse_mode: str | None = None  # None: use the network's mode
    dca_enabled: bool = False
    dca: DcaConfig = field(default_factory=DcaConfig)
    seed: int = 0
    chunk_size: int | None = None  # None: max(64, ceil(group_size / (4 * workers)))
    threshold: float = SPIKE_THRESHOLD
    precision: str = "float64"
    coba: CobaParams = field(default_factory=CobaParams)
    record_cap: int = DEFAULT_RECORD_CAP
    debug_barrier: bool = False

    def __post_init__(self):
        if self.steps_per_ms < 1:
            raise ValueError("steps_per_ms must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"integrator must be one of {INTEGRATORS}")
        if self.synapse_mode is not None and self.synapse_mode not in SYNAPSE_MODES:
            raise ValueError(f"synapse_mode must be one of {SYNAPSE_MODES}")
        if self.precision not in ("float64", "float32"):
            raise ValueError("precision must be float64 or float32")
        if self.chunk_size is not None and self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")


@dataclass
class SimResult:
    t_model_s: float
    execution_s: float
    total_spikes: int
    group_spikes: dict[str, int]
    raster: SpikeMonitor
    perf: PerfMonitor
    v: np.ndarray
    u: np.ndarray
    dca_trace: list[TraceRow] | None = None

    def raster_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return self.raster.arrays()


class WorkerPool:
    """Persistent workers; the calling thread acts as worker 0.

    ``run(task)`` calls ``task(worker_index)`` on every active worker and
    returns once all have finished. Tasks call :meth:`barrier` to separate
    phases.
    """

    def __init__(self, max_workers: int):
        self.max_workers = max_workers
        self.n = 1
        self._threads: dict[int, threading.Thread] = {}
        self._wake = [threading.Event() for _ in range(max_workers)]
        self._barrier: threading.Barrier | None = None
        self._task = None
        self._error: BaseException | None = None
        self._stop = False

    def resize(self, n: int) -> None:
        if not 1 <= n <= self.max_workers:
            raise ValueError(f"worker count {n} outside [1, {self.max_workers}]")
        self.n = n
        self._barrier = threading.Barrier(n) if n > 1 else None
        for wid in range(1, n):
            if wid not in self._threads:
                t = threading.Thread(target=self._loop, args=(wid,), name=f"mtsnn-worker-{wid}", daemon=True)
                self._threads[wid] = t
                t.start()

    def barrier(self) -> None:
        if self._barrier is not None:
            self._barrier.wait()

    def _loop(self, wid: int) -> None:
        wake = self._wake[wid]
        while True:
            wake.wait()
            wake.clear()
            if self._stop:
                return
            try:
                self._task(wid)
            except threading.BrokenBarrierError:
                pass
            except BaseException as exc:  # surfaced by run()
                self._error = exc
                self._barrier.abort()

    def run(self, task) -> None:
        if self._error is not None:
            raise KernelError("worker pool is broken") from self._error
        if self.n == 1:
            task(0)
            return
        self._task = task
        for wid in range(1, self.n):
            self._wake[wid].set()
        try:
            task(0)
        except threading.BrokenBarrierError:
            raise KernelError("worker failed") from self._error
        except BaseException:
            self._barrier.abort()
            raise

    def close(self) -> None:
        self._stop = True
        for e in self._wake:
            e.set()
        for t in self._threads.values():
            t.join(timeout=5)
        self._threads.clear()


def chunk_ranges(start: int, size: int, workers: int, chunk_size: int | None = None) -> list[tuple[int, int]]:
    c = chunk_size or max(64, math.ceil(size / (4 * workers)))
    return [(lo, min(lo + c, start + size)) for lo in range(start, start + size, c)]


def assign_chunks(groups, workers: int, chunk_size: int | None = None) -> list[list[tuple[int, int]]]:
    """Chunks of all groups, dealt round-robin (running chunk index) to workers."""
    out: list[list[tuple[int, int]]] = [[] for _ in range(workers)]
    k = 0
    for g in groups:
        for rng in chunk_ranges(g.start, g.size, workers, chunk_size):
            out[k % workers].append(rng)
            k += 1
    return out


class Simulator:
    """Owns the mutable state of one simulation of a frozen network."""

    def __init__(self, network: Network, config: KernelConfig | None = None):
        if not network.frozen:
            raise KernelError("network must be frozen before simulation (call network.freeze())")
        self.network = network
        self.config = config = config or KernelConfig()
        self.mode = config.synapse_mode or network.synapse_mode
        dtype = np.dtype(config.precision)
        self.dtype = dtype
        n = network.n_neurons
        table = network.table

        a, b, c, d = network.param_arrays()
        self.a, self.b, self.c, self.d = (x.astype(dtype) for x in (a, b, c, d))
        self.v = self.c.copy()
        self.u = (self.b * self.c).astype(dtype)
        self.buffer = DelayedSpikeBuffer(n, max(table.max_delay, 1), dtype=dtype)
        self.i_cuba = np.zeros(n, dtype=dtype)
        self.g_exc = np.zeros(n, dtype=dtype)
        self.g_inh = np.zeros(n, dtype=dtype)
        self.fired = np.zeros(n, dtype=np.int64)
        self.gen = np.full(n, -1, dtype=np.int64)
        self.t = 0
        self._step = 0
        self._groups = network.neuron_groups()
        self._neuron_ids = (
            np.concatenate([g.ids() for g in self._groups]) if self._groups else np.zeros(0, dtype=np.int64)
        )
        self._barrier_violations: list[str] = []

        dt = 1.0 / config.steps_per_ms
        self._dt = dt
        self._dec_exc = math.exp(-dt / config.coba.tau_exc)
        self._dec_inh = math.exp(-dt / config.coba.tau_inh)

        self.pool = WorkerPool(config.threads)
        self.dca: DcaController | None = None
        if config.dca_enabled:
            dcfg = config.dca.bounded(config.threads)
            if dcfg.max_workers > config.threads:
                raise ValueError("DCA max_workers exceeds configured threads")
            self.dca = DcaController(dcfg)
            self.set_worker_count(self.dca.workers)
        else:
            self.set_worker_count(config.threads)

    # -- worker management --------------------------------------------------

    @property
    def workers(self) -> int:
        return self.pool.n

    def set_worker_count(self, n: int) -> None:
        """Change the active worker count; only valid between ms."""
        if not isinstance(n, (int, np.integer)) or not 1 <= n <= self.config.threads:
            raise ValueError(f"worker count must be in [1, {self.config.threads}], got {n!r}")
        self.pool.resize(int(n))
        assigned = assign_chunks(self._groups, int(n), self.config.chunk_size)
        self._chunks = [
            (np.array([r[0] for r in ch], dtype=np.int64), np.array([r[1] for r in ch], dtype=np.int64))
            for ch in assigned
        ]

    def close(self) -> None:
        self.pool.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- the loop -------------------------------------------------------------

    def _generator_schedule(self, t0: int, t1: int) -> tuple[np.ndarray, np.ndarray]:
        ts, ids = [], []
        for g in self.network.generator_groups():
            t, unit = g.generator.schedule(g.size, t1, salt=(self.config.seed, g.id))
            keep = t >= t0
            ts.append(t[keep])
            ids.append(unit[keep] + g.start)
        if not ts:
            e = np.zeros(0, dtype=np.int64)
            return e, e.copy()
        t, i = np.concatenate(ts), np.concatenate(ids)
        order = np.lexsort((i, t))
        return t[order], i[order]

    def _check_barrier(self, step_id: int, wid: int) -> None:
        ids = self._neuron_ids
        if not len(ids):
            return
        g = self.gen[ids]
        if g.min() < step_id - 1 or g.max() > step_id:
            self._barrier_violations.append(
                f"step {step_id} worker {wid}: generations span [{g.min()}, {g.max()}]"
            )

    def _make_task(self):
        cfg = self.config
        coba = self.mode == COBA
        rk4 = cfg.integrator == "rk4"
        S = cfg.steps_per_ms
        step0 = self._step
        debug = cfg.debug_barrier
        pool = self.pool
        chunks = self._chunks
        args_tail = (
            self.v, self.u, self.a, self.b, self.c, self.d, self.i_cuba, self.g_exc, self.g_inh,
            coba, cfg.coba.e_exc, cfg.coba.e_inh, self._dec_exc, self._dec_inh, self._dt, rk4,
            cfg.threshold, self.fired, self.gen,
        )
        update = _kernels.update_chunks

        def task(wid: int) -> None:
            los, his = chunks[wid]
            for s in range(S):
                if debug:
                    self._check_barrier(step0 + s, wid)
                update(los, his, step0 + s, *args_tail)
                pool.barrier()

        return task

    def advance_ms(self, raster: SpikeMonitor, perf: PerfMonitor, gen_ids: np.ndarray) -> None:
        start = time.perf_counter_ns()
        t = self.t
        buf = self.buffer
        exc, inh = buf.delivered(t)
        if self.mode == CUBA:
            np.add(exc, inh, out=self.i_cuba)
        else:
            self.g_exc += exc
            self.g_inh -= inh  # inhibitory weights are stored negative

        workers = self.pool.n
        self.pool.run(self._make_task())
        self._step += self.config.steps_per_ms

        fired = np.flatnonzero(self.fired)
        if len(fired):
            counts = self.fired[fired]
            self.fired[fired] = 0
            if counts.max() > 1:
                fired = np.repeat(fired, counts)
        if len(gen_ids):
            ids = np.sort(np.concatenate([gen_ids, fired]), kind="stable") if len(fired) else gen_ids
        else:
            ids = fired
        raster.record(t, ids)
        if len(ids):
            tab = self.network.table
            _kernels.deliver(
                ids, t, tab.out_ptr, tab.out_post, tab.out_weight, tab.out_delay, tab.out_inh, buf.exc, buf.inh
            )
        buf.clear(t)
        self.t = t + 1
        wall = time.perf_counter_ns() - start
        perf.sample(t, wall, workers, len(ids))
        if self.dca is not None:
            decision = self.dca.observe(wall / 1e6, t)
            if decision is not Decision.HOLD:
                self.set_worker_count(self.dca.workers)

    def run(self, duration_ms: int) -> SimResult:
        if duration_ms < 0:
            raise ValueError("duration_ms must be >= 0")
        duration_ms = int(duration_ms)
        t0 = self.t
        raster = SpikeMonitor(cap=self.config.record_cap)
        perf = PerfMonitor(duration_ms)
        gt, gid = self._generator_schedule(t0, t0 + duration_ms)
        bounds = np.searchsorted(gt, np.arange(t0, t0 + duration_ms + 1))
        trace_start = len(self.dca.trace) if self.dca is not None else 0

        start = time.perf_counter_ns()
        for k in range(duration_ms):
            self.advance_ms(raster, perf, gid[bounds[k] : bounds[k + 1]])
        execution_s = (time.perf_counter_ns() - start) / 1e9

        if self._barrier_violations:
            raise KernelError("barrier violation: " + "; ".join(self._barrier_violations[:5]))
        times, ids = raster.arrays()
        group_spikes = {}
        for g in self.network.groups:
            group_spikes[g.name] = int(np.count_nonzero((ids >= g.start) & (ids < g.stop)))
        return SimResult(
            t_model_s=duration_ms / 1000.0,
            execution_s=execution_s,
            total_spikes=len(raster),
            group_spikes=group_spikes,
            raster=raster,
            perf=perf,
            v=self.v.copy(),
            u=self.u.copy(),
            dca_trace=self.dca.trace[trace_start:] if self.dca is not None else None,
        )


def run(network: Network, duration_ms: int, config: KernelConfig | None = None) -> SimResult:
    with Simulator(network, config) as sim:
        return sim.run(duration_ms)
