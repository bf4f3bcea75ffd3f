"""Benchmark harness: thread-count sweeps and DCA runs with CSV/JSON reports."""

from __future__ import annotations

import json
import logging
import os
import platform
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from mtsnn.dca import DcaConfig, worker_ms, write_trace_csv
from mtsnn.kernel import KernelConfig, SimResult, Simulator
from mtsnn.monitors import BenchMetrics, performance_gain, realtime_compliance, write_raster_csv
from mtsnn.netmodels.chainfire import ChainfireConfig, build_chainfire
from mtsnn.netmodels.io import load_network
from mtsnn.netmodels.synfire import build_synfire, default_synfire_config
from mtsnn.network import Network

log = logging.getLogger(__name__)

MODELS = ("synfire", "chainfire", "from-file")
REPORT_COLUMNS = ["threads", "execution_s", "speed_factor", "performance_gain", "total_spikes"]


class RasterMismatch(RuntimeError):
    """Spike rasters differ between runs that must be identical."""


@dataclass
class RunSpec:
    model: str = "chainfire"
    model_params: dict = field(default_factory=dict)
    network_file: str | None = None
    duration_ms: int = 10_000
    threads: list[int] = field(default_factory=lambda: [1])
    dca: bool = False
    dca_config: dict = field(default_factory=dict)
    steps_per_ms: int = 2
    integrator: str = "euler"
    synapse_mode: str | None = None
    precision: str = "float64"
    seed: int = 0
    out: str | None = None
    formats: list[str] = field(default_factory=lambda: ["csv", "json"])
    warmup_ms: int = 100
    plots: bool = True

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}")
        if self.model == "from-file" and not self.network_file:
            raise ValueError("model 'from-file' needs network_file")
        if not self.threads or any(int(t) < 1 for t in self.threads):
            raise ValueError("thread counts must be >= 1")
        self.threads = [int(t) for t in self.threads]
        if self.duration_ms < 0:
            raise ValueError("duration_ms must be >= 0")
        bad = set(self.formats) - {"csv", "json"}
        if bad:
            raise ValueError(f"unknown formats {sorted(bad)}")

    @classmethod
    def from_dict(cls, d: dict) -> "RunSpec":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        return cls(**d)

    def kernel_config(self, threads: int, dca: bool = False) -> KernelConfig:
        return KernelConfig(
            steps_per_ms=self.steps_per_ms,
            threads=threads,
            integrator=self.integrator,
            synapse_mode=self.synapse_mode,
            precision=self.precision,
            seed=self.seed,
            dca_enabled=dca,
            dca=DcaConfig(**self.dca_config),
        )


def build_network(spec: RunSpec) -> Network:
    if spec.model == "chainfire":
        params = {"seed": spec.seed, **spec.model_params}
        return build_chainfire(ChainfireConfig(**params))
    if spec.model == "synfire":
        params = {"seed": spec.seed, **spec.model_params}
        return build_synfire(default_synfire_config(**params))
    return load_network(spec.network_file)


def machine_metadata() -> dict:
    try:
        import psutil

        physical = psutil.cpu_count(logical=False)
    except Exception:  # psutil can fail inside some containers
        physical = None
    return {
        "logical_cores": os.cpu_count(),
        "physical_cores": physical,
        "platform": platform.platform(),
        "python": platform.python_version(),
        "processor": platform.processor() or platform.machine(),
    }


@dataclass
class BenchReport:
    rows: list[BenchMetrics]
    machine: dict
    spec: dict
    baseline_index: int | None
    network: dict
    build_s: list[float] = field(default_factory=list)
    rasters_identical: bool = True
    dca: dict | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "rows": [asdict(r) for r in self.rows],
            "baseline_index": self.baseline_index,
            "machine": self.machine,
            "network": self.network,
            "spec": self.spec,
            "build_s": self.build_s,
            "rasters_identical": self.rasters_identical,
            "dca": self.dca,
            "notes": self.notes,
        }

    def table_rows(self) -> list[list[str]]:
        """Rows rounded for presentation: factors to one decimal."""
        out = []
        for k, r in enumerate(self.rows):
            gain = "" if (k == self.baseline_index or r.performance_gain is None) else f"{r.performance_gain:.1f}"
            out.append([str(r.threads), f"{r.t_execution_s:.2f}", f"{r.speed_factor:.1f}", gain, str(r.total_spikes)])
        return out

    def write_csv(self, path) -> None:
        with open(path, "w") as f:
            f.write(",".join(REPORT_COLUMNS) + "\n")
            for row in self.table_rows():
                f.write(",".join(row) + "\n")

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, default=str))

    def format_table(self) -> str:
        lines = [f"{'Threads':>8} {'Execution Time':>15} {'Speed Factor':>13} {'Performance Gain':>17} {'Spikes':>9}"]
        for t, e, s, g, n in self.table_rows():
            lines.append(f"{t:>8} {e + ' s':>15} {s + ' x':>13} {(g + ' x') if g else '':>17} {n:>9}")
        return "\n".join(lines)


NOTES = [
    "execution time covers simulation only; network build time is recorded separately",
    "each run is preceded by an untimed warmup on a separate simulator instance",
]


def _timed_run(spec: RunSpec, threads: int, dca: bool = False) -> tuple[Network, SimResult, float]:
    t0 = time.perf_counter()
    net = build_network(spec)
    build_s = time.perf_counter() - t0
    if spec.warmup_ms > 0:
        with Simulator(net, spec.kernel_config(threads, dca)) as warm:
            warm.run(min(spec.warmup_ms, max(spec.duration_ms, 1)))
    with Simulator(net, spec.kernel_config(threads, dca)) as sim:
        res = sim.run(spec.duration_ms)
    return net, res, build_s


def _same_raster(a: SimResult, b: SimResult) -> bool:
    ta, ia = a.raster_arrays()
    tb, ib = b.raster_arrays()
    return np.array_equal(ta, tb) and np.array_equal(ia, ib)


def _baseline_index(threads: list[int]) -> int:
    return threads.index(1) if 1 in threads else 0


def run_sweep(spec: RunSpec, write: bool = True) -> BenchReport:
    """Run the network once per thread-count entry (duplicates included) and
    compare every raster against the first; any mismatch raises
    :class:`RasterMismatch`."""
    results, builds, net = [], [], None
    for T in spec.threads:
        net, res, build_s = _timed_run(spec, T)
        log.info("threads=%d execution=%.3fs spikes=%d", T, res.execution_s, res.total_spikes)
        if results and not _same_raster(results[0], res):
            raise RasterMismatch(f"raster with {T} threads differs from the {spec.threads[0]}-thread run")
        results.append(res)
        builds.append(build_s)

    base = _baseline_index(spec.threads)
    t_model = spec.duration_ms / 1000.0
    rows = []
    base_sf = None
    if spec.duration_ms > 0:
        base_sf = t_model / max(results[base].execution_s, 1e-12)
    for k, (T, res) in enumerate(zip(spec.threads, results)):
        m = BenchMetrics.from_run(T, t_model, max(res.execution_s, 1e-12), res.total_spikes, None)
        if k != base and base_sf:
            m.performance_gain = performance_gain(m.speed_factor, base_sf)
        rows.append(m)
    report = BenchReport(
        rows=rows,
        machine=machine_metadata(),
        spec=asdict(spec),
        baseline_index=base,
        network=net.summary(),
        build_s=builds,
        notes=list(NOTES),
    )
    if spec.model == "synfire" and net.synapse_mode == "coba":
        report.notes.append("COBA reversal/decay constants are defaults (E_exc=0, E_inh=-90, tau 5/6 ms)")
    if write and spec.out:
        out = Path(spec.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_report(report, out, spec)
        export_raster_plotdata(results[base], net, out / "raster.csv")
        for T, res in zip(spec.threads, results):
            res.perf.to_csv(out / f"perf_T{T}.csv")
        if spec.plots:
            from mtsnn import plotting

            plotting.plot_sweep(report, out / "sweep.png")
            t, i = results[base].raster_arrays()
            plotting.plot_raster(t, i, net.group_bounds(), out / "raster.png")
    report._results = results  # kept for callers that need rasters
    return report


def run_dca(spec: RunSpec, write: bool = True) -> tuple[BenchReport, list]:
    """One run under the DCA controller with ``max(spec.threads)`` as the cap."""
    T = max(spec.threads)
    net, res, build_s = _timed_run(spec, T, dca=True)
    trace = res.dca_trace or []
    t_model = spec.duration_ms / 1000.0
    m = BenchMetrics.from_run(T, t_model, max(res.execution_s, 1e-12), res.total_spikes, None)
    used = worker_ms(trace)
    fixed = T * spec.duration_ms
    wall = res.perf.wall_ms()
    dcfg = spec.kernel_config(T, True).dca
    info = {
        "max_workers": T,
        "worker_ms": used,
        "fixed_max_worker_ms": fixed,
        "worker_ms_ratio": used / fixed if fixed else None,
        "realtime_compliance": realtime_compliance(wall, dcfg.budget_ms) if len(wall) else None,
        "final_workers": trace[-1].workers if trace else T,
        "changes": sum(1 for r in trace if r.decision.value != "hold"),
    }
    report = BenchReport(
        rows=[m],
        machine=machine_metadata(),
        spec=asdict(spec),
        baseline_index=None,
        network=net.summary(),
        build_s=[build_s],
        dca=info,
        notes=list(NOTES) + ["energy proxy: integral of allocated workers over model ms vs a fixed-max run"],
    )
    if write and spec.out:
        out = Path(spec.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_report(report, out, spec)
        write_trace_csv(trace, out / "dca_trace.csv")
        res.perf.to_csv(out / "perf_dca.csv")
        export_raster_plotdata(res, net, out / "raster.csv")
        if spec.plots:
            from mtsnn import plotting

            plotting.plot_dca(trace, out / "dca.png", budget_ms=dcfg.budget_ms)
    report._results = [res]
    return report, trace


def _write_report(report: BenchReport, out: Path, spec: RunSpec) -> None:
    if "csv" in spec.formats:
        report.write_csv(out / "report.csv")
    if "json" in spec.formats:
        report.write_json(out / "report.json")


def export_raster_plotdata(raster, network: Network, path) -> Path:
    """Raster CSV plus a ``<stem>.groups.json`` sidecar listing group id
    ranges in partition order, enough to redraw a banded raster."""
    path = Path(path)
    if isinstance(raster, SimResult):
        times, ids = raster.raster_arrays()
    elif hasattr(raster, "arrays"):
        times, ids = raster.arrays()
    else:
        times, ids = raster
    try:
        write_raster_csv(path, times, ids)
        bands = sorted(network.group_bounds(), key=lambda b: (b["partition"], b["start"]))
        sidecar = path.with_suffix(".groups.json")
        sidecar.write_text(json.dumps({"network": network.name, "groups": bands}, indent=2))
    except OSError as exc:
        raise OSError(f"cannot write raster to {path}: {exc}") from exc
    return path
