"""Synfire ring: partitions of an RS excitatory and an FS inhibitory group.

Feed-forward inhibition motif per hop: ``E[p] -> E[p+1]``, ``E[p] -> I[p+1]``
and ``I[p+1] -> E[p+1]``. The last partition wraps to the first, so a wave
started by one pulse packet keeps circulating. The pulse-packet generator
drives partition 0 (both groups).

Connection constants are not fixed by the model description; the defaults
shipped in ``data/synfire_default.json`` come from :func:`calibrate_synfire`.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from importlib import resources

import numpy as np

from mtsnn.netmodels.generators import GeneratorSpec
from mtsnn.network import INHIBITORY, Network
from mtsnn.neuron import FS, RS
from mtsnn.synapse import COBA, CUBA, SYNAPSE_MODES


@dataclass(frozen=True)
class SynfireConfig:
    partitions: int = 4
    exc_per_group: int = 200
    inh_per_group: int = 50
    synapse_mode: str = CUBA
    p_ee: float = 0.3
    p_ei: float = 0.3
    p_ie: float = 0.35
    w_ee: float = 1.25
    w_ei: float = 0.75
    w_ie: float = -4.0
    delay: int = 10  # E -> next partition
    delay_ie: int = 2
    # stimulus: one generator unit per spike of the packet
    stim_size: int = 200
    stim_sigma_ms: float = 1.0
    stim_rate_hz: float = 1.0
    stim_packets: int | None = 1
    stim_start_ms: float = 10.0
    w_stim: float = 45.0
    p_stim_inh: float = 0.1
    w_stim_inh: float = 2.0
    # COBA: drive weights are divided by this to give conductances
    coba_divisor: float = 200.0
    seed: int = 0

    def __post_init__(self):
        if self.partitions < 2:
            raise ValueError("partitions must be >= 2")
        if min(self.exc_per_group, self.inh_per_group, self.stim_size) < 1:
            raise ValueError("group sizes must be >= 1")
        if self.synapse_mode not in SYNAPSE_MODES:
            raise ValueError(f"unknown synapse mode {self.synapse_mode!r}")
        for name in ("p_ee", "p_ei", "p_ie", "p_stim_inh"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be a probability")
        if min(self.w_ee, self.w_ei, self.w_stim, self.w_stim_inh) < 0 or self.w_ie > 0:
            raise ValueError("excitatory weights must be >= 0 and w_ie <= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SynfireConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})


def default_synfire_config(**overrides) -> SynfireConfig:
    """Calibrated defaults from the packaged config file."""
    doc = json.loads(resources.files("mtsnn.data").joinpath("synfire_default.json").read_text())
    return replace(SynfireConfig.from_dict(doc["config"]), **overrides)


def build_synfire(config: SynfireConfig | None = None) -> Network:
    cfg = config if config is not None else default_synfire_config()
    scale = 1.0 / cfg.coba_divisor if cfg.synapse_mode == COBA else 1.0
    net = Network(seed=cfg.seed, synapse_mode=cfg.synapse_mode, max_delay=max(cfg.delay, cfg.delay_ie, 1), name="synfire")
    net.metadata["config"] = cfg.to_dict()

    spec = GeneratorSpec(
        "pulse_packet",
        cfg.stim_rate_hz,
        start_ms=cfg.stim_start_ms,
        sigma_ms=cfg.stim_sigma_ms,
        n_packets=cfg.stim_packets,
        seed=cfg.seed,
    )
    stim = net.add_generator("stim", cfg.stim_size, spec, partition=0)
    E, I = [], []
    for p in range(cfg.partitions):
        E.append(net.add_group(f"E{p}", cfg.exc_per_group, RS, partition=p))
        I.append(net.add_group(f"I{p}", cfg.inh_per_group, FS, polarity=INHIBITORY, partition=p))

    if cfg.stim_size == cfg.exc_per_group:
        net.connect(stim, E[0], "one-to-one", weight=cfg.w_stim * scale, delay=1)
    else:
        net.connect(stim, E[0], "full", weight=cfg.w_stim * scale / cfg.stim_size, delay=1)
    net.connect(stim, I[0], "probabilistic", p=cfg.p_stim_inh, weight=cfg.w_stim_inh * scale, delay=1)
    for p in range(cfg.partitions):
        q = (p + 1) % cfg.partitions
        net.connect(E[p], E[q], "probabilistic", p=cfg.p_ee, weight=cfg.w_ee * scale, delay=cfg.delay)
        net.connect(E[p], I[q], "probabilistic", p=cfg.p_ei, weight=cfg.w_ei * scale, delay=cfg.delay)
    for p in range(cfg.partitions):
        net.connect(I[p], E[p], "probabilistic", p=cfg.p_ie, weight=cfg.w_ie * scale, delay=cfg.delay_ie)
    return net.freeze()


# -- wave analysis --------------------------------------------------------------


def group_onsets(times: np.ndarray, ids: np.ndarray, group, gap_ms: int = 5, min_spikes: int = 5) -> list[tuple[int, int, int]]:
    """Bursts of a group as ``(onset_ms, last_ms, spikes)``; a burst ends after
    ``gap_ms`` silent ms. Bursts with fewer than ``min_spikes`` are dropped."""
    sel = np.sort(times[(ids >= group.start) & (ids < group.stop)])
    out = []
    if not len(sel):
        return out
    start = prev = sel[0]
    count = 1
    for t in sel[1:]:
        if t - prev > gap_ms:
            if count >= min_spikes:
                out.append((int(start), int(prev), count))
            start, count = t, 0
        prev = t
        count += 1
    if count >= min_spikes:
        out.append((int(start), int(prev), count))
    return out


def wave_report(net: Network, times: np.ndarray, ids: np.ndarray) -> dict:
    """Per-group bursts plus coarse health flags for the circulating wave."""
    bursts = {g.name: group_onsets(times, ids, g) for g in net.neuron_groups()}
    cfg = net.metadata.get("config", {})
    n_exc = cfg.get("exc_per_group", 200)
    exploded = any(c > 1.2 * g.size for g in net.neuron_groups() for (_, _, c) in bursts[g.name])
    n_part = len([g for g in net.neuron_groups() if g.name.startswith("E")])
    first = [bursts[f"E{p}"][0][0] if bursts[f"E{p}"] else None for p in range(n_part)]
    ordered = all(x is not None for x in first) and all(a < b for a, b in zip(first, first[1:]))
    return {
        "bursts": bursts,
        "first_onsets": first,
        "ordered": ordered,
        "sustained": len(bursts["E0"]) >= 2,
        "exploded": exploded,
        "full_recruitment": all(
            all(c >= 0.9 * n_exc for (_, _, c) in bursts[f"E{p}"][:2]) for p in range(n_part)
        ),
    }


def calibrate_synfire(base: SynfireConfig | None = None, grid=None, duration_ms: int = 600, kernel_config=None) -> dict:
    """Scan ``w_ee`` over a coarse ascending grid; one pulse packet must give an
    ordered, self-sustaining, non-exploding wave that recruits whole groups.

    The pick is the median grid point of the first contiguous passing run,
    which keeps a margin from both the dying and the exploding edge.
    """
    from mtsnn.kernel import KernelConfig, run

    base = base or SynfireConfig()
    grid = list(grid if grid is not None else np.round(np.arange(0.5, 4.01, 0.25), 2))
    scan = []
    for w in grid:
        cfg = replace(base, w_ee=float(w))
        net = build_synfire(cfg)
        res = run(net, duration_ms, kernel_config or KernelConfig())
        t, i = res.raster_arrays()
        rep = wave_report(net, t, i)
        ok = rep["ordered"] and rep["sustained"] and not rep["exploded"] and rep["full_recruitment"]
        scan.append({"w_ee": float(w), "ok": bool(ok), "spikes": res.total_spikes, "first_onsets": rep["first_onsets"]})
    run_ = []
    for row in scan:
        if row["ok"]:
            run_.append(row["w_ee"])
        elif run_:
            break
    chosen = replace(base, w_ee=run_[len(run_) // 2]) if run_ else None
    return {"config": chosen.to_dict() if chosen else None, "passing": run_, "scan": scan}
