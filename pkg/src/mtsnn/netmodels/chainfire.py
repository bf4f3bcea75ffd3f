"""Chainfire: a synthetic load network of excitatory chains.

Each cluster is a grid of RS neurons, ``rows`` parallel chains by
``columns = span / d`` columns. Synchronisation neurons sit between clusters:
one consolidates the last column of a cluster (fan-in, each synapse carrying
``1/rows`` of a suprathreshold weight so only the full column fires it) and
fans out to the first column of the next cluster. A periodic generator drives
the first sync neuron; the last sync neuron is the terminal one.

Every synapse along the wave path carries delay ``d`` (base ``chain_delay``
plus ``d - chain_delay`` padding); only generator -> first sync uses the bare
``chain_delay``. With the defaults a wave takes about 510 ms from stimulus to
terminal sync and emits ``clusters * N + clusters + 1`` neuron spikes.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

from mtsnn.netmodels.generators import GeneratorSpec
from mtsnn.network import Network
from mtsnn.neuron import RS
from mtsnn.synapse import CUBA


@dataclass(frozen=True)
class ChainfireConfig:
    clusters: int = 4
    n: int = 500  # neurons per cluster
    d: int = 20  # ms between column activations
    span: int = 100  # ms, chain length per cluster
    w_exc: float = 0.432
    chain_delay: int = 5
    weight_scale: float = 100.0  # normalised weight -> drive units
    sync_weight: float = 0.432  # total over one column, normalised
    stimulus_rate_hz: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.clusters < 1:
            raise ValueError("clusters must be >= 1")
        if self.d < 1 or self.span < 1:
            raise ValueError("d and span must be >= 1 ms")
        if self.span % self.d:
            raise ValueError(f"span {self.span} is not a multiple of d {self.d}")
        if self.n % self.columns:
            raise ValueError(f"N={self.n} is not divisible by columns={self.columns}")
        if not 1 <= self.chain_delay <= self.d:
            raise ValueError("need 1 <= chain_delay <= d")
        if self.w_exc < 0 or self.sync_weight < 0 or self.weight_scale <= 0:
            raise ValueError("weights must be >= 0 and weight_scale > 0")

    @property
    def columns(self) -> int:
        return self.span // self.d

    @property
    def rows(self) -> int:
        return self.n // self.columns

    @property
    def padding(self) -> int:
        return self.d - self.chain_delay

    def spikes_per_wave(self) -> int:
        """Neuron spikes of one undisturbed wave, generator excluded."""
        return self.clusters * self.n + self.clusters + 1

    def to_dict(self) -> dict:
        return asdict(self)


def build_chainfire(config: ChainfireConfig | None = None) -> Network:
    cfg = config or ChainfireConfig()
    rows, cols = cfg.rows, cfg.columns
    w_chain = cfg.w_exc * cfg.weight_scale
    w_sync_in = cfg.sync_weight * cfg.weight_scale / rows
    net = Network(seed=cfg.seed, synapse_mode=CUBA, max_delay=cfg.d, name="chainfire")
    net.metadata["config"] = cfg.to_dict()

    stim = net.add_generator("stim", 1, GeneratorSpec("periodic", cfg.stimulus_rate_hz, seed=cfg.seed), partition=0)
    syncs, grids = [], []
    for k in range(cfg.clusters):
        syncs.append(net.add_group(f"sync{k}", 1, RS, partition=k))
        # column-major: neuron (col, row) -> col * rows + row
        grids.append(net.add_group(f"cluster{k}", cfg.n, RS, partition=k))
    terminal = net.add_group(f"sync{cfg.clusters}", 1, RS, partition=cfg.clusters - 1)
    syncs.append(terminal)
    net.metadata["terminal"] = terminal.name

    net.connect(stim, syncs[0], "one-to-one", weight=w_chain, delay=cfg.chain_delay)
    for k, grid in enumerate(grids):
        net.connect(syncs[k], grid, "explicit", weight=w_chain, delay=cfg.d, pairs=[(0, r) for r in range(rows)])
        chain = [(c * rows + r, (c + 1) * rows + r) for c in range(cols - 1) for r in range(rows)]
        net.connect(grid, grid, "explicit", weight=w_chain, delay=cfg.d, pairs=chain)
        last = [((cols - 1) * rows + r, 0) for r in range(rows)]
        net.connect(grid, syncs[k + 1], "explicit", weight=w_sync_in, delay=cfg.d, pairs=last)
    return net.freeze()
