"""Network container: groups, partitions and the synapse builder."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from mtsnn.neuron import IzhikevichParams
from mtsnn.synapse import CUBA, SYNAPSE_MODES, ConnectionTable, pair_uniform

EXCITATORY = "exc"
INHIBITORY = "inh"


class NetworkError(ValueError):
    pass


@dataclass
class Group:
    id: int
    name: str
    size: int
    start: int
    partition: int
    polarity: str = EXCITATORY
    params: IzhikevichParams | None = None
    generator: Any = None  # GeneratorSpec for stimulus groups

    @property
    def stop(self) -> int:
        return self.start + self.size

    @property
    def is_generator(self) -> bool:
        return self.generator is not None

    def ids(self) -> np.ndarray:
        return np.arange(self.start, self.stop)


@dataclass
class Partition:
    id: int
    groups: list[int] = field(default_factory=list)
    start: int = 0
    stop: int = 0


class Network:
    """Mutable while building; :meth:`freeze` builds the connection table.

    Groups must be added in non-decreasing partition order so that every
    partition owns a contiguous neuron id range.
    """

    def __init__(self, seed: int = 0, synapse_mode: str = CUBA, max_delay: int = 20, name: str = "network"):
        if synapse_mode not in SYNAPSE_MODES:
            raise NetworkError(f"unknown synapse mode {synapse_mode!r}")
        if max_delay < 1:
            raise NetworkError("max_delay must be >= 1")
        self.name = name
        self.seed = int(seed)
        self.synapse_mode = synapse_mode
        self.max_delay = int(max_delay)
        self.groups: list[Group] = []
        self._by_name: dict[str, Group] = {}
        self._pre: list[np.ndarray] = []
        self._post: list[np.ndarray] = []
        self._weight: list[np.ndarray] = []
        self._delay: list[np.ndarray] = []
        self._n_connect = 0
        self.table: ConnectionTable | None = None
        self.metadata: dict[str, Any] = {}

    # -- building -----------------------------------------------------------

    @property
    def frozen(self) -> bool:
        return self.table is not None

    def _check_mutable(self):
        if self.frozen:
            raise NetworkError("network is frozen")

    @property
    def n_neurons(self) -> int:
        """Total ids, generator units included."""
        return self.groups[-1].stop if self.groups else 0

    @property
    def n_model_neurons(self) -> int:
        return sum(g.size for g in self.groups if not g.is_generator)

    @property
    def n_generator_units(self) -> int:
        return sum(g.size for g in self.groups if g.is_generator)

    def _add(self, name, size, partition, polarity, params, generator) -> Group:
        self._check_mutable()
        if name in self._by_name:
            raise NetworkError(f"duplicate group name {name!r}")
        if size < 1:
            raise NetworkError(f"group {name!r} needs size >= 1")
        if polarity not in (EXCITATORY, INHIBITORY):
            raise NetworkError(f"bad polarity {polarity!r}")
        if partition < 0 or (self.groups and partition < self.groups[-1].partition):
            raise NetworkError("groups must be added in non-decreasing partition order")
        g = Group(len(self.groups), name, int(size), self.n_neurons, int(partition), polarity, params, generator)
        self.groups.append(g)
        self._by_name[name] = g
        return g

    def add_group(
        self, name: str, size: int, params: IzhikevichParams, polarity: str = EXCITATORY, partition: int = 0
    ) -> Group:
        return self._add(name, size, partition, polarity, params, None)

    def add_generator(self, name: str, size: int, spec, partition: int = 0) -> Group:
        """Stimulus units without dynamics; always excitatory."""
        return self._add(name, size, partition, EXCITATORY, None, spec)

    def group(self, key) -> Group:
        if isinstance(key, Group):
            key = key.name
        try:
            return self.groups[key] if isinstance(key, int) else self._by_name[key]
        except (KeyError, IndexError):
            raise NetworkError(f"unknown group {key!r}") from None

    def connect(
        self,
        pre,
        post,
        pattern: str = "full",
        weight: float = 1.0,
        delay: int = 1,
        p: float | None = None,
        pairs: Sequence[tuple[int, int]] | None = None,
    ) -> int:
        """Add synapses between two groups; returns how many were created.

        ``pattern`` is one of ``full``, ``one-to-one``, ``probabilistic`` (needs
        ``p``) or ``explicit`` (``pairs`` of group-local indices). Weights are in
        drive units with the CUBA sign convention: excitatory sources >= 0,
        inhibitory sources <= 0. Delays are whole ms in [1, max_delay].
        """
        self._check_mutable()
        gpre, gpost = self.group(pre), self.group(post)
        if gpost.is_generator:
            raise NetworkError(f"generator group {gpost.name!r} cannot receive synapses")
        if isinstance(delay, float) and not float(delay).is_integer():
            raise NetworkError(f"delay must be whole ms, got {delay}")
        delay = int(delay)
        if not 1 <= delay <= self.max_delay:
            raise NetworkError(f"delay {delay} outside [1, {self.max_delay}]")
        if gpre.polarity == EXCITATORY and weight < 0:
            raise NetworkError(f"excitatory group {gpre.name!r} needs weight >= 0")
        if gpre.polarity == INHIBITORY and weight > 0:
            raise NetworkError(f"inhibitory group {gpre.name!r} needs weight <= 0")

        salt = self._n_connect
        self._n_connect += 1
        if pattern == "full":
            li, lj = np.meshgrid(np.arange(gpre.size), np.arange(gpost.size), indexing="ij")
            li, lj = li.ravel(), lj.ravel()
        elif pattern == "one-to-one":
            if gpre.size != gpost.size:
                raise NetworkError("one-to-one needs equal group sizes")
            li = lj = np.arange(gpre.size)
        elif pattern == "probabilistic":
            if p is None or not 0.0 <= p <= 1.0:
                raise NetworkError(f"probabilistic pattern needs 0 <= p <= 1, got {p}")
            li, lj = np.meshgrid(np.arange(gpre.size), np.arange(gpost.size), indexing="ij")
            li, lj = li.ravel(), lj.ravel()
            keep = pair_uniform(self.seed, salt, li + gpre.start, lj + gpost.start) < p
            li, lj = li[keep], lj[keep]
        elif pattern == "explicit":
            arr = np.asarray(pairs if pairs is not None else [], dtype=np.int64).reshape(-1, 2)
            li, lj = arr[:, 0], arr[:, 1]
            if len(li) and (li.min() < 0 or li.max() >= gpre.size or lj.min() < 0 or lj.max() >= gpost.size):
                raise NetworkError("explicit pair index out of group range")
        else:
            raise NetworkError(f"unknown pattern {pattern!r}")

        n = len(li)
        self._pre.append(li.astype(np.int64) + gpre.start)
        self._post.append(lj.astype(np.int64) + gpost.start)
        self._weight.append(np.full(n, float(weight)))
        self._delay.append(np.full(n, delay, dtype=np.int64))
        return n

    def add_synapses(self, pre, post, weight, delay) -> int:
        """Raw global-id synapse arrays (used by JSON import)."""
        self._check_mutable()
        pre = np.asarray(pre, dtype=np.int64)
        post = np.asarray(post, dtype=np.int64)
        weight = np.asarray(weight, dtype=np.float64)
        delay = np.asarray(delay, dtype=np.int64)
        if len(delay) and (delay.min() < 1 or delay.max() > self.max_delay):
            raise NetworkError("delay out of range")
        self._pre.append(pre)
        self._post.append(post)
        self._weight.append(weight)
        self._delay.append(delay)
        return len(pre)

    def synapse_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """All synapses in insertion order."""
        if not self._pre:
            e = np.zeros(0, dtype=np.int64)
            return e, e.copy(), np.zeros(0), e.copy()
        return (
            np.concatenate(self._pre),
            np.concatenate(self._post),
            np.concatenate(self._weight),
            np.concatenate(self._delay),
        )

    @property
    def n_synapses(self) -> int:
        return int(sum(len(x) for x in self._pre))

    def freeze(self) -> "Network":
        if self.frozen:
            return self
        inh = np.zeros(self.n_neurons, dtype=bool)
        for g in self.groups:
            if g.polarity == INHIBITORY:
                inh[g.start : g.stop] = True
        pre, post, w, d = self.synapse_arrays()
        self.table = ConnectionTable(self.n_neurons, pre, post, w, d, inhibitory_pre=inh)
        return self

    # -- views used by the kernel ------------------------------------------

    def partitions(self) -> list[Partition]:
        parts: dict[int, Partition] = {}
        for g in self.groups:
            p = parts.get(g.partition)
            if p is None:
                p = parts[g.partition] = Partition(g.partition, [], g.start, g.stop)
            p.groups.append(g.id)
            p.stop = g.stop
        return [parts[k] for k in sorted(parts)]

    def neuron_groups(self) -> list[Group]:
        return [g for g in self.groups if not g.is_generator]

    def generator_groups(self) -> list[Group]:
        return [g for g in self.groups if g.is_generator]

    def param_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        n = self.n_neurons
        a, b, c, d = (np.zeros(n) for _ in range(4))
        for g in self.neuron_groups():
            sl = slice(g.start, g.stop)
            a[sl], b[sl], c[sl], d[sl] = g.params.a, g.params.b, g.params.c, g.params.d
        return a, b, c, d

    def group_of(self, neuron: int) -> Group:
        for g in self.groups:
            if g.start <= neuron < g.stop:
                return g
        raise NetworkError(f"neuron id {neuron} out of range")

    def group_bounds(self) -> list[dict]:
        return [
            {
                "group": g.name,
                "partition": g.partition,
                "start": g.start,
                "stop": g.stop,
                "polarity": g.polarity,
                "generator": g.is_generator,
            }
            for g in self.groups
        ]

    def summary(self) -> dict:
        return {
            "name": self.name,
            "model_neurons": self.n_model_neurons,
            "generator_units": self.n_generator_units,
            "total_units": self.n_neurons,
            "synapses": self.n_synapses,
            "partitions": len(self.partitions()),
            "synapse_mode": self.synapse_mode,
        }
