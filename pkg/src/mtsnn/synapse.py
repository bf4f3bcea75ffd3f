"""Synapse storage, delayed spike delivery and CUBA/COBA fan-in."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

CUBA = "cuba"
COBA = "coba"
SYNAPSE_MODES = (CUBA, COBA)


class Synapse(NamedTuple):
    pre: int
    post: int
    weight: float
    delay: int


@dataclass(frozen=True)
class CobaParams:
    e_exc: float = 0.0
    e_inh: float = -90.0
    tau_exc: float = 5.0
    tau_inh: float = 6.0

    def __post_init__(self):
        if self.tau_exc <= 0 or self.tau_inh <= 0:
            raise ValueError("COBA decay constants must be > 0")


_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def _splitmix64(x: np.ndarray) -> np.ndarray:
    x = x + np.uint64(0x9E3779B97F4A7C15)
    z = x
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def pair_uniform(seed: int, salt: int, pre: np.ndarray, post: np.ndarray) -> np.ndarray:
    """Uniform [0, 1) draws keyed by (seed, salt, pre, post).

    Counter-based: the value for a pair does not depend on which other pairs
    are drawn or in what order.
    """
    with np.errstate(over="ignore"):
        key = _splitmix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) ^ _splitmix64(np.uint64(salt)))
        x = _splitmix64(key ^ _splitmix64(pre.astype(np.uint64)))
        x = _splitmix64(x ^ post.astype(np.uint64))
    return (x >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


class ConnectionTable:
    """Frozen synapse store.

    Fan-in lists are contiguous per postsynaptic neuron and sorted by
    (pre, delay); this order is fixed at build time. A fan-out index sorted
    by (pre, post, delay) drives spike delivery.
    """

    def __init__(self, n_neurons: int, pre, post, weight, delay, inhibitory_pre=None):
        pre = np.asarray(pre, dtype=np.int64)
        post = np.asarray(post, dtype=np.int64)
        weight = np.asarray(weight, dtype=np.float64)
        delay = np.asarray(delay, dtype=np.int64)
        if not (len(pre) == len(post) == len(weight) == len(delay)):
            raise ValueError("synapse arrays differ in length")
        if len(pre) and (pre.min() < 0 or post.min() < 0 or max(pre.max(), post.max()) >= n_neurons):
            raise ValueError("synapse endpoint out of range")
        if len(delay) and delay.min() < 1:
            raise ValueError("delays must be >= 1 ms")
        self.n_neurons = n_neurons
        self.max_delay = int(delay.max()) if len(delay) else 1
        if inhibitory_pre is None:
            inhibitory_pre = np.zeros(n_neurons, dtype=bool)
        self.inhibitory_pre = np.asarray(inhibitory_pre, dtype=bool)

        order_in = np.lexsort((delay, pre, post))
        self.in_pre = pre[order_in]
        self.in_post = post[order_in]
        self.in_weight = weight[order_in]
        self.in_delay = delay[order_in]
        self.in_ptr = np.zeros(n_neurons + 1, dtype=np.int64)
        np.cumsum(np.bincount(post, minlength=n_neurons), out=self.in_ptr[1:])

        order_out = np.lexsort((delay, post, pre))
        self.out_post = post[order_out]
        self.out_weight = weight[order_out]
        self.out_delay = delay[order_out]
        self.out_inh = self.inhibitory_pre[pre[order_out]]
        self.out_ptr = np.zeros(n_neurons + 1, dtype=np.int64)
        np.cumsum(np.bincount(pre, minlength=n_neurons), out=self.out_ptr[1:])

    def __len__(self):
        return len(self.in_pre)

    def fan_in(self, neuron: int) -> list[Synapse]:
        lo, hi = self.in_ptr[neuron], self.in_ptr[neuron + 1]
        return [
            Synapse(int(self.in_pre[k]), neuron, float(self.in_weight[k]), int(self.in_delay[k]))
            for k in range(lo, hi)
        ]

    def fan_in_lengths(self) -> np.ndarray:
        return np.diff(self.in_ptr)

    def fan_out(self, neuron: int) -> list[Synapse]:
        lo, hi = self.out_ptr[neuron], self.out_ptr[neuron + 1]
        return [
            Synapse(neuron, int(self.out_post[k]), float(self.out_weight[k]), int(self.out_delay[k]))
            for k in range(lo, hi)
        ]


class DelayedSpikeBuffer:
    """Ring of ``max_delay + 1`` one-ms slots of pending drive per neuron.

    Slot ``t % size`` holds what is delivered at model ms ``t``. Excitatory
    and inhibitory channels are kept apart so the same buffer serves COBA;
    CUBA reads their sum (inhibitory weights are already negative).
    """

    def __init__(self, n_neurons: int, max_delay: int, dtype=np.float64):
        if max_delay < 1:
            raise ValueError("max_delay must be >= 1")
        self.max_delay = max_delay
        self.size = max_delay + 1
        self.exc = np.zeros((self.size, n_neurons), dtype=dtype)
        self.inh = np.zeros((self.size, n_neurons), dtype=dtype)

    def slot(self, t: int) -> int:
        return t % self.size

    def enqueue(self, fan_out, t: int, inhibitory: bool = False) -> None:
        """Schedule ``(post, weight, delay)`` triples of a spike at ms ``t``."""
        target = self.inh if inhibitory else self.exc
        for post, w, d in fan_out:
            if not 1 <= d <= self.max_delay:
                raise ValueError(f"delay {d} outside [1, {self.max_delay}]")
            target[(t + d) % self.size, post] += w

    def delivered(self, t: int) -> tuple[np.ndarray, np.ndarray]:
        s = self.slot(t)
        return self.exc[s], self.inh[s]

    def clear(self, t: int) -> None:
        s = self.slot(t)
        self.exc[s] = 0.0
        self.inh[s] = 0.0


def enqueue_spike(buffer: DelayedSpikeBuffer, fan_out, t: int, inhibitory: bool = False) -> None:
    buffer.enqueue(fan_out, t, inhibitory)


class SynapticDrive:
    """Per-neuron synaptic input state for one integration run.

    Per ms: :meth:`begin_ms` consumes the slot; per sub-step:
    :meth:`fan_in_current` then :meth:`decay_conductances`. The buffer slot is
    cleared by :meth:`end_ms`.
    """

    def __init__(self, buffer: DelayedSpikeBuffer, mode: str = CUBA, coba: CobaParams | None = None):
        if mode not in SYNAPSE_MODES:
            raise ValueError(f"unknown synapse mode {mode!r}")
        self.buffer = buffer
        self.mode = mode
        self.coba = coba or CobaParams()
        n = buffer.exc.shape[1]
        self.current = np.zeros(n)
        self.g_exc = np.zeros(n)
        self.g_inh = np.zeros(n)

    def begin_ms(self, t: int) -> None:
        exc, inh = self.buffer.delivered(t)
        if self.mode == CUBA:
            self.current[:] = exc + inh
        else:
            # COBA arrivals are conductance magnitudes, whatever the stored sign.
            self.g_exc += np.abs(exc)
            self.g_inh += np.abs(inh)

    def end_ms(self, t: int) -> None:
        self.buffer.clear(t)

    def fan_in_current(self, neuron: int, v: float) -> float:
        if self.mode == CUBA:
            return float(self.current[neuron])
        c = self.coba
        return float(self.g_exc[neuron] * (c.e_exc - v) + self.g_inh[neuron] * (c.e_inh - v))

    def decay_conductances(self, dt: float) -> None:
        if self.mode != COBA:
            return
        self.g_exc *= math.exp(-dt / self.coba.tau_exc)
        self.g_inh *= math.exp(-dt / self.coba.tau_inh)


def coba_current(g_exc: float, g_inh: float, v: float, coba: CobaParams = CobaParams()) -> float:
    return g_exc * (coba.e_exc - v) + g_inh * (coba.e_inh - v)


def fan_in_current(drive: SynapticDrive, neuron: int, v: float) -> float:
    return drive.fan_in_current(neuron, v)


def decay_conductances(drive: SynapticDrive, dt: float) -> None:
    drive.decay_conductances(dt)
