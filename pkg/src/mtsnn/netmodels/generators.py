"""Stimulus spike generators.

Generator units have no dynamics; their spike times are drawn up front from
a seeded generator and injected at ms resolution.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

KINDS = ("periodic", "pulse_packet", "poisson")


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    rate_hz: float
    start_ms: float = 0.0
    sigma_ms: float = 0.0  # pulse_packet jitter
    n_packets: int | None = None  # pulse_packet/periodic event cap; None = unbounded
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if not self.rate_hz > 0:
            raise ValueError(f"rate must be > 0, got {self.rate_hz}")
        if self.sigma_ms < 0:
            raise ValueError("sigma_ms must be >= 0")
        if self.start_ms < 0:
            raise ValueError("start_ms must be >= 0")
        if self.n_packets is not None and self.n_packets < 0:
            raise ValueError("n_packets must be >= 0")

    @property
    def period_ms(self) -> float:
        return 1000.0 / self.rate_hz

    def event_times(self, duration_ms: int) -> np.ndarray:
        """Nominal event (packet) times inside [0, duration_ms)."""
        n = int(np.ceil((duration_ms - self.start_ms) / self.period_ms)) if duration_ms > self.start_ms else 0
        if self.n_packets is not None:
            n = min(n, self.n_packets)
        times = self.start_ms + self.period_ms * np.arange(max(n, 0))
        return times[times < duration_ms]

    def schedule(self, n_units: int, duration_ms: int, salt=()) -> tuple[np.ndarray, np.ndarray]:
        """Spike (ms, unit) pairs for ``n_units`` units, sorted by (ms, unit).

        Draws are keyed by ``seed`` and ``salt``; a longer horizon extends a
        shorter one without changing it. A unit may appear more than once in
        the same ms.
        """
        rng = np.random.default_rng([self.seed, *salt])
        if self.kind == "poisson":
            p = min(self.rate_hz / 1000.0, 1.0)
            if self.n_packets is not None:
                raise ValueError("n_packets does not apply to poisson generators")
            t0 = int(np.ceil(self.start_ms))
            hits = rng.random((max(duration_ms - t0, 0), n_units)) < p
            ms, unit = np.nonzero(hits)
            ms = ms + t0
        else:
            events = self.event_times(duration_ms)
            ms = np.repeat(events, n_units)
            unit = np.tile(np.arange(n_units), len(events))
            if self.kind == "pulse_packet" and self.sigma_ms > 0:
                ms = ms + rng.normal(0.0, self.sigma_ms, size=len(ms))
            ms = np.floor(ms + 0.5)  # round half up to the ms grid
            keep = (ms >= 0) & (ms < duration_ms)
            ms, unit = ms[keep].astype(np.int64), unit[keep]
        order = np.lexsort((unit, ms))
        return ms[order].astype(np.int64), unit[order].astype(np.int64)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorSpec":
        return cls(**d)


def make_generator(kind: str, params: dict, seed: int = 0) -> GeneratorSpec:
    """``params``: ``rate_hz`` plus optional ``start_ms``, ``sigma_ms``, ``n_packets``."""
    return GeneratorSpec(kind=kind, seed=seed, **params)
