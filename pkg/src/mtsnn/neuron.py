"""Izhikevich 4-parameter neuron: derivative, integrators and reset rule.

These scalar functions are the reference semantics; the vectorised kernels in
:mod:`mtsnn._kernels` implement the same arithmetic in the same order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

# v >= threshold fires (the model definition uses >=, not >).
SPIKE_THRESHOLD = 30.0


@dataclass(frozen=True)
class IzhikevichParams:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"recovery time-scale a must be > 0, got {self.a}")
        if self.d < 0:
            raise ValueError(f"recovery increment d must be >= 0, got {self.d}")

    def resting_state(self) -> "NeuronState":
        """Initial state used by the kernel: v = c, u = b*c."""
        return NeuronState(v=float(self.c), u=float(self.b * self.c))

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d}


#: Regular spiking (cortical pyramidal-like).
RS = IzhikevichParams(a=0.02, b=0.2, c=-65.0, d=8.0)
#: Fast spiking (interneuron-like).
FS = IzhikevichParams(a=0.1, b=0.2, c=-65.0, d=2.0)

PRESETS = {"RS": RS, "FS": FS}


@dataclass(frozen=True)
class NeuronState:
    v: float
    u: float
    fired: bool = False


def derivative(state: NeuronState, params: IzhikevichParams, i_syn: float) -> tuple[float, float]:
    v, u = state.v, state.u
    dv = 0.04 * v * v + 5.0 * v + 140.0 - u + i_syn
    du = params.a * (params.b * v - u)
    return dv, du


def step_euler(state: NeuronState, params: IzhikevichParams, i_syn: float, dt: float) -> NeuronState:
    """One forward-Euler step. No reset is applied."""
    dv, du = derivative(state, params, i_syn)
    return NeuronState(v=state.v + dt * dv, u=state.u + dt * du)


def step_rk4(state: NeuronState, params: IzhikevichParams, i_syn: float, dt: float) -> NeuronState:
    """Classical RK4 step with ``i_syn`` held constant over the step."""
    v, u = state.v, state.u
    h = 0.5 * dt
    k1v, k1u = derivative(state, params, i_syn)
    k2v, k2u = derivative(NeuronState(v + h * k1v, u + h * k1u), params, i_syn)
    k3v, k3u = derivative(NeuronState(v + h * k2v, u + h * k2u), params, i_syn)
    k4v, k4u = derivative(NeuronState(v + dt * k3v, u + dt * k3u), params, i_syn)
    sixth = dt / 6.0
    return NeuronState(
        v=v + sixth * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
        u=u + sixth * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
    )


def apply_reset(
    state: NeuronState, params: IzhikevichParams, threshold: float = SPIKE_THRESHOLD
) -> tuple[NeuronState, bool]:
    if state.v >= threshold:
        return NeuronState(v=float(params.c), u=state.u + params.d, fired=True), True
    return replace(state, fired=False), False


INTEGRATORS = {"euler": step_euler, "rk4": step_rk4}


def integrate(
    state: NeuronState,
    params: IzhikevichParams,
    i_syn: float,
    duration_ms: int,
    steps_per_ms: int = 2,
    integrator: str = "euler",
    threshold: float = SPIKE_THRESHOLD,
) -> tuple[list[float], list[float]]:
    """Drive one neuron with constant input; return the v trace (one sample per
    ms, taken at the end of the ms) and the spike times in ms (fractional, at the
    end of the sub-step that crossed threshold)."""
    if steps_per_ms < 1:
        raise ValueError("steps_per_ms must be >= 1")
    step = INTEGRATORS[integrator]
    dt = 1.0 / steps_per_ms
    trace, spikes = [], []
    for ms in range(duration_ms):
        for k in range(steps_per_ms):
            state = step(state, params, i_syn, dt)
            state, fired = apply_reset(state, params, threshold)
            if fired:
                spikes.append(ms + (k + 1) * dt)
        trace.append(state.v)
    return trace, spikes
