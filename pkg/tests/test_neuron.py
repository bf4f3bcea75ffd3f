import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtsnn import _kernels
from mtsnn.neuron import (
    FS,
    RS,
    IzhikevichParams,
    NeuronState,
    apply_reset,
    derivative,
    integrate,
    step_euler,
    step_rk4,
)
from oracles import fine_euler

REST = NeuronState(v=-65.0, u=-13.0)


def test_presets():
    assert (RS.a, RS.b, RS.c, RS.d) == (0.02, 0.2, -65, 8)
    assert (FS.a, FS.b, FS.c, FS.d) == (0.1, 0.2, -65, 2)


@pytest.mark.parametrize("a,d", [(0.0, 1.0), (-0.1, 1.0), (0.02, -1.0)])
def test_param_invariants(a, d):
    with pytest.raises(ValueError):
        IzhikevichParams(a=a, b=0.2, c=-65, d=d)


@pytest.mark.parametrize("i,dv,du", [(0.0, -3.0, 0.0), (3.0, 0.0, 0.0)])
def test_derivative_examples(i, dv, du):
    assert derivative(REST, RS, i) == pytest.approx((dv, du), abs=1e-12)


@given(st.floats(-90, 30))
def test_u_nullcline(v):
    assert derivative(NeuronState(v, RS.b * v), RS, 0.0)[1] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("dt,v", [(1.0, -68.0), (0.5, -66.5)])
def test_step_euler_examples(dt, v):
    s = step_euler(REST, RS, 0.0, dt)
    assert s.v == pytest.approx(v, abs=1e-12)
    assert s.u == pytest.approx(-13.0, abs=1e-12)


@pytest.mark.parametrize("step", [step_euler, step_rk4])
def test_fixed_point_unchanged(step):
    # dv = du = 0 at (-65, -13) with i = 3
    s = step(REST, RS, 3.0, 0.5)
    assert s.v == pytest.approx(-65.0, abs=1e-12)
    assert s.u == pytest.approx(-13.0, abs=1e-12)


def test_rk4_against_fine_euler_oracle():
    # oracle at dt=1e-4 sits at -67.62308; one RK4 step of 1 ms lands 1.0e-3
    # away (the local truncation error of a full-ms step), Euler 0.38 away
    ref, _ = fine_euler(RS.a, RS.b, RS.c, RS.d, 0.0, -65.0, -13.0, 1, 10000)
    v_rk4 = step_rk4(REST, RS, 0.0, 1.0).v
    v_eu = step_euler(REST, RS, 0.0, 1.0).v
    assert abs(v_rk4 - ref[0]) <= 1.5e-3
    assert abs(v_rk4 - ref[0]) <= abs(v_eu - ref[0])
    # halving the step shrinks the RK4 error by roughly 2^4 per step pair
    half = step_rk4(step_rk4(REST, RS, 0.0, 0.5), RS, 0.0, 0.5).v
    assert abs(half - ref[0]) < abs(v_rk4 - ref[0]) / 8


def test_reset_examples():
    s, fired = apply_reset(NeuronState(30.0, 0.0), RS)
    assert fired and s.v == -65.0 and s.u == 8.0 and s.fired
    s, fired = apply_reset(NeuronState(29.999, 1.5), RS)
    assert not fired and (s.v, s.u) == (29.999, 1.5)
    s, fired = apply_reset(NeuronState(45.0, -5.0), FS)
    assert fired and s.v == -65.0 and s.u == -3.0


@given(st.floats(-100, 29.99), st.floats(-30, 30))
def test_reset_idempotent_below_threshold(v, u):
    s0 = NeuronState(v, u)
    s1, f1 = apply_reset(s0, RS)
    s2, f2 = apply_reset(s1, RS)
    assert not f1 and not f2 and (s2.v, s2.u) == (v, u)


def _end_state(S, integrator):
    trace, _ = integrate(REST, RS, 10.0, 100, S, integrator)
    return trace[-1]


def test_euler_consistency_monotone():
    # subthreshold segment: first 100 ms at i=10 contains spikes, so compare
    # before the first spike, where the trajectory is smooth
    ref, spikes = fine_euler(RS.a, RS.b, RS.c, RS.d, 10.0, -65.0, -13.0, 100, 10000)
    first = int(spikes[0])
    errs = []
    for S in (1, 2, 4, 8, 16):
        tr, _ = integrate(REST, RS, 10.0, first - 1, S, "euler")
        errs.append(abs(tr[-1] - ref[first - 2]))
    assert all(b < a for a, b in zip(errs, errs[1:])), errs


def test_rk4_dominates_euler_subthreshold():
    ref, spikes = fine_euler(RS.a, RS.b, RS.c, RS.d, 10.0, -65.0, -13.0, 100, 10000)
    first = int(spikes[0])
    for S in (1, 2, 4):
        e_eu = abs(integrate(REST, RS, 10.0, first - 1, S, "euler")[0][-1] - ref[first - 2])
        e_rk = abs(integrate(REST, RS, 10.0, first - 1, S, "rk4")[0][-1] - ref[first - 2])
        assert e_rk <= e_eu


# Regression value: RS, i=10, from (-65, -13), 100 ms, S=2 Euler.
# Frozen from the independent oracle fine_euler(..., steps_per_ms=2).
RS_TONIC_SPIKES_100MS = 3


def test_tonic_spiking_regime():
    _, oracle_spikes = fine_euler(RS.a, RS.b, RS.c, RS.d, 10.0, -65.0, -13.0, 100, 2)
    assert len(oracle_spikes) == RS_TONIC_SPIKES_100MS
    _, spikes = integrate(REST, RS, 10.0, 100, 2, "euler")
    assert len(spikes) >= 1
    assert len(spikes) == RS_TONIC_SPIKES_100MS


@pytest.mark.parametrize("integrator", ["euler", "rk4"])
@pytest.mark.parametrize("params,i", [(RS, 10.0), (FS, 4.0), (RS, 0.0)])
def test_compiled_kernel_matches_scalar_path_bitwise(integrator, params, i):
    n, S, T = 1, 2, 300
    v = np.array([params.c])
    u = np.array([params.b * params.c])
    a, b, c, d = (np.array([x], dtype=float) for x in (params.a, params.b, params.c, params.d))
    i_arr = np.array([i])
    z = np.zeros(1)
    fired = np.zeros(1, dtype=np.int64)
    gen = np.zeros(1, dtype=np.int64)
    lo, hi = np.array([0]), np.array([1])
    trace_k = []
    for ms in range(T):
        for s in range(S):
            _kernels.update_chunks(lo, hi, 0, v, u, a, b, c, d, i_arr, z, z, False, 0.0, -90.0, 1.0, 1.0,
                                   1.0 / S, integrator == "rk4", 30.0, fired, gen)
        trace_k.append(v[0])
    trace_s, spikes = integrate(params.resting_state(), params, i, T, S, integrator)
    assert trace_k == trace_s
    assert fired[0] == len(spikes)


@given(st.floats(-80, 25), st.floats(-20, 20), st.floats(0, 20), st.sampled_from([0.5, 0.25, 0.1]))
@settings(max_examples=200)
def test_state_stays_finite(v, u, i, dt):
    s = NeuronState(v, u)
    for _ in range(200):
        s, _ = apply_reset(step_euler(s, RS, i, dt), RS)
        assert math.isfinite(s.v) and math.isfinite(s.u)
