import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtsnn.network import INHIBITORY, Network, NetworkError
from mtsnn.neuron import FS, RS
from mtsnn.synapse import (
    COBA,
    CUBA,
    CobaParams,
    ConnectionTable,
    DelayedSpikeBuffer,
    SynapticDrive,
    decay_conductances,
    enqueue_spike,
    fan_in_current,
    pair_uniform,
)
from oracles import coba_current, event_list_delivery


def two_groups(n_pre=100, n_post=100, **kw):
    net = Network(**kw)
    net.add_group("A", n_pre, RS)
    net.add_group("B", n_post, RS)
    return net


def test_connect_cardinalities():
    net = two_groups()
    assert net.connect("A", "B", "one-to-one", weight=1.0) == 100
    net2 = Network()
    net2.add_group("E", 200, RS)
    net2.add_group("I", 50, FS, polarity=INHIBITORY)
    assert net2.connect("E", "I", "full", weight=0.5) == 10000
    assert net2.connect("E", "I", "probabilistic", p=0.0, weight=0.5) == 0
    assert net2.connect("I", "E", "probabilistic", p=1.0, weight=-0.5) == 10000


def test_connect_errors():
    net = two_groups()
    with pytest.raises(NetworkError):
        net.connect("A", "nope")
    with pytest.raises(NetworkError):
        net.connect("A", "B", delay=0)
    with pytest.raises(NetworkError):
        net.connect("A", "B", delay=net.max_delay + 1)
    with pytest.raises(NetworkError):
        net.connect("A", "B", delay=1.5)
    with pytest.raises(NetworkError):
        net.connect("A", "B", weight=-1.0)
    net.add_group("I", 10, FS, polarity=INHIBITORY)
    with pytest.raises(NetworkError):
        net.connect("I", "A", weight=1.0)
    with pytest.raises(NetworkError):
        net.connect("A", "B", "probabilistic")
    net.freeze()
    with pytest.raises(NetworkError):
        net.connect("A", "B")


def test_probabilistic_is_deterministic_and_order_free():
    def build():
        net = two_groups(seed=7)
        net.connect("A", "B", "probabilistic", p=0.3)
        return net.synapse_arrays()

    a, b = build(), build()
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)
    # counter-based: a pair's draw is independent of which pairs are queried with it
    pre = np.arange(50)
    post = np.arange(50)[::-1]
    full = pair_uniform(7, 0, pre, post)
    part = pair_uniform(7, 0, pre[10:20], post[10:20])
    np.testing.assert_array_equal(full[10:20], part)
    assert 0.0 <= full.min() and full.max() < 1.0


def test_probabilistic_rate():
    net = two_groups(200, 200, seed=3)
    n = net.connect("A", "B", "probabilistic", p=0.25)
    # binomial 40000 * 0.25, sigma ~ 86.6
    assert abs(n - 10000) < 4 * math.sqrt(40000 * 0.25 * 0.75)


def test_connection_table_order_and_counts():
    pre = [3, 1, 1, 2, 0]
    post = [0, 0, 0, 1, 1]
    w = [0.1, 0.2, 0.3, 0.4, 0.5]
    d = [1, 4, 2, 1, 3]
    tab = ConnectionTable(4, pre, post, w, d)
    assert len(tab) == tab.fan_in_lengths().sum() == 5
    fan0 = tab.fan_in(0)
    assert [(s.pre, s.delay) for s in fan0] == [(1, 2), (1, 4), (3, 1)]
    assert [s.post for s in tab.fan_out(1)] == [0, 0]
    with pytest.raises(ValueError):
        ConnectionTable(2, [0], [1], [1.0], [0])


def test_buffer_delivers_exactly_at_delay():
    buf = DelayedSpikeBuffer(3, max_delay=10)
    enqueue_spike(buf, [(1, 0.432, 5)], t=0)
    seen = []
    for t in range(8):
        exc, inh = buf.delivered(t)
        seen.append(exc[1] + inh[1])
        buf.clear(t)
    assert seen == [0, 0, 0, 0, 0, 0.432, 0, 0]


def test_buffer_empty_and_additive():
    buf = DelayedSpikeBuffer(2, max_delay=3)
    assert all(buf.delivered(t)[0].sum() == 0 for t in range(4))
    buf.enqueue([(0, 0.2, 2)], 0)
    buf.enqueue([(0, 0.3, 2)], 0)
    assert buf.delivered(2)[0][0] == 0.5
    with pytest.raises(ValueError):
        buf.enqueue([(0, 1.0, 4)], 0)


@given(
    st.lists(
        st.tuples(st.integers(0, 40), st.integers(0, 4), st.floats(0.01, 5.0), st.integers(1, 7)),
        max_size=60,
    )
)
@settings(max_examples=100, deadline=None)
def test_delay_exactness_property(events):
    """Every enqueued spike is seen exactly once, exactly ``delay`` ms later."""
    horizon = 50
    buf = DelayedSpikeBuffer(5, max_delay=7)
    by_t = {}
    for t, post, w, d in events:
        by_t.setdefault(t, []).append((post, w, d))
    expected = event_list_delivery(events, horizon)
    for t in range(horizon):
        for post, w, d in by_t.get(t, []):
            buf.enqueue([(post, w, d)], t)
        exc, _ = buf.delivered(t)
        for post in range(5):
            want = sum(expected.get((t, post), []))
            assert exc[post] == pytest.approx(want, abs=1e-12)
        buf.clear(t)


def _cuba(values, t=3):
    buf = DelayedSpikeBuffer(4, 5)
    for post, w in values:
        buf.enqueue([(post, w, t)], 0)
    drive = SynapticDrive(buf, CUBA)
    drive.begin_ms(t)
    return np.array([fan_in_current(drive, j, -65.0) for j in range(4)])


@given(
    st.lists(st.tuples(st.integers(0, 3), st.floats(-5, 5)), max_size=10),
    st.lists(st.tuples(st.integers(0, 3), st.floats(-5, 5)), max_size=10),
)
def test_cuba_linearity(x, y):
    np.testing.assert_allclose(_cuba(x + y), _cuba(x) + _cuba(y), atol=1e-9)


def test_cuba_direct_sum_constant_within_ms():
    buf = DelayedSpikeBuffer(1, 5)
    buf.enqueue([(0, 0.432, 2)], 0)
    drive = SynapticDrive(buf, CUBA)
    drive.begin_ms(2)
    assert fan_in_current(drive, 0, -65) == 0.432
    decay_conductances(drive, 0.5)
    assert fan_in_current(drive, 0, 10.0) == 0.432


def test_coba_current_examples():
    buf = DelayedSpikeBuffer(1, 2)
    drive = SynapticDrive(buf, COBA)
    drive.g_exc[0] = 0.1
    assert fan_in_current(drive, 0, -65.0) == pytest.approx(6.5)
    assert fan_in_current(drive, 0, 0.0) == 0.0
    assert coba_current(0.1, 0.0, -65.0) == pytest.approx(6.5)


def test_coba_arrivals_route_by_channel():
    buf = DelayedSpikeBuffer(1, 3)
    buf.enqueue([(0, 0.2, 1)], 0)
    buf.enqueue([(0, -0.3, 1)], 0, inhibitory=True)
    drive = SynapticDrive(buf, COBA)
    drive.begin_ms(1)
    assert drive.g_exc[0] == pytest.approx(0.2)
    assert drive.g_inh[0] == pytest.approx(0.3)


@given(st.floats(0, 1), st.floats(0, 1), st.floats(-90, 0))
def test_coba_sign(g_e, g_i, v):
    c = CobaParams()
    assert g_e * (c.e_exc - v) >= 0
    assert g_i * (c.e_inh - v) <= 0


@pytest.mark.parametrize(
    "g,dt,expected", [(1.0, 5.0, math.exp(-1.0)), (0.0, 5.0, 0.0), (0.7, 0.0, 0.7)]
)
def test_decay_conductances(g, dt, expected):
    drive = SynapticDrive(DelayedSpikeBuffer(1, 1), COBA, CobaParams(tau_exc=5.0))
    drive.g_exc[0] = g
    decay_conductances(drive, dt)
    assert drive.g_exc[0] == pytest.approx(expected, rel=1e-12)


@given(st.floats(0.01, 10), st.integers(1, 50))
def test_conductance_decays_toward_zero(g, steps):
    drive = SynapticDrive(DelayedSpikeBuffer(1, 1), COBA)
    drive.g_exc[0] = drive.g_inh[0] = g
    for _ in range(steps):
        decay_conductances(drive, 0.5)
    assert 0 <= drive.g_exc[0] < g and 0 <= drive.g_inh[0] < g
