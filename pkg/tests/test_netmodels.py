import json

import numpy as np
import pytest

from mtsnn.kernel import KernelConfig, run
from mtsnn.netmodels import (
    ChainfireConfig,
    GeneratorSpec,
    SynfireConfig,
    build_chainfire,
    build_synfire,
    load_network,
    make_generator,
    network_from_dict,
    network_to_dict,
    save_network,
)
from mtsnn.netmodels.synfire import default_synfire_config, wave_report
from mtsnn.neuron import FS, RS


# -- chainfire ----------------------------------------------------------------


def test_chainfire_small_grid_shape():
    cfg = ChainfireConfig(n=100, d=20, span=100)
    assert cfg.columns == 5 and cfg.rows == 20
    net = build_chainfire(cfg)
    clusters = [g for g in net.neuron_groups() if g.name.startswith("cluster")]
    assert [g.size for g in clusters] == [100] * 4


def test_chainfire_benchmark_scale():
    net = build_chainfire(ChainfireConfig(n=500))
    grid = sum(g.size for g in net.neuron_groups() if g.name.startswith("cluster"))
    syncs = [g for g in net.neuron_groups() if g.name.startswith("sync")]
    assert grid == 2000 and len(syncs) == 5
    assert all(g.params == RS for g in net.neuron_groups())
    assert net.metadata["terminal"] == "sync4"


@pytest.mark.parametrize("kw", [{"span": 90}, {"n": 101}, {"chain_delay": 0}, {"chain_delay": 21}, {"clusters": 0}])
def test_chainfire_config_errors(kw):
    with pytest.raises(ValueError):
        ChainfireConfig(**kw)


def test_chainfire_sync_fan_in_needs_whole_column():
    cfg = ChainfireConfig(n=100)
    net = build_chainfire(cfg)
    sync1 = net.group("sync1").start
    pre, post, w, d = net.synapse_arrays()
    sel = post == sync1
    assert sel.sum() == cfg.rows
    assert np.ptp(w[sel]) == 0
    assert w[sel].sum() == pytest.approx(cfg.sync_weight * cfg.weight_scale)


def test_chainfire_each_neuron_fires_once_per_wave(chainfire_small):
    res = run(chainfire_small, 2000)
    t, i = res.raster_arrays()
    for period in range(2):
        sel = (t >= 1000 * period) & (t < 1000 * (period + 1))
        counts = np.bincount(i[sel], minlength=chainfire_small.n_neurons)
        assert set(counts.tolist()) == {1}


def test_chainfire_wave_timing_small(chainfire_small):
    res = run(chainfire_small, 2000)
    t, i = res.raster_arrays()
    term = chainfire_small.group("sync4").start
    stim = chainfire_small.group("stim").start
    lags = t[i == term] - t[i == stim]
    assert np.all(np.abs(lags - 500) <= 20)


# -- generators ---------------------------------------------------------------


def test_periodic_one_hz_ten_seconds():
    g = make_generator("periodic", {"rate_hz": 1.0})
    ms, unit = g.schedule(1, 10_000)
    assert len(ms) == 10 and ms.tolist() == list(range(0, 10_000, 1000))


def test_pulse_packet_zero_jitter():
    g = GeneratorSpec("pulse_packet", 1.0, start_ms=37.0, sigma_ms=0.0, n_packets=1)
    ms, unit = g.schedule(50, 1000)
    assert set(ms.tolist()) == {37} and sorted(unit.tolist()) == list(range(50))


def test_pulse_packet_jitter_seeded():
    g = GeneratorSpec("pulse_packet", 1.0, start_ms=100.0, sigma_ms=2.0, n_packets=1, seed=3)
    a = g.schedule(500, 1000)
    b = g.schedule(500, 1000)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    assert abs(a[0].mean() - 100) < 0.5 and 1.5 < a[0].std() < 2.5


def test_poisson_rate_within_three_sigma():
    rate, n, dur = 20.0, 50, 20_000
    ms, _ = make_generator("poisson", {"rate_hz": rate}, seed=11).schedule(n, dur)
    p = rate / 1000
    trials = n * dur
    sigma = np.sqrt(trials * p * (1 - p))
    assert abs(len(ms) - trials * p) <= 3 * sigma


def test_longer_horizon_extends_shorter():
    g = make_generator("poisson", {"rate_hz": 30.0}, seed=2)
    short = g.schedule(10, 500)
    long = g.schedule(10, 1500)
    k = len(short[0])
    assert np.array_equal(long[0][:k], short[0]) and np.array_equal(long[1][:k], short[1])


@pytest.mark.parametrize("kw", [{"kind": "gamma", "rate_hz": 1.0}, {"kind": "periodic", "rate_hz": 0.0},
                                {"kind": "pulse_packet", "rate_hz": 1.0, "sigma_ms": -1.0}])
def test_generator_errors(kw):
    with pytest.raises(ValueError):
        GeneratorSpec(**kw)


# -- synfire ------------------------------------------------------------------


def test_synfire_default_structure():
    net = build_synfire()
    assert net.n_model_neurons == 1000 and net.n_generator_units == 200
    assert net.n_neurons == 1200
    for p in range(4):
        e, i = net.group(f"E{p}"), net.group(f"I{p}")
        assert (e.size, e.params, e.partition) == (200, RS, p)
        assert (i.size, i.params, i.partition, i.polarity) == (50, FS, p, "inh")
    assert 60_000 < net.n_synapses < 90_000


def test_synfire_projections_follow_ring():
    net = build_synfire()
    pre, post, w, d = net.synapse_arrays()
    gpre = np.array([net.group_of(int(x)).name for x in pre])
    gpost = np.array([net.group_of(int(x)).name for x in post])
    pairs = set(zip(gpre.tolist(), gpost.tolist()))
    expected = {("stim", "E0"), ("stim", "I0")}
    for p in range(4):
        q = (p + 1) % 4
        expected |= {(f"E{p}", f"E{q}"), (f"E{p}", f"I{q}"), (f"I{p}", f"E{p}")}
    assert pairs == expected
    assert np.all(w[np.char.startswith(gpre, "I")] < 0)


def test_synfire_seeded_rebuild_identical():
    a = build_synfire(default_synfire_config(seed=5)).synapse_arrays()
    b = build_synfire(default_synfire_config(seed=5)).synapse_arrays()
    c = build_synfire(default_synfire_config(seed=6)).synapse_arrays()
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not np.array_equal(a[0], c[0]) or not np.array_equal(a[1], c[1])


def test_synfire_minimal_ring_returns_to_partition_zero():
    cfg = SynfireConfig(partitions=2, exc_per_group=1, inh_per_group=1, stim_size=1, p_ee=1, p_ei=1, p_ie=1,
                        w_ee=45, w_ei=1, w_ie=-1, stim_sigma_ms=0, p_stim_inh=0)
    net = build_synfire(cfg)
    e0, e1 = net.group("E0").start, net.group("E1").start
    t, i = run(net, 100).raster_arrays()
    t0, t1 = t[i == e0], t[i == e1]
    assert len(t0) >= 2 and t1[0] > t0[0] and t0[1] > t1[0]


@pytest.mark.parametrize("kw", [{"partitions": 1}, {"exc_per_group": 0}, {"p_ee": 1.5}, {"w_ie": 1.0},
                                {"synapse_mode": "hh"}])
def test_synfire_config_errors(kw):
    with pytest.raises(ValueError):
        SynfireConfig(**kw)


@pytest.mark.parametrize("mode", ["cuba", "coba"])
def test_synfire_wave_healthy(mode):
    net = build_synfire(default_synfire_config(synapse_mode=mode))
    t, i = run(net, 300).raster_arrays()
    rep = wave_report(net, t, i)
    assert rep["ordered"] and rep["sustained"] and not rep["exploded"]


# -- JSON I/O -----------------------------------------------------------------


@pytest.mark.parametrize("builder", ["chainfire", "synfire"])
def test_network_json_round_trip(tmp_path, builder):
    net = build_chainfire(ChainfireConfig(n=100)) if builder == "chainfire" else build_synfire()
    path = tmp_path / "net.json"
    save_network(net, path)
    back = load_network(path)
    assert all(np.array_equal(x, y) for x, y in zip(net.synapse_arrays(), back.synapse_arrays()))
    assert [(g.name, g.size, g.partition, g.polarity, g.params, g.generator) for g in net.groups] == [
        (g.name, g.size, g.partition, g.polarity, g.params, g.generator) for g in back.groups
    ]
    assert network_to_dict(back) == network_to_dict(net)
    a = run(net, 400, KernelConfig(seed=1)).raster_arrays()
    b = run(back, 400, KernelConfig(seed=1)).raster_arrays()
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    json.loads(path.read_text())


def test_load_network_errors(tmp_path):
    with pytest.raises(OSError, match="missing.json"):
        load_network(tmp_path / "missing.json")
    with pytest.raises(ValueError):
        network_from_dict({"format": "other/9"})
