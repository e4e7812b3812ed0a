import math

import numpy as np
import pytest

from hybridnet.netgen import (
    Geometry,
    NetworkConfig,
    chernoff_bound,
    chernoff_delta,
    derive_seed,
    generate_network,
    instance_from_json,
    instance_to_json,
    measure_geometry,
)
from oracles import CHERNOFF_DELTA_HALF, CHERNOFF_N1024, CHERNOFF_N4096


def test_minimal_dense_network():
    inst = generate_network(NetworkConfig(n=1, geometry=Geometry.DENSE))
    assert inst.n == inst.m == inst.l == 1
    np.testing.assert_allclose(inst.bs_centers, [[0.5, 0.5]])
    r = math.dist(inst.antenna_positions[0], (0.5, 0.5))
    assert r == pytest.approx(inst.config.bs_radius, rel=1e-12)


def test_m_coerced_to_perfect_square_and_nodes_outside_disks():
    cfg = NetworkConfig(n=1024, beta=0.5)
    assert cfg.m == 25 and cfg.cells_per_side == 5
    assert cfg.cell_side == pytest.approx(32 / 5)
    inst = generate_network(cfg)
    d = np.hypot(inst.nodes[:, None, 0] - inst.bs_centers[None, :, 0],
                 inst.nodes[:, None, 1] - inst.bs_centers[None, :, 1])
    assert np.all(d > cfg.bs_radius)
    assert cfg.bs_radius == pytest.approx(0.1 * 32 / 5)


@pytest.mark.parametrize("n, beta, gamma, m, l", [
    (1024, 0.5, 0.25, 25, 6), (4096, 0.5, 0.5, 64, 64), (2**14, 0.5, 0.25, 121, 11),
    (2**16, 0.0, 0.0, 1, 1), (100, 0.3, 0.0, 4, 1),
])
def test_integerization(n, beta, gamma, m, l):
    cfg = NetworkConfig(n=n, beta=beta, gamma=gamma)
    assert (cfg.m, cfg.l) == (m, l)


def test_determinism_byte_identical():
    cfg = NetworkConfig(n=512, beta=0.5, gamma=0.5, seed=99)
    assert instance_to_json(generate_network(cfg)) == instance_to_json(generate_network(cfg))
    other = generate_network(cfg.replace(seed=100))
    assert instance_to_json(other) != instance_to_json(generate_network(cfg))


def test_json_round_trip():
    inst = generate_network(NetworkConfig(n=256, beta=0.5, gamma=0.5, seed=3))
    text = instance_to_json(inst)
    back = instance_from_json(text)
    assert back.config == inst.config
    for name in ("nodes", "bs_centers", "antennas", "cell_index", "pairing"):
        np.testing.assert_array_equal(getattr(back, name), getattr(inst, name))
    assert instance_to_json(back) == text


def test_pairing_is_derangement():
    inst = generate_network(NetworkConfig(n=300, seed=5))
    assert np.array_equal(np.sort(inst.pairing), np.arange(300))
    assert not np.any(inst.pairing == np.arange(300))


def test_boundary_antennas_equidistant():
    cfg = NetworkConfig(n=4096, beta=0.5, gamma=0.5)
    inst = generate_network(cfg)
    nb = cfg.boundary_antennas
    assert nb == math.ceil(math.sqrt(4096 / 64))
    for s in (0, 17):
        ring = inst.antennas[s, :nb]
        gaps = np.hypot(*(np.roll(ring, -1, axis=0) - ring).T)
        np.testing.assert_allclose(gaps, gaps[0], rtol=1e-9)
        np.testing.assert_allclose(np.hypot(*(ring - inst.bs_centers[s]).T), cfg.bs_radius, rtol=1e-12)
        inner = np.hypot(*(inst.antennas[s, nb:] - inst.bs_centers[s]).T)
        assert np.all(inner <= cfg.bs_radius)


def test_measure_geometry_single_node():
    g = measure_geometry(generate_network(NetworkConfig(n=1, geometry="dense")))
    assert g.per_cell_counts == [1]
    assert g.min_node_distance == math.inf


def test_measure_geometry_hand_placed(make):
    cfg = NetworkConfig(n=2, geometry="dense")
    inst = make(cfg, [(0.1, 0.1), (0.1, 0.4)], [(0.5, 0.6)])
    g = measure_geometry(inst)
    assert g.min_node_distance == pytest.approx(0.3, abs=1e-15)
    assert g.min_node_antenna_distance == pytest.approx(math.dist((0.1, 0.4), (0.5, 0.6)))
    assert sum(g.per_cell_counts) == 2


def test_counts_sum_to_n():
    inst = generate_network(NetworkConfig(n=3000, beta=0.5, seed=11))
    counts = measure_geometry(inst).per_cell_counts
    assert sum(counts) == 3000 and len(counts) == inst.m


def test_chernoff_frozen_values():
    assert chernoff_delta(0.5) == pytest.approx(CHERNOFF_DELTA_HALF, rel=1e-12)
    assert chernoff_bound(0.5, 1024, 0.5) == pytest.approx(CHERNOFF_N1024, rel=1e-9)
    assert chernoff_bound(0.5, 4096, 0.5) == pytest.approx(CHERNOFF_N4096, rel=1e-12)
    assert chernoff_bound(0.5, 16, 0.5) < 0
    assert chernoff_bound(1e-9, 1024, 0.5) == pytest.approx(1 - 32, rel=1e-6)


def test_chernoff_domain():
    with pytest.raises(ValueError):
        chernoff_bound(1.0, 100, 0.5)
    with pytest.raises(ValueError):
        chernoff_bound(0.0, 100, 0.5)


@pytest.mark.parametrize("kwargs", [
    dict(n=0), dict(n=10, alpha=2.0), dict(n=10, beta=1.0), dict(n=10, beta=0.6, gamma=0.5),
    dict(n=10, epsilon0=0.3), dict(n=10, power_p=0), dict(n=10, seed=-1),
])
def test_config_rejects_invalid(kwargs):
    with pytest.raises(ValueError):
        NetworkConfig(**kwargs)


def test_derive_seed_stable_and_distinct():
    assert derive_seed(0, 1024, 0) == derive_seed(0, 1024, 0)
    seeds = {derive_seed(0, n, t) for n in (256, 512) for t in range(50)}
    assert len(seeds) == 100
    assert all(0 <= s < 2**64 for s in seeds)


def test_lemma1_concentration_n4096():
    n, beta, delta0 = 4096, 0.5, 0.5
    ok = 0
    for s in range(100):
        inst = generate_network(NetworkConfig(n=n, beta=beta, seed=derive_seed(42, s)))
        c = np.asarray(measure_geometry(inst).per_cell_counts)
        mean = n / inst.m
        ok += bool(np.all((c > (1 - delta0) * mean) & (c < (1 + delta0) * mean)))
    assert ok / 100 >= chernoff_bound(delta0, n, beta)


def test_lemma6_distance_floor_dense():
    n, floor = 1024, 1024 ** -1.5
    ok = 0
    for s in range(200):
        g = measure_geometry(generate_network(NetworkConfig(n=n, beta=0.5, gamma=0.25,
                                                            geometry="dense", seed=s)))
        ok += min(g.min_node_distance, g.min_node_antenna_distance) >= floor
    assert ok / 200 >= 0.99
