"""Property-based checks of the invariants shared across modules."""

import io
import math

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from hybridnet.channel import Direction, antenna_ids, full_activation, measure_interference, realize_channel
from hybridnet.cutset import build_cut, power_transfer
from hybridnet.harness import fit_loglog, read_table, write_table
from hybridnet.netgen import NetworkConfig, generate_network, instance_from_json, instance_to_json
from hybridnet.protocols import l_path, log2det_gram, route_loads, routing_grid
from hybridnet.regimes import _boundaries, classify, regime_of, scheme_exponents
from oracles import mmse_sic_sum, random_channel, slogdet2

FAST = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
SEEDS = st.integers(min_value=0, max_value=2**64 - 1)


@st.composite
def valid_point(draw):
    beta = draw(st.floats(0.0, 0.99))
    gamma = draw(st.floats(0.0, min(0.99, 1.0 - beta)))
    alpha = draw(st.floats(2.0001, 8.0))
    return alpha, beta, gamma


@st.composite
def channel(draw, max_dim=8):
    rows = draw(st.integers(1, max_dim))
    cols = draw(st.integers(1, max_dim))
    rng = np.random.default_rng(draw(st.integers(0, 2**32)))
    return random_channel(rng, rows, cols)


@FAST
@given(channel(), st.floats(0.01, 100.0))
def test_sic_chain_rule_equals_logdet(h, snr):
    ref = log2det_gram(h, snr)
    assert mmse_sic_sum(h, snr) == pytest.approx(ref, rel=1e-9, abs=1e-12)


@FAST
@given(channel(), st.floats(0.01, 100.0))
def test_uplink_downlink_determinants_agree(h, snr):
    a = slogdet2(np.eye(h.shape[1]) + snr * h.conj().T @ h)
    b = slogdet2(np.eye(h.shape[0]) + snr * h @ h.conj().T)
    assert a == pytest.approx(b, rel=1e-9, abs=1e-12)
    assert log2det_gram(h.conj().T, snr) == pytest.approx(b, rel=1e-9, abs=1e-12)


@FAST
@given(channel(), st.floats(0.01, 100.0), st.integers(0, 2**32))
def test_logdet_invariant_to_per_user_phase(h, snr, seed):
    phi = np.random.default_rng(seed).uniform(0, 2 * math.pi, size=h.shape[1])
    rotated = h * np.exp(1j * phi)[None, :]
    assert log2det_gram(rotated, snr) == pytest.approx(log2det_gram(h, snr), rel=1e-9, abs=1e-12)


@FAST
@given(channel(), st.floats(0.01, 10.0))
def test_logdet_monotone_in_snr(h, snr):
    assert log2det_gram(h, 2 * snr) > log2det_gram(h, snr)


@FAST
@given(SEEDS, st.integers(16, 400))
def test_channel_reciprocity(seed, n):
    inst = generate_network(NetworkConfig(n=n, beta=0.4, gamma=0.4, seed=seed))
    ants = antenna_ids(inst, 0)
    nodes = np.arange(min(n, 20))
    up = realize_channel(inst, nodes, ants).gains
    down = realize_channel(inst, ants, nodes).gains
    np.testing.assert_allclose(np.abs(up), np.abs(down).T, rtol=1e-13)


@settings(max_examples=20, deadline=None)
@given(SEEDS, st.integers(0, 2**32))
def test_interference_additive_over_any_split(seed, split_seed):
    inst = generate_network(NetworkConfig(n=512, alpha=3.5, beta=0.5, gamma=0.25, seed=seed))
    amap = full_activation(inst, Direction.UPLINK)
    mask = np.random.default_rng(split_seed).random(len(amap)) < 0.5
    keys = sorted(amap)
    a = {k: amap[k] for k, on in zip(keys, mask) if on}
    b = {k: amap[k] for k, on in zip(keys, mask) if not on}
    whole = measure_interference(inst, 3, amap, Direction.UPLINK).mean_power
    parts = sum(measure_interference(inst, 3, x, Direction.UPLINK).mean_power for x in (a, b))
    assert whole == pytest.approx(parts, rel=1e-12, abs=1e-300)


@given(valid_point())
@settings(max_examples=200, deadline=None)
def test_classifier_best_is_argmax(point):
    rep = classify(*point)
    assert rep.best_exponent == pytest.approx(max(rep.exponents.values()), abs=1e-12)


_ORDER = {"A": ["HC", "MH"], "B": ["HC", "IMH"], "C": ["HC", "IMH"], "D": ["HC", "ISH", "IMH"]}


@given(valid_point())
@settings(max_examples=200, deadline=None)
def test_adjacent_schemes_meet_at_boundaries(point):
    _, beta, gamma = point
    regime = regime_of(beta, gamma)
    order = _ORDER[regime.value]
    for i, (a, scheme) in enumerate(_boundaries(regime, beta, gamma)):
        assert scheme == order[i + 1]
        if not (2.0 < a < math.inf):
            continue
        e = scheme_exponents(a, beta, gamma)
        assert e[order[i]] == pytest.approx(e[scheme], abs=1e-12)


@given(valid_point())
@settings(max_examples=100, deadline=None)
def test_exponents_decrease_or_hold_in_alpha(point):
    alpha, beta, gamma = point
    lo, hi = scheme_exponents(alpha, beta, gamma), scheme_exponents(alpha + 0.5, beta, gamma)
    assert all(hi[s] <= lo[s] + 1e-15 for s in lo)


@settings(max_examples=25, deadline=None)
@given(SEEDS, st.sampled_from([(0.5, 0.5), (0.4, 0.2), (0.0, 0.3), (0.6, 0.3)]), st.integers(64, 1024))
def test_cut_partition_is_exact(seed, bg, n):
    inst = generate_network(NetworkConfig(n=n, beta=bg[0], gamma=bg[1], epsilon0=0.25, seed=seed))
    cut = build_cut(inst)
    dest = np.concatenate([cut.d1, cut.d2, cut.d3])
    assert len(dest) == len(np.unique(dest))
    expected = np.union1d(cut.d_right, inst.n + np.arange(inst.m * inst.l))
    np.testing.assert_array_equal(np.sort(dest), expected)
    tr = power_transfer(inst, cut)
    assert tr.d4_sum >= 0 and tr.d5_sum >= 0 and tr.d3_total == tr.d4_sum + tr.d5_sum


@FAST
@given(SEEDS, st.integers(2, 600))
def test_generation_round_trip_and_derangement(seed, n):
    inst = generate_network(NetworkConfig(n=n, beta=0.3, gamma=0.3, seed=seed))
    assert not np.any(inst.pairing == np.arange(n))
    assert instance_to_json(instance_from_json(instance_to_json(inst))) == instance_to_json(inst)


@FAST
@given(st.integers(0, 20), st.integers(0, 20), st.integers(0, 20), st.integers(0, 20))
def test_l_path_is_connected_and_shortest(x0, y0, x1, y1):
    path = l_path((x0, y0), (x1, y1))
    assert path[0] == (x0, y0) and path[-1] == (x1, y1)
    assert len(path) == abs(x1 - x0) + abs(y1 - y0) + 1
    assert all(abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1 for a, b in zip(path, path[1:]))


@settings(max_examples=20, deadline=None)
@given(SEEDS)
def test_route_loads_match_path_enumeration(seed):
    inst = generate_network(NetworkConfig(n=2048, seed=seed % 1000))
    g = routing_grid(inst)
    src = g.node_cell[: 200]
    dst = g.node_cell[inst.pairing[: 200]]
    loads, ok = route_loads(g, src, dst)
    ref = np.zeros(g.per_side**2, dtype=np.int64)
    for i, (a, b) in enumerate(zip(src, dst)):
        cells = [g.cell_id(*c) for c in l_path(tuple(int(v) for v in g.coords(a)),
                                                tuple(int(v) for v in g.coords(b)))]
        clear = all(g.occupancy[c] > 0 for c in cells)
        assert ok[i] == clear
        if clear:
            ref[cells] += 1
    np.testing.assert_array_equal(loads.ravel(), ref)


@FAST
@given(st.floats(-2.0, 3.0), st.floats(0.01, 100.0))
def test_fit_recovers_exact_power_law(slope, scale):
    ns = [2**k for k in range(8, 15)]
    fit = fit_loglog(ns, [scale * n**slope for n in ns])
    assert fit.slope == pytest.approx(slope, abs=1e-9)


@FAST
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=10))
def test_table_round_trip_preserves_floats(values):
    assume(all(v != 0 or math.copysign(1, v) > 0 for v in values))
    rows = [{"n": i, "x": v} for i, v in enumerate(values)]
    buf = io.StringIO()
    write_table(rows, buf)
    _, back = read_table(io.StringIO(buf.getvalue()))
    assert [float(r["x"]) for r in back] == values
