"""Far-field random-phase path-loss channel and interference measurement.

Endpoints are addressed by global integer ids: node ``i`` is ``i`` and
antenna ``t`` of BS ``s`` is ``n + s*l + t``. Every gain is
``exp(j*theta) / r**(alpha/2)`` where the phase is a hash of
(seed, symbol, link kind, tx, rx), so any entry can be regenerated on its
own and phases are independent across entries and symbols.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import zeta

from .netgen import NetworkInstance

__all__ = [
    "Direction",
    "ChannelRealization",
    "InterferenceStat",
    "endpoint_positions",
    "antenna_ids",
    "phases",
    "path_gain",
    "realize_channel",
    "measure_interference",
    "full_activation",
    "interference_layer_bound",
    "full_activation_interference",
]

_LINK_NODE, _LINK_UP, _LINK_DOWN = 1, 2, 3
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


class Direction(str, Enum):
    UPLINK = "uplink"
    DOWNLINK = "downlink"


def _mix(x: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer
    with np.errstate(over="ignore"):
        x = x ^ (x >> np.uint64(30))
        x = x * _M1
        x = x ^ (x >> np.uint64(27))
        x = x * _M2
        return x ^ (x >> np.uint64(31))


def phases(seed: int, symbol: int, kind: int, tx_ids, rx_ids) -> np.ndarray:
    """Uniform [0, 2*pi) phases, shape (len(rx_ids), len(tx_ids))."""
    with np.errstate(over="ignore"):
        key = _mix(np.asarray([seed], dtype=np.uint64))
        key = _mix(key ^ (np.uint64(symbol) * _GOLDEN + np.uint64(kind)))
        tx = _mix(key ^ (np.asarray(tx_ids, dtype=np.uint64) * _GOLDEN))
        h = _mix(tx[None, :] ^ (np.asarray(rx_ids, dtype=np.uint64)[:, None] * _M1 + _GOLDEN))
    return (h >> np.uint64(11)).astype(np.float64) * (2.0 * math.pi / 2.0**53)


def path_gain(distance: np.ndarray, alpha: float) -> np.ndarray:
    """Power gain r**-alpha."""
    return np.power(distance, -alpha)


@dataclass
class ChannelRealization:
    gains: np.ndarray  # (receivers, transmitters), complex
    distances: np.ndarray
    symbol: int


@dataclass
class InterferenceStat:
    direction: Direction
    mean_power: float = 0.0
    max_power: float = 0.0
    samples: int = 0


def endpoint_positions(instance: NetworkInstance, ids) -> np.ndarray:
    ids = np.asarray(ids, dtype=np.int64)
    n = instance.n
    out = np.empty((len(ids), 2))
    is_node = ids < n
    out[is_node] = instance.nodes[ids[is_node]]
    out[~is_node] = instance.antenna_positions[ids[~is_node] - n]
    return out


def antenna_ids(instance: NetworkInstance, cell: int, which=None) -> np.ndarray:
    """Global ids of the antennas of BS ``cell`` (optionally a subset of indices)."""
    t = np.arange(instance.l) if which is None else np.asarray(which)
    return instance.n + cell * instance.l + t


def _link_kind(instance: NetworkInstance, tx: np.ndarray, rx: np.ndarray) -> int:
    n = instance.n
    tx_node, rx_node = tx < n, rx < n
    if tx_node.all() and rx_node.all():
        return _LINK_NODE
    if tx_node.all() and not rx_node.any():
        return _LINK_UP
    if not tx_node.any() and rx_node.all():
        return _LINK_DOWN
    raise ValueError("tx/rx sets must be nodes->nodes, nodes->antennas or antennas->nodes")


def realize_channel(instance: NetworkInstance, tx_set, rx_set, symbol: int = 0) -> ChannelRealization:
    """Gain matrix between ``tx_set`` and ``rx_set`` at one symbol time."""
    tx = np.atleast_1d(np.asarray(tx_set, dtype=np.int64))
    rx = np.atleast_1d(np.asarray(rx_set, dtype=np.int64))
    if tx.size == 0 or rx.size == 0:
        raise ValueError("tx and rx sets must be non-empty")
    kind = _link_kind(instance, tx, rx)
    ptx, prx = endpoint_positions(instance, tx), endpoint_positions(instance, rx)
    dist = np.hypot(prx[:, None, 0] - ptx[None, :, 0], prx[:, None, 1] - ptx[None, :, 1])
    if np.any(dist <= 0):
        raise ValueError("zero distance between a transmitter and a receiver")
    theta = phases(instance.config.seed, symbol, kind, tx, rx)
    amp = np.power(dist, -instance.config.alpha / 2)
    gains = np.empty(dist.shape, dtype=np.complex128)
    gains.real = amp * np.cos(theta)
    gains.imag = amp * np.sin(theta)
    return ChannelRealization(gains=gains, distances=dist, symbol=symbol)


def inv_pow_sq(d2: np.ndarray, alpha: float) -> np.ndarray:
    """(d2)**(-alpha/2) for squared distances, with fast paths for integer alpha."""
    if alpha == 4:
        return 1.0 / (d2 * d2)
    if alpha == 3:
        return 1.0 / (d2 * np.sqrt(d2))
    return np.power(d2, -alpha / 2)


def _received_power(rx_pos, tx_pos, powers, alpha, rx_group=None, tx_group=None,
                    chunk=4096, exact=False) -> np.ndarray:
    """sum_j powers[j] * |rx - tx_j|**-alpha, skipping pairs in the same group.

    By default squared distances use the Gram expansion, accurate to about
    1e-12 * side**2, which is fine for pairs that are not close together;
    ``exact`` forms coordinate differences instead.
    """
    out = np.zeros(len(rx_pos))
    r2 = np.einsum("ij,ij->i", rx_pos, rx_pos)
    for start in range(0, len(tx_pos), chunk):
        sl = slice(start, start + chunk)
        t = tx_pos[sl]
        if exact:
            d2 = (rx_pos[:, None, 0] - t[None, :, 0]) ** 2
            d2 += (rx_pos[:, None, 1] - t[None, :, 1]) ** 2
        else:
            d2 = rx_pos @ (-2.0 * t.T)
            d2 += r2[:, None]
            d2 += np.einsum("ij,ij->i", t, t)[None, :]
            np.maximum(d2, 0.0, out=d2)
        with np.errstate(divide="ignore"):
            # co-located pairs only occur within a masked group
            g = inv_pow_sq(d2, alpha)
        if rx_group is not None:
            g[rx_group[:, None] == tx_group[None, sl]] = 0.0
        out += g @ powers[sl]
    return out


def full_activation(instance: NetworkInstance, direction: Direction) -> dict:
    """Active map for the ISH protocol with every cell transmitting.

    Uplink: every node at power P. Downlink: every BS emits n*P/m split
    evenly over its l antennas.
    """
    cfg = instance.config
    n, l = instance.n, instance.l
    if Direction(direction) is Direction.UPLINK:
        return {c: (instance.cell_members(c), np.full(len(instance.cell_members(c)), cfg.power_p))
                for c in range(instance.m)}
    per_antenna = n * cfg.power_p / instance.m / l
    return {c: (antenna_ids(instance, c), np.full(l, per_antenna)) for c in range(instance.m)}


def _reference_receivers(instance, cell, direction, max_receivers):
    if direction is Direction.UPLINK:
        ids = antenna_ids(instance, cell)
    else:
        ids = instance.cell_members(cell)
    if max_receivers is not None and len(ids) > max_receivers:
        ids = ids[np.linspace(0, len(ids) - 1, max_receivers).round().astype(int)]
    return ids


def measure_interference(instance: NetworkInstance, cell: int, active_map: dict,
                         direction: Direction, symbols: int = 1,
                         max_receivers: int | None = None) -> InterferenceStat:
    """Interference power from out-of-cell transmitters at the receivers of ``cell``.

    Receivers are the BS antennas of the cell (uplink) or the nodes of the
    cell (downlink); ``max_receivers`` evenly subsamples them. Since every
    gain has unit-modulus phase, sum(power * |gain|**2) is the same at every
    symbol and the symbol average equals the single-symbol value.
    """
    direction = Direction(direction)
    tx_ids, powers = [], []
    for c, (ids, pw) in (active_map or {}).items():
        if c == cell or len(ids) == 0:
            continue
        tx_ids.append(np.asarray(ids, dtype=np.int64))
        powers.append(np.broadcast_to(np.asarray(pw, dtype=float), (len(ids),)))
    rx = _reference_receivers(instance, cell, direction, max_receivers)
    if not tx_ids or len(rx) == 0:
        return InterferenceStat(direction=direction)
    tx = np.concatenate(tx_ids)
    pw = np.concatenate(powers)
    received = _received_power(endpoint_positions(instance, rx), endpoint_positions(instance, tx),
                               pw, instance.config.alpha)
    return InterferenceStat(direction=direction, mean_power=float(received.mean()),
                            max_power=float(received.max()), samples=len(rx) * max(1, symbols))


def full_activation_interference(instance: NetworkInstance, direction: Direction,
                                 max_receivers: int | None = None) -> list[InterferenceStat]:
    """``measure_interference`` under ``full_activation`` for every cell at once."""
    direction = Direction(direction)
    cfg = instance.config
    amap = full_activation(instance, direction)
    tx_cell = np.concatenate([np.full(len(ids), c) for c, (ids, _) in amap.items()])
    tx = np.concatenate([ids for ids, _ in amap.values()])
    pw = np.concatenate([p for _, p in amap.values()])
    tx_pos = endpoint_positions(instance, tx)
    rx_lists = [_reference_receivers(instance, c, direction, max_receivers) for c in range(instance.m)]
    rx_cell = np.concatenate([np.full(len(r), c) for c, r in enumerate(rx_lists)])
    rx_pos = endpoint_positions(instance, np.concatenate(rx_lists))
    received = _received_power(rx_pos, tx_pos, pw, cfg.alpha, rx_group=rx_cell, tx_group=tx_cell)
    stats = []
    for c in range(instance.m):
        r = received[rx_cell == c]
        if r.size == 0 or instance.m == 1:
            stats.append(InterferenceStat(direction=direction))
        else:
            stats.append(InterferenceStat(direction=direction, mean_power=float(r.mean()),
                                          max_power=float(r.max()), samples=int(r.size)))
    return stats


def interference_layer_bound(instance: NetworkInstance, cell: int, active_map: dict,
                             direction: Direction = Direction.UPLINK) -> tuple[float, float]:
    """Layered upper bound on the per-receiver interference at ``cell``.

    Interfering cells at Chebyshev cell-distance k form layer k (at most 8k
    cells). With c the smallest observed distance from a receiver to a
    layer-k transmitter divided by k*cell_side, every layer-k term is at most
    power_max * (c*k*cell_side)**-alpha, so the interference is bounded by
    8 * N_max * power_max * (c*cell_side)**-alpha * zeta(alpha - 1), with
    N_max the largest number of transmitters in one interfering cell.

    Returns ``(bound, c)``.
    """
    direction = Direction(direction)
    cfg = instance.config
    k = cfg.cells_per_side
    cx, cy = cell % k, cell // k
    rx_pos = endpoint_positions(instance, _reference_receivers(instance, cell, direction, None))
    c_min, n_max, p_max = math.inf, 0, 0.0
    for c, (ids, pw) in (active_map or {}).items():
        if c == cell or len(ids) == 0:
            continue
        layer = max(abs(c % k - cx), abs(c // k - cy))
        tx_pos = endpoint_positions(instance, ids)
        d = np.hypot(rx_pos[:, None, 0] - tx_pos[None, :, 0], rx_pos[:, None, 1] - tx_pos[None, :, 1])
        c_min = min(c_min, float(d.min()) / (layer * cfg.cell_side))
        n_max = max(n_max, len(ids))
        p_max = max(p_max, float(np.max(pw)))
    if n_max == 0:
        return 0.0, math.inf
    alpha = cfg.alpha
    bound = 8 * n_max * p_max * (c_min * cfg.cell_side) ** (-alpha) * float(zeta(alpha - 1))
    return bound, c_min
