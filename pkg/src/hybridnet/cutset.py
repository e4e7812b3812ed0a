"""Cut-set upper bound on extended networks, evaluated on realized instances.

The area is cut along the vertical centre line. Sources are the nodes on
the left; destinations are the nodes on the right plus every BS antenna
(the backbone is ideal, so anything an antenna hears is delivered). The
destinations are split into the width-1 slab right of the cut (D1), the
width-1 rings inside left-half BS boundaries (D2), and the rest (D3). The
bound is the sum of a per-destination Hadamard term over D1, an analytic
degrees-of-freedom cap over D2, and a power-transfer cap over D3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, svds

from .channel import _received_power, endpoint_positions, realize_channel
from .netgen import Geometry, NetworkConfig, NetworkInstance
from .protocols import log2det_gram

__all__ = [
    "CutPartition",
    "PowerTransfer",
    "CutsetResult",
    "build_cut",
    "power_transfer",
    "term_t1",
    "term_t2",
    "t2_bound",
    "term_t3",
    "cutset_total",
    "cutset_terms",
    "direct_cut_capacity",
    "f3_norm_stat",
    "dense_upper",
    "simo_sum",
    "DEFAULT_EPSILON",
    "DIRECT_CUT_MAX_N",
]

DEFAULT_EPSILON = 0.05
DIRECT_CUT_MAX_N = 2**10
SLAB_WIDTH = 1.0


@dataclass
class CutPartition:
    """Destination partition of the centre cut; ids are global endpoint ids."""

    cut_x: float
    sources_left: np.ndarray
    d_right: np.ndarray
    b_left: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray

    @property
    def destinations(self) -> np.ndarray:
        return np.concatenate([self.d1, self.d2, self.d3])


@dataclass
class PowerTransfer:
    d4_sum: float
    d5_sum: float

    @property
    def d3_total(self) -> float:
        return self.d4_sum + self.d5_sum


@dataclass
class CutsetResult:
    t1: float
    t2: float
    t3: float
    d4: float
    d5: float
    epsilon: float

    @property
    def total(self) -> float:
        return self.t1 + self.t2 + self.t3


def build_cut(instance: NetworkInstance) -> CutPartition:
    """Partition of sources and destinations for the vertical centre cut.

    A BS whose centre lies on or right of the cut belongs to the right half;
    its antennas join D1 when within x-distance 1 of the cut. D2 holds the
    antennas of left-half BSs lying within distance 1 inside their boundary
    circle.
    """
    cfg = instance.config
    n, l = instance.n, instance.l
    cut = cfg.area_side / 2.0
    x = instance.nodes[:, 0]
    left = np.flatnonzero(x < cut)
    right = np.flatnonzero(x >= cut)

    bs_left = np.flatnonzero(instance.bs_centers[:, 0] < cut)
    is_left_bs = np.zeros(instance.m, dtype=bool)
    is_left_bs[bs_left] = True
    ant_ids = n + np.arange(instance.m * l)
    ant_pos = instance.antenna_positions
    ant_bs = np.repeat(np.arange(instance.m), l)
    depth = cfg.bs_radius - np.hypot(*(ant_pos - instance.bs_centers[ant_bs]).T)

    in_left = is_left_bs[ant_bs]
    ring = in_left & (depth < SLAB_WIDTH)
    slab_ant = ~in_left & (np.abs(ant_pos[:, 0] - cut) < SLAB_WIDTH)
    slab_node = x[right] - cut < SLAB_WIDTH

    d1 = np.concatenate([right[slab_node], ant_ids[slab_ant]])
    d2 = ant_ids[ring]
    d3 = np.concatenate([right[~slab_node], ant_ids[~slab_ant & ~ring]])
    return CutPartition(cut_x=cut, sources_left=left, d_right=right, b_left=bs_left,
                        d1=d1, d2=d2, d3=d3)


def _gain_sums(instance: NetworkInstance, rx_ids: np.ndarray, tx_ids: np.ndarray) -> np.ndarray:
    """sum over tx of r**-alpha at every receiver."""
    if len(rx_ids) == 0 or len(tx_ids) == 0:
        return np.zeros(len(rx_ids))
    return _received_power(endpoint_positions(instance, rx_ids), endpoint_positions(instance, tx_ids),
                           np.ones(len(tx_ids)), instance.config.alpha, exact=True)


def power_transfer(instance: NetworkInstance, cut: CutPartition) -> PowerTransfer:
    """P-weighted sums of r**-alpha from S_L into D3.

    d4 covers the right-half part of D3 (nodes and right-BS antennas), d5
    the left-BS antennas outside the D2 rings.
    """
    p = instance.config.power_p
    left_ant = _left_bs_antennas(instance, cut)
    d3_left = np.intersect1d(cut.d3, left_ant)
    d3_right = np.setdiff1d(cut.d3, left_ant)
    d4 = p * float(_gain_sums(instance, d3_right, cut.sources_left).sum())
    d5 = p * float(_gain_sums(instance, d3_left, cut.sources_left).sum())
    return PowerTransfer(d4_sum=d4, d5_sum=d5)


def _left_bs_antennas(instance: NetworkInstance, cut: CutPartition) -> np.ndarray:
    l = instance.l
    return (instance.n + cut.b_left[:, None] * l + np.arange(l)[None, :]).ravel()


def term_t1(instance: NetworkInstance, cut: CutPartition, symbols: int = 1) -> float:
    """sum over D1 of log2(1 + P/N0 * sum_i |h_ki|^2).

    |h_ki|^2 = r_ki**-alpha at every symbol, so the symbol average is exact
    after one evaluation.
    """
    if len(cut.d1) == 0 or len(cut.sources_left) == 0:
        return 0.0
    cfg = instance.config
    g = _gain_sums(instance, cut.d1, cut.sources_left)
    return float(np.sum(np.log2(1.0 + cfg.power_p / cfg.noise_n0 * g)))


def t2_bound(n: int, m: int, l: int) -> float:
    """m * min(l, sqrt(n/m)) * log2 n."""
    return m * min(l, math.sqrt(n / m)) * math.log2(n)


def term_t2(instance: NetworkInstance, cut: CutPartition) -> float:
    """Degrees-of-freedom cap on D2; zero when D2 is empty."""
    if len(cut.d2) == 0:
        return 0.0
    return t2_bound(instance.n, instance.m, instance.l)


def term_t3(instance: NetworkInstance, cut: CutPartition, epsilon: float = DEFAULT_EPSILON,
            transfer: PowerTransfer | None = None) -> float:
    """n**epsilon times the total power transferred into D3."""
    if transfer is None:
        transfer = power_transfer(instance, cut)
    return instance.n**epsilon * transfer.d3_total


def cutset_terms(instance: NetworkInstance, symbols: int = 1,
                 epsilon: float = DEFAULT_EPSILON) -> CutsetResult:
    cut = build_cut(instance)
    transfer = power_transfer(instance, cut)
    return CutsetResult(
        t1=term_t1(instance, cut, symbols),
        t2=term_t2(instance, cut),
        t3=term_t3(instance, cut, epsilon, transfer),
        d4=transfer.d4_sum,
        d5=transfer.d5_sum,
        epsilon=epsilon,
    )


def cutset_total(instance: NetworkInstance, symbols: int = 1,
                 epsilon: float = DEFAULT_EPSILON) -> float:
    """T1 + T2 + T3 for the centre cut."""
    return cutset_terms(instance, symbols, epsilon).total


def _cut_matrix(instance: NetworkInstance, rx: np.ndarray, tx: np.ndarray, symbol: int) -> np.ndarray:
    """Channel from node set ``tx`` to a mixed node/antenna set ``rx`` (rows follow ``rx``)."""
    out = np.empty((len(rx), len(tx)), dtype=np.complex128)
    node_rows = rx < instance.n
    if node_rows.any():
        out[node_rows] = realize_channel(instance, tx, rx[node_rows], symbol).gains
    if (~node_rows).any():
        out[~node_rows] = realize_channel(instance, tx, rx[~node_rows], symbol).gains
    return out


def direct_cut_capacity(instance: NetworkInstance, cut: CutPartition | None = None,
                        symbols: int = 1) -> float:
    """E[log2 det(I + P/N0 * H_L H_L^dagger)] across the cut with input P*I."""
    if instance.n > DIRECT_CUT_MAX_N:
        raise ValueError(f"direct cut capacity limited to n <= {DIRECT_CUT_MAX_N}, got {instance.n}")
    cut = build_cut(instance) if cut is None else cut
    dest = cut.destinations
    if len(dest) == 0 or len(cut.sources_left) == 0:
        return 0.0
    cfg = instance.config
    total = 0.0
    for t in range(symbols):
        h = _cut_matrix(instance, dest, cut.sources_left, t)
        total += log2det_gram(h, cfg.power_p / cfg.noise_n0)
    return total / symbols


def _spectral_norm_sq(f: np.ndarray) -> float:
    if min(f.shape) <= 32:
        return float(np.linalg.norm(f, 2) ** 2)
    op = LinearOperator(f.shape, matvec=lambda v: f @ v, rmatvec=lambda v: f.conj().T @ v,
                        dtype=f.dtype)
    v0 = np.ones(min(f.shape), dtype=f.dtype)
    s = svds(op, k=1, return_singular_vectors=False, v0=v0, tol=1e-8)
    return float(s[0] ** 2)


def f3_norm_stat(instance: NetworkInstance, cut: CutPartition | None = None,
                 samples: int = 1) -> float:
    """Mean over symbols of ||F3||_2^2, F3 being H3 with unit-norm columns.

    Column i of H3 (sources to D3) is divided by sqrt(d3_i), d3_i = sum over
    D3 of r**-alpha, so every column of F3 has unit norm. Sources with no
    transfer into D3 are dropped.
    """
    cut = build_cut(instance) if cut is None else cut
    if len(cut.d3) == 0 or len(cut.sources_left) == 0:
        return 0.0
    total = 0.0
    for t in range(samples):
        h = _cut_matrix(instance, cut.d3, cut.sources_left, t)
        d = np.sum(np.abs(h) ** 2, axis=0)
        keep = d > 0
        total += _spectral_norm_sq(h[:, keep] / np.sqrt(d[keep]))
    return total / samples


def dense_upper(config: NetworkConfig, epsilon1: float = 0.5) -> float:
    """Analytic SIMO cap n * log2(1 + 2 (P/N0) n**(1 + alpha (1 + epsilon1))).

    Each source can deliver at most the SIMO capacity to every other node
    and antenna (at most 2n receivers); with every distance at least
    n**-(1 + epsilon1) each gain is at most n**(alpha (1 + epsilon1)). The
    result is c * n * log2 n with c about 1 + alpha (1 + epsilon1).
    """
    if config.geometry is not Geometry.DENSE:
        raise ValueError("dense_upper applies to dense networks")
    n = config.n
    snr = config.power_p / config.noise_n0
    return n * math.log2(1.0 + 2.0 * snr * n ** (1.0 + config.alpha * (1.0 + epsilon1)))


def simo_sum(instance: NetworkInstance) -> float:
    """Realized sum over sources of log2(1 + P/N0 * sum over all other endpoints of r**-alpha)."""
    cfg = instance.config
    n = instance.n
    pos = np.vstack([instance.nodes, instance.antenna_positions])
    group = np.concatenate([np.arange(n), np.full(len(instance.antenna_positions), -1)])
    # reciprocity: the gain sum seen from source i equals the power i receives
    g = _received_power(instance.nodes, pos, np.ones(len(pos)), cfg.alpha,
                        rx_group=np.arange(n), tx_group=group, exact=True)
    return float(np.sum(np.log2(1.0 + cfg.power_p / cfg.noise_n0 * g)))
