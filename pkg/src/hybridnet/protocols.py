"""Achievable throughput of ISH, IMH, MH and HC on a realized network.

Rates are in bits per symbol. Interference plus noise is always treated as
Gaussian noise of matched variance (worst-case noise), which lower-bounds
every rate reported here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .channel import (
    _received_power,
    endpoint_positions,
    Direction,
    InterferenceStat,
    antenna_ids,
    full_activation,
    full_activation_interference,
    measure_interference,
    realize_channel,
)
from .netgen import NetworkInstance

__all__ = [
    "Scheme",
    "NumericalDegeneracyError",
    "ProtocolResult",
    "RoutePlan",
    "BackboneLoad",
    "RoutingGrid",
    "log2det_gram",
    "ish_access_rate",
    "ish_exit_rate",
    "ish_throughput",
    "routing_grid",
    "tdma_color",
    "imh_plan",
    "imh_throughput",
    "mh_throughput",
    "hc_exponent",
    "backbone_load",
    "TDMA_SLOTS",
]

TDMA_SLOTS = 9
DEFAULT_REFERENCE_RECEIVERS = 8


class Scheme(str, Enum):
    ISH = "ISH"
    IMH = "IMH"
    MH = "MH"
    HC = "HC"


class NumericalDegeneracyError(ArithmeticError):
    """A Gram matrix that should be positive definite failed to factor."""


@dataclass
class ProtocolResult:
    scheme: Scheme
    per_cell_rate: list[float]
    total_throughput: float
    active_pairs: int
    route_failures: int
    interference: tuple[InterferenceStat, InterferenceStat]
    access_total: float = 0.0
    exit_total: float = 0.0
    hop_sinr: np.ndarray = field(default_factory=lambda: np.empty(0))
    extra: dict = field(default_factory=dict)

    @property
    def median_sinr(self) -> float:
        return float(np.median(self.hop_sinr)) if self.hop_sinr.size else math.nan


def log2det_gram(h: np.ndarray, snr: float) -> float:
    """log2 det(I + snr * H H^dagger), factored on the smaller Gram matrix."""
    if h.size == 0:
        return 0.0
    gram = h @ h.conj().T if h.shape[0] <= h.shape[1] else h.conj().T @ h
    a = np.eye(gram.shape[0]) + snr * gram
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalDegeneracyError("Gram matrix is not positive definite") from exc
    diag = np.real(np.diagonal(chol))
    if not np.all(np.isfinite(diag)) or np.any(diag <= 0):
        raise NumericalDegeneracyError("non-finite Cholesky factor")
    return float(2.0 * np.sum(np.log2(diag)))


# ---------------------------------------------------------------------------
# ISH: single-hop SIMO MAC uplink, MISO BC downlink through the dual MAC


def _cell_noise(instance, cell, direction, noise_plus_interference, max_receivers):
    if noise_plus_interference is not None:
        return float(noise_plus_interference), None
    stat = measure_interference(instance, cell, full_activation(instance, direction),
                                direction, max_receivers=max_receivers)
    return stat.mean_power + instance.config.noise_n0, stat


def _equalized(real, alpha: float, equalize: bool) -> np.ndarray:
    """Gains of a realization, optionally scaled to the largest link distance.

    Scaling every link to the cell's worst distance models users that back
    off their power to arrive at the weakest user's level: a feasible power
    allocation under which all users are statistically alike, so rotating the
    decoding order gives every user the same rate.
    """
    h = real.gains
    if not equalize:
        return h
    return h / np.abs(h) * real.distances.max() ** (-alpha / 2.0)


def ish_access_rate(instance: NetworkInstance, cell: int, symbols: int = 1,
                    noise_plus_interference: float | None = None,
                    max_receivers: int | None = DEFAULT_REFERENCE_RECEIVERS,
                    equalize: bool = True) -> float:
    """Uplink sum rate E[log2 det(I_l + P/N_I * H H^dagger)] of one cell.

    With ``equalize`` (the default) every entry of H has the magnitude of
    the longest link in the cell, so the rate splits evenly over the users;
    without it H holds the realized distances and the value is the plain
    MAC sum rate. ``noise_plus_interference`` overrides N_I; by default it
    is measured with every other cell transmitting.
    """
    members = instance.cell_members(cell)
    if len(members) == 0:
        return 0.0
    n_i, _ = _cell_noise(instance, cell, Direction.UPLINK, noise_plus_interference, max_receivers)
    snr = instance.config.power_p / n_i
    ants = antenna_ids(instance, cell)
    total = 0.0
    for t in range(symbols):
        h = _equalized(realize_channel(instance, members, ants, symbol=t), instance.config.alpha, equalize)  # l x |cell|
        total += log2det_gram(h, snr)
    return total / symbols


def ish_exit_rate(instance: NetworkInstance, cell: int, symbols: int = 1,
                  noise_plus_interference: float | None = None,
                  max_receivers: int | None = DEFAULT_REFERENCE_RECEIVERS,
                  equalize: bool = True) -> float:
    """Downlink sum rate through the dual MAC with equal per-user power.

    The BS budget n*P/m is split evenly over the users of the cell and the
    rate is E[log2 det(I_l + p_user/N_I' * H'^dagger H')], H' stacking the
    downlink rows of the users. ``equalize`` acts as in ``ish_access_rate``.
    """
    members = instance.cell_members(cell)
    if len(members) == 0:
        return 0.0
    n_i, _ = _cell_noise(instance, cell, Direction.DOWNLINK, noise_plus_interference, max_receivers)
    cfg = instance.config
    p_user = cfg.n * cfg.power_p / cfg.m / len(members)
    ants = antenna_ids(instance, cell)
    total = 0.0
    for t in range(symbols):
        h = _equalized(realize_channel(instance, ants, members, symbol=t), instance.config.alpha,
                       equalize)  # |cell| x l
        total += log2det_gram(h.conj().T, p_user / n_i)
    return total / symbols


def _merge_stats(stats: list[InterferenceStat], direction: Direction) -> InterferenceStat:
    stats = [s for s in stats if s is not None and s.samples]
    if not stats:
        return InterferenceStat(direction=direction)
    return InterferenceStat(
        direction=direction,
        mean_power=float(np.mean([s.mean_power for s in stats])),
        max_power=float(max(s.max_power for s in stats)),
        samples=int(sum(s.samples for s in stats)),
    )


def ish_throughput(instance: NetworkInstance, symbols: int = 1,
                   max_receivers: int | None = DEFAULT_REFERENCE_RECEIVERS,
                   equalize: bool = True) -> ProtocolResult:
    """Sum over cells of min(access, exit) with all cells active at once.

    Interference comes from every out-of-cell transmitter at full power,
    which upper-bounds it under the power back-off of ``equalize``.
    """
    up_all = full_activation_interference(instance, Direction.UPLINK, max_receivers)
    down_all = full_activation_interference(instance, Direction.DOWNLINK, max_receivers)
    n0 = instance.config.noise_n0
    rates, access, exit_, up_stats, down_stats = [], [], [], [], []
    active = 0
    for c in range(instance.m):
        if len(instance.cell_members(c)) == 0:
            rates.append(0.0)
            access.append(0.0)
            exit_.append(0.0)
            continue
        up, down = up_all[c], down_all[c]
        a = ish_access_rate(instance, c, symbols, up.mean_power + n0, equalize=equalize)
        e = ish_exit_rate(instance, c, symbols, down.mean_power + n0, equalize=equalize)
        access.append(a)
        exit_.append(e)
        rates.append(min(a, e))
        up_stats.append(up)
        down_stats.append(down)
        active += len(instance.cell_members(c))
    return ProtocolResult(
        scheme=Scheme.ISH,
        per_cell_rate=rates,
        total_throughput=float(sum(rates)),
        active_pairs=active,
        route_failures=0,
        interference=(_merge_stats(up_stats, Direction.UPLINK),
                      _merge_stats(down_stats, Direction.DOWNLINK)),
        access_total=float(sum(access)),
        exit_total=float(sum(exit_)),
    )


def hc_exponent(alpha: float) -> float:
    """Throughput exponent 2 - alpha/2 of hierarchical cooperation (extended)."""
    if not alpha > 2:
        raise ValueError(f"alpha must exceed 2, got {alpha}")
    return 2.0 - alpha / 2.0


# ---------------------------------------------------------------------------
# Routing-cell grid shared by IMH and MH


@dataclass(frozen=True, eq=False)
class RoutingGrid:
    """Square routing cells of side about sqrt(2*log2 n) tiling the area.

    The grid covers the whole area independently of the BS cells, so a
    routing cell may straddle a BS-cell border. Routing cell ``(gx, gy)`` has id
    ``gy*per_side + gx``; its relay is the member node nearest its centre.
    """

    per_side: int
    side: float
    node_cell: np.ndarray
    occupancy: np.ndarray
    relay: np.ndarray

    def cell_id(self, gx, gy):
        return np.asarray(gy) * self.per_side + np.asarray(gx)

    def coords(self, cell):
        cell = np.asarray(cell)
        return cell % self.per_side, cell // self.per_side

    def locate(self, points: np.ndarray) -> np.ndarray:
        idx = np.floor(np.asarray(points) / self.side).astype(np.int64)
        np.clip(idx, 0, self.per_side - 1, out=idx)
        return idx[..., 1] * self.per_side + idx[..., 0]


def routing_grid(instance: NetworkInstance) -> RoutingGrid:
    """Routing grid of ``instance`` (cached on the instance)."""
    grid = instance._cache.get("routing_grid")
    if grid is not None:
        return grid
    cfg = instance.config
    target = math.sqrt(2.0 * math.log2(max(cfg.n, 2)))
    k = max(1, int(cfg.area_side // target))
    side = cfg.area_side / k
    idx = np.clip(np.floor(instance.nodes / side).astype(np.int64), 0, k - 1)
    node_cell = idx[:, 1] * k + idx[:, 0]
    centre = (idx + 0.5) * side
    dist = np.hypot(*(instance.nodes - centre).T)
    order = np.lexsort((dist, node_cell))
    first = np.ones(len(order), dtype=bool)
    first[1:] = node_cell[order[1:]] != node_cell[order[:-1]]
    relay = np.full(k * k, -1, dtype=np.int64)
    relay[node_cell[order[first]]] = order[first]
    grid = RoutingGrid(per_side=k, side=side, node_cell=node_cell,
                       occupancy=np.bincount(node_cell, minlength=k * k), relay=relay)
    instance._cache["routing_grid"] = grid
    return grid


def tdma_color(gx, gy):
    """9-TDMA slot (0..8) of routing cell (gx, gy)."""
    return (np.asarray(gx) % 3) + 3 * (np.asarray(gy) % 3)


def l_path(start: tuple[int, int], end: tuple[int, int]) -> list[tuple[int, int]]:
    """Routing cells from ``start`` to ``end``, horizontal leg first (both ends included)."""
    (x0, y0), (x1, y1) = start, end
    sx = 1 if x1 >= x0 else -1
    sy = 1 if y1 >= y0 else -1
    cells = [(x, y0) for x in range(x0, x1 + sx, sx)]
    cells += [(x1, y) for y in range(y0 + sy, y1 + sy, sy)]
    return cells


# ---------------------------------------------------------------------------
# IMH: multi-hop access to / exit from the BS boundary antennas


@dataclass
class Route:
    """One multi-hop route; ``cells`` are routing-cell coordinates from the
    source end to the sink end."""

    source: int  # global endpoint id of the first transmitter
    sink: int  # global endpoint id of the last receiver
    cells: list[tuple[int, int]]
    failed: bool = False

    @property
    def hop_count(self) -> int:
        # relay to relay between consecutive cells; a same-cell route is one hop
        return max(1, len(self.cells) - 1)


@dataclass
class RoutePlan:
    cell: int
    grid: RoutingGrid
    access: list[Route]
    exit: list[Route]

    @property
    def route_failures(self) -> int:
        return sum(r.failed for r in self.access) + sum(r.failed for r in self.exit)

    def schedule(self) -> np.ndarray:
        """TDMA colour of every routing cell, indexed by routing-cell id."""
        gx, gy = self.grid.coords(np.arange(self.grid.per_side**2))
        return tdma_color(gx, gy)


def _route_hops(grid: RoutingGrid, node_end: int, ant_end: int, ant_cell: int,
                towards_antenna: bool) -> tuple[Route, list[tuple[int, int, int]]]:
    """Route between a node and an antenna, plus its (tx id, rx id, tx cell) hops."""
    start = tuple(int(v) for v in grid.coords(grid.node_cell[node_end]))
    end = tuple(int(v) for v in grid.coords(ant_cell))
    path = l_path(start, end)
    # hops run relay to relay, as in MH; the source's packet leaves from the
    # relay of its own routing cell and the antenna ends the last hop
    relays = [int(grid.relay[grid.cell_id(*c)]) for c in (path[:-1] or path)]
    failed = any(r < 0 for r in relays)
    ends = relays + [ant_end]
    end_cells = [int(grid.cell_id(*c)) for c in path[:len(ends) - 1]] + [int(ant_cell)]
    hops = []
    if not failed:
        for i in range(len(ends) - 1):
            if towards_antenna:
                hops.append((ends[i], ends[i + 1], end_cells[i]))
            else:
                hops.append((ends[i + 1], ends[i], end_cells[i + 1]))
    if towards_antenna:
        route = Route(source=node_end, sink=ant_end, cells=path, failed=failed)
    else:
        route = Route(source=ant_end, sink=node_end, cells=path[::-1], failed=failed)
    return route, hops


def _angular_sources(instance: NetworkInstance, cell: int, members: np.ndarray, count: int) -> np.ndarray:
    """For boundary antenna t < count, the unused member closest in angle to it.

    Angles are taken about the BS centre, so the L-shaped path of every
    route approaches the disk from outside and never crosses its empty
    interior.
    """
    centre = instance.bs_centers[cell]
    phi = np.arctan2(instance.nodes[members, 1] - centre[1], instance.nodes[members, 0] - centre[0])
    ant = instance.antennas[cell, :count] - centre
    theta = np.arctan2(ant[:, 1], ant[:, 0])
    free = np.ones(len(members), dtype=bool)
    chosen = np.empty(count, dtype=np.int64)
    for t in range(count):
        gap = np.abs(np.angle(np.exp(1j * (phi - theta[t]))))
        gap[~free] = np.inf
        j = int(np.argmin(gap))
        free[j] = False
        chosen[t] = members[j]
    return chosen


def _imh_routes(instance: NetworkInstance, cell: int):
    grid = routing_grid(instance)
    members = instance.cell_members(cell)
    count = min(instance.config.boundary_antennas, len(members))
    sources = _angular_sources(instance, cell, members, count)
    ants = antenna_ids(instance, cell, np.arange(count))
    ant_cells = grid.locate(endpoint_positions(instance, ants))
    access, exit_, up_hops, down_hops = [], [], [], []
    for t in range(count):
        node = int(sources[t])
        r, h = _route_hops(grid, node, int(ants[t]), int(ant_cells[t]), True)
        access.append(r)
        up_hops.append(h)
        r, h = _route_hops(grid, node, int(ants[t]), int(ant_cells[t]), False)
        exit_.append(r)
        down_hops.append(h)
    return RoutePlan(cell=cell, grid=grid, access=access, exit=exit_), up_hops, down_hops


def imh_plan(instance: NetworkInstance, cell: int) -> RoutePlan:
    """Access and exit routes of one BS cell.

    One route per boundary antenna: min(l, boundary slots) nodes of the cell,
    each the closest in angle to its antenna, are routed horizontally then
    vertically to the routing cell holding that antenna. Hops go from relay
    to relay; the relay of the last cell before the antenna's (or of the
    source's own cell when they coincide) sends the final hop to the antenna.
    Exit routes are the reversed paths. A route whose path crosses an empty routing
    cell is marked failed.
    """
    return _imh_routes(instance, cell)[0]


def hop_sinr(instance: NetworkInstance, hops: np.ndarray, power: float | None = None
             ) -> tuple[np.ndarray, np.ndarray]:
    """SINR of every hop under 9-TDMA.

    ``hops`` is an integer array of rows (tx id, rx id, tx routing cell).
    Worst-case load: every non-empty routing cell is active in its colour
    slot and interferes through its relay at ``power``; the hop's own cell
    is excluded. Returns (sinr, interference power).
    """
    cfg = instance.config
    p = cfg.power_p if power is None else power
    hops = np.asarray(hops, dtype=np.int64).reshape(-1, 3)
    if len(hops) == 0:
        return np.empty(0), np.empty(0)
    grid = routing_grid(instance)
    tx_pos = endpoint_positions(instance, hops[:, 0])
    rx_pos = endpoint_positions(instance, hops[:, 1])
    d2 = np.sum((tx_pos - rx_pos) ** 2, axis=1)
    signal = p * d2 ** (-cfg.alpha / 2)
    active = np.flatnonzero(grid.relay >= 0)
    act_color = tdma_color(*grid.coords(active))
    hop_color = tdma_color(*grid.coords(hops[:, 2]))
    interference = np.zeros(len(hops))
    for c in np.unique(hop_color):
        sel = np.flatnonzero(hop_color == c)
        src = active[act_color == c]
        if len(src) == 0:
            continue
        interference[sel] = _received_power(
            rx_pos[sel], instance.nodes[grid.relay[src]], np.full(len(src), p), cfg.alpha,
            rx_group=hops[sel, 2], tx_group=src)
    return signal / (cfg.noise_n0 + interference), interference


def _route_rates(hops_per_route: list, sinr: np.ndarray) -> np.ndarray:
    rates = np.zeros(len(hops_per_route))
    pos = 0
    for i, hops in enumerate(hops_per_route):
        if hops:
            rates[i] = np.log2(1.0 + sinr[pos:pos + len(hops)]).min() / TDMA_SLOTS
            pos += len(hops)
    return rates


def _stat(direction: Direction, values: np.ndarray) -> InterferenceStat:
    if values.size == 0:
        return InterferenceStat(direction=direction)
    return InterferenceStat(direction=direction, mean_power=float(values.mean()),
                            max_power=float(values.max()), samples=int(values.size))


def imh_throughput(instance: NetworkInstance, symbols: int = 1) -> ProtocolResult:
    """IMH throughput: per cell min(access, exit), summed over cells.

    A route carries (1/9)*min over its hops of log2(1 + SINR); a cell's
    access (exit) rate is the sum over its successful routes. Received
    powers carry no phase, so ``symbols`` does not change the value.
    """
    plans, up_routes, down_routes = [], [], []
    for c in range(instance.m):
        plan, up, down = _imh_routes(instance, c)
        plans.append(plan)
        up_routes.append(up)
        down_routes.append(down)
    flat_up = [h for cell in up_routes for h in cell]
    flat_down = [h for cell in down_routes for h in cell]
    up_sinr, up_int = hop_sinr(instance, [x for h in flat_up for x in h])
    down_sinr, down_int = hop_sinr(instance, [x for h in flat_down for x in h])
    up_rate = _route_rates(flat_up, up_sinr)
    down_rate = _route_rates(flat_down, down_sinr)
    rates, access, exit_ = [], [], []
    pos = 0
    for c in range(instance.m):
        k = len(up_routes[c])
        a = float(up_rate[pos:pos + k].sum())
        e = float(down_rate[pos:pos + k].sum())
        pos += k
        access.append(a)
        exit_.append(e)
        rates.append(min(a, e))
    return ProtocolResult(
        scheme=Scheme.IMH,
        per_cell_rate=rates,
        total_throughput=float(sum(rates)),
        active_pairs=int(sum(not r.failed for p in plans for r in p.access)),
        route_failures=int(sum(p.route_failures for p in plans)),
        interference=(_stat(Direction.UPLINK, up_int), _stat(Direction.DOWNLINK, down_int)),
        access_total=float(sum(access)),
        exit_total=float(sum(exit_)),
        hop_sinr=np.concatenate([up_sinr, down_sinr]),
    )


# ---------------------------------------------------------------------------
# MH: pure ad hoc multi-hop over the global routing grid


def route_loads(grid: RoutingGrid, src_cells: np.ndarray, dst_cells: np.ndarray
                ) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell load of L-shaped routes and a success mask.

    A route fails when its path crosses an empty routing cell; failed
    routes add no load. Returns (load of shape (k, k) indexed [gy, gx], ok).
    """
    k = grid.per_side
    sx, sy = grid.coords(np.asarray(src_cells))
    dx, dy = grid.coords(np.asarray(dst_cells))
    empty = (grid.occupancy == 0).reshape(k, k).astype(np.int64)
    row_pref = np.zeros((k, k + 1), dtype=np.int64)
    row_pref[:, 1:] = np.cumsum(empty, axis=1)
    col_pref = np.zeros((k + 1, k), dtype=np.int64)
    col_pref[1:] = np.cumsum(empty, axis=0)

    lo, hi = np.minimum(sx, dx), np.maximum(sx, dx)
    # vertical leg runs in column dx and excludes the corner row sy
    vert = dy != sy
    vlo = np.where(dy > sy, sy + 1, dy)
    vhi = np.where(dy > sy, dy, sy - 1)
    blocked = row_pref[sy, hi + 1] - row_pref[sy, lo]
    blocked = blocked + np.where(vert, col_pref[np.where(vert, vhi, 0) + 1, dx]
                                 - col_pref[np.where(vert, vlo, 0), dx], 0)
    ok = blocked == 0

    diff_h = np.zeros((k, k + 1), dtype=np.int64)
    np.add.at(diff_h, (sy[ok], lo[ok]), 1)
    np.add.at(diff_h, (sy[ok], hi[ok] + 1), -1)
    load = np.cumsum(diff_h, axis=1)[:, :k]
    v = ok & vert
    diff_v = np.zeros((k + 1, k), dtype=np.int64)
    np.add.at(diff_v, (vlo[v], dx[v]), 1)
    np.add.at(diff_v, (vhi[v] + 1, dx[v]), -1)
    load = load + np.cumsum(diff_v, axis=0)[:k]
    return load, ok


def mh_throughput(instance: NetworkInstance, symbols: int = 1) -> ProtocolResult:
    """Multi-hop baseline: n_success * min over routing cells of rate / load.

    Every S-D pair is routed horizontally then vertically through the relays
    of the global routing grid. A routing cell's rate is (1/9)*log2(1 + SINR)
    for its worst link to a non-empty 4-neighbour, all non-empty cells of the
    same colour interfering. Pairs whose path crosses an empty routing cell
    count as route failures and are excluded from n_success.
    """
    grid = routing_grid(instance)
    k = grid.per_side
    src_cells = grid.node_cell
    dst_cells = grid.node_cell[instance.pairing]
    load, ok = route_loads(grid, src_cells, dst_cells)
    load = load.ravel()

    busy = np.flatnonzero(grid.relay >= 0)
    gx, gy = grid.coords(busy)
    hops = []
    for ddx, ddy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        nx, ny = gx + ddx, gy + ddy
        inside = (nx >= 0) & (nx < k) & (ny >= 0) & (ny < k)
        nb = np.full(len(busy), -1)
        nb[inside] = grid.relay[grid.cell_id(nx[inside], ny[inside])]
        sel = nb >= 0
        hops.append(np.column_stack([grid.relay[busy[sel]], nb[sel], busy[sel]]))
    hops = np.concatenate(hops) if hops else np.empty((0, 3), dtype=np.int64)
    # cells without a non-empty neighbour can only carry pairs inside the cell
    isolated = np.setdiff1d(busy, hops[:, 2])
    local = ok & np.isin(src_cells, isolated) & (src_cells == dst_cells)
    if local.any():
        own = np.flatnonzero(local)
        hops = np.concatenate([hops, np.column_stack([own, instance.pairing[own], src_cells[own]])])
    sinr, interference = hop_sinr(instance, hops)

    worst = np.full(k * k, np.inf)
    if len(hops):
        np.minimum.at(worst, hops[:, 2], sinr)
    rate = np.where(np.isfinite(worst), np.log2(1.0 + np.where(np.isfinite(worst), worst, 0.0)), 0.0)
    rate /= TDMA_SLOTS
    loaded = load > 0
    n_success = int(ok.sum())
    if n_success == 0 or not loaded.any():
        total = 0.0
    else:
        total = n_success * float(np.min(rate[loaded] / load[loaded]))
    hop_cells = np.unique(hops[:, 2]) if len(hops) else np.empty(0, dtype=np.int64)
    return ProtocolResult(
        scheme=Scheme.MH,
        per_cell_rate=[float(r) for r in rate],
        total_throughput=total,
        active_pairs=n_success,
        route_failures=int((~ok).sum()),
        interference=(_stat(Direction.UPLINK, interference), InterferenceStat(Direction.DOWNLINK)),
        hop_sinr=worst[hop_cells],
        extra={"max_load": int(load.max()) if load.size else 0},
    )


# ---------------------------------------------------------------------------
# BS backbone accounting


@dataclass
class BackboneLoad:
    x_matrix: np.ndarray  # X[k, i]: sources in cell i whose destination is in cell k
    required_cbs: float


def backbone_load(instance: NetworkInstance, t_n: float) -> BackboneLoad:
    """Destination/source cell counts and the backbone rate (T_n/n)*max X."""
    m = instance.m
    src = instance.cell_index
    dst = instance.cell_index[instance.pairing]
    x = np.zeros((m, m), dtype=np.int64)
    np.add.at(x, (dst, src), 1)
    return BackboneLoad(x_matrix=x, required_cbs=float(t_n) / instance.n * float(x.max()))
