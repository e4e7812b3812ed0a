"""Random network instances: nodes, base stations, antennas, cells and S-D pairing.

The area is a square of side 1 (dense) or sqrt(n) (extended), tiled by m
square cells with one base station (BS) disk at each cell centre. Nodes are
uniform on the square minus the BS disks.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np
from scipy.spatial import cKDTree

__all__ = [
    "Geometry",
    "NetworkConfig",
    "NetworkInstance",
    "GeometryReport",
    "PlacementError",
    "generate_network",
    "measure_geometry",
    "chernoff_bound",
    "instance_to_json",
    "instance_from_json",
    "derive_seed",
]

MAX_ATTEMPTS_PER_NODE = 10**6


class Geometry(str, Enum):
    DENSE = "dense"
    EXTENDED = "extended"


class PlacementError(RuntimeError):
    """Rejection sampling could not place the nodes outside the BS disks."""


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def derive_seed(*keys: int) -> int:
    """Deterministic 64-bit seed from a tuple of non-negative integers."""
    state = np.random.SeedSequence([int(k) for k in keys]).generate_state(2, np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


@dataclass(frozen=True)
class NetworkConfig:
    """Scaling parameters of a hybrid network.

    ``m`` and ``l`` are derived: ``l = round(n**gamma)`` and ``m`` is the
    largest perfect square not exceeding ``round(n**beta)`` so the cells tile
    the square exactly.
    """

    n: int
    alpha: float = 3.0
    beta: float = 0.0
    gamma: float = 0.0
    epsilon0: float = 0.1
    power_p: float = 1.0
    noise_n0: float = 1.0
    geometry: Geometry = Geometry.EXTENDED
    seed: int = 0
    # boundary antenna slots = ceil(boundary_constant * sqrt(n/m))
    boundary_constant: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "geometry", Geometry(self.geometry))
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if not self.alpha > 2:
            raise ValueError(f"alpha must exceed 2, got {self.alpha}")
        if not 0 <= self.beta < 1:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta}")
        if not 0 <= self.gamma < 1:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")
        if self.beta + self.gamma > 1 + 1e-12:
            raise ValueError("beta + gamma must not exceed 1")
        if not 0 < self.epsilon0 <= 0.25:
            raise ValueError(f"epsilon0 must lie in (0, 1/4], got {self.epsilon0}")
        if self.power_p <= 0 or self.noise_n0 <= 0:
            raise ValueError("power_p and noise_n0 must be positive")
        if self.boundary_constant <= 0:
            raise ValueError("boundary_constant must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.m * self.l > self.n:
            raise ValueError(f"m*l = {self.m * self.l} exceeds n = {self.n}")

    @property
    def m(self) -> int:
        target = max(1, _round_half_up(self.n**self.beta))
        return math.isqrt(target) ** 2

    @property
    def l(self) -> int:  # noqa: E743
        return max(1, _round_half_up(self.n**self.gamma))

    @property
    def cells_per_side(self) -> int:
        return math.isqrt(self.m)

    @property
    def area_side(self) -> float:
        return 1.0 if self.geometry is Geometry.DENSE else math.sqrt(self.n)

    @property
    def cell_side(self) -> float:
        return self.area_side / self.cells_per_side

    @property
    def bs_radius(self) -> float:
        # eps0/sqrt(m) (dense) and eps0*sqrt(n/m) (extended) are both eps0 * cell side
        return self.epsilon0 * self.cell_side

    @property
    def boundary_capacity(self) -> int:
        return max(1, math.ceil(self.boundary_constant * math.sqrt(self.n / self.m) - 1e-12))

    @property
    def boundary_antennas(self) -> int:
        return min(self.l, self.boundary_capacity)

    def replace(self, **changes) -> "NetworkConfig":
        data = asdict(self)
        data.update(changes)
        return NetworkConfig(**data)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["geometry"] = self.geometry.value
        return data


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class NetworkInstance:
    """One realized network. Arrays are read-only after construction.

    ``antennas`` has shape (m, l, 2); the first ``config.boundary_antennas``
    antennas of every BS sit on its boundary circle.
    """

    config: NetworkConfig
    nodes: np.ndarray
    bs_centers: np.ndarray
    antennas: np.ndarray
    cell_index: np.ndarray
    pairing: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        for name in ("nodes", "bs_centers", "antennas", "cell_index", "pairing"):
            _readonly(getattr(self, name))

    @property
    def area_side(self) -> float:
        return self.config.area_side

    @property
    def n(self) -> int:
        return self.config.n

    @property
    def m(self) -> int:
        return self.config.m

    @property
    def l(self) -> int:  # noqa: E743
        return self.config.l

    @property
    def antenna_positions(self) -> np.ndarray:
        """All antennas flattened to shape (m*l, 2); antenna (s, t) is row s*l + t."""
        return self.antennas.reshape(-1, 2)

    def cell_members(self, cell: int) -> np.ndarray:
        """Node ids in ``cell`` (ascending)."""
        members = self._cache.get("members")
        if members is None:
            order = np.argsort(self.cell_index, kind="stable")
            bounds = np.searchsorted(self.cell_index[order], np.arange(self.m + 1))
            members = [order[bounds[c]:bounds[c + 1]] for c in range(self.m)]
            self._cache["members"] = members
        return members[cell]


@dataclass
class GeometryReport:
    per_cell_counts: list[int]
    min_node_distance: float
    min_node_antenna_distance: float


def _cell_of(points: np.ndarray, k: int, cell_side: float) -> np.ndarray:
    idx = np.floor(points / cell_side).astype(np.int64)
    np.clip(idx, 0, k - 1, out=idx)
    return idx[:, 1] * k + idx[:, 0]


def _random_derangement(n: int, rng: np.random.Generator) -> np.ndarray:
    if n == 1:
        return np.zeros(1, dtype=np.int64)
    ident = np.arange(n)
    while True:
        perm = rng.permutation(n)
        if not np.any(perm == ident):
            return perm.astype(np.int64)


def generate_network(config: NetworkConfig) -> NetworkInstance:
    """Sample a network instance; deterministic in ``config.seed``."""
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0x6E6574]))
    n, m, l = config.n, config.m, config.l
    k = config.cells_per_side
    side, cs, radius = config.area_side, config.cell_side, config.bs_radius

    grid = (np.arange(k) + 0.5) * cs
    gx, gy = np.meshgrid(grid, grid)
    centers = np.column_stack([gx.ravel(), gy.ravel()])  # cell id = iy*k + ix

    nodes = np.empty((n, 2))
    filled = attempts = 0
    limit = MAX_ATTEMPTS_PER_NODE * n
    while filled < n:
        if attempts >= limit:
            raise PlacementError(f"could not place {n} nodes in {limit} attempts")
        batch = min(max(2 * (n - filled), 64), limit - attempts)
        pts = rng.uniform(0.0, side, size=(batch, 2))
        attempts += batch
        # disks lie strictly inside their cells, so only the own-cell BS can contain a point
        own = centers[_cell_of(pts, k, cs)]
        ok = pts[np.hypot(*(pts - own).T) > radius]
        take = min(len(ok), n - filled)
        nodes[filled:filled + take] = ok[:take]
        filled += take

    nb = config.boundary_antennas
    antennas = np.empty((m, l, 2))
    angles = 2 * np.pi * np.arange(nb) / nb
    ring = radius * np.column_stack([np.cos(angles), np.sin(angles)])
    antennas[:, :nb] = centers[:, None, :] + ring[None]
    if l > nb:
        r = radius * np.sqrt(rng.uniform(size=(m, l - nb)))
        th = rng.uniform(0, 2 * np.pi, size=(m, l - nb))
        antennas[:, nb:, 0] = centers[:, None, 0] + r * np.cos(th)
        antennas[:, nb:, 1] = centers[:, None, 1] + r * np.sin(th)

    return NetworkInstance(
        config=config,
        nodes=nodes,
        bs_centers=centers,
        antennas=antennas,
        cell_index=_cell_of(nodes, k, cs),
        pairing=_random_derangement(n, rng),
    )


def measure_geometry(instance: NetworkInstance) -> GeometryReport:
    counts = np.bincount(instance.cell_index, minlength=instance.m)
    if instance.n > 1:
        d, _ = cKDTree(instance.nodes).query(instance.nodes, k=2)
        min_nn = float(d[:, 1].min())
    else:
        min_nn = math.inf
    d, _ = cKDTree(instance.antenna_positions).query(instance.nodes, k=1)
    return GeometryReport(
        per_cell_counts=[int(c) for c in counts],
        min_node_distance=min_nn,
        min_node_antenna_distance=float(d.min()),
    )


def chernoff_delta(delta0: float) -> float:
    return (1 + delta0) * math.log1p(delta0) - delta0


def chernoff_bound(delta0: float, n: int, beta: float) -> float:
    """Lower bound on P(every cell holds between (1-d)n/m and (1+d)n/m nodes).

    Not clamped: small n gives a negative (vacuous) value.
    """
    if not 0 < delta0 < 1:
        raise ValueError(f"delta0 must lie in (0, 1), got {delta0}")
    return 1.0 - n**beta * math.exp(-chernoff_delta(delta0) * n ** (1 - beta))


def instance_to_json(instance: NetworkInstance) -> str:
    doc = {
        "config": instance.config.to_dict(),
        "nodes": instance.nodes.tolist(),
        "bs_centers": instance.bs_centers.tolist(),
        "antennas": instance.antennas.tolist(),
        "cell_index": instance.cell_index.tolist(),
        "pairing": instance.pairing.tolist(),
    }
    return json.dumps(doc, separators=(",", ":"))


def instance_from_json(text: str) -> NetworkInstance:
    doc = json.loads(text)
    config = NetworkConfig(**doc["config"])
    m, l = config.m, config.l
    return NetworkInstance(
        config=config,
        nodes=np.asarray(doc["nodes"], dtype=float).reshape(config.n, 2),
        bs_centers=np.asarray(doc["bs_centers"], dtype=float).reshape(m, 2),
        antennas=np.asarray(doc["antennas"], dtype=float).reshape(m, l, 2),
        cell_index=np.asarray(doc["cell_index"], dtype=np.int64),
        pairing=np.asarray(doc["pairing"], dtype=np.int64),
    )
