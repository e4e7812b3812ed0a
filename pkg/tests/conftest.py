import numpy as np
import pytest

from hybridnet.netgen import NetworkConfig, NetworkInstance, _cell_of


def make_instance(config: NetworkConfig, nodes, antennas, bs_centers=None, pairing=None) -> NetworkInstance:
    """Hand-placed instance; cells and pairing follow the generator's rules."""
    nodes = np.asarray(nodes, dtype=float).reshape(-1, 2)
    k = config.cells_per_side
    if bs_centers is None:
        grid = (np.arange(k) + 0.5) * config.cell_side
        gx, gy = np.meshgrid(grid, grid)
        bs_centers = np.column_stack([gx.ravel(), gy.ravel()])
    if pairing is None:
        pairing = np.roll(np.arange(len(nodes)), 1) if len(nodes) > 1 else np.zeros(1, dtype=np.int64)
    return NetworkInstance(
        config=config,
        nodes=nodes.copy(),
        bs_centers=np.asarray(bs_centers, dtype=float).copy(),
        antennas=np.asarray(antennas, dtype=float).reshape(config.m, config.l, 2).copy(),
        cell_index=_cell_of(nodes, k, config.cell_side),
        pairing=np.asarray(pairing, dtype=np.int64).copy(),
    )


@pytest.fixture
def make():
    return make_instance
