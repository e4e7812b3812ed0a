"""Monte Carlo and analytic toolkit for hybrid ad hoc networks with multi-antenna BSs."""

from .netgen import Geometry, NetworkConfig, NetworkInstance, generate_network, measure_geometry
from .protocols import Scheme, ProtocolResult, ish_throughput, imh_throughput, mh_throughput
from .regimes import classify, scheme_exponents

__version__ = "0.1.0"

__all__ = [
    "Geometry",
    "NetworkConfig",
    "NetworkInstance",
    "generate_network",
    "measure_geometry",
    "Scheme",
    "ProtocolResult",
    "ish_throughput",
    "imh_throughput",
    "mh_throughput",
    "classify",
    "scheme_exponents",
]
