"""Closed-form throughput exponents and operating-regime classification.

Exponents are those of extended networks with m = n**beta BSs carrying
l = n**gamma antennas each. The best scheme as a function of alpha is read
off piecewise-constant intervals; every boundary alpha belongs to the
scheme on its right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "Regime",
    "RegimeReport",
    "scheme_exponents",
    "regime_of",
    "classify",
    "dense_exponent",
    "atlas_beta_gamma",
    "atlas_alpha",
]

SCHEMES = ("ISH", "IMH", "MH", "HC")


class Regime(str, Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"


@dataclass
class RegimeReport:
    regime: Regime
    exponents: dict[str, float]
    best: str
    best_exponent: float
    boundaries: list[tuple[float, str]] = field(default_factory=list)
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "regime": self.regime.value,
            "best": self.best,
            "exponent": self.best_exponent,
            "exponents": dict(self.exponents),
            "boundaries": [[a, s] for a, s in self.boundaries],
            "degenerate": self.degenerate,
        }


def _check_domain(beta: float, gamma: float, alpha: float | None = None) -> None:
    if alpha is not None and not alpha > 2:
        raise ValueError(f"alpha must exceed 2, got {alpha}")
    if not 0 <= beta < 1 or not 0 <= gamma < 1:
        raise ValueError(f"beta and gamma must lie in [0, 1), got {beta}, {gamma}")
    if beta + gamma > 1 + 1e-12:
        raise ValueError(f"beta + gamma must not exceed 1, got {beta + gamma}")


def scheme_exponents(alpha: float, beta: float, gamma: float) -> dict[str, float]:
    """Achievable exponents of ISH, IMH, MH and HC."""
    _check_domain(beta, gamma, alpha)
    return {
        "ISH": 1.0 + gamma - (1.0 - beta) * alpha / 2.0,
        "IMH": min(beta + gamma, (beta + 1.0) / 2.0),
        "MH": 0.5,
        "HC": 2.0 - alpha / 2.0,
    }


def regime_of(beta: float, gamma: float) -> Regime:
    """Operating regime of (beta, gamma); conditions are tried in order A, B, C, D."""
    _check_domain(beta, gamma)
    if beta + gamma < 0.5:
        return Regime.A
    if beta + 2.0 * gamma < 1.0:
        return Regime.B
    if gamma < (beta * beta - 3.0 * beta + 2.0) / 2.0:
        return Regime.C
    # also takes the edge beta + gamma = 1
    return Regime.D


def _boundaries(regime: Regime, beta: float, gamma: float) -> list[tuple[float, str]]:
    if regime is Regime.A:
        return [(3.0, "MH")]
    if regime is Regime.B:
        return [(4.0 - 2.0 * beta - 2.0 * gamma, "IMH")]
    if regime is Regime.C:
        return [(3.0 - beta, "IMH")]
    first = 2.0 * (1.0 - gamma) / beta if beta > 0 else math.inf
    return [(first, "ISH"), (1.0 + 2.0 * gamma / (1.0 - beta), "IMH")]


def classify(alpha: float, beta: float, gamma: float) -> RegimeReport:
    """Regime, exponents and best scheme at (alpha, beta, gamma).

    HC is best left of the first boundary. ``degenerate`` is set when a
    boundary falls at or below alpha = 2 (the corner beta + gamma = 1 of
    regime D, where HC never wins).
    """
    exps = scheme_exponents(alpha, beta, gamma)
    regime = regime_of(beta, gamma)
    bounds = _boundaries(regime, beta, gamma)
    degenerate = any(a <= 2.0 + 1e-9 for a, _ in bounds) or any(
        b[0] >= c[0] for b, c in zip(bounds[:-1], bounds[1:]))
    best = "HC"
    for threshold, scheme in bounds:
        if alpha >= threshold:
            best = scheme
    return RegimeReport(
        regime=regime,
        exponents=exps,
        best=best,
        best_exponent=exps[best],
        boundaries=[(float(a), s) for a, s in bounds if math.isfinite(a)],
        degenerate=degenerate,
    )


def dense_exponent() -> float:
    """Exponent of dense networks: 1 for every (alpha, beta, gamma)."""
    return 1.0


def atlas_beta_gamma(alpha: float, grid: int) -> list[dict]:
    """Classification over a grid x grid lattice of (beta, gamma) in [0, 1).

    Points with beta + gamma > 1 are skipped.
    """
    if grid < 1:
        raise ValueError("grid must be positive")
    values = np.arange(grid) / grid
    rows = []
    for beta in values:
        for gamma in values:
            if beta + gamma > 1:
                continue
            rep = classify(alpha, float(beta), float(gamma))
            rows.append({"alpha": alpha, "beta": float(beta), "gamma": float(gamma),
                         "regime": rep.regime.value, "best": rep.best,
                         "exponent": rep.best_exponent})
    return rows


def atlas_alpha(beta: float, gamma: float, alphas) -> list[dict]:
    """Exponents of every scheme and the best one along a sweep of alpha."""
    rows = []
    for alpha in alphas:
        rep = classify(float(alpha), beta, gamma)
        row = {"alpha": float(alpha), "beta": beta, "gamma": gamma, "regime": rep.regime.value}
        row.update({f"e_{s}": rep.exponents[s] for s in SCHEMES})
        row.update({"best": rep.best, "exponent": rep.best_exponent})
        rows.append(row)
    return rows
