"""Independent reference computations used as test oracles.

None of these call into hybridnet; they recompute rates from first principles
so that agreement with the package is a real cross-check.
"""

import math

import numpy as np

# log2(1 + 1/16): one link at distance 2, alpha = 4, unit SNR
LOG2_17_16 = 0.08746284125033943
# (1 + d) ln(1 + d) - d at d = 0.5
CHERNOFF_DELTA_HALF = 0.10819766216224658
# 1 - 32 exp(-Delta(0.5) * 32): n = 1024, beta = 0.5
CHERNOFF_N1024 = -0.0034165367099225907
# 1 - 64 exp(-Delta(0.5) * 64): n = 4096, beta = 0.5
CHERNOFF_N4096 = 0.9370722033660666
# OLS slope of log2(n**0.75 * log2 n) on log2 n over n = 2**10 .. 2**16:
# 0.75 plus the slope of log2 k on k for k = 10..16
LOGFACTOR_SLOPE = 0.8625545032363144


def mmse_sic_sum(h: np.ndarray, snr: float) -> float:
    """Chain-rule sum of log2(1 + SINR_k) for successive MMSE decoding.

    Column k of ``h`` is user k; users are decoded in column order and each
    treats the not-yet-decoded users as Gaussian noise.
    """
    rx, users = h.shape
    total = 0.0
    for k in range(users):
        rest = h[:, k + 1:]
        cov = np.eye(rx) + snr * rest @ rest.conj().T
        sinr = snr * np.real(h[:, k].conj() @ np.linalg.solve(cov, h[:, k]))
        total += math.log2(1.0 + sinr)
    return total


def eig_logdet(h: np.ndarray, snr: float) -> float:
    """sum over eigenvalues of H H^dagger of log2(1 + snr * lambda)."""
    lam = np.linalg.eigvalsh(h @ h.conj().T)
    return float(np.sum(np.log2(1.0 + snr * np.clip(lam, 0.0, None))))


def slogdet2(a: np.ndarray) -> float:
    sign, logabs = np.linalg.slogdet(a)
    assert sign.real > 0
    return logabs / math.log(2.0)


def random_channel(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    dist = rng.uniform(0.5, 5.0, size=(rows, cols))
    theta = rng.uniform(0.0, 2 * math.pi, size=(rows, cols))
    return dist ** (-1.5) * np.exp(1j * theta)


def brute_received(rx: np.ndarray, tx: np.ndarray, powers: np.ndarray, alpha: float) -> np.ndarray:
    out = np.zeros(len(rx))
    for i, r in enumerate(rx):
        for t, p in zip(tx, powers):
            out[i] += p * math.dist(r, t) ** (-alpha)
    return out
