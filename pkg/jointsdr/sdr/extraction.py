"""
Symbol retrieval from a solved SDR block.

``direct`` and ``rank1`` give soft values ``t*x`` in roughly [-1, 1] that can
feed an LLR mapping. ``randomized`` returns hard +-1 symbols only.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np

from jointsdr.coding.ldpc import LlrFrame
from jointsdr.core.errors import DimensionError
from jointsdr.sdr.forms import CostMatrix

DEGENERACY_TOL = 1e-9
LLR_DELTA = 1e-6


@dataclass(frozen=True)
class SoftSymbolVector:
    """Soft symbol estimates ``t*x`` in real-vector order."""
    values: np.ndarray
    fallback: bool = False


def _check_block(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1] or X.shape[0] % 2 == 0:
        raise DimensionError(f"expected a square block of odd side, got {X.shape}")
    return X


def extract_direct(X: np.ndarray) -> SoftSymbolVector:
    """First 2Nt entries of the last column."""
    X = _check_block(X)
    return SoftSymbolVector(X[:-1, -1].copy())


def extract_rank1(X: np.ndarray) -> SoftSymbolVector:
    """
    Dominant eigenvector, scaled by ``sqrt(eigenvalue)`` and sign-fixed by the
    sign of its last entry, so a rank-one ``[x; t][x; t]^T`` yields ``t*x``.

    Falls back to :func:`extract_direct` (flagged) when the two largest
    eigenvalues coincide within ``DEGENERACY_TOL``.
    """
    X = _check_block(X)
    eigvals, eigvecs = np.linalg.eigh(0.5 * (X + X.T))
    top, second = eigvals[-1], eigvals[-2]
    if top - second <= DEGENERACY_TOL * max(1.0, abs(top)):
        return SoftSymbolVector(X[:-1, -1].copy(), fallback=True)
    v = eigvecs[:, -1]
    t = 1.0 if v[-1] >= 0 else -1.0
    return SoftSymbolVector(np.sqrt(max(top, 0.0)) * v[:-1] * t)


def _quantize(values: np.ndarray) -> np.ndarray:
    return np.where(values >= 0, 1.0, -1.0)


def extract_randomized(
    X: np.ndarray,
    cost: CostMatrix,
    trials: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Gaussian randomization: draw ``v ~ N(0, X)``, quantize, keep the cheapest.

    Each sample is sign-corrected by its last coordinate before quantization.

    Returns:
        Hard symbols (+-1) of length 2Nt
    """
    X = _check_block(X)
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if cost.side != X.shape[0]:
        raise DimensionError("cost matrix and block sizes differ")

    eigvals, eigvecs = np.linalg.eigh(0.5 * (X + X.T))
    factor = eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))
    samples = rng.standard_normal((trials, X.shape[0])) @ factor.T

    best, best_cost = None, np.inf
    for v in samples:
        t = 1.0 if v[-1] >= 0 else -1.0
        candidate = _quantize(t * v[:-1])
        value = cost.quadratic(candidate)
        if value < best_cost:
            best, best_cost = candidate, value
    return best


def hard_decision(soft: Union[SoftSymbolVector, LlrFrame, np.ndarray]) -> np.ndarray:
    """Sign with zero mapped to +1."""
    if isinstance(soft, (SoftSymbolVector, LlrFrame)):
        values = soft.values
    else:
        values = np.asarray(soft, dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValueError("hard decision needs finite input")
    return _quantize(values)


def soft_to_llr(soft: Union[SoftSymbolVector, np.ndarray], clip: float = 8.0) -> np.ndarray:
    """``2 * atanh(v)`` on values clamped away from +-1, then clipped."""
    if clip <= 0:
        raise ValueError("clip must be positive")
    values = soft.values if isinstance(soft, SoftSymbolVector) else np.asarray(soft, dtype=float)
    clamped = np.clip(values, -1.0 + LLR_DELTA, 1.0 - LLR_DELTA)
    return np.clip(2.0 * np.arctanh(clamped), -clip, clip)
