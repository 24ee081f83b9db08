"""
Candidate lists and max-log extrinsic LLRs for one snapshot.

Bit vectors here are polarized (+1 for bit 0) and ordered like the real
symbol vector ``x_k``: real parts of all antennas, then imaginary parts.
Under the real QPSK model the symbol vector equals the bit vector.
"""

from dataclasses import dataclass
from itertools import combinations, product
from math import comb
from typing import Dict, Optional, Tuple

import numpy as np

from jointsdr.core.errors import ConstraintLimitError, DimensionError, ListRadiusError

MAX_ENUMERATION_BITS = 24


@dataclass(frozen=True)
class CandidateList:
    """
    Hamming ball of radius ``radius`` around ``center``.

    Members are ordered by number of flips and then lexicographically by flip
    positions. Every member except the center differs from its ``parent`` in
    the single position ``flip``.
    """
    center: np.ndarray
    radius: int
    members: np.ndarray
    parent: np.ndarray
    flip: np.ndarray
    level: np.ndarray

    def __len__(self) -> int:
        return self.members.shape[0]

    @property
    def width(self) -> int:
        return self.center.size


def list_size(width: int, radius: int) -> int:
    return sum(comb(width, j) for j in range(radius + 1))


def gen_list(center: np.ndarray, P: int) -> CandidateList:
    """
    Enumerate every +-1 vector within Hamming distance ``P`` of ``center``.

    Raises:
        ListRadiusError: If ``P`` is outside ``1..len(center)``
    """
    center = np.asarray(center)
    if center.ndim != 1 or not np.all(np.abs(center) == 1):
        raise DimensionError("center must be a +-1 vector")
    width = center.size
    if not 1 <= P <= width:
        raise ListRadiusError(f"radius {P} outside 1..{width}")
    if width > MAX_ENUMERATION_BITS and list_size(width, P) > 2 ** MAX_ENUMERATION_BITS:
        raise ConstraintLimitError(f"list of radius {P} over {width} bits is too large")

    size = list_size(width, P)
    members = np.empty((size, width), dtype=np.int8)
    parent = np.full(size, -1, dtype=int)
    flip = np.full(size, -1, dtype=int)
    level = np.zeros(size, dtype=int)
    members[0] = center

    index: Dict[Tuple[int, ...], int] = {(): 0}
    row = 1
    for j in range(1, P + 1):
        for flips in combinations(range(width), j):
            p = index[flips[:-1]]
            members[row] = members[p]
            members[row, flips[-1]] *= -1
            parent[row], flip[row], level[row] = p, flips[-1], j
            index[flips] = row
            row += 1
    return CandidateList(
        center=center.astype(np.int8), radius=P, members=members, parent=parent, flip=flip, level=level
    )


def _residuals(cl: CandidateList, y: np.ndarray, H: np.ndarray) -> np.ndarray:
    """``y - H b`` for every member, one flip update per member."""
    R = np.empty((len(cl), y.size))
    R[0] = y - H @ cl.center
    for j in range(1, cl.radius + 1):
        rows = np.nonzero(cl.level == j)[0]
        parents, flips = cl.parent[rows], cl.flip[rows]
        R[rows] = R[parents] + 2.0 * cl.members[parents, flips][:, None] * H[:, flips].T
    return R


def extrinsic_llr(
    cl: CandidateList,
    y: np.ndarray,
    H: np.ndarray,
    noise_var: float,
    priors: Optional[np.ndarray] = None,
    clip: Optional[float] = 8.0,
) -> np.ndarray:
    """
    Max-log extrinsic LLRs of the list's bits.

    For bit ``i`` the metric ``-||y - H b||^2 / (2 sigma^2) + 0.5 * L_A^T b``
    is maximized separately over members with ``b_i = +1`` and ``b_i = -1``;
    the difference minus the bit's own prior ``L_A,i`` is the extrinsic value.

    Args:
        cl: Candidate list
        y: Real received vector
        H: Real channel matrix
        noise_var: Per-real-dimension noise variance
        priors: A-priori LLRs of the list's bits (zeros when omitted)
        clip: Symmetric clip bound, ``None`` for raw values
    """
    y = np.asarray(y, dtype=float)
    H = np.asarray(H, dtype=float)
    if H.shape != (y.size, cl.width):
        raise DimensionError(f"channel {H.shape} does not match y {y.shape} and {cl.width} bits")
    if noise_var <= 0:
        raise ValueError("noise variance must be positive")
    priors = np.zeros(cl.width) if priors is None else np.asarray(priors, dtype=float)
    if priors.shape != (cl.width,) or not np.all(np.isfinite(priors)):
        raise ValueError("priors must be finite and match the list width")

    R = _residuals(cl, y, H)
    metric = -np.einsum("ij,ij->i", R, R) / (2.0 * noise_var) + 0.5 * (cl.members @ priors)

    positive = cl.members > 0
    if not (positive.any(axis=0).all() and (~positive).any(axis=0).all()):
        raise ListRadiusError("a bit has no candidate for one of its values")
    best_plus = np.where(positive, metric[:, None], -np.inf).max(axis=0)
    best_minus = np.where(~positive, metric[:, None], -np.inf).max(axis=0)
    llr = best_plus - best_minus - priors
    if clip is not None:
        llr = np.clip(llr, -clip, clip)
    return llr


def full_list_detector(
    y: np.ndarray,
    H: np.ndarray,
    noise_var: float,
    priors: Optional[np.ndarray] = None,
    clip: Optional[float] = 8.0,
) -> np.ndarray:
    """Max-log extrinsic LLRs over the whole +-1 cube."""
    width = np.asarray(H).shape[1]
    if width > MAX_ENUMERATION_BITS:
        raise ConstraintLimitError(f"full list over {width} bits exceeds {MAX_ENUMERATION_BITS}")
    cl = gen_list(np.ones(width, dtype=np.int8), width)
    return extrinsic_llr(cl, y, H, noise_var, priors, clip)


def ml_brute_force(y: np.ndarray, H: np.ndarray) -> np.ndarray:
    """Exhaustive ``argmin ||y - H b||^2`` over +-1 vectors, first minimum in lexicographic order."""
    H = np.asarray(H, dtype=float)
    y = np.asarray(y, dtype=float)
    width = H.shape[1]
    if width > MAX_ENUMERATION_BITS:
        raise ConstraintLimitError(f"exhaustive search over {width} bits exceeds {MAX_ENUMERATION_BITS}")
    if y.shape != (H.shape[0],):
        raise DimensionError(f"received vector {y.shape} does not match channel {H.shape}")
    candidates = np.array(list(product((1, -1), repeat=width)), dtype=float)
    residual = y[None, :] - candidates @ H.T
    return candidates[int(np.argmin(np.einsum("ij,ij->i", residual, residual)))]
