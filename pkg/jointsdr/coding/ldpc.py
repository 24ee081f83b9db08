"""
LDPC code construction, systematic encoding and parity checking.

Regular codes are built with a progressive-edge-growth (PEG) style
construction: every new edge of a variable node goes to a check node that is
as far away as possible in the current Tanner graph, which keeps short cycles
out of the graph. Generator matrices are derived by Gaussian elimination over
GF(2) and are systematic on the code's information positions.
"""

from collections import deque
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from jointsdr.core.errors import CodeConstructionError, DimensionError
from jointsdr.core.logging import get_logger

logger = get_logger("coding.ldpc")

MAX_CONSTRUCTION_ATTEMPTS = 50


@dataclass(frozen=True)
class LlrFrame:
    """
    Log-likelihood ratios attached to one codeword.

    Natural-log units, ``L > 0`` means bit 0 is more likely, which is the
    polarized value ``b = 1 - 2c = +1``.
    """
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise DimensionError("LLR frame must be a vector")
        if not np.all(np.isfinite(values)):
            raise ValueError("LLR frame contains non-finite values")
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, n: int) -> "LlrFrame":
        return cls(np.zeros(n))

    def __len__(self) -> int:
        return self.values.size

    def __add__(self, other: "LlrFrame") -> "LlrFrame":
        return LlrFrame(self.values + other.values)

    def __sub__(self, other: "LlrFrame") -> "LlrFrame":
        return LlrFrame(self.values - other.values)

    def clipped(self, bound: float) -> "LlrFrame":
        return LlrFrame(np.clip(self.values, -bound, bound))

    def polarized(self) -> np.ndarray:
        """Hard decision as +-1 (zero maps to +1)."""
        return np.where(self.values >= 0, 1, -1).astype(np.int8)

    def hard_bits(self) -> np.ndarray:
        """Hard decision as bits (zero maps to bit 0)."""
        return (self.values < 0).astype(np.uint8)


@dataclass(frozen=True)
class CodeDefinition:
    """Binary linear code given by its parity-check matrix."""
    H: np.ndarray
    G: np.ndarray
    info_positions: np.ndarray
    check_neighbors: Tuple[np.ndarray, ...] = field(repr=False)
    var_neighbors: Tuple[np.ndarray, ...] = field(repr=False)

    @property
    def nc(self) -> int:
        return self.H.shape[1]

    @property
    def kc(self) -> int:
        return self.G.shape[0]

    @property
    def m(self) -> int:
        return self.H.shape[0]

    @property
    def row_weights(self) -> np.ndarray:
        return self.H.sum(axis=1)

    @property
    def col_weights(self) -> np.ndarray:
        return self.H.sum(axis=0)

    @property
    def H_sparse(self) -> sparse.csr_matrix:
        return sparse.csr_matrix(self.H)


def gf2_rref(matrix: np.ndarray, column_order: Optional[Sequence[int]] = None) -> Tuple[np.ndarray, List[int]]:
    """
    Reduced row echelon form over GF(2).

    Args:
        matrix: Binary matrix
        column_order: Order in which columns are tried as pivots

    Returns:
        The reduced matrix and the list of pivot columns (one per nonzero row)
    """
    R = (np.asarray(matrix) % 2).astype(np.uint8).copy()
    rows, cols = R.shape
    order = range(cols) if column_order is None else column_order
    pivots: List[int] = []
    r = 0
    for c in order:
        if r == rows:
            break
        hits = np.nonzero(R[r:, c])[0]
        if hits.size == 0:
            continue
        pivot_row = r + hits[0]
        if pivot_row != r:
            R[[r, pivot_row]] = R[[pivot_row, r]]
        others = np.nonzero(R[:, c])[0]
        others = others[others != r]
        R[others] ^= R[r]
        pivots.append(c)
        r += 1
    return R, pivots


def gf2_rank(matrix: np.ndarray) -> int:
    return len(gf2_rref(matrix)[1])


def code_from_parity_matrix(H: np.ndarray) -> CodeDefinition:
    """Derive a systematic generator for the null space of ``H``."""
    H = (np.asarray(H) % 2).astype(np.uint8)
    if H.ndim != 2 or H.shape[1] < 2:
        raise CodeConstructionError(f"invalid parity-check matrix shape {H.shape}")
    m, n = H.shape

    # Pivots from the right so the information positions come first
    R, pivots = gf2_rref(H, column_order=range(n - 1, -1, -1))
    rank = len(pivots)
    pivot_set = set(pivots)
    info = np.array([c for c in range(n) if c not in pivot_set], dtype=int)
    if info.size == 0:
        raise CodeConstructionError("parity-check matrix leaves no information bits")

    G = np.zeros((info.size, n), dtype=np.uint8)
    G[np.arange(info.size), info] = 1
    pivot_cols = np.array(pivots, dtype=int)
    G[:, pivot_cols] = R[:rank][:, info].T

    if np.any((G.astype(int) @ H.T.astype(int)) % 2):
        raise CodeConstructionError("generator derivation failed: G H^T != 0")

    check_neighbors = tuple(np.nonzero(row)[0] for row in H)
    var_neighbors = tuple(np.nonzero(col)[0] for col in H.T)
    if rank < m:
        logger.debug("Parity-check matrix is rank deficient", rank=rank, rows=m)
    return CodeDefinition(
        H=H,
        G=G,
        info_positions=info,
        check_neighbors=check_neighbors,
        var_neighbors=var_neighbors,
    )


def _farthest_checks(
    v: int,
    var_checks: List[List[int]],
    check_vars: List[List[int]],
    eligible: np.ndarray,
) -> np.ndarray:
    """Eligible check nodes at maximum Tanner-graph distance from variable ``v``."""
    m = len(check_vars)
    seen_checks = np.zeros(m, dtype=bool)
    seen_vars = {v}
    frontier = deque(var_checks[v])
    seen_checks[var_checks[v]] = True
    last_layer = list(var_checks[v])

    while True:
        unreached = eligible & ~seen_checks
        if unreached.any() and not frontier:
            return np.nonzero(unreached)[0]
        next_layer = []
        while frontier:
            c = frontier.popleft()
            for u in check_vars[c]:
                if u in seen_vars:
                    continue
                seen_vars.add(u)
                for c2 in var_checks[u]:
                    if not seen_checks[c2]:
                        seen_checks[c2] = True
                        next_layer.append(c2)
        if not next_layer:
            unreached = eligible & ~seen_checks
            if unreached.any():
                return np.nonzero(unreached)[0]
            layer = np.array(last_layer, dtype=int)
            return layer[eligible[layer]]
        if not (eligible & ~seen_checks).any():
            # Every eligible check is reachable; keep the ones first reached last
            layer = np.array(next_layer, dtype=int)
            return layer[eligible[layer]]
        last_layer = next_layer
        frontier = deque(next_layer)


def _peg_attempt(nc: int, m: int, col_weight: int, row_weight: int, rng: np.random.Generator) -> Optional[np.ndarray]:
    var_checks: List[List[int]] = [[] for _ in range(nc)]
    check_vars: List[List[int]] = [[] for _ in range(m)]
    degree = np.zeros(m, dtype=int)

    for v in range(nc):
        for edge in range(col_weight):
            eligible = degree < row_weight
            eligible[var_checks[v]] = False
            if not eligible.any():
                return None
            if edge == 0:
                candidates = np.nonzero(eligible)[0]
            else:
                candidates = _farthest_checks(v, var_checks, check_vars, eligible)
                if candidates.size == 0:
                    candidates = np.nonzero(eligible)[0]
            lowest = degree[candidates].min()
            candidates = candidates[degree[candidates] == lowest]
            c = int(rng.choice(candidates))
            var_checks[v].append(c)
            check_vars[c].append(v)
            degree[c] += 1

    H = np.zeros((m, nc), dtype=np.uint8)
    for v, checks in enumerate(var_checks):
        H[checks, v] = 1
    return H


def build_regular_code(nc: int, kc: int, col_weight: int, rng: np.random.Generator) -> CodeDefinition:
    """
    Build a pseudo-random regular LDPC code with a full-rank parity-check matrix.

    Args:
        nc: Codeword length
        kc: Information length
        col_weight: Ones per column of H
        rng: Seeded random source

    Returns:
        Code with exact column weight ``col_weight`` and row weight ``nc*col_weight/(nc-kc)``

    Raises:
        CodeConstructionError: If the degree profile is infeasible or no
            full-rank matrix was found within the retry budget
    """
    if not nc > kc > 0:
        raise CodeConstructionError(f"need nc > kc > 0, got ({nc}, {kc})")
    m = nc - kc
    if (nc * col_weight) % m:
        raise CodeConstructionError(
            f"column weight {col_weight} gives a fractional row weight for ({nc}, {kc})"
        )
    row_weight = nc * col_weight // m
    if col_weight > m or row_weight > nc:
        raise CodeConstructionError("degree profile does not fit the matrix dimensions")

    for attempt in range(1, MAX_CONSTRUCTION_ATTEMPTS + 1):
        H = _peg_attempt(nc, m, col_weight, row_weight, rng)
        if H is None:
            logger.debug("PEG construction got stuck, retrying", attempt=attempt)
            continue
        rank = gf2_rank(H)
        if rank < m:
            logger.debug("Rank deficient parity-check matrix, retrying", attempt=attempt, rank=rank)
            continue
        code = code_from_parity_matrix(H)
        logger.info(
            "Regular LDPC code built",
            nc=nc,
            kc=kc,
            col_weight=col_weight,
            row_weight=row_weight,
            attempts=attempt,
        )
        return code

    raise CodeConstructionError(
        f"no full-rank ({nc}, {kc}, {col_weight}) code after {MAX_CONSTRUCTION_ATTEMPTS} attempts"
    )


def hamming_7_4() -> CodeDefinition:
    """The (7,4) Hamming code."""
    H = np.array([
        [1, 0, 1, 0, 1, 0, 1],
        [0, 1, 1, 0, 0, 1, 1],
        [0, 0, 0, 1, 1, 1, 1],
    ], dtype=np.uint8)
    return code_from_parity_matrix(H)


def encode(info: np.ndarray, code: CodeDefinition) -> np.ndarray:
    """Systematic encoding: the codeword carries ``info`` on ``code.info_positions``."""
    info = np.asarray(info)
    if info.shape != (code.kc,):
        raise DimensionError(f"expected {code.kc} information bits, got {info.shape}")
    return ((info.astype(np.int64) @ code.G.astype(np.int64)) % 2).astype(np.uint8)


def syndrome(bits: np.ndarray, code: CodeDefinition) -> np.ndarray:
    bits = np.asarray(bits)
    if bits.shape != (code.nc,):
        raise DimensionError(f"expected {code.nc} bits, got {bits.shape}")
    return ((code.H.astype(np.int64) @ bits.astype(np.int64)) % 2).astype(np.uint8)


def check_parity(bits: np.ndarray, code: CodeDefinition) -> bool:
    """True iff every parity check is satisfied."""
    return not syndrome(bits, code).any()
