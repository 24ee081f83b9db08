"""
Cost matrices and the three semidefinite programs built on them.

Every program has K PSD blocks ``X_k`` of side ``n = 2Nt + 1``::

    minimize    sum_k <C_k, X_k> + c_f^T f
    subject to  X_k[i, i] = 1                          (diagonal, all k, i)
                X_k[p, n-1] + 2 f_{pos(k, p)} = 1       (coupling, joint forms)
                G_fs f <= h_fs,  0 <= f <= 1            (joint forms)
                X_k PSD

Equality constraints are stored as sparse terms (constraint, block, row,
column, coefficient); a term contributes ``coef * X[block][row, col]`` to its
constraint. Diagonal constraints come first in block-major order, coupling
constraints follow in block-major, real-vector order.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from jointsdr.channel.mimo import BitIndexMap
from jointsdr.coding.ldpc import CodeDefinition, LlrFrame
from jointsdr.coding.polytope import DEFAULT_DEGREE_CAP, enumerate_fs_constraints, fs_matrix
from jointsdr.core.errors import DimensionError


class ProblemKind(str, Enum):
    """Which of the three programs a problem is."""
    DISJOINT = "disjoint"
    JOINT_ML = "joint-ml"
    JOINT_MAP = "joint-map"


@dataclass(frozen=True)
class CostMatrix:
    """Homogenized ML cost ``[[H^T H, -H^T y], [-y^T H, ||y||^2]]``."""
    C: np.ndarray

    def __post_init__(self) -> None:
        C = np.asarray(self.C, dtype=float)
        if C.ndim != 2 or C.shape[0] != C.shape[1] or C.shape[0] % 2 == 0:
            raise DimensionError(f"cost matrix must be square with odd side, got {C.shape}")
        if not np.allclose(C, C.T, atol=1e-12):
            raise ValueError("cost matrix must be symmetric")
        object.__setattr__(self, "C", C)

    @property
    def side(self) -> int:
        return self.C.shape[0]

    def quadratic(self, x: np.ndarray, t: float = 1.0) -> float:
        """``[x; t]^T C [x; t]``, equal to ``||t y - H x||^2``."""
        z = np.append(np.asarray(x, dtype=float), t)
        return float(z @ self.C @ z)


def cost_matrix(H: np.ndarray, y: np.ndarray) -> CostMatrix:
    H = np.asarray(H, dtype=float)
    y = np.asarray(y, dtype=float)
    if H.ndim != 2 or y.shape != (H.shape[0],):
        raise DimensionError(f"received vector {y.shape} does not match channel {H.shape}")
    # Gram form keeps C exactly PSD
    Gm = np.hstack([H, -y[:, None]])
    C = Gm.T @ Gm
    return CostMatrix(0.5 * (C + C.T))


@dataclass(frozen=True)
class CodeConstraints:
    """Forbidden-set inequalities of a code in matrix form, built once per code."""
    G: sparse.csr_matrix
    h: np.ndarray

    @classmethod
    def from_code(cls, code: CodeDefinition, degree_cap: int = DEFAULT_DEGREE_CAP) -> "CodeConstraints":
        G, h = fs_matrix(enumerate_fs_constraints(code, degree_cap), code.nc)
        return cls(G=G, h=h)

    @property
    def count(self) -> int:
        return self.G.shape[0]


@dataclass(frozen=True)
class ConicProblem:
    """Block-structured SDP with optional box-constrained bit variables."""
    kind: ProblemKind
    costs: np.ndarray
    eq_con: np.ndarray
    eq_block: np.ndarray
    eq_row: np.ndarray
    eq_col: np.ndarray
    eq_coef: np.ndarray
    eq_rhs: np.ndarray
    n_f: int = 0
    c_f: np.ndarray = field(default_factory=lambda: np.zeros(0))
    eq_f_con: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    eq_f_idx: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    eq_f_coef: np.ndarray = field(default_factory=lambda: np.zeros(0))
    G_fs: Optional[sparse.csr_matrix] = None
    h_fs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    n_diagonal: int = 0

    @property
    def K(self) -> int:
        return self.costs.shape[0]

    @property
    def n(self) -> int:
        return self.costs.shape[1]

    @property
    def n_eq(self) -> int:
        return self.eq_rhs.size

    @property
    def n_coupling(self) -> int:
        return self.n_eq - self.n_diagonal

    @property
    def n_fs(self) -> int:
        return 0 if self.G_fs is None else self.G_fs.shape[0]

    @cached_property
    def _flat(self) -> Tuple[np.ndarray, np.ndarray]:
        nn = self.n * self.n
        return (
            self.eq_block * nn + self.eq_row * self.n + self.eq_col,
            self.eq_block * nn + self.eq_col * self.n + self.eq_row,
        )

    @cached_property
    def block_terms(self) -> List[np.ndarray]:
        """Term indices grouped by block."""
        order = np.argsort(self.eq_block, kind="stable")
        bounds = np.searchsorted(self.eq_block[order], np.arange(self.K + 1))
        return [order[bounds[k]:bounds[k + 1]] for k in range(self.K)]

    @cached_property
    def A_f(self) -> sparse.csr_matrix:
        """Equality coefficients of the bit variables, shape (n_eq, n_f)."""
        return sparse.csr_matrix(
            (self.eq_f_coef, (self.eq_f_con, self.eq_f_idx)), shape=(self.n_eq, self.n_f)
        )

    def apply_blocks(self, X: np.ndarray) -> np.ndarray:
        """Block part of the equality map, ``A_X(X)``."""
        flat, _ = self._flat
        return np.bincount(
            self.eq_con, weights=self.eq_coef * X.reshape(-1)[flat], minlength=self.n_eq
        )

    def adjoint_blocks(self, y: np.ndarray) -> np.ndarray:
        """Adjoint ``A_X^*(y)`` as K symmetric blocks."""
        flat, flat_t = self._flat
        half = 0.5 * self.eq_coef * y[self.eq_con]
        out = np.zeros(self.K * self.n * self.n)
        np.add.at(out, flat, half)
        np.add.at(out, flat_t, half)
        return out.reshape(self.K, self.n, self.n)

    def equality_residual(self, X: np.ndarray, f: Optional[np.ndarray] = None) -> np.ndarray:
        """``b - A_X(X) - A_f f``."""
        r = self.eq_rhs - self.apply_blocks(X)
        if self.n_f:
            r = r - self.A_f @ f
        return r

    def objective(self, X: np.ndarray, f: Optional[np.ndarray] = None) -> float:
        value = float(np.einsum("kij,kij->", self.costs, X))
        if self.n_f:
            value += float(self.c_f @ f)
        return value

    def inequality_violation(self, f: np.ndarray) -> float:
        """Largest violation of the FS and box constraints (0 when satisfied)."""
        if not self.n_f:
            return 0.0
        worst = max(float(np.max(-f)), float(np.max(f - 1.0)))
        if self.n_fs:
            worst = max(worst, float(np.max(self.G_fs @ f - self.h_fs)))
        return max(worst, 0.0)

    def strip_code_constraints(self) -> "ConicProblem":
        """The disjoint problem on the same costs."""
        keep = self.eq_con < self.n_diagonal
        return ConicProblem(
            kind=ProblemKind.DISJOINT,
            costs=self.costs,
            eq_con=self.eq_con[keep],
            eq_block=self.eq_block[keep],
            eq_row=self.eq_row[keep],
            eq_col=self.eq_col[keep],
            eq_coef=self.eq_coef[keep],
            eq_rhs=self.eq_rhs[:self.n_diagonal],
            n_diagonal=self.n_diagonal,
        )


def _stack_costs(costs: Sequence[CostMatrix]) -> np.ndarray:
    if not costs:
        raise DimensionError("at least one cost block is required")
    sides = {c.side for c in costs}
    if len(sides) != 1:
        raise DimensionError(f"inconsistent block sizes {sorted(sides)}")
    return np.stack([c.C for c in costs])


def assemble_disjoint(costs: Sequence[CostMatrix]) -> ConicProblem:
    """Unit-diagonal SDR, one independent block per snapshot."""
    C = _stack_costs(costs)
    K, n = C.shape[0], C.shape[1]
    blocks = np.repeat(np.arange(K), n)
    diag = np.tile(np.arange(n), K)
    return ConicProblem(
        kind=ProblemKind.DISJOINT,
        costs=C,
        eq_con=np.arange(K * n),
        eq_block=blocks,
        eq_row=diag,
        eq_col=diag.copy(),
        eq_coef=np.ones(K * n),
        eq_rhs=np.ones(K * n),
        n_diagonal=K * n,
    )


def assemble_joint_ml(
    costs: Sequence[CostMatrix],
    code: CodeDefinition,
    bit_map: BitIndexMap,
    constraints: Optional[CodeConstraints] = None,
) -> ConicProblem:
    """
    Disjoint SDR plus symbol-to-bit coupling, box and forbidden-set constraints.

    Args:
        costs: One cost matrix per snapshot
        code: LDPC code of the transmitted codeword
        bit_map: Codeword-to-snapshot bookkeeping
        constraints: Pre-built FS inequalities of ``code``

    Raises:
        DimensionError: If the blocks do not cover the code length
        ConstraintLimitError: If FS enumeration exceeds the degree cap
    """
    base = assemble_disjoint(costs)
    K, n = base.K, base.n
    width = n - 1
    if K != bit_map.k or width != 2 * bit_map.nt:
        raise DimensionError(f"{K} blocks of side {n} do not match bit map ({bit_map.nt}, {bit_map.k})")
    if bit_map.nc != code.nc:
        raise DimensionError(f"code length {code.nc} differs from 2*Nt*K = {bit_map.nc}")
    if constraints is None:
        constraints = CodeConstraints.from_code(code)

    n_cpl = K * width
    cpl_con = base.n_diagonal + np.arange(n_cpl)
    cpl_block = np.repeat(np.arange(K), width)
    cpl_row = np.tile(np.arange(width), K)
    positions = bit_map.all_positions().reshape(-1)

    return ConicProblem(
        kind=ProblemKind.JOINT_ML,
        costs=base.costs,
        eq_con=np.concatenate([base.eq_con, cpl_con]),
        eq_block=np.concatenate([base.eq_block, cpl_block]),
        eq_row=np.concatenate([base.eq_row, cpl_row]),
        eq_col=np.concatenate([base.eq_col, np.full(n_cpl, n - 1)]),
        eq_coef=np.concatenate([base.eq_coef, np.ones(n_cpl)]),
        eq_rhs=np.concatenate([base.eq_rhs, np.ones(n_cpl)]),
        n_f=code.nc,
        c_f=np.zeros(code.nc),
        eq_f_con=cpl_con,
        eq_f_idx=positions,
        eq_f_coef=np.full(n_cpl, 2.0),
        G_fs=constraints.G,
        h_fs=constraints.h,
        n_diagonal=base.n_diagonal,
    )


def assemble_joint_map(
    costs: Sequence[CostMatrix],
    code: CodeDefinition,
    bit_map: BitIndexMap,
    priors: LlrFrame,
    noise_var: float,
    constraints: Optional[CodeConstraints] = None,
) -> ConicProblem:
    """Joint ML problem with the a-priori term ``2 sigma^2 L_A^T f`` added to the objective."""
    if len(priors) != code.nc:
        raise DimensionError(f"expected {code.nc} priors, got {len(priors)}")
    if noise_var < 0:
        raise ValueError("noise variance must be non-negative")
    problem = assemble_joint_ml(costs, code, bit_map, constraints)
    return replace(problem, kind=ProblemKind.JOINT_MAP, c_f=2.0 * noise_var * priors.values)


def lift_point(symbols: np.ndarray, f: Optional[np.ndarray] = None) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """
    Rank-one blocks ``[x_k; 1][x_k; 1]^T`` for a (K, 2Nt) array of +-1 symbols.

    ``f`` is passed through so the pair can be fed to the residual helpers.
    """
    symbols = np.asarray(symbols, dtype=float)
    if symbols.ndim != 2:
        raise DimensionError("symbols must be a (K, 2Nt) array")
    z = np.hstack([symbols, np.ones((symbols.shape[0], 1))])
    return np.einsum("ki,kj->kij", z, z), f
