"""
Forbidden-set description of the fundamental polytope.

For a check node ``m`` with neighbourhood ``N_m`` and every odd-sized subset
``F`` of ``N_m``::

    sum_{n in F} f_n - sum_{n in N_m \\ F} f_n <= |F| - 1

Together with ``0 <= f <= 1`` these inequalities cut off exactly the binary
vectors that violate check ``m``.
"""

from dataclasses import dataclass
from itertools import combinations
from typing import List, Sequence, Tuple

import numpy as np
from scipy import sparse

from jointsdr.coding.ldpc import CodeDefinition
from jointsdr.core.errors import ConstraintLimitError, DimensionError

DEFAULT_DEGREE_CAP = 10


@dataclass(frozen=True)
class FsConstraint:
    """One forbidden-set inequality of check ``check``."""
    check: int
    plus_set: Tuple[int, ...]
    minus_set: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.plus_set) % 2 == 0:
            raise ValueError("forbidden set must have odd cardinality")
        if set(self.plus_set) & set(self.minus_set):
            raise ValueError("plus and minus sets overlap")

    @property
    def rhs(self) -> int:
        return len(self.plus_set) - 1

    def evaluate(self, f: np.ndarray) -> float:
        """Left-hand side at ``f``."""
        return float(f[list(self.plus_set)].sum() - f[list(self.minus_set)].sum())


def enumerate_fs_constraints(code: CodeDefinition, degree_cap: int = DEFAULT_DEGREE_CAP) -> List[FsConstraint]:
    """
    All forbidden-set inequalities of a code, check by check.

    Each check of degree ``d`` contributes ``2**(d-1)`` constraints, ordered by
    subset size and then lexicographically.

    Raises:
        ConstraintLimitError: If a check degree exceeds ``degree_cap``
    """
    constraints: List[FsConstraint] = []
    for m, neighbors in enumerate(code.check_neighbors):
        degree = len(neighbors)
        if degree > degree_cap:
            raise ConstraintLimitError(
                f"check {m} has degree {degree} above the cap {degree_cap} "
                f"({2 ** (degree - 1)} inequalities)"
            )
        members = tuple(int(n) for n in neighbors)
        for size in range(1, degree + 1, 2):
            for plus in combinations(members, size):
                minus = tuple(n for n in members if n not in plus)
                constraints.append(FsConstraint(check=m, plus_set=plus, minus_set=minus))
    return constraints


def fs_matrix(constraints: Sequence[FsConstraint], nc: int) -> Tuple[sparse.csr_matrix, np.ndarray]:
    """Stack constraints into ``G f <= h`` with ``G`` sparse."""
    rows, cols, vals = [], [], []
    h = np.empty(len(constraints))
    for r, con in enumerate(constraints):
        rows.extend([r] * (len(con.plus_set) + len(con.minus_set)))
        cols.extend(con.plus_set)
        cols.extend(con.minus_set)
        vals.extend([1.0] * len(con.plus_set))
        vals.extend([-1.0] * len(con.minus_set))
        h[r] = con.rhs
    if cols and max(cols) >= nc:
        raise DimensionError(f"constraint references bit {max(cols)} beyond length {nc}")
    G = sparse.csr_matrix((vals, (rows, cols)), shape=(len(constraints), nc))
    return G, h


def satisfies_all(f: np.ndarray, constraints: Sequence[FsConstraint], nc: int, tol: float = 0.0) -> bool:
    """True iff ``f`` meets every inequality within ``tol``."""
    f = np.asarray(f, dtype=float)
    if f.shape != (nc,):
        raise DimensionError(f"expected length {nc}, got {f.shape}")
    G, h = fs_matrix(constraints, nc)
    return bool(np.all(G @ f <= h + tol))
