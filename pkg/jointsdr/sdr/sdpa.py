"""
Problem dump in the SDPA sparse format (``.dat-s``).

SDPA solves ``max <F0, Y>  s.t. <Fi, Y> = c_i, Y PSD``. A :class:`ConicProblem`
maps onto it with ``F0 = -C`` on the PSD blocks. Bit variables, FS slacks and
box slacks share one trailing diagonal (LP) block, and the FS and box rows
become equalities over that block::

    G_fs f + s = h_fs,   f + u = 1,   f, s, u >= 0

Entries are written one per line as ``matno blkno i j value`` (1-based,
upper triangle), so an off-diagonal coefficient ``X[p, q]`` appears as 0.5.
"""

from pathlib import Path
from typing import List, Union

import numpy as np

from jointsdr.core.logging import get_logger
from jointsdr.sdr.forms import ConicProblem

logger = get_logger("sdr.sdpa")


def format_sdpa(problem: ConicProblem) -> str:
    """Render a problem as SDPA sparse text."""
    K, n, n_f, n_fs = problem.K, problem.n, problem.n_f, problem.n_fs
    lp_size = n_f + n_fs + n_f if n_f else 0
    lp_block = K + 1
    n_con = problem.n_eq + (n_fs + n_f if n_f else 0)

    rhs = list(problem.eq_rhs)
    lines: List[str] = []

    # Objective: F0 = -C
    for k in range(K):
        rows, cols = np.triu_indices(n)
        for i, j in zip(rows, cols):
            value = -problem.costs[k, i, j]
            if value != 0.0:
                lines.append(f"0 {k + 1} {i + 1} {j + 1} {value:.17g}")
    for idx in np.nonzero(problem.c_f)[0] if n_f else []:
        lines.append(f"0 {lp_block} {idx + 1} {idx + 1} {-problem.c_f[idx]:.17g}")

    for con, block, row, col, coef in zip(
        problem.eq_con, problem.eq_block, problem.eq_row, problem.eq_col, problem.eq_coef
    ):
        i, j = sorted((int(row), int(col)))
        value = coef if i == j else 0.5 * coef
        lines.append(f"{con + 1} {block + 1} {i + 1} {j + 1} {value:.17g}")
    for con, idx, coef in zip(problem.eq_f_con, problem.eq_f_idx, problem.eq_f_coef):
        lines.append(f"{con + 1} {lp_block} {idx + 1} {idx + 1} {coef:.17g}")

    if n_f:
        con = problem.n_eq
        G = problem.G_fs.tocoo() if n_fs else None
        if G is not None:
            for r, c, v in zip(G.row, G.col, G.data):
                lines.append(f"{con + r + 1} {lp_block} {c + 1} {c + 1} {v:.17g}")
            for r in range(n_fs):
                slot = n_f + r + 1
                lines.append(f"{con + r + 1} {lp_block} {slot} {slot} 1")
            rhs.extend(problem.h_fs)
        con += n_fs
        for b in range(n_f):
            slot = n_f + n_fs + b + 1
            lines.append(f"{con + b + 1} {lp_block} {b + 1} {b + 1} 1")
            lines.append(f"{con + b + 1} {lp_block} {slot} {slot} 1")
        rhs.extend([1.0] * n_f)

    sizes = [str(n)] * K + ([str(-lp_size)] if lp_size else [])
    header = [
        f"* jointsdr {problem.kind.value} problem: K={K} n={n} bits={n_f} fs={n_fs}",
        str(n_con),
        str(len(sizes)),
        " ".join(sizes),
        " ".join(f"{v:.17g}" for v in rhs),
    ]
    return "\n".join(header + lines) + "\n"


def write_sdpa(problem: ConicProblem, path: Union[str, Path]) -> None:
    Path(path).write_text(format_sdpa(problem), encoding="utf-8")
    logger.info("SDPA problem written", path=str(path), kind=problem.kind.value)
