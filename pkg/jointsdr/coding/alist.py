"""
Reading and writing parity-check matrices in MacKay's alist format.

Layout::

    N M
    max_col_degree max_row_degree
    <N column degrees>
    <M row degrees>
    <N lines: 1-based check indices of each column, zero padded>
    <M lines: 1-based variable indices of each row, zero padded>
"""

from pathlib import Path
from typing import List, Union

import numpy as np

from jointsdr.coding.ldpc import CodeDefinition, code_from_parity_matrix
from jointsdr.core.errors import CodeConstructionError
from jointsdr.core.logging import get_logger

logger = get_logger("coding.alist")


def _ints(line: str) -> List[int]:
    return [int(tok) for tok in line.split()]


def parse_alist(text: str) -> np.ndarray:
    """Parse alist text into a dense binary parity-check matrix."""
    lines = [line for line in text.splitlines() if line.strip()]
    try:
        n, m = _ints(lines[0])[:2]
        col_degrees = _ints(lines[2])
        row_degrees = _ints(lines[3])
        if len(col_degrees) != n or len(row_degrees) != m:
            raise CodeConstructionError("alist degree lists do not match N and M")

        H = np.zeros((m, n), dtype=np.uint8)
        for v in range(n):
            checks = [c for c in _ints(lines[4 + v]) if c != 0]
            if len(checks) != col_degrees[v]:
                raise CodeConstructionError(
                    f"alist column {v + 1} lists {len(checks)} checks, degree says {col_degrees[v]}"
                )
            H[np.array(checks) - 1, v] = 1

        # Row section is redundant but must agree with the column section
        if len(lines) >= 4 + n + m:
            for c in range(m):
                variables = [x for x in _ints(lines[4 + n + c]) if x != 0]
                if sorted(variables) != list(np.nonzero(H[c])[0] + 1):
                    raise CodeConstructionError(f"alist row {c + 1} disagrees with the column section")
    except (IndexError, ValueError) as exc:
        raise CodeConstructionError(f"malformed alist data: {exc}") from exc
    return H


def format_alist(H: np.ndarray) -> str:
    """Render a parity-check matrix as alist text."""
    H = np.asarray(H) % 2
    m, n = H.shape
    col_lists = [np.nonzero(H[:, v])[0] + 1 for v in range(n)]
    row_lists = [np.nonzero(H[c])[0] + 1 for c in range(m)]
    max_col = max(len(c) for c in col_lists)
    max_row = max(len(r) for r in row_lists)

    def padded(entries: np.ndarray, width: int) -> str:
        return " ".join(str(int(e)) for e in list(entries) + [0] * (width - len(entries)))

    out = [
        f"{n} {m}",
        f"{max_col} {max_row}",
        " ".join(str(len(c)) for c in col_lists),
        " ".join(str(len(r)) for r in row_lists),
    ]
    out.extend(padded(c, max_col) for c in col_lists)
    out.extend(padded(r, max_row) for r in row_lists)
    return "\n".join(out) + "\n"


def read_alist(path: Union[str, Path]) -> CodeDefinition:
    """Load a code from an alist file."""
    path = Path(path)
    if not path.is_file():
        raise CodeConstructionError(f"alist file not found: {path}")
    code = code_from_parity_matrix(parse_alist(path.read_text(encoding="utf-8")))
    logger.info("Code loaded from alist", path=str(path), nc=code.nc, kc=code.kc)
    return code


def write_alist(code: CodeDefinition, path: Union[str, Path]) -> None:
    """Write a code's parity-check matrix to an alist file."""
    path = Path(path)
    path.write_text(format_alist(code.H), encoding="utf-8")
    logger.info("Code written to alist", path=str(path), nc=code.nc, kc=code.kc)
