"""
LDPC decoders: flooding sum-product (soft) and Gallager bit flipping (hard).
"""

from dataclasses import dataclass

import numpy as np

from jointsdr.coding.ldpc import CodeDefinition, LlrFrame, check_parity, syndrome
from jointsdr.core.errors import DimensionError

# Bound on decoder-internal messages
MESSAGE_CLIP = 25.0
_TANH_LIMIT = np.tanh(MESSAGE_CLIP / 2.0)


@dataclass(frozen=True)
class SpaResult:
    """Outcome of one sum-product decoding run."""
    posterior: LlrFrame
    extrinsic: LlrFrame
    hard: np.ndarray
    parity_ok: bool
    iterations: int


@dataclass(frozen=True)
class BfResult:
    """Outcome of one bit-flipping decoding run."""
    bits: np.ndarray
    parity_ok: bool
    iterations: int


def _edge_layout(code: CodeDefinition):
    degrees = np.array([len(nb) for nb in code.check_neighbors])
    width = int(degrees.max())
    idx = np.zeros((code.m, width), dtype=int)
    mask = np.arange(width)[None, :] < degrees[:, None]
    for m, nb in enumerate(code.check_neighbors):
        idx[m, :len(nb)] = nb
    return idx, mask


def _leave_one_out_product(T: np.ndarray) -> np.ndarray:
    """Row-wise product of all other entries, without division."""
    ones = np.ones((T.shape[0], 1))
    prefix = np.cumprod(np.hstack([ones, T[:, :-1]]), axis=1)
    suffix = np.cumprod(np.hstack([ones, T[:, :0:-1]]), axis=1)[:, ::-1]
    return prefix * suffix


def spa_decode(channel_llr: LlrFrame, code: CodeDefinition, max_iter: int = 30) -> SpaResult:
    """
    Flooding sum-product decoding in the tanh domain.

    Decoding stops after the first iteration whose hard decision satisfies
    every check. The extrinsic output is the posterior minus the channel input
    and is what a detector should receive as feedback.

    Args:
        channel_llr: Decoder input LLRs
        code: Code to decode
        max_iter: Iteration limit

    Returns:
        Posterior and extrinsic LLRs, hard decision and parity status
    """
    if len(channel_llr) != code.nc:
        raise DimensionError(f"expected {code.nc} LLRs, got {len(channel_llr)}")
    if max_iter < 1:
        raise ValueError("max_iter must be positive")

    llr = channel_llr.values
    idx, mask = _edge_layout(code)
    edges_idx = idx[mask]

    v2c = np.clip(llr[idx], -MESSAGE_CLIP, MESSAGE_CLIP)
    posterior = llr.copy()
    hard = (posterior < 0).astype(np.uint8)
    parity_ok = False
    iterations = 0

    for iterations in range(1, max_iter + 1):
        T = np.where(mask, np.tanh(v2c / 2.0), 1.0)
        prod = np.clip(_leave_one_out_product(T), -_TANH_LIMIT, _TANH_LIMIT)
        c2v = np.where(mask, 2.0 * np.arctanh(prod), 0.0)

        posterior = llr + np.bincount(edges_idx, weights=c2v[mask], minlength=code.nc)
        hard = (posterior < 0).astype(np.uint8)
        if check_parity(hard, code):
            parity_ok = True
            break
        v2c = np.clip(posterior[idx] - c2v, -MESSAGE_CLIP, MESSAGE_CLIP)

    posterior_frame = LlrFrame(posterior)
    return SpaResult(
        posterior=posterior_frame,
        extrinsic=LlrFrame(posterior - llr),
        hard=hard,
        parity_ok=parity_ok,
        iterations=iterations,
    )


def bf_decode(hard_in: np.ndarray, code: CodeDefinition, max_iter: int = 50) -> BfResult:
    """
    Gallager bit flipping.

    Each iteration flips the single bit involved in the most unsatisfied
    checks; ties go to the lowest index.
    """
    bits = np.asarray(hard_in)
    if bits.shape != (code.nc,):
        raise DimensionError(f"expected {code.nc} bits, got {bits.shape}")
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bit-flipping input must be binary")
    bits = bits.astype(np.uint8).copy()
    H = code.H.astype(np.int64)

    for iteration in range(max_iter):
        s = syndrome(bits, code)
        if not s.any():
            return BfResult(bits=bits, parity_ok=True, iterations=iteration)
        unsatisfied = H.T @ s.astype(np.int64)
        bits[int(np.argmax(unsatisfied))] ^= 1

    return BfResult(bits=bits, parity_ok=check_parity(bits, code), iterations=max_iter)
