"""
MIMO channel model, real-field embedding and QPSK bit mapping.

The complex model ``yc = Hc sc + nc`` is embedded into the real field as
``y = H x + n`` with ``H = [[Re Hc, -Im Hc], [Im Hc, Re Hc]]`` and
``x = [Re sc; Im sc]``. Real-valued detector vectors therefore hold the real
parts of all antennas first and the imaginary parts after them, while the
codeword interleaves them per antenna (real part on bit ``2i-1``, imaginary
part on bit ``2i``). :class:`BitIndexMap` converts between the two orders.
"""

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from jointsdr.core.errors import DimensionError


class Part(str, Enum):
    """Real or imaginary component of a QPSK symbol."""
    REAL = "real"
    IMAG = "imag"


@dataclass(frozen=True)
class ComplexChannelBlock:
    """One snapshot of the complex baseband model."""
    Hc: np.ndarray
    sc: np.ndarray
    nc_var: float

    def __post_init__(self) -> None:
        if self.nc_var < 0:
            raise ValueError("noise variance must be non-negative")
        if self.Hc.ndim != 2 or self.sc.shape != (self.Hc.shape[1],):
            raise DimensionError(f"symbols {self.sc.shape} do not match channel {self.Hc.shape}")
        if not (np.all(np.abs(self.sc.real) == 1) and np.all(np.abs(self.sc.imag) == 1)):
            raise ValueError("QPSK symbol components must be +-1")


@dataclass(frozen=True)
class RealBlockObservation:
    """Real-field channel matrix, received vector and per-dimension noise variance."""
    H: np.ndarray
    y: np.ndarray
    noise_var: float

    def __post_init__(self) -> None:
        rows, cols = self.H.shape
        if rows % 2 or cols % 2 or self.y.shape != (rows,):
            raise DimensionError(f"observation {self.y.shape} does not match channel {self.H.shape}")

    @property
    def nt(self) -> int:
        return self.H.shape[1] // 2

    @property
    def nr(self) -> int:
        return self.H.shape[0] // 2


@dataclass(frozen=True)
class BitIndexMap:
    """Bookkeeping between codeword bits and (snapshot, antenna, part)."""
    nt: int
    k: int

    def __post_init__(self) -> None:
        if self.nt < 1 or self.k < 1:
            raise ValueError("nt and k must be positive")

    @classmethod
    def for_codeword(cls, nc: int, nt: int) -> "BitIndexMap":
        if nc % (2 * nt):
            raise DimensionError(f"codeword length {nc} is not a multiple of 2*nt={2 * nt}")
        return cls(nt=nt, k=nc // (2 * nt))

    @property
    def nc(self) -> int:
        return 2 * self.nt * self.k

    def bit_index(self, k: int, i: int, part: Part) -> int:
        """1-based codeword index of snapshot ``k``, antenna ``i`` (both 1-based)."""
        if not 1 <= k <= self.k:
            raise IndexError(f"snapshot {k} outside 1..{self.k}")
        if not 1 <= i <= self.nt:
            raise IndexError(f"antenna {i} outside 1..{self.nt}")
        base = 2 * self.nt * (k - 1) + 2 * i
        return base - 1 if Part(part) == Part.REAL else base

    def positions(self, k: int) -> np.ndarray:
        """0-based codeword positions of snapshot ``k`` (0-based) in real-vector order."""
        base = 2 * self.nt * k
        antennas = np.arange(self.nt)
        return np.concatenate([base + 2 * antennas, base + 2 * antennas + 1])

    def all_positions(self) -> np.ndarray:
        """(K, 2Nt) array of codeword positions, row k in real-vector order."""
        return np.stack([self.positions(k) for k in range(self.k)])

    def split(self, values: np.ndarray) -> np.ndarray:
        """Reorder a length-Nc vector into (K, 2Nt) per-snapshot rows."""
        values = np.asarray(values)
        if values.shape != (self.nc,):
            raise DimensionError(f"expected length {self.nc}, got {values.shape}")
        return values[self.all_positions()]

    def merge(self, blocks: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`split`."""
        blocks = np.asarray(blocks)
        if blocks.shape != (self.k, 2 * self.nt):
            raise DimensionError(f"expected shape {(self.k, 2 * self.nt)}, got {blocks.shape}")
        out = np.empty(self.nc, dtype=blocks.dtype)
        out[self.all_positions()] = blocks
        return out


def embed_matrix(Hc: np.ndarray) -> np.ndarray:
    """Real-field embedding of a complex matrix."""
    Hc = np.asarray(Hc, dtype=complex)
    if Hc.ndim != 2:
        raise DimensionError("channel must be a matrix")
    return np.block([[Hc.real, -Hc.imag], [Hc.imag, Hc.real]])


def embed_vector(vc: np.ndarray) -> np.ndarray:
    """Stack real parts over imaginary parts."""
    vc = np.asarray(vc, dtype=complex)
    if vc.ndim != 1:
        raise DimensionError("expected a vector")
    return np.concatenate([vc.real, vc.imag])


def real_embed(Hc: np.ndarray, yc: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Transform a complex observation ``(Hc, yc)`` into the real field."""
    Hc = np.asarray(Hc, dtype=complex)
    yc = np.asarray(yc, dtype=complex)
    if Hc.ndim != 2 or yc.shape != (Hc.shape[0],):
        raise DimensionError(f"received vector {yc.shape} does not match channel {Hc.shape}")
    return embed_matrix(Hc), embed_vector(yc)


def draw_channel(nt: int, nr: int, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. Rayleigh channel, CN(0, 1) entries."""
    if nt < 1 or nr < 1:
        raise ValueError("antenna counts must be positive")
    return (rng.standard_normal((nr, nt)) + 1j * rng.standard_normal((nr, nt))) / np.sqrt(2.0)


def modulate_qpsk(bits: np.ndarray) -> np.ndarray:
    """Map 2Nt bits to Nt QPSK symbols, bit 2i -> real part, bit 2i+1 -> imaginary part."""
    bits = np.asarray(bits)
    if bits.ndim != 1 or bits.size % 2:
        raise DimensionError(f"expected an even number of bits, got {bits.shape}")
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bits must be 0 or 1")
    polar = 1.0 - 2.0 * bits.astype(float)
    return polar[0::2] + 1j * polar[1::2]


def demodulate_qpsk(symbols: np.ndarray) -> np.ndarray:
    """Hard demapping (sign of each component, zero maps to bit 0)."""
    symbols = np.asarray(symbols, dtype=complex)
    bits = np.empty(2 * symbols.size, dtype=np.uint8)
    bits[0::2] = symbols.real < 0
    bits[1::2] = symbols.imag < 0
    return bits


def add_noise(clean: np.ndarray, noise_var: float, rng: np.random.Generator) -> np.ndarray:
    """Add i.i.d. N(0, noise_var) noise to a real vector."""
    if noise_var < 0:
        raise ValueError("noise variance must be non-negative")
    clean = np.asarray(clean, dtype=float)
    noise = rng.standard_normal(clean.shape) * np.sqrt(noise_var)
    return clean + noise


def transmit(
    codeword: np.ndarray,
    bit_map: BitIndexMap,
    nr: int,
    noise_var: float,
    rng: np.random.Generator,
    block_fading: bool = False,
) -> List[RealBlockObservation]:
    """
    Send one codeword over K snapshots.

    Args:
        codeword: Binary codeword of length ``bit_map.nc``
        bit_map: Codeword-to-snapshot bookkeeping
        nr: Receive antennas
        noise_var: Per-real-dimension noise variance
        rng: Random source for channels and noise
        block_fading: Reuse one channel draw for the whole codeword

    Returns:
        One real-field observation per snapshot
    """
    codeword = np.asarray(codeword)
    if codeword.shape != (bit_map.nc,):
        raise DimensionError(f"expected codeword length {bit_map.nc}, got {codeword.shape}")

    width = 2 * bit_map.nt
    shared: Optional[np.ndarray] = draw_channel(bit_map.nt, nr, rng) if block_fading else None
    observations = []
    for k in range(bit_map.k):
        Hc = shared if shared is not None else draw_channel(bit_map.nt, nr, rng)
        sc = modulate_qpsk(codeword[k * width:(k + 1) * width])
        H, clean = real_embed(Hc, Hc @ sc)
        observations.append(
            RealBlockObservation(H=H, y=add_noise(clean, noise_var, rng), noise_var=noise_var)
        )
    return observations
