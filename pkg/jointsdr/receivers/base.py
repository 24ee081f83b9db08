"""
Abstract base class for receivers.

A receiver turns the K real-field observations of one codeword into hard
codeword decisions, one per executed iteration (non-iterative receivers run a
single iteration).
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from jointsdr.channel.mimo import BitIndexMap, RealBlockObservation
from jointsdr.coding.ldpc import CodeDefinition
from jointsdr.core.config import ExperimentConfig
from jointsdr.core.errors import DimensionError
from jointsdr.core.logging import LoggerMixin


@dataclass
class ReceiverOutput:
    """Per-iteration hard decisions for one codeword."""
    decisions: List[np.ndarray] = field(default_factory=list)
    parity_ok: List[bool] = field(default_factory=list)
    objectives: List[Optional[float]] = field(default_factory=list)
    n_solves: int = 0

    @property
    def iterations(self) -> int:
        return len(self.decisions)

    @property
    def final(self) -> np.ndarray:
        return self.decisions[-1]

    def padded(self, iterations: int) -> List[np.ndarray]:
        """Decisions for ``iterations`` iterations; an early stop keeps its final decision."""
        if not self.decisions:
            raise ValueError("receiver produced no decision")
        return [self.decisions[min(t, len(self.decisions) - 1)] for t in range(iterations)]


class BaseReceiver(ABC, LoggerMixin):
    """Abstract base class for receivers."""

    def __init__(self, code: CodeDefinition, bit_map: BitIndexMap, config: ExperimentConfig):
        """Initialize the receiver for a code and a codeword-to-snapshot layout."""
        if bit_map.nc != code.nc:
            raise DimensionError(f"bit map covers {bit_map.nc} bits, code has {code.nc}")
        self.code = code
        self.bit_map = bit_map
        self.config = config

    @property
    @abstractmethod
    def name(self) -> str:
        """Receiver name."""
        pass

    @property
    def max_iterations(self) -> int:
        return 1

    @abstractmethod
    def receive(
        self,
        observations: Sequence[RealBlockObservation],
        rng: np.random.Generator,
    ) -> ReceiverOutput:
        """
        Decode one codeword.

        Args:
            observations: One observation per snapshot
            rng: Random source for randomized extraction

        Returns:
            Hard decisions per executed iteration

        Raises:
            ReceiverError: If no decision could be produced
            SolverError: If the SDP solve of a one-shot receiver failed
        """
        pass

    def _check_observations(self, observations: Sequence[RealBlockObservation]) -> None:
        if len(observations) != self.bit_map.k:
            raise DimensionError(f"expected {self.bit_map.k} snapshots, got {len(observations)}")


def bits_from_polar(polar: np.ndarray) -> np.ndarray:
    """+1 -> bit 0, -1 -> bit 1."""
    return (np.asarray(polar) < 0).astype(np.uint8)
