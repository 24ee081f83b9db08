"""Exhaustive per-snapshot ML detection, the hard-decision reference receiver."""

from typing import Sequence

import numpy as np

from jointsdr.channel.mimo import RealBlockObservation
from jointsdr.coding.decoders import bf_decode
from jointsdr.coding.ldpc import check_parity
from jointsdr.core.config import DecoderType
from jointsdr.detection.lists import ml_brute_force
from jointsdr.receivers.base import BaseReceiver, ReceiverOutput, bits_from_polar


class MlOracleReceiver(BaseReceiver):
    """Brute-force ML per snapshot followed by none/bf decoding."""

    @property
    def name(self) -> str:
        return "ml-oracle"

    def receive(self, observations: Sequence[RealBlockObservation], rng: np.random.Generator) -> ReceiverOutput:
        self._check_observations(observations)
        polar = np.stack([ml_brute_force(o.y, o.H) for o in observations])
        bits = bits_from_polar(self.bit_map.merge(polar))
        if self.config.decoder == DecoderType.BF:
            result = bf_decode(bits, self.code, self.config.bf_iters)
            bits, parity = result.bits, result.parity_ok
        else:
            parity = check_parity(bits, self.code)
        return ReceiverOutput(decisions=[bits], parity_ok=[parity], objectives=[None])
