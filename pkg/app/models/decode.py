"""Decoder outcome shared by BP, LP, LP-erasure and loop-corrected BP."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np


def hard_decision(magnetizations: np.ndarray) -> np.ndarray:
    """sign(m) with ties broken toward +1."""
    return np.where(np.asarray(magnetizations) >= 0, 1, -1).astype(np.int64)


@dataclass
class DecodeResult:
    decoder: str
    success: bool
    spins: np.ndarray | None = None  # decided word (valid codeword iff success)
    beliefs: Any = None  # Beliefs of the last BP-type stage
    state: Any = None  # BpState / EffectiveBpState
    pseudo_codeword: Any = None  # PseudoCodeword when LP was involved
    diagnostics: dict = field(default_factory=dict)

    @property
    def bits(self) -> np.ndarray | None:
        if self.spins is None:
            return None
        return (self.spins < 0).astype(np.uint8)

    def decoded_transmitted(self, transmitted_spins: np.ndarray | None = None) -> bool:
        """True if decoding succeeded onto the transmitted word (all +1 by default)."""
        if not self.success or self.spins is None:
            return False
        if transmitted_spins is None:
            return bool(np.all(self.spins == 1))
        return bool(np.array_equal(self.spins, transmitted_spins))
