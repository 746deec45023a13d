"""Exhaustive oracle over all codewords of a small code."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from app.code.gf2 import codeword_matrix
from app.code.tanner import ParityCheckCode


@dataclass(frozen=True)
class ExactSolution:
    log_z: float
    magnetizations: np.ndarray
    ml_spins: np.ndarray
    n_codewords: int

    @property
    def z(self) -> float:
        return float(np.exp(self.log_z))


def brute_force(code: ParityCheckCode, h: np.ndarray) -> ExactSolution:
    """Z = sum over codewords of exp(sum_i h_i sigma_i), marginals and the ML word.

    ML ties go to the codeword enumerated first (the zero word is first).
    """
    h = np.asarray(getattr(h, "h", h), dtype=np.float64)
    spins = 1 - 2 * codeword_matrix(code).astype(np.int64)
    energies = spins @ h
    top = energies.max()
    weights = np.exp(energies - top)
    norm = weights.sum()
    return ExactSolution(
        log_z=float(top + np.log(norm)),
        magnetizations=(weights / norm) @ spins,
        ml_spins=spins[int(np.argmax(energies))],
        n_codewords=spins.shape[0],
    )
