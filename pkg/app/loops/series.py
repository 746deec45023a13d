"""Loop-series amplitudes around a BP point and the quantities built from them.

For a generalized loop C with loop degrees q:
    mu_i     = [(1-m_i)^(q-1) + (-1)^q (1+m_i)^(q-1)] / [2 (1-m_i^2)^(q-1)]
    mu_alpha = sum_sigma b_alpha(sigma) prod_{i in C, i in alpha} (sigma_i - m_i)
    r(C)     = prod mu_alpha * prod mu_i,        Z = Z0 (1 + sum_C r(C)).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from app.bp.engine import Beliefs, bethe_free_energy, even_configurations
from app.code.tanner import ParityCheckCode
from app.loops.enumerate import GeneralizedLoop, enumerate_generalized_loops

logger = logging.getLogger(__name__)


class SaturationError(ValueError):
    pass


class LoopSeriesError(ValueError):
    pass


def _check_unsaturated(m: float, i: int) -> None:
    if not abs(m) < 1.0:
        raise SaturationError(f"bit {i} is saturated (m={m}); loop factors are undefined")


def bit_factor(m: float, q: int) -> float:
    """mu_i for a bit of loop degree q."""
    s = 1.0 - m * m
    return ((1 - m) ** (q - 1) + (-1) ** q * (1 + m) ** (q - 1)) / (2 * s ** (q - 1))


def anchor_factor(m: float, q: int) -> float:
    """<sigma (sigma - m)^q> / (1 - m^2)^q, the anchor-bit factor of extended loops."""
    s = 1.0 - m * m
    return ((1 - m) ** (q - 1) - (-1) ** q * (1 + m) ** (q - 1)) / (2 * s ** (q - 1))


def check_factor(code: ParityCheckCode, beliefs: Beliefs, alpha: int, loop_bits: list[int]) -> float:
    """mu_alpha: belief-weighted product of (sigma_i - m_i) over the loop bits of alpha."""
    nbrs = code.check_neighbors[alpha]
    pos = [nbrs.index(i) for i in loop_bits]
    configs = even_configurations(len(nbrs))[:, pos].astype(np.float64)
    m = beliefs.bit_magnetizations[loop_bits]
    return float(beliefs.check_beliefs[alpha] @ np.prod(configs - m, axis=1))


@dataclass
class LoopAmplitude:
    loop: GeneralizedLoop
    r: float
    bit_factors: dict[int, float] = field(default_factory=dict)
    check_factors: dict[int, float] = field(default_factory=dict)

    def recompute(self) -> float:
        return math.prod(self.bit_factors.values()) * math.prod(self.check_factors.values())


def _loop_bits_by_check(code: ParityCheckCode, loop: GeneralizedLoop) -> dict[int, list[int]]:
    by_check: dict[int, list[int]] = {}
    for e in loop.edges:
        by_check.setdefault(int(code.edge_checks[e]), []).append(int(code.edge_bits[e]))
    return by_check


def loop_amplitude(code: ParityCheckCode, beliefs: Beliefs, loop: GeneralizedLoop) -> LoopAmplitude:
    m = beliefs.bit_magnetizations
    bit_factors = {}
    for i, q in loop.bit_degree:
        _check_unsaturated(m[i], i)
        bit_factors[i] = bit_factor(float(m[i]), q)
    check_factors = {
        a: check_factor(code, beliefs, a, bits) for a, bits in _loop_bits_by_check(code, loop).items()
    }
    amp = LoopAmplitude(loop=loop, r=0.0, bit_factors=bit_factors, check_factors=check_factors)
    amp.r = amp.recompute()
    return amp


class LoopSeries(NamedTuple):
    z0: float
    corrections: list[LoopAmplitude]
    z_series: float

    @property
    def sum_r(self) -> float:
        return float(sum(a.r for a in self.corrections))


def partition_function_series(
    code: ParityCheckCode, h, beliefs: Beliefs, loops: list[GeneralizedLoop] | None = None
) -> LoopSeries:
    """Z0 = exp(-F_Bethe) and Z0 (1 + sum r(C)) over the (default: exhaustive) loop list."""
    if loops is None:
        loops = enumerate_generalized_loops(code)
    z0 = math.exp(-bethe_free_energy(code, beliefs))
    corrections = [loop_amplitude(code, beliefs, c) for c in loops]
    total = math.fsum(a.r for a in corrections)
    return LoopSeries(z0=z0, corrections=corrections, z_series=z0 * (1.0 + total))


def loop_corrected_magnetization(
    code: ParityCheckCode,
    h,
    beliefs: Beliefs,
    loops: list[GeneralizedLoop],
    extended: dict[int, list[GeneralizedLoop]] | None = None,
) -> np.ndarray:
    """Per-bit magnetizations corrected by the supplied loop families.

        m_i = [m_i (1 + sum_{C not at i} r(C)) + sum_{C in ext(i)} dm_i(C)] / (1 + sum_C r(C))

    ext(i) defaults to the supplied loops through i; with exhaustive loop and
    extended families this is exact.
    """
    h = np.asarray(getattr(h, "h", h))
    if h.shape != (code.n_bits,):
        raise ValueError(f"expected {code.n_bits} log-likelihoods, got shape {h.shape}")
    m = beliefs.bit_magnetizations
    amps = [loop_amplitude(code, beliefs, c) for c in loops]
    denominator = 1.0 + math.fsum(a.r for a in amps)
    if abs(denominator) < 1e-12:
        raise LoopSeriesError("1 + sum r(C) vanishes; the truncated series has no magnetization")

    corrected = np.empty(code.n_bits)
    for i in range(code.n_bits):
        away = math.fsum(a.r for a in amps if not a.loop.contains_bit(i))
        family = extended[i] if extended is not None else [c for c in loops if c.contains_bit(i)]
        delta = 0.0
        for c in family:
            amp = loop_amplitude(code, beliefs, c)
            others = math.prod(v for j, v in amp.bit_factors.items() if j != i)
            delta += anchor_factor(float(m[i]), c.degree_of_bit(i)) * others * math.prod(amp.check_factors.values())
        corrected[i] = (m[i] * (1.0 + away) + delta) / denominator
    return corrected
