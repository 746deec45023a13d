"""AWGN channel and log-likelihood bookkeeping.

Log-likelihoods are in SNR units with the convention h = x for AWGN, so the
transmitted all-(+1) word sits at h = 1 in every coordinate.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from app.code.tanner import Codeword, ParityCheckCode


@dataclass(frozen=True)
class LlrVector:
    h: np.ndarray
    snr_s2: float | None = None

    def __post_init__(self) -> None:
        h = np.asarray(self.h, dtype=np.float64)
        if h.ndim != 1:
            raise ValueError(f"log-likelihoods must be a vector, got shape {h.shape}")
        if not np.all(np.isfinite(h)):
            raise ValueError("log-likelihoods must be finite")
        object.__setattr__(self, "h", h)

    def __len__(self) -> int:
        return self.h.shape[0]

    def check_length(self, code: ParityCheckCode) -> None:
        if len(self) != code.n_bits:
            raise ValueError(f"expected {code.n_bits} log-likelihoods, got {len(self)}")

    def scaled(self, factor: float) -> LlrVector:
        return LlrVector(self.h * factor, self.snr_s2)


@dataclass(frozen=True)
class NoiseConfiguration:
    x: np.ndarray
    transmitted: Codeword

    def __post_init__(self) -> None:
        if np.asarray(self.x).shape != self.transmitted.bits.shape:
            raise ValueError("channel output and transmitted word differ in length")


def awgn_sample(code: ParityCheckCode, transmitted: Codeword, s2: float, seed: int) -> NoiseConfiguration:
    """x = sigma + g, g ~ N(0, 1/s2) i.i.d."""
    if s2 <= 0:
        raise ValueError(f"s2 must be positive, got {s2}")
    if transmitted.bits.shape != (code.n_bits,):
        raise ValueError(f"transmitted word must have {code.n_bits} bits")
    rng = np.random.default_rng(seed)
    g = rng.normal(0.0, 1.0 / np.sqrt(s2), size=code.n_bits)
    return NoiseConfiguration(x=transmitted.spins + g, transmitted=transmitted)


def llr_from_output(noise: NoiseConfiguration, s2: float | None = None) -> LlrVector:
    return LlrVector(np.array(noise.x, dtype=np.float64), snr_s2=s2)


def trial_seed(master_seed: int, index: int) -> int:
    """Independent per-trial seed derived from (master seed, trial index)."""
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1)[0])


def read_llr_csv(path: str | Path) -> LlrVector:
    values: list[float] = []
    with open(path, newline="", encoding="utf-8") as f:
        for lineno, row in enumerate(csv.reader(f), start=1):
            if not row or not row[0].strip():
                continue
            try:
                values.append(float(row[0]))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: not a number: {row[0]!r}") from None
    return LlrVector(np.array(values))


def write_llr_csv(path: str | Path, values: np.ndarray) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        for v in np.asarray(values, dtype=np.float64):
            writer.writerow([repr(float(v))])


def llr_to_json(llr: LlrVector) -> str:
    return json.dumps({"h": llr.h.tolist(), "snr_s2": llr.snr_s2})
