"""Noise-space geometry of pseudo-codewords relative to the zero codeword."""

from __future__ import annotations

import numpy as np

from app.channel.awgn import LlrVector


def _omega(omega) -> np.ndarray:
    w = np.asarray(getattr(omega, "omega", omega), dtype=np.float64)
    if w.ndim != 1:
        raise ValueError(f"pseudo-codeword must be a vector, got shape {w.shape}")
    if np.any(w < -1e-9) or np.any(w > 1 + 1e-9):
        raise ValueError("pseudo-codeword entries must lie in [0, 1]")
    if not np.any(w > 0):
        raise ValueError("pseudo-codeword is the zero vector")
    return w


def effective_distance(omega) -> float:
    """AWGN pseudo-weight (sum w)^2 / sum w^2; Hamming weight on 0/1 vectors."""
    w = _omega(omega)
    return float(w.sum() ** 2 / np.dot(w, w))


def instanton_noise_for(omega) -> LlrVector:
    """Minimum-norm noise point where omega and the zero word tie under LP.

    h_i = 1 - w_i * sum(w) / sum(w^2), so that sum_i h_i w_i = 0.
    """
    w = _omega(omega)
    return LlrVector(1.0 - w * (w.sum() / np.dot(w, w)))


def push_past_surface(h: np.ndarray, factor: float) -> np.ndarray:
    """Scale the displacement of h from the transmitted point (all ones) by `factor`."""
    return 1.0 + factor * (np.asarray(h, dtype=np.float64) - 1.0)
