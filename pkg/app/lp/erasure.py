"""LP decoding with log-likelihood erasure on critical loops."""

from __future__ import annotations

import logging

import numpy as np

from app.bp.engine import run_bp
from app.channel.awgn import LlrVector
from app.code.tanner import ParityCheckCode, syndrome
from app.config import settings
from app.loops.critical import CriticalLoop, rank_critical_loops
from app.lp.decoder import decode_lp
from app.models.decode import DecodeResult

logger = logging.getLogger(__name__)


def _erasure_schedule(ranked: list[CriticalLoop], candidates: int) -> list[tuple[float, tuple[int, ...], float]]:
    """(threshold, bits to erase, |r|) attempts in order.

    The first attempt erases the union of every loop tied for the largest |r|
    at the first threshold; the rest walk the ranked candidates, at most
    `candidates` per threshold.
    """
    if not ranked:
        return []
    first_t = ranked[0].threshold
    top = abs(ranked[0].r)
    tied = [c for c in ranked if c.threshold == first_t and abs(c.r) >= top * (1 - 1e-12)]
    union = tuple(sorted({b for c in tied for b in c.cycle_bits}))
    schedule = [(first_t, union, ranked[0].r)]
    seen = {union}
    per_threshold: dict[float, int] = {}
    for c in ranked:
        bits = tuple(sorted(c.cycle_bits))
        if bits in seen or per_threshold.get(c.threshold, 0) >= candidates:
            continue
        per_threshold[c.threshold] = per_threshold.get(c.threshold, 0) + 1
        seen.add(bits)
        schedule.append((c.threshold, bits, c.r))
    return schedule


def decode_lp_erasure(
    code: ParityCheckCode,
    h,
    epsilon: float | None = None,
    thresholds=None,
    max_loop_bits: int | None = None,
    candidates: int | None = None,
) -> DecodeResult:
    """Bare LP; on failure, rerun LP with h_i -> epsilon * h_i on critical-loop bits.

    Success always means a valid codeword of the original code.
    """
    llr = h if isinstance(h, LlrVector) else LlrVector(h)
    llr.check_length(code)
    epsilon = settings.erasure_epsilon if epsilon is None else epsilon
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"epsilon must be in [0, 1), got {epsilon}")
    candidates = settings.erasure_candidates if candidates is None else candidates

    bare = decode_lp(code, llr)
    if bare.success:
        bare.decoder = "lp-erasure"
        bare.diagnostics["loops_tried"] = []
        return bare

    state, beliefs = run_bp(code, llr)
    ranked = rank_critical_loops(code, beliefs, thresholds=thresholds, max_loop_bits=max_loop_bits)
    trail: list[dict] = []
    for threshold, bits, r in _erasure_schedule(ranked, candidates):
        modified = llr.h.copy()
        modified[list(bits)] *= epsilon
        attempt = decode_lp(code, modified)
        ok = attempt.success and bool(np.all(syndrome(code, attempt.spins) == 1))
        trail.append({"threshold": threshold, "bits": list(bits), "r": r, "outcome": "success" if ok else "failure"})
        if ok:
            logger.info("LP-erasure [%s]: corrected after %d attempt(s), %d bits erased", code.name, len(trail), len(bits))
            attempt.decoder = "lp-erasure"
            attempt.beliefs = beliefs
            attempt.state = state
            attempt.diagnostics.update(loops_tried=trail, bp_converged=state.converged, epsilon=epsilon)
            return attempt

    logger.info("LP-erasure [%s]: %d attempt(s) failed", code.name, len(trail))
    return DecodeResult(
        decoder="lp-erasure",
        success=False,
        pseudo_codeword=bare.pseudo_codeword,
        beliefs=beliefs,
        state=state,
        diagnostics={
            **bare.diagnostics,
            "loops_tried": trail,
            "bp_converged": state.converged,
            "epsilon": epsilon,
        },
    )
