"""REST API routes."""

from __future__ import annotations

import asyncio
import logging

import numpy as np
from fastapi import APIRouter, HTTPException

from app.bp.engine import decode_bp, run_bp
from app.channel.awgn import LlrVector
from app.code.construct import get_code, girth, library_names, resolve_served_code
from app.code.tanner import ParityCheckCode
from app.effective.solver import decode_loop_corrected_bp
from app.loops.critical import rank_critical_loops
from app.lp.decoder import decode_lp
from app.lp.erasure import decode_lp_erasure
from app.lp.simplex import LpStallError
from app.models.decode import DecodeResult
from app.models.schemas import CodeSummary, DecodeRequest, DecodeResponse, DecoderName, LoopAnalysisRequest

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/api")


def _code(ref: str) -> ParityCheckCode:
    try:
        return resolve_served_code(ref)
    except KeyError:
        raise HTTPException(status_code=404, detail=f"unknown code {ref!r}") from None
    except (OSError, ValueError) as e:
        logger.warning("Cannot load served code %r: %s", ref, e)
        raise HTTPException(status_code=422, detail=f"code {ref!r} could not be loaded") from None


def _llr(code: ParityCheckCode, values: list[float]) -> LlrVector:
    try:
        llr = LlrVector(np.array(values, dtype=np.float64))
        llr.check_length(code)
    except ValueError as e:
        raise HTTPException(status_code=422, detail=str(e)) from None
    return llr


def _response(result: DecodeResult) -> DecodeResponse:
    m = None
    if "m_eff" in result.diagnostics:
        m = result.diagnostics["m_eff"]
    elif result.beliefs is not None:
        m = result.beliefs.bit_magnetizations.tolist()
    return DecodeResponse(
        decoder=DecoderName(result.decoder),
        success=result.success,
        bits=None if result.bits is None else result.bits.tolist(),
        magnetizations=m,
        pseudo_codeword=None if result.pseudo_codeword is None else result.pseudo_codeword.to_dict(),
        diagnostics={k: v for k, v in result.diagnostics.items() if k != "m_eff"},
    )


@router.get("/health")
async def health() -> dict:
    return {"status": "ok"}


@router.get("/codes")
async def list_codes() -> dict:
    """Built-in codes with their sizes."""
    codes = []
    for name in library_names():
        code = get_code(name)
        codes.append(
            CodeSummary(name=name, n_bits=code.n_bits, n_checks=code.n_checks, n_edges=code.n_edges, girth=girth(code))
        )
    return {"codes": [c.model_dump() for c in codes]}


@router.post("/decode/bp")
async def decode_with_bp(req: DecodeRequest) -> DecodeResponse:
    code = _code(req.code)
    llr = _llr(code, req.llr)
    result = await asyncio.to_thread(decode_bp, code, llr, max_iters=req.max_iters, damping=req.damping)
    return _response(result)


@router.post("/decode/lp")
async def decode_with_lp(req: DecodeRequest) -> DecodeResponse:
    code = _code(req.code)
    llr = _llr(code, req.llr)
    try:
        if req.epsilon is None:
            result = await asyncio.to_thread(decode_lp, code, llr)
        else:
            result = await asyncio.to_thread(decode_lp_erasure, code, llr, epsilon=req.epsilon)
    except LpStallError as e:
        logger.warning("LP stalled on %s: %s", code.name, e)
        raise HTTPException(status_code=500, detail=str(e)) from None
    return _response(result)


@router.post("/decode/loop-bp")
async def decode_with_loop_bp(req: DecodeRequest) -> DecodeResponse:
    code = _code(req.code)
    llr = _llr(code, req.llr)
    result = await asyncio.to_thread(
        decode_loop_corrected_bp, code, llr, max_loops=req.max_loops, bp_max_iters=req.max_iters, bp_damping=req.damping
    )
    return _response(result)


@router.post("/loops/analyze")
async def analyze_loops(req: LoopAnalysisRequest) -> dict:
    """Critical-loop candidates at the BP state of the given log-likelihoods."""
    code = _code(req.code)
    llr = _llr(code, req.llr)

    def _analyze() -> dict:
        state, beliefs = run_bp(code, llr)
        ranked = rank_critical_loops(code, beliefs, thresholds=req.thresholds, max_loop_bits=req.max_loop_bits)
        return {
            "bp_converged": state.converged,
            "iterations": state.iterations_run,
            "loops": [c.to_dict() for c in ranked],
        }

    try:
        return await asyncio.to_thread(_analyze)
    except ValueError as e:
        raise HTTPException(status_code=422, detail=str(e)) from None
