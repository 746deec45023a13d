"""Loop-corrected BP: gauge equations of Z0 + sum_Gamma Z_Gamma.

Every edge e = (i, alpha) carries two gauges: eta_bit[e] weights the bit
vertex (it plays the role of the check-to-bit message u at a BP point) and
eta_check[e] weights the check vertex (the bit-to-check message eta). With
vertex averages <.>_a and m_e = tanh(eta_bit[e] + eta_check[e]), a loop
contributes

    A_Gamma = prod_{a in Gamma} <g_a>_a / prod_{e in Gamma} (1 - m_e^2),
    g_a     = prod_{e in Gamma at a} (sigma_e - m_e),

and the modified equation for the directed edge a -> e is

    m_{a->e} - m_e + sum_Gamma dA_Gamma/d eta_{a,e} / (1 + sum_Gamma A_Gamma) = 0,

which is exactly stationarity of ln Z0 + ln(1 + sum A). With no loops this is
plain BP.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from app.bp.engine import (
    BpState,
    _as_h,
    check_beliefs,
    even_configurations,
    gauge_from_state,
    run_bp,
)
from app.code.tanner import ParityCheckCode, syndrome
from app.config import settings
from app.loops.critical import rank_critical_loops
from app.loops.enumerate import GeneralizedLoop
from app.loops.series import LoopSeriesError
from app.models.decode import DecodeResult, hard_decision

logger = logging.getLogger(__name__)

_M_CLIP = 1.0 - 1e-9
_TARGET_CLIP = 1.0 - 1e-12

BIT_SIDE, CHECK_SIDE = 0, 1


@dataclass
class EffectiveBpState:
    eta_bit: np.ndarray
    eta_check: np.ndarray
    loops: list[GeneralizedLoop] = field(default_factory=list)
    residual: float = float("inf")
    converged: bool = False
    iterations_run: int = 0
    residual_history: list[float] = field(default_factory=list)

    @classmethod
    def from_bp(cls, code: ParityCheckCode, state: BpState, loops=None) -> EffectiveBpState:
        eta_bit, eta_check = gauge_from_state(code, state)
        return cls(eta_bit=eta_bit, eta_check=eta_check, loops=list(loops or []))

    @property
    def eta(self) -> np.ndarray:
        """Both gauges, shape (2, n_edges): row 0 bit side, row 1 check side."""
        return np.vstack([self.eta_bit, self.eta_check])


@dataclass
class LoopMoments:
    loop: GeneralizedLoop
    vertex_moments: dict[tuple[str, int], float]  # mu_{a;Gamma}
    amplitude: float  # A_Gamma
    d_amplitude: np.ndarray  # (2, n_edges) derivative of A_Gamma per directed gauge


class _VertexView:
    """Local distributions of every vertex at a gauge point."""

    def __init__(self, code: ParityCheckCode, h: np.ndarray, eta_bit: np.ndarray, eta_check: np.ndarray):
        self.code = code
        self.fields = h + np.bincount(code.edge_bits, weights=eta_bit, minlength=code.n_bits)
        self.bit_m = np.tanh(self.fields)
        self.check_probs, self.check_m = check_beliefs(code, eta_check)
        self.edge_m = np.clip(np.tanh(eta_bit + eta_check), -_M_CLIP, _M_CLIP)

    def directed(self) -> np.ndarray:
        return np.vstack([self.bit_m[self.code.edge_bits], self.check_m])

    def table(self, vertex: tuple[str, int]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(probabilities (K,), edge spins (K, deg), incident edge ids)."""
        kind, idx = vertex
        if kind == "b":
            t = self.bit_m[idx]
            edges = self.code.bit_edges[idx]
            probs = np.array([(1 + t) / 2, (1 - t) / 2])
            spins = np.repeat(np.array([[1.0], [-1.0]]), len(edges), axis=1)
            return probs, spins, edges
        edges = self.code.check_edges[idx]
        return self.check_probs[idx], even_configurations(len(edges)).astype(np.float64), edges


def _loop_vertices(code: ParityCheckCode, loop: GeneralizedLoop) -> dict[tuple[str, int], list[int]]:
    at: dict[tuple[str, int], list[int]] = {}
    for e in loop.edges:
        at.setdefault(("b", int(code.edge_bits[e])), []).append(e)
        at.setdefault(("c", int(code.edge_checks[e])), []).append(e)
    return at


def _other_end(code: ParityCheckCode, vertex: tuple[str, int], e: int) -> tuple[str, int]:
    return ("c", int(code.edge_checks[e])) if vertex[0] == "b" else ("b", int(code.edge_bits[e]))


def loop_moments(code: ParityCheckCode, view: _VertexView, loop: GeneralizedLoop) -> LoopMoments:
    m_e = view.edge_m
    at = _loop_vertices(code, loop)
    loop_edges = set(loop.edges)
    tables = {v: view.table(v) for v in at}

    # per vertex: factor matrix over its loop edges
    factors = {}
    mus = {}
    for v, edges in at.items():
        probs, spins, incident = tables[v]
        cols = [int(np.flatnonzero(incident == e)[0]) for e in edges]
        f = spins[:, cols] - m_e[edges]
        factors[v] = (cols, f)
        mus[v] = float(probs @ np.prod(f, axis=1))

    denominator = math.prod(1.0 - m_e[e] ** 2 for e in loop.edges)
    others = {v: math.prod(mu for w, mu in mus.items() if w != v) / denominator for v in at}
    amplitude = math.prod(mus.values()) / denominator

    def without(v: tuple[str, int], e: int) -> float:
        """<g_v / (sigma_e - m_e)>_v"""
        probs = tables[v][0]
        edges = at[v]
        keep = [k for k, x in enumerate(edges) if x != e]
        return float(probs @ np.prod(factors[v][1][:, keep], axis=1))

    d_amp = np.zeros((2, code.n_edges))
    for v, edges in at.items():
        probs, spins, incident = tables[v]
        g = np.prod(factors[v][1], axis=1)
        side = BIT_SIDE if v[0] == "b" else CHECK_SIDE
        for col, e in enumerate(incident):
            e = int(e)
            s = spins[:, col]
            cov = float(probs @ (g * (s - probs @ s)))
            if e not in loop_edges:
                d_amp[side, e] = cov * others[v]
                continue
            dm = 1.0 - m_e[e] ** 2
            far = _other_end(code, v, e)
            d_amp[side, e] = (
                (cov - dm * without(v, e)) * others[v]
                - dm * without(far, e) * others[far]
                + 2.0 * m_e[e] * amplitude
            )
    return LoopMoments(loop=loop, vertex_moments=mus, amplitude=amplitude, d_amplitude=d_amp)


def _system(
    code: ParityCheckCode, h: np.ndarray, state: EffectiveBpState
) -> tuple[np.ndarray, np.ndarray, _VertexView, list[LoopMoments]]:
    """(residuals, loop correction, view, moments), each array shaped (2, n_edges)."""
    view = _VertexView(code, h, state.eta_bit, state.eta_check)
    moments = [loop_moments(code, view, c) for c in state.loops]
    correction = np.zeros((2, code.n_edges))
    if moments:
        norm = 1.0 + math.fsum(lm.amplitude for lm in moments)
        if abs(norm) < 1e-12:
            raise LoopSeriesError("1 + sum A vanishes at this gauge point")
        correction = sum(lm.d_amplitude for lm in moments) / norm
    residual = view.directed() - np.tanh(state.eta_bit + state.eta_check)[None, :] + correction
    return residual, correction, view, moments


def residual_system(code: ParityCheckCode, h, state: EffectiveBpState) -> np.ndarray:
    """Per-directed-edge residuals (2, n_edges); zero iff the modified equations hold."""
    h = _as_h(h)
    return _system(code, h, state)[0]


def effective_magnetization(code: ParityCheckCode, h, state: EffectiveBpState) -> np.ndarray:
    """m_eff_i = [m_i + sum_Gamma (i in Gamma ? <sigma g_i> prod_{d != i} mu_d / prod(1-m^2) : m_i A_Gamma)]
    / (1 + sum_Gamma A_Gamma)."""
    h = _as_h(h)
    view = _VertexView(code, h, state.eta_bit, state.eta_check)
    m = view.bit_m.copy()
    if not state.loops:
        return m
    numerator = m.copy()
    total = 1.0
    for loop in state.loops:
        lm = loop_moments(code, view, loop)
        total += lm.amplitude
        at = _loop_vertices(code, loop)
        denominator = math.prod(1.0 - view.edge_m[e] ** 2 for e in loop.edges)
        on_loop = set()
        for v, edges in at.items():
            if v[0] != "b":
                continue
            i = v[1]
            on_loop.add(i)
            probs, spins, incident = view.table(v)
            cols = [int(np.flatnonzero(incident == e)[0]) for e in edges]
            g = np.prod(spins[:, cols] - view.edge_m[edges], axis=1)
            rest = math.prod(mu for w, mu in lm.vertex_moments.items() if w != v)
            numerator[i] += float(probs @ (spins[:, 0] * g)) * rest / denominator
        away = np.array([i for i in range(code.n_bits) if i not in on_loop], dtype=np.int64)
        numerator[away] += m[away] * lm.amplitude
    if abs(total) < 1e-12:
        raise LoopSeriesError("1 + sum A vanishes; effective magnetization undefined")
    return numerator / total


def solve_effective_bp(
    code: ParityCheckCode,
    h,
    loops: list[GeneralizedLoop],
    damping: float | None = None,
    max_iters: int | None = None,
    tol: float | None = None,
    initial: BpState | EffectiveBpState | None = None,
) -> tuple[EffectiveBpState, np.ndarray]:
    """Damped fixed-point iteration of the modified gauge equations.

    Starts from the bare BP state (run here unless `initial` is given) and
    returns the best-residual iterate with its effective magnetizations.
    """
    h = _as_h(h)
    if h.shape != (code.n_bits,):
        raise ValueError(f"expected {code.n_bits} log-likelihoods, got shape {h.shape}")
    damping = settings.effective_damping if damping is None else damping
    max_iters = settings.effective_max_iters if max_iters is None else max_iters
    tol = settings.effective_tol if tol is None else tol
    if not 0.0 <= damping < 1.0:
        raise ValueError(f"damping must be in [0, 1), got {damping}")
    for loop in loops:
        if not loop.is_single_connected():
            raise ValueError("only single-connected loops enter the effective free energy")

    if isinstance(initial, EffectiveBpState):
        state = EffectiveBpState(initial.eta_bit.copy(), initial.eta_check.copy(), loops=list(loops))
    else:
        bp_state = initial if initial is not None else run_bp(code, h)[0]
        state = EffectiveBpState.from_bp(code, bp_state, loops)

    clip = settings.message_clip
    best: EffectiveBpState | None = None
    for it in range(max_iters + 1):
        residual, correction, view, _ = _system(code, h, state)
        norm = float(np.max(np.abs(residual))) if residual.size else 0.0
        state.residual = norm
        state.iterations_run = it
        state.residual_history.append(norm)
        if best is None or norm < best.residual:
            best = EffectiveBpState(
                state.eta_bit.copy(), state.eta_check.copy(), list(loops), norm, False, it, list(state.residual_history)
            )
        if norm <= tol:
            best.converged = True
            break
        if it == max_iters:
            break
        directed = view.directed()
        target = np.clip(directed + correction, -_TARGET_CLIP, _TARGET_CLIP)
        new_check = np.clip(np.arctanh(target[BIT_SIDE]) - state.eta_bit, -clip, clip)
        new_bit = np.clip(np.arctanh(target[CHECK_SIDE]) - state.eta_check, -clip, clip)
        state.eta_check = (1.0 - damping) * new_check + damping * state.eta_check
        state.eta_bit = (1.0 - damping) * new_bit + damping * state.eta_bit

    best.residual_history = state.residual_history
    if not best.converged:
        logger.debug("Effective BP not converged: best residual %.3e after %d sweeps", best.residual, state.iterations_run)
    return best, effective_magnetization(code, h, best)


def decode_loop_corrected_bp(
    code: ParityCheckCode,
    h,
    max_loops: int | None = None,
    thresholds=None,
    max_loop_bits: int | None = None,
    damping: float | None = None,
    max_iters: int | None = None,
    tol: float | None = None,
    bp_max_iters: int | None = None,
    bp_tol: float | None = None,
    bp_damping: float | None = None,
) -> DecodeResult:
    """Bare BP; on failure add critical loops one at a time to the effective free energy.

    `bp_*` drive the bare BP stage (settings `bp_*` when None); `damping`,
    `max_iters` and `tol` drive the effective solve.
    """
    h = _as_h(h)
    max_loops = settings.max_loops if max_loops is None else max_loops
    bp_state, beliefs = run_bp(code, h, max_iters=bp_max_iters, tol=bp_tol, damping=bp_damping)
    spins = hard_decision(beliefs.bit_magnetizations)
    if np.all(syndrome(code, spins) == 1):
        return DecodeResult(
            decoder="loop-bp",
            success=True,
            spins=spins,
            beliefs=beliefs,
            state=bp_state,
            diagnostics={"loops_used": [], "bp_converged": bp_state.converged},
        )

    ranked = rank_critical_loops(code, beliefs, thresholds=thresholds, max_loop_bits=max_loop_bits)
    loops: list[GeneralizedLoop] = []
    used: list[dict] = []
    state: EffectiveBpState | None = None
    m_eff = beliefs.bit_magnetizations
    for candidate in ranked[:max_loops]:
        loops.append(candidate.loop)
        used.append(candidate.to_dict())
        try:
            state, m_eff = solve_effective_bp(
                code, h, loops, damping=damping, max_iters=max_iters, tol=tol, initial=bp_state
            )
        except LoopSeriesError as exc:
            logger.warning("Loop-corrected BP [%s]: %s", code.name, exc)
            used[-1]["error"] = str(exc)
            loops.pop()
            continue
        spins = hard_decision(m_eff)
        if np.all(syndrome(code, spins) == 1):
            logger.info("Loop-corrected BP [%s]: success with %d loop(s)", code.name, len(loops))
            return DecodeResult(
                decoder="loop-bp",
                success=True,
                spins=spins,
                beliefs=beliefs,
                state=state,
                diagnostics=_diagnostics(used, state, m_eff, bp_state),
            )

    return DecodeResult(
        decoder="loop-bp",
        success=False,
        spins=hard_decision(m_eff),
        beliefs=beliefs,
        state=state or bp_state,
        diagnostics=_diagnostics(used, state, m_eff, bp_state),
    )


def _diagnostics(used: list[dict], state: EffectiveBpState | None, m_eff: np.ndarray, bp_state: BpState) -> dict:
    return {
        "loops_used": used,
        "bp_converged": bp_state.converged,
        "converged": None if state is None else state.converged,
        "residual_history": [] if state is None else state.residual_history,
        "m_eff": np.asarray(m_eff).tolist(),
    }
