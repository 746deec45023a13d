"""Sum-product BP in the eta-message form.

eta[e] for edge e = (i, alpha) is the bit-to-check message
    eta_{i alpha} = h_i + sum_{beta != alpha} u_{beta i},
    u_{beta i}    = atanh( prod_{j in beta, j != i} tanh eta_{j beta} ),
iterated synchronously with convex damping.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from app.channel.awgn import LlrVector
from app.code.tanner import ParityCheckCode, syndrome
from app.config import settings
from app.models.decode import DecodeResult, hard_decision

logger = logging.getLogger(__name__)

# atanh argument bound; keeps u finite when incoming tanh values round to 1.
_PROD_CLIP = 1.0 - 1e-15
_TINY = 1e-300


class ForbiddenConfigurationError(ValueError):
    pass


@dataclass
class BpState:
    eta: np.ndarray
    iterations_run: int = 0
    converged: bool = False
    residual: float = float("inf")

    @classmethod
    def initial(cls, code: ParityCheckCode, h: np.ndarray) -> BpState:
        return cls(eta=np.asarray(h, dtype=np.float64)[code.edge_bits].copy())


@dataclass
class Beliefs:
    h: np.ndarray
    bit_marginals: np.ndarray  # (n, 2): b_i(+1), b_i(-1)
    check_beliefs: list[np.ndarray]  # per check, over even_configurations(deg)
    bit_magnetizations: np.ndarray
    edge_magnetizations: np.ndarray  # m_{i alpha} from the check belief
    bit_fields: np.ndarray  # a-posteriori log-likelihoods, m_i = tanh(field)


def _as_h(h) -> np.ndarray:
    return h.h if isinstance(h, LlrVector) else np.asarray(h, dtype=np.float64)


@lru_cache(maxsize=None)
def even_configurations(degree: int) -> np.ndarray:
    """Spin configurations of a check with product +1, shape (2^(d-1), d).

    Row k takes its first d-1 spins from the binary digits of k (digit 1 -> -1);
    the last spin restores even parity. Row 0 is all +1.
    """
    k = np.arange(2 ** (degree - 1))
    digits = (k[:, None] >> np.arange(degree - 1)[None, :]) & 1
    head = 1 - 2 * digits
    last = np.prod(head, axis=1, keepdims=True) if degree > 1 else np.ones((1, 1), dtype=np.int64)
    configs = np.hstack([head, last]).astype(np.int8)
    configs.setflags(write=False)
    return configs


@lru_cache(maxsize=None)
def _full_configurations(degree: int) -> np.ndarray:
    k = np.arange(2**degree)
    return (1 - 2 * ((k[:, None] >> np.arange(degree)[None, :]) & 1)).astype(np.int8)


def _degree_groups(code: ParityCheckCode) -> list[tuple[int, np.ndarray, np.ndarray]]:
    """(degree, check ids, edge-id matrix) for every distinct check degree."""
    groups = []
    for d in sorted(set(int(x) for x in code.check_degrees)):
        ids = np.flatnonzero(code.check_degrees == d)
        edges = code.check_offsets[ids][:, None] + np.arange(d)[None, :]
        groups.append((d, ids, edges))
    return groups


def check_messages(code: ParityCheckCode, eta: np.ndarray) -> np.ndarray:
    """u_{alpha i} for every edge, from the incoming bit-to-check messages."""
    if code.n_edges == 0:
        return np.zeros(0)
    t = np.tanh(eta)
    logabs = np.log(np.maximum(np.abs(t), _TINY))
    neg = (t < 0).astype(np.int64)
    total_log = np.add.reduceat(logabs, code.check_offsets)[code.edge_checks]
    total_neg = np.add.reduceat(neg, code.check_offsets)[code.edge_checks]
    sign = 1 - 2 * ((total_neg - neg) % 2)
    prod = sign * np.exp(total_log - logabs)
    return np.arctanh(np.clip(prod, -_PROD_CLIP, _PROD_CLIP))


def bp_sweep(code: ParityCheckCode, h, state: BpState, damping: float, clip: float | None = None) -> BpState:
    if not 0.0 <= damping < 1.0:
        raise ValueError(f"damping must be in [0, 1), got {damping}")
    if state.eta.shape != (code.n_edges,):
        raise ValueError(f"state has {state.eta.shape[0]} messages, code has {code.n_edges} edges")
    h = _as_h(h)
    clip = settings.message_clip if clip is None else clip
    u = check_messages(code, state.eta)
    incoming = np.bincount(code.edge_bits, weights=u, minlength=code.n_bits)
    rhs = np.clip(h[code.edge_bits] + incoming[code.edge_bits] - u, -clip, clip)
    new = (1.0 - damping) * rhs + damping * state.eta
    residual = float(np.max(np.abs(new - state.eta))) if new.size else 0.0
    return BpState(eta=new, iterations_run=state.iterations_run + 1, converged=False, residual=residual)


def check_beliefs(code: ParityCheckCode, eta_check: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    """Check beliefs b_alpha ∝ exp(sum_i eta_{i alpha} sigma_i) on even configurations,
    plus the edge magnetizations they induce."""
    beliefs: list[np.ndarray] = [np.empty(0)] * code.n_checks
    edge_m = np.zeros(code.n_edges)
    for d, ids, edges in _degree_groups(code):
        configs = even_configurations(d).astype(np.float64)
        logits = eta_check[edges] @ configs.T
        logits -= logits.max(axis=1, keepdims=True)
        probs = np.exp(logits)
        probs /= probs.sum(axis=1, keepdims=True)
        edge_m[edges] = probs @ configs
        for row, alpha in enumerate(ids):
            beliefs[alpha] = probs[row]
    return beliefs, edge_m


def bit_fields(code: ParityCheckCode, h, eta: np.ndarray, u: np.ndarray | None = None) -> np.ndarray:
    """Bit-belief fields: (sum_alpha eta_{i alpha} - h_i)/(q_i - 1) for q_i >= 2,
    h_i + sum_alpha u_{alpha i} for degree 0 and 1 bits."""
    h = _as_h(h)
    if u is None:
        u = check_messages(code, eta)
    q = code.bit_degrees
    incoming = h + np.bincount(code.edge_bits, weights=u, minlength=code.n_bits)
    outgoing = np.bincount(code.edge_bits, weights=eta, minlength=code.n_bits)
    with np.errstate(divide="ignore", invalid="ignore"):
        outgoing_form = (outgoing - h) / (q - 1)
    return np.where(q >= 2, outgoing_form, incoming)


def beliefs_from_state(code: ParityCheckCode, h, state: BpState | np.ndarray) -> Beliefs:
    h = _as_h(h)
    eta = state.eta if isinstance(state, BpState) else np.asarray(state, dtype=np.float64)
    fields = bit_fields(code, h, eta)
    m = np.tanh(fields)
    checks, edge_m = check_beliefs(code, eta)
    return Beliefs(
        h=h,
        bit_marginals=np.column_stack([(1 + m) / 2, (1 - m) / 2]),
        check_beliefs=checks,
        bit_magnetizations=m,
        edge_magnetizations=edge_m,
        bit_fields=fields,
    )


def _neg_entropy(p: np.ndarray) -> float:
    """sum p ln p with 0 ln 0 = 0."""
    p = p[p > 0]
    return float(np.sum(p * np.log(p)))


def _even_table(code: ParityCheckCode, alpha: int, b: np.ndarray) -> np.ndarray:
    d = int(code.check_degrees[alpha])
    if b.shape[0] == 2 ** (d - 1):
        return b
    if b.shape[0] == 2**d:
        full = _full_configurations(d)
        odd = np.prod(full, axis=1) < 0
        if np.any(b[odd] > 0):
            raise ForbiddenConfigurationError(f"check {alpha} belief puts mass on odd-parity configurations")
        # reorder the even rows into even_configurations order
        even_rows = full[~odd]
        index = {tuple(r): k for k, r in enumerate(even_rows)}
        order = [index[tuple(r)] for r in even_configurations(d)]
        return b[~odd][order]
    raise ValueError(f"check {alpha}: belief of length {b.shape[0]} does not match degree {d}")


def bethe_free_energy(code: ParityCheckCode, beliefs: Beliefs) -> float:
    """F = sum_a sum b_a ln(b_a/f_a) - sum_edges sum b_e ln b_e."""
    check_term = 0.0
    for alpha, b in enumerate(beliefs.check_beliefs):
        b = _even_table(code, alpha, np.asarray(b, dtype=np.float64))
        if np.any(b < -1e-12) or abs(b.sum() - 1.0) > 1e-9:
            raise ValueError(f"check {alpha} belief is not a distribution")
        check_term += _neg_entropy(b)

    bm = beliefs.bit_marginals
    m = bm[:, 0] - bm[:, 1]
    bit_term = _neg_entropy(bm.ravel()) - float(np.dot(beliefs.h, m))

    me = beliefs.edge_magnetizations
    edge_term = _neg_entropy(np.concatenate([(1 + me) / 2, (1 - me) / 2]))
    return check_term + bit_term - edge_term


def _log2cosh(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(x, -x)


def gauge_from_state(code: ParityCheckCode, state: BpState) -> tuple[np.ndarray, np.ndarray]:
    """Split a BP state into the two gauges of every edge: (bit side, check side).

    The check-side gauge weights the check belief (the message eta itself), the
    bit-side gauge weights the bit belief (the check-to-bit message u).
    """
    return check_messages(code, state.eta), state.eta.copy()


def log_z0(code: ParityCheckCode, h, eta_bit: np.ndarray, eta_check: np.ndarray) -> float:
    """ln Z0 of the gauge-transformed model at arbitrary (eta_bit, eta_check).

    Its derivative in either gauge of edge (ab) is m_{a->b} - tanh(eta_ab + eta_ba),
    so BP fixed points are its stationary points, where it equals -F_Bethe.
    """
    h = _as_h(h)
    fields = h + np.bincount(code.edge_bits, weights=eta_bit, minlength=code.n_bits)
    total = float(np.sum(_log2cosh(fields)))
    for d, _, edges in _degree_groups(code):
        logits = eta_check[edges] @ even_configurations(d).astype(np.float64).T
        top = logits.max(axis=1)
        total += float(np.sum(top + np.log(np.exp(logits - top[:, None]).sum(axis=1))))
    total -= float(np.sum(_log2cosh(eta_bit + eta_check)))
    return total


def directed_magnetizations(
    code: ParityCheckCode, h, eta_bit: np.ndarray, eta_check: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(m_{bit->e}, m_{check->e}, m_e) for every edge e at arbitrary gauges."""
    h = _as_h(h)
    fields = h + np.bincount(code.edge_bits, weights=eta_bit, minlength=code.n_bits)
    m_bit = np.tanh(fields)[code.edge_bits]
    _, m_check = check_beliefs(code, eta_check)
    return m_bit, m_check, np.tanh(eta_bit + eta_check)


def run_bp(
    code: ParityCheckCode,
    h,
    max_iters: int | None = None,
    tol: float | None = None,
    damping: float | None = None,
    state: BpState | None = None,
) -> tuple[BpState, Beliefs]:
    h = _as_h(h)
    if h.shape != (code.n_bits,):
        raise ValueError(f"expected {code.n_bits} log-likelihoods, got shape {h.shape}")
    max_iters = settings.bp_max_iters if max_iters is None else max_iters
    tol = settings.bp_tol if tol is None else tol
    damping = settings.bp_damping if damping is None else damping
    if max_iters < 1 or tol <= 0:
        raise ValueError("max_iters must be >= 1 and tol > 0")

    state = state or BpState.initial(code, h)
    for _ in range(max_iters):
        state = bp_sweep(code, h, state, damping)
        if state.residual <= tol:
            state.converged = True
            break

    if not state.converged:
        logger.debug("BP not converged after %d sweeps (residual %.3e)", state.iterations_run, state.residual)
    return state, beliefs_from_state(code, h, state)


def decode_bp(
    code: ParityCheckCode,
    h,
    max_iters: int | None = None,
    tol: float | None = None,
    damping: float | None = None,
) -> DecodeResult:
    state, beliefs = run_bp(code, h, max_iters=max_iters, tol=tol, damping=damping)
    spins = hard_decision(beliefs.bit_magnetizations)
    success = bool(np.all(syndrome(code, spins) == 1))
    logger.debug(
        "BP [%s]: success=%s converged=%s iters=%d", code.name, success, state.converged, state.iterations_run
    )
    return DecodeResult(
        decoder="bp",
        success=success,
        spins=spins,
        beliefs=beliefs,
        state=state,
        diagnostics={
            "converged": state.converged,
            "iterations": state.iterations_run,
            "residual": state.residual,
            "max_iters": settings.bp_max_iters if max_iters is None else max_iters,
            "damping": settings.bp_damping if damping is None else damping,
        },
    )
