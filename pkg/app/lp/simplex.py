"""Dense primal simplex for  min c.x  s.t.  A x <= b,  0 <= x <= 1.

The solver works on the inequality form G x <= g with G = [A; I; -I]. A vertex
is a working set W of n linearly independent active rows; the inverse of G[W]
is carried by rank-one updates and refactorized every REFACTOR_EVERY pivots.
The origin must be feasible (b >= 0), which holds for the decoding polytope.

Pivots run on a shifted right-hand side: every row except the lower bounds is
loosened by a tiny deterministic amount, which makes the origin a simple
vertex and breaks the massive degeneracy of the check inequalities. The final
point is re-solved from the optimal working set with the exact right-hand
side; optimality does not depend on g, and for small enough shifts the exact
point is a feasible vertex of the original polytope.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np

from app.config import settings

logger = logging.getLogger(__name__)

REFACTOR_EVERY = 64
DEGENERATE_SWITCH = 50  # consecutive zero-length pivots before Bland's rule takes over
_PIVOT_REL = 1e-9  # smallest accepted |G_r d| relative to the largest along the edge
_HARRIS_TOL = 1e-10
_STEP_TOL = 1e-12
_REFACTOR_RESIDUAL = 1e-7
_SHIFT = 1e-7
_RESTART_SHIFT = 1e-6


class LpStallError(RuntimeError):
    pass


class LpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    RESTARTED = "restarted"  # optimal after one perturbed restart
    STALLED = "stalled"


class _Breakdown(Exception):
    """The working set went singular or lost its blocking rows."""


@dataclass
class LpSolution:
    x: np.ndarray
    objective: float
    status: LpStatus
    iterations: int = 0
    max_violation: float = 0.0

    def __iter__(self):
        # unpacks as (x, objective, status)
        return iter((self.x, self.objective, self.status))


@dataclass
class _Vertex:
    working: np.ndarray  # row index of G per working-set slot
    minv: np.ndarray  # inverse of G[working]
    x: np.ndarray


def _stack(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = a.shape[1]
    eye = np.eye(n)
    g_mat = np.vstack([a, eye, -eye])
    g_rhs = np.concatenate([b, np.ones(n), np.zeros(n)])
    return g_mat, g_rhs


def _shifted(g_rhs: np.ndarray, n: int, scale: float, seed: int) -> np.ndarray:
    # lower bounds stay exact so the origin remains a vertex
    p = g_rhs.shape[0]
    shift = np.zeros(p)
    shift[: p - n] = scale * (1.0 + np.random.default_rng(seed).random(p - n))
    return g_rhs + shift


def _origin(m: int, n: int, g_rhs: np.ndarray) -> _Vertex:
    working = np.arange(m + n, m + 2 * n)
    minv = -np.eye(n)
    return _Vertex(working=working, minv=minv, x=minv @ g_rhs[working])


def _refactor(g_mat: np.ndarray, working: np.ndarray) -> np.ndarray:
    basis = g_mat[working]
    try:
        minv = np.linalg.inv(basis)
    except np.linalg.LinAlgError as e:
        raise _Breakdown(f"singular working set: {e}") from e
    residual = float(np.max(np.abs(basis @ minv - np.eye(basis.shape[0]))))
    if not np.isfinite(residual) or residual > _REFACTOR_RESIDUAL:
        raise _Breakdown(f"ill-conditioned working set (residual {residual:.2e})")
    return minv


def _pivot_loop(
    g_mat: np.ndarray,
    g_rhs: np.ndarray,
    c: np.ndarray,
    vertex: _Vertex,
    max_iters: int,
    bland: bool,
) -> tuple[_Vertex, bool, int]:
    """Run pivots from `vertex`. Returns (vertex, optimal, iterations).

    Pricing takes the most negative multiplier per unit edge length (steepest
    edge) until DEGENERATE_SWITCH degenerate pivots in a row, then Bland's
    smallest-index rule. The ratio test is Harris's two-pass rule: bounds are
    loosened by _HARRIS_TOL, and among the rows blocking within the loosened
    step the one with the largest |G_r d| leaves (smallest index under Bland).
    """
    p = g_mat.shape[0]
    opt_tol = 1e-10 * max(1.0, float(np.max(np.abs(c))) if c.size else 1.0)
    in_w = np.zeros(p, dtype=bool)
    in_w[vertex.working] = True
    degenerate_run = 0

    for it in range(1, max_iters + 1):
        lam = -(vertex.minv.T @ c)
        negative = np.flatnonzero(lam < -opt_tol)
        if negative.size == 0:
            return vertex, True, it - 1

        if bland:
            k = int(negative[np.argmin(vertex.working[negative])])
        else:
            lengths = np.linalg.norm(vertex.minv[:, negative], axis=0)
            k = int(negative[np.argmin(lam[negative] / lengths)])

        u = vertex.minv[:, k].copy()
        gd = -(g_mat @ u)
        scale = float(np.max(np.abs(gd)))
        candidates = np.flatnonzero((gd > max(_PIVOT_REL * scale, _STEP_TOL)) & ~in_w)
        if candidates.size == 0:
            # the box keeps every edge bounded, so this is numerical
            raise _Breakdown("no blocking row along a bounded edge")
        step = gd[candidates]
        slack = np.maximum(g_rhs[candidates] - g_mat[candidates] @ vertex.x, 0.0)
        ratios = slack / step
        loose = float(np.min((slack + _HARRIS_TOL) / step))
        eligible = np.flatnonzero(ratios <= loose)
        if bland:
            strong = eligible[step[eligible] >= 1e-3 * float(step[eligible].max())]
            j = int(strong[np.argmin(candidates[strong])])
        else:
            j = int(eligible[np.argmax(step[eligible])])
        r = int(candidates[j])
        t = float(ratios[j])

        degenerate_run = degenerate_run + 1 if t <= _STEP_TOL else 0
        if not bland and degenerate_run >= DEGENERATE_SWITCH:
            logger.debug("Switching to Bland's rule after %d degenerate pivots", degenerate_run)
            bland = True

        w = g_mat[r] @ vertex.minv
        alpha = w[k]
        leaving = int(vertex.working[k])
        in_w[leaving] = False
        in_w[r] = True
        vertex.working[k] = r
        if it % REFACTOR_EVERY == 0:
            vertex.minv = _refactor(g_mat, vertex.working)
        else:
            vertex.minv -= np.outer(u, w) / alpha
            vertex.minv[:, k] = u / alpha
        vertex.x = vertex.minv @ g_rhs[vertex.working]
        if not np.all(np.isfinite(vertex.x)):
            raise _Breakdown("non-finite vertex after rank-one update")

    return vertex, False, max_iters


def _attempt(
    g_mat: np.ndarray,
    g_rhs: np.ndarray,
    c: np.ndarray,
    m: int,
    n: int,
    max_iters: int,
    *,
    scale: float,
    seed: int,
    bland: bool,
) -> tuple[_Vertex | None, int]:
    shifted = _shifted(g_rhs, n, scale, seed)
    try:
        vertex, optimal, iters = _pivot_loop(g_mat, shifted, c, _origin(m, n, shifted), max_iters, bland=bland)
        if not optimal:
            logger.warning("Simplex hit %d pivots without reaching optimality", max_iters)
            return None, iters
        vertex.minv = _refactor(g_mat, vertex.working)
    except _Breakdown as e:
        logger.warning("Simplex breakdown: %s", e)
        return None, 0
    vertex.x = vertex.minv @ g_rhs[vertex.working]
    return vertex, iters


def solve_box_lp(
    c: np.ndarray, a: np.ndarray, b: np.ndarray, max_iters: int | None = None
) -> LpSolution:
    c = np.asarray(c, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64).reshape(-1, c.shape[0])
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (a.shape[0],):
        raise ValueError(f"{a.shape[0]} constraint rows but {b.shape[0]} right-hand sides")
    if np.any(b < 0):
        raise ValueError("the origin must be feasible (b >= 0)")
    max_iters = settings.lp_max_iters if max_iters is None else max_iters
    m, n = a.shape
    g_mat, g_rhs = _stack(a, b)

    status = LpStatus.OPTIMAL
    vertex, iters = _attempt(g_mat, g_rhs, c, m, n, max_iters, scale=_SHIFT, seed=0, bland=False)
    if vertex is None:
        logger.warning("Restarting simplex with a fresh perturbation under Bland's rule")
        vertex, more = _attempt(g_mat, g_rhs, c, m, n, max_iters, scale=_RESTART_SHIFT, seed=1, bland=True)
        iters += more
        if vertex is None:
            raise LpStallError(f"simplex stalled twice ({iters} pivots)")
        status = LpStatus.RESTARTED

    x = vertex.x
    violation = float(max(np.max(g_mat @ x - g_rhs), 0.0))
    if violation > settings.lp_feasibility_tol:
        logger.warning("LP vertex violates a constraint by %.3e", violation)
    return LpSolution(x=x, objective=float(c @ x), status=status, iterations=iters, max_violation=violation)
