"""LP decoding over the relaxed codeword polytope.

Variables are bit-domain x_i in [0, 1] (sigma_i = 1 - 2 x_i). Each check alpha
contributes the forbidden-set inequalities
    sum_{i in S} x_i - sum_{i in N(alpha) minus S} x_i <= |S| - 1
for every odd-cardinality S, and the objective is sum_i 2 h_i x_i.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from app.channel.awgn import LlrVector
from app.channel.geometry import effective_distance
from app.code.tanner import ParityCheckCode, syndrome
from app.config import settings
from app.lp.simplex import LpSolution, solve_box_lp
from app.models.decode import DecodeResult

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LpProblem:
    objective: np.ndarray  # c, length N
    rows: np.ndarray  # dense (M, N), sense <=
    rhs: np.ndarray
    row_checks: np.ndarray  # check id of each row

    def __post_init__(self) -> None:
        n = self.objective.shape[0]
        if self.rows.ndim != 2 or self.rows.shape[1] != n:
            raise ValueError(f"constraint matrix must have {n} columns")
        if self.rhs.shape != (self.rows.shape[0],) or self.row_checks.shape != self.rhs.shape:
            raise ValueError("one right-hand side and one check id per row")
        if not (np.all(np.isfinite(self.objective)) and np.all(np.isfinite(self.rows)) and np.all(np.isfinite(self.rhs))):
            raise ValueError("LP coefficients must be finite")

    @property
    def n_vars(self) -> int:
        return self.objective.shape[0]

    def violation(self, x: np.ndarray) -> float:
        """Largest violation of the check rows and the [0, 1] box."""
        x = np.asarray(x, dtype=np.float64)
        worst = max(float(np.max(-x, initial=0.0)), float(np.max(x - 1.0, initial=0.0)))
        if self.rows.size:
            worst = max(worst, float(np.max(self.rows @ x - self.rhs)))
        return max(worst, 0.0)


@dataclass(frozen=True)
class PseudoCodeword:
    omega: np.ndarray
    is_integral: bool
    objective_value: float
    effective_distance: float | None  # None for the zero word

    @classmethod
    def from_vertex(cls, x: np.ndarray, objective: float, tol: float | None = None) -> PseudoCodeword:
        tol = settings.lp_integrality_tol if tol is None else tol
        omega = np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)
        integral = bool(np.all(np.minimum(omega, 1.0 - omega) <= tol))
        if integral:
            omega = np.round(omega)
        d_eff = effective_distance(omega) if np.any(omega > tol) else None
        return cls(omega=omega, is_integral=integral, objective_value=float(objective), effective_distance=d_eff)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.omega > settings.lp_integrality_tol)

    def to_dict(self) -> dict:
        return {
            "omega": self.omega.tolist(),
            "integral": self.is_integral,
            "objective": self.objective_value,
            "d_eff": self.effective_distance,
        }


@lru_cache(maxsize=32)
def forbidden_set_polytope(code: ParityCheckCode) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(rows, rhs, row_checks) of the relaxed polytope; 2^(d-1) rows per degree-d check."""
    rows, rhs, owners = [], [], []
    for alpha, nbrs in enumerate(code.check_neighbors):
        for size in range(1, len(nbrs) + 1, 2):
            for subset in itertools.combinations(nbrs, size):
                row = np.zeros(code.n_bits)
                row[list(nbrs)] = -1.0
                row[list(subset)] = 1.0
                rows.append(row)
                rhs.append(size - 1.0)
                owners.append(alpha)
    a = np.array(rows).reshape(-1, code.n_bits)
    b = np.array(rhs, dtype=np.float64)
    checks = np.array(owners, dtype=np.int64)
    for arr in (a, b, checks):
        arr.setflags(write=False)
    logger.debug("Polytope for %s: %d rows", code.name, a.shape[0])
    return a, b, checks


def build_decoding_lp(code: ParityCheckCode, h) -> LpProblem:
    llr = h if isinstance(h, LlrVector) else LlrVector(h)
    llr.check_length(code)
    a, b, checks = forbidden_set_polytope(code)
    return LpProblem(objective=2.0 * llr.h, rows=a, rhs=b, row_checks=checks)


def lp_solve(problem: LpProblem) -> LpSolution:
    return solve_box_lp(problem.objective, problem.rows, problem.rhs)


def decode_lp(code: ParityCheckCode, h) -> DecodeResult:
    """Integral optimum: success with that codeword. Fractional: failure carrying omega."""
    problem = build_decoding_lp(code, h)
    solution = lp_solve(problem)
    pc = PseudoCodeword.from_vertex(solution.x, solution.objective)

    spins = None
    success = False
    if pc.is_integral:
        spins = (1 - 2 * pc.omega).astype(np.int64)
        success = bool(np.all(syndrome(code, spins) == 1))
        if not success:
            logger.warning("Integral LP vertex on %s is not a codeword", code.name)

    logger.debug(
        "LP [%s]: status=%s integral=%s objective=%.6f pivots=%d",
        code.name, solution.status.value, pc.is_integral, solution.objective, solution.iterations,
    )
    return DecodeResult(
        decoder="lp",
        success=success,
        spins=spins,
        pseudo_codeword=pc,
        diagnostics={
            "status": solution.status.value,
            "integral": pc.is_integral,
            "objective": solution.objective,
            "d_eff": pc.effective_distance,
            "iterations": solution.iterations,
            "max_violation": solution.max_violation,
        },
    )
