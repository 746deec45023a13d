"""Dense GF(2) linear algebra on numpy uint8 arrays.

Row reduction with XOR row operations; used for rank checks, codeword
enumeration of small codes and random codeword sampling.
"""

from __future__ import annotations

import numpy as np

from app.code.tanner import Codeword, ParityCheckCode

MAX_ENUMERATION_DIMENSION = 24


class DimensionTooLargeError(ValueError):
    pass


def gf2_rref(M: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row-echelon form over GF(2).

    Returns:
        (R, pivot_cols) with R of the same shape as M (uint8) and one pivot
        column per nonzero row of R.
    """
    R = (np.asarray(M, dtype=np.uint8) % 2).copy()
    m, n = R.shape
    pivot_cols: list[int] = []
    row = 0
    for col in range(n):
        if row == m:
            break
        hits = np.flatnonzero(R[row:, col])
        if hits.size == 0:
            continue
        found = row + hits[0]
        if found != row:
            R[[row, found]] = R[[found, row]]
        # Eliminate above and below in one shot.
        mask = R[:, col].astype(bool)
        mask[row] = False
        R[mask] ^= R[row]
        pivot_cols.append(col)
        row += 1
    return R, pivot_cols


def gf2_rank(M: np.ndarray) -> int:
    _, pivots = gf2_rref(M)
    return len(pivots)


def gf2_nullspace(M: np.ndarray) -> np.ndarray:
    """Basis of {x : M x = 0 (mod 2)} as rows of a (K, n) uint8 matrix."""
    M = np.asarray(M, dtype=np.uint8)
    n = M.shape[1]
    R, pivots = gf2_rref(M)
    pivot_set = set(pivots)
    free = [c for c in range(n) if c not in pivot_set]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for r, p in enumerate(pivots):
            basis[k, p] = R[r, f]
    return basis


def dimension(code: ParityCheckCode) -> int:
    return code.n_bits - gf2_rank(code.to_matrix())


def codeword_matrix(code: ParityCheckCode) -> np.ndarray:
    """All 2^K codewords as rows of a (2^K, n) uint8 matrix.

    Row k is the combination of nullspace basis vectors selected by the binary
    digits of k, so the order is deterministic and row 0 is the zero word.
    """
    basis = gf2_nullspace(code.to_matrix())
    k = basis.shape[0]
    if k > MAX_ENUMERATION_DIMENSION:
        raise DimensionTooLargeError(
            f"code dimension {k} exceeds enumeration limit {MAX_ENUMERATION_DIMENSION}"
        )
    coeffs = ((np.arange(2**k)[:, None] >> np.arange(k)[None, :]) & 1).astype(np.uint8)
    return (coeffs.astype(np.int64) @ basis.astype(np.int64) % 2).astype(np.uint8)


def enumerate_codewords(code: ParityCheckCode) -> list[Codeword]:
    return [Codeword(bits=row) for row in codeword_matrix(code)]


def random_codewords(code: ParityCheckCode, count: int, seed: int) -> np.ndarray:
    """Uniform random codewords (rows), drawn as random nullspace combinations."""
    basis = gf2_nullspace(code.to_matrix())
    rng = np.random.default_rng(seed)
    coeffs = rng.integers(0, 2, size=(count, basis.shape[0]))
    return (coeffs @ basis.astype(np.int64) % 2).astype(np.uint8)


def lightest_codeword(
    code: ParityCheckCode, iterations: int, seed: int, stop_at: int | None = None
) -> np.ndarray | None:
    """Lightest nonzero codeword met by a randomized information-set search.

    Each iteration row-reduces the generator under a random column order and
    scores every systematic row and every XOR of two of them. Stops early once
    a word of weight <= `stop_at` turns up. Returns None only for K = 0.
    """
    basis = gf2_nullspace(code.to_matrix())
    k, n = basis.shape
    if k == 0:
        return None
    rng = np.random.default_rng(seed)
    first, second = np.triu_indices(k, 1)
    best: np.ndarray | None = None
    for _ in range(iterations):
        perm = rng.permutation(n)
        R, _ = gf2_rref(basis[:, perm])
        candidates = np.vstack([R, R[first] ^ R[second]])
        weights = candidates.sum(axis=1, dtype=np.int64)
        weights[weights == 0] = n + 1
        j = int(np.argmin(weights))
        if best is None or weights[j] < int(best.sum()):
            best = np.empty(n, dtype=np.uint8)
            best[perm] = candidates[j]
        if stop_at is not None and int(best.sum()) <= stop_at:
            break
    return best
