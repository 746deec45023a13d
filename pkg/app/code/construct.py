"""Code constructions: the quasi-cyclic Tanner (155,64,20) code and the small
graphs used as exact oracles."""

from __future__ import annotations

import logging
from collections import deque
from collections.abc import Callable
from functools import lru_cache
from pathlib import Path

import networkx as nx
import numpy as np

from app.code.alist import load_code, parse_alist
from app.code.tanner import ParityCheckCode
from app.config import settings

logger = logging.getLogger(__name__)

TANNER_CIRCULANT = 31


def circulant(size: int, shift: int) -> np.ndarray:
    """Identity with every row's 1 moved `shift` columns to the right (cyclically)."""
    return np.roll(np.eye(size, dtype=np.uint8), shift % size, axis=1)


def tanner_shifts() -> np.ndarray:
    """Shift exponents of the 3x5 circulant array: block (j, k) -> 5^j * 2^k mod 31."""
    return np.array([[(pow(5, j) * pow(2, k)) % TANNER_CIRCULANT for k in range(5)] for j in range(3)])


def build_tanner_155() -> ParityCheckCode:
    shifts = tanner_shifts()
    H = np.block([[circulant(TANNER_CIRCULANT, s) for s in row] for row in shifts])
    return ParityCheckCode.from_matrix(H, name="tanner155")


def girth(code: ParityCheckCode) -> int | None:
    """Shortest cycle of the Tanner graph counting bits and checks (None on forests)."""
    n = code.n_bits
    adj: list[list[int]] = [[n + a for a in code.bit_neighbors[i]] for i in range(n)]
    adj += [list(bits) for bits in code.check_neighbors]

    best: int | None = None
    for root in range(len(adj)):
        depth = {root: 0}
        parent = {root: -1}
        queue = deque([root])
        while queue:
            v = queue.popleft()
            if best is not None and 2 * depth[v] + 1 >= best:
                break
            for w in adj[v]:
                if w not in depth:
                    depth[w] = depth[v] + 1
                    parent[w] = v
                    queue.append(w)
                elif parent[v] != w:
                    length = depth[v] + depth[w] + 1
                    if best is None or length < best:
                        best = length
    return best


# Small oracle codes

HAMMING_7_4_ALIST = """\
7 3
3 4
1 1 2 1 2 2 3
4 4 4
1 0 0
2 0 0
1 2 0
3 0 0
1 3 0
2 3 0
1 2 3
1 3 5 7
2 3 6 7
4 5 6 7
"""


def repetition_code(n: int = 3) -> ParityCheckCode:
    checks = tuple((i, i + 1) for i in range(n - 1))
    return ParityCheckCode(n_bits=n, check_neighbors=checks, name=f"repetition{n}")


def single_check_code(n: int) -> ParityCheckCode:
    return ParityCheckCode(n_bits=n, check_neighbors=(tuple(range(n)),), name=f"check{n}")


def hamming_7_4() -> ParityCheckCode:
    return parse_alist(HAMMING_7_4_ALIST, name="hamming74")


def tree_code() -> ParityCheckCode:
    """Seven bits, four checks, cycle-free, with bits of degree 1 and 2."""
    checks = ((0, 1, 2), (2, 3, 4), (4, 5), (1, 6))
    return ParityCheckCode(n_bits=7, check_neighbors=checks, name="tree7")


def single_cycle_code(length: int = 4) -> ParityCheckCode:
    """Ring of `length` degree-3 checks; ring bits 0..length-1 plus one pendant bit per check."""
    checks = tuple((j, (j + 1) % length, length + j) for j in range(length))
    return ParityCheckCode(n_bits=2 * length, check_neighbors=checks, name=f"cycle{length}")


def vertex_model_code(graph: nx.Graph, name: str, pendants: tuple = ()) -> ParityCheckCode:
    """Spins on the edges of `graph`, one parity check per vertex.

    Every graph edge becomes a degree-2 bit; vertices listed in `pendants` get
    an extra degree-1 bit.
    """
    nodes = sorted(graph.nodes)
    edges = sorted(tuple(sorted(e)) for e in graph.edges)
    incident: dict = {v: [] for v in nodes}
    for b, (u, v) in enumerate(edges):
        incident[u].append(b)
        incident[v].append(b)
    n_bits = len(edges)
    for v in pendants:
        incident[v].append(n_bits)
        n_bits += 1
    checks = tuple(tuple(incident[v]) for v in nodes if incident[v])
    return ParityCheckCode(n_bits=n_bits, check_neighbors=checks, name=name)


def fused_cycles_code() -> ParityCheckCode:
    """Theta graph: two hubs joined by three two-edge paths, pendant bits on the hubs."""
    g = nx.Graph([("u", "a"), ("a", "v"), ("u", "b"), ("b", "v"), ("u", "c"), ("c", "v")])
    return vertex_model_code(g, "fused_cycles", pendants=("u", "v"))


def complete4_code() -> ParityCheckCode:
    """Complete graph on four vertices as a vertex model (14 generalized loops)."""
    return vertex_model_code(nx.complete_graph(4), "k4")


def random_23_code(n_checks: int = 8, seed: int = 7) -> ParityCheckCode:
    """Bits of degree 2, checks of degree 3: edges of a seeded random cubic graph."""
    g = nx.random_regular_graph(3, n_checks, seed=seed)
    return vertex_model_code(g, f"random23_{n_checks}")


_LIBRARY: dict[str, Callable[[], ParityCheckCode]] = {
    "repetition3": repetition_code,
    "check3": lambda: single_check_code(3),
    "check4": lambda: single_check_code(4),
    "hamming74": hamming_7_4,
    "tree7": tree_code,
    "cycle4": single_cycle_code,
    "fused_cycles": fused_cycles_code,
    "k4": complete4_code,
    "random23": random_23_code,
    "tanner155": build_tanner_155,
}

# Graphs of the loop-series regression suite (all <= 20 bits).
SMALL_GRAPH_SUITE = ("tree7", "cycle4", "fused_cycles", "k4", "random23")


def library_names() -> list[str]:
    return list(_LIBRARY)


@lru_cache(maxsize=None)
def get_code(name: str) -> ParityCheckCode:
    try:
        factory = _LIBRARY[name]
    except KeyError:
        raise KeyError(f"unknown code {name!r}; known: {', '.join(_LIBRARY)}") from None
    code = factory()
    logger.debug("Built code %s: n=%d m=%d", name, code.n_bits, code.n_checks)
    return code


def resolve_code(ref: str) -> ParityCheckCode:
    """A library name, or the path of an alist/JSON file."""
    if ref in _LIBRARY:
        return get_code(ref)
    return load_code(ref)


def _served_path(ref: str) -> Path | None:
    if not settings.codes_dir or not ref or ref.startswith(".") or Path(ref).name != ref:
        return None
    path = Path(settings.codes_dir) / ref
    return path if path.is_file() else None


def is_served_code(ref: str) -> bool:
    return ref in _LIBRARY or _served_path(ref) is not None


def resolve_served_code(ref: str) -> ParityCheckCode:
    """Resolve a code named by a network client.

    Only library names and bare file names inside `settings.codes_dir` are
    accepted; anything else raises KeyError without touching the filesystem
    outside that directory.
    """
    if ref in _LIBRARY:
        return get_code(ref)
    path = _served_path(ref)
    if path is None:
        raise KeyError(f"unknown code {ref!r}")
    return load_code(path)
