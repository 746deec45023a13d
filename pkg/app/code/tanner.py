"""Tanner-graph representation of binary linear codes.

Edges are numbered check-major: all edges of check 0 in neighbor-list order,
then check 1, and so on. Message vectors in every decoder are indexed by this
edge id.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import networkx as nx
import numpy as np


@dataclass(frozen=True)
class ParityCheckCode:
    n_bits: int
    check_neighbors: tuple[tuple[int, ...], ...]
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if self.n_bits <= 0:
            raise ValueError(f"code needs at least one bit, got n_bits={self.n_bits}")
        for alpha, bits in enumerate(self.check_neighbors):
            if not bits:
                raise ValueError(f"check {alpha} is empty")
            if len(set(bits)) != len(bits):
                raise ValueError(f"check {alpha} repeats a bit: {bits}")
            for i in bits:
                if not 0 <= i < self.n_bits:
                    raise ValueError(f"check {alpha} references bit {i} outside [0, {self.n_bits})")

    @classmethod
    def from_matrix(cls, H: np.ndarray, name: str = "") -> ParityCheckCode:
        H = np.asarray(H) % 2
        if H.ndim != 2:
            raise ValueError(f"parity-check matrix must be 2-D, got shape {H.shape}")
        checks = tuple(tuple(int(i) for i in np.flatnonzero(row)) for row in H)
        return cls(n_bits=H.shape[1], check_neighbors=checks, name=name)

    @property
    def n_checks(self) -> int:
        return len(self.check_neighbors)

    @cached_property
    def n_edges(self) -> int:
        return sum(len(c) for c in self.check_neighbors)

    @cached_property
    def bit_neighbors(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.n_bits)]
        for alpha, bits in enumerate(self.check_neighbors):
            for i in bits:
                nbrs[i].append(alpha)
        return tuple(tuple(n) for n in nbrs)

    @cached_property
    def edge_bits(self) -> np.ndarray:
        return np.fromiter(
            (i for bits in self.check_neighbors for i in bits), dtype=np.int64, count=self.n_edges
        )

    @cached_property
    def edge_checks(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_checks), self.check_degrees)

    @cached_property
    def check_degrees(self) -> np.ndarray:
        return np.array([len(c) for c in self.check_neighbors], dtype=np.int64)

    @cached_property
    def bit_degrees(self) -> np.ndarray:
        return np.bincount(self.edge_bits, minlength=self.n_bits)

    @cached_property
    def check_offsets(self) -> np.ndarray:
        """Index of the first edge of every check."""
        if self.n_checks == 0:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate(([0], np.cumsum(self.check_degrees)[:-1])).astype(np.int64)

    @cached_property
    def _edge_lookup(self) -> dict[tuple[int, int], int]:
        return {
            (int(i), int(a)): e for e, (i, a) in enumerate(zip(self.edge_bits, self.edge_checks))
        }

    def edge_id(self, bit: int, check: int) -> int:
        try:
            return self._edge_lookup[(bit, check)]
        except KeyError:
            raise KeyError(f"bit {bit} is not adjacent to check {check}") from None

    @cached_property
    def bit_edges(self) -> tuple[np.ndarray, ...]:
        """Edge ids of every bit, in the order of bit_neighbors."""
        return tuple(
            np.array([self.edge_id(i, a) for a in self.bit_neighbors[i]], dtype=np.int64)
            for i in range(self.n_bits)
        )

    @cached_property
    def check_edges(self) -> tuple[np.ndarray, ...]:
        return tuple(
            np.arange(start, start + deg, dtype=np.int64)
            for start, deg in zip(self.check_offsets, self.check_degrees)
        )

    def to_matrix(self) -> np.ndarray:
        H = np.zeros((self.n_checks, self.n_bits), dtype=np.uint8)
        H[self.edge_checks, self.edge_bits] = 1
        return H

    def tanner_graph(self) -> nx.Graph:
        """Bipartite view with nodes ("b", i) and ("c", alpha); edges carry their id."""
        g = nx.Graph()
        g.add_nodes_from((("b", i) for i in range(self.n_bits)), bipartite=0)
        g.add_nodes_from((("c", a) for a in range(self.n_checks)), bipartite=1)
        for e, (i, a) in enumerate(zip(self.edge_bits, self.edge_checks)):
            g.add_edge(("b", int(i)), ("c", int(a)), edge_id=e)
        return g

    def describe(self) -> dict:
        return {
            "name": self.name,
            "n_bits": self.n_bits,
            "n_checks": self.n_checks,
            "n_edges": self.n_edges,
            "bit_degrees": sorted(set(int(d) for d in self.bit_degrees)),
            "check_degrees": sorted(set(int(d) for d in self.check_degrees)),
        }


@dataclass(frozen=True)
class Codeword:
    bits: np.ndarray  # {0,1}, sigma_i = 1 - 2*bit_i

    @classmethod
    def from_spins(cls, spins: np.ndarray) -> Codeword:
        spins = np.asarray(spins)
        return cls(bits=(spins < 0).astype(np.uint8))

    @classmethod
    def zero(cls, n_bits: int) -> Codeword:
        return cls(bits=np.zeros(n_bits, dtype=np.uint8))

    @property
    def spins(self) -> np.ndarray:
        return 1 - 2 * self.bits.astype(np.int64)

    @property
    def weight(self) -> int:
        return int(self.bits.sum())


def syndrome(code: ParityCheckCode, spins: np.ndarray) -> np.ndarray:
    """Product of spins over every check (+1 satisfied, -1 violated)."""
    spins = np.asarray(spins)
    if spins.shape != (code.n_bits,):
        raise ValueError(f"expected {code.n_bits} spins, got shape {spins.shape}")
    if code.n_checks == 0:
        return np.ones(0, dtype=np.int64)
    negatives = (spins[code.edge_bits] < 0).astype(np.int64)
    odd = np.add.reduceat(negatives, code.check_offsets) % 2
    return 1 - 2 * odd


def is_codeword(code: ParityCheckCode, spins: np.ndarray) -> bool:
    return bool(np.all(syndrome(code, spins) == 1))
