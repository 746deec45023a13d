"""Generalized loops: Tanner-graph edge subsets in which no vertex has degree 1.

Enumeration is a depth-first include/exclude pass over the check-major edge
order. A vertex is checked as soon as its last incident edge is decided, so
dead branches are cut where they start.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from functools import cached_property

from app.code.tanner import ParityCheckCode
from app.config import settings

logger = logging.getLogger(__name__)


class LoopBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class GeneralizedLoop:
    edges: tuple[int, ...]  # sorted edge ids
    bit_degree: tuple[tuple[int, int], ...]  # (bit, loop degree)
    check_degree: tuple[tuple[int, int], ...]  # (check, loop degree)
    anchor: int | None = None  # bit allowed degree 1 (extended families)

    @classmethod
    def from_edges(cls, code: ParityCheckCode, edges, anchor: int | None = None) -> GeneralizedLoop:
        edges = tuple(sorted(set(int(e) for e in edges)))
        if not edges:
            raise ValueError("a generalized loop needs at least one edge")
        bits = Counter(int(code.edge_bits[e]) for e in edges)
        checks = Counter(int(code.edge_checks[e]) for e in edges)
        for i, q in bits.items():
            if q < 2 and i != anchor:
                raise ValueError(f"bit {i} has loop degree {q}")
        for a, q in checks.items():
            if q < 2:
                raise ValueError(f"check {a} has loop degree {q}")
        if anchor is not None and anchor not in bits:
            raise ValueError(f"anchor bit {anchor} is not on the loop")
        return cls(
            edges=edges,
            bit_degree=tuple(sorted(bits.items())),
            check_degree=tuple(sorted(checks.items())),
            anchor=anchor,
        )

    @cached_property
    def bits(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.bit_degree)

    @cached_property
    def checks(self) -> tuple[int, ...]:
        return tuple(a for a, _ in self.check_degree)

    @cached_property
    def _bit_q(self) -> dict[int, int]:
        return dict(self.bit_degree)

    def degree_of_bit(self, i: int) -> int:
        return self._bit_q.get(i, 0)

    def contains_bit(self, i: int) -> bool:
        return i in self._bit_q

    def is_single_connected(self) -> bool:
        return all(q == 2 for _, q in self.bit_degree) and all(q == 2 for _, q in self.check_degree)

    def to_dict(self) -> dict:
        return {
            "edges": list(self.edges),
            "bits": list(self.bits),
            "checks": list(self.checks),
            "bit_degree": dict(self.bit_degree),
        }


def _search(code: ParityCheckCode, max_edges: int, anchor: int | None, budget: int) -> list[GeneralizedLoop]:
    n_edges = code.n_edges
    eb = [int(x) for x in code.edge_bits]
    ec = [int(x) for x in code.edge_checks]
    bit_deg = [0] * code.n_bits
    chk_deg = [0] * code.n_checks
    bit_left = [int(x) for x in code.bit_degrees]
    chk_left = [int(x) for x in code.check_degrees]
    chosen: list[int] = []
    found: list[GeneralizedLoop] = []
    node_limit = 50 * budget
    nodes = 0

    def closed_ok(i: int, a: int) -> bool:
        if bit_left[i] == 0:
            if i == anchor:
                if bit_deg[i] == 0:
                    return False
            elif bit_deg[i] == 1:
                return False
        return not (chk_left[a] == 0 and chk_deg[a] == 1)

    def visit(e: int) -> None:
        nonlocal nodes
        nodes += 1
        if nodes > node_limit:
            raise LoopBudgetExceeded(f"loop search visited more than {node_limit} nodes")
        if e == n_edges:
            if chosen:
                found.append(GeneralizedLoop.from_edges(code, chosen, anchor=anchor))
                if len(found) > budget:
                    raise LoopBudgetExceeded(f"more than {budget} loops")
            return
        i, a = eb[e], ec[e]
        bit_left[i] -= 1
        chk_left[a] -= 1

        if closed_ok(i, a):
            visit(e + 1)

        if len(chosen) < max_edges:
            bit_deg[i] += 1
            chk_deg[a] += 1
            chosen.append(e)
            if closed_ok(i, a):
                visit(e + 1)
            chosen.pop()
            bit_deg[i] -= 1
            chk_deg[a] -= 1

        bit_left[i] += 1
        chk_left[a] += 1

    visit(0)
    return found


def enumerate_generalized_loops(
    code: ParityCheckCode, max_edges: int | None = None, budget: int | None = None
) -> list[GeneralizedLoop]:
    """All edge subsets where every touched vertex has loop degree >= 2."""
    max_edges = code.n_edges if max_edges is None else max_edges
    budget = settings.loop_budget if budget is None else budget
    loops = _search(code, max_edges, anchor=None, budget=budget)
    logger.debug("Enumerated %d generalized loops on %s (max_edges=%d)", len(loops), code.name, max_edges)
    return loops


def enumerate_extended_loops(
    code: ParityCheckCode, bit: int, max_edges: int | None = None, budget: int | None = None
) -> list[GeneralizedLoop]:
    """Edge subsets touching `bit` (any degree >= 1) with every other vertex at 0 or >= 2."""
    if not 0 <= bit < code.n_bits:
        raise ValueError(f"bit {bit} out of range")
    max_edges = code.n_edges if max_edges is None else max_edges
    budget = settings.loop_budget if budget is None else budget
    return _search(code, max_edges, anchor=bit, budget=budget)
