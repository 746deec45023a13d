"""Triad amplitudes and the threshold search for critical loops.

A triad is the normalized correlation of two bits through a shared check,
    mu~_alpha(i, j) = mu_alpha / sqrt((1 - m_i^2)(1 - m_j^2)),
and the amplitude of a single-connected loop is the product of its triads.
Critical loops are simple cycles of the bit graph whose edges are triads above
a threshold; the threshold is lowered until some cycle appears.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import networkx as nx
import numpy as np

from app.bp.engine import Beliefs, even_configurations
from app.code.tanner import ParityCheckCode
from app.config import settings
from app.loops.enumerate import GeneralizedLoop
from app.loops.series import SaturationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TriadAmplitude:
    check: int
    bits: tuple[int, int]
    value: float


@dataclass(frozen=True)
class CriticalLoop:
    loop: GeneralizedLoop
    r: float
    threshold: float
    cycle_bits: tuple[int, ...]  # bits in cycle order
    cycle_checks: tuple[int, ...]  # cycle_checks[k] joins cycle_bits[k] and cycle_bits[k+1]

    def to_dict(self) -> dict:
        return {
            "bits": list(self.cycle_bits),
            "checks": list(self.cycle_checks),
            "r": self.r,
            "threshold": self.threshold,
        }


def triad_amplitudes(
    code: ParityCheckCode,
    beliefs: Beliefs,
    bit_filter=None,
    skip_saturated: bool = False,
) -> list[TriadAmplitude]:
    """One triad per (check, unordered bit pair) with both bits passing `bit_filter`.

    Uses the check-side edge magnetizations, so |value| <= 1 also holds away
    from fixed points.
    """
    allowed = None if bit_filter is None else set(int(b) for b in bit_filter)
    me = beliefs.edge_magnetizations
    out: list[TriadAmplitude] = []
    for alpha, nbrs in enumerate(code.check_neighbors):
        d = len(nbrs)
        if d < 2:
            continue
        configs = even_configurations(d).astype(np.float64)
        edges = code.check_edges[alpha]
        probs = beliefs.check_beliefs[alpha]
        for p, q in itertools.combinations(range(d), 2):
            i, j = nbrs[p], nbrs[q]
            if allowed is not None and (i not in allowed or j not in allowed):
                continue
            mi, mj = me[edges[p]], me[edges[q]]
            var = (1.0 - mi * mi) * (1.0 - mj * mj)
            if var <= 0.0:
                if skip_saturated:
                    continue
                raise SaturationError(f"check {alpha}: bits {i},{j} saturated")
            mu = probs @ ((configs[:, p] - mi) * (configs[:, q] - mj))
            value = float(np.clip(mu / math.sqrt(var), -1.0, 1.0))
            out.append(TriadAmplitude(check=alpha, bits=(min(i, j), max(i, j)), value=value))
    return out


def _canonical(cycle: list[int]) -> tuple[int, ...]:
    """Rotate to the smallest bit first, then pick the smaller direction."""
    k = cycle.index(min(cycle))
    fwd = cycle[k:] + cycle[:k]
    back = [fwd[0]] + fwd[1:][::-1]
    return tuple(min(fwd, back))


def _loop_from_cycle(code: ParityCheckCode, bits: tuple[int, ...], checks: tuple[int, ...]) -> GeneralizedLoop:
    edges = []
    for k, a in enumerate(checks):
        edges.append(code.edge_id(bits[k], a))
        edges.append(code.edge_id(bits[(k + 1) % len(bits)], a))
    return GeneralizedLoop.from_edges(code, edges)


def _score_cycle(
    code: ParityCheckCode, graph: nx.Graph, bits: tuple[int, ...], threshold: float
) -> CriticalLoop | None:
    """Best assignment of distinct checks to the consecutive bit pairs of a cycle."""
    pairs = [(bits[k], bits[(k + 1) % len(bits)]) for k in range(len(bits))]
    if len(bits) == 2:
        options = graph.edges[bits]["triads"]
        choices = [(a, b) for a, b in itertools.combinations(options, 2)]
    else:
        choices = itertools.product(*(graph.edges[p]["triads"] for p in pairs))
    best = None
    for choice in choices:
        checks = [a for a, _ in choice]
        if len(set(checks)) != len(checks):
            continue
        r = math.prod(v for _, v in choice)
        if best is None or abs(r) > abs(best[0]):
            best = (r, tuple(checks))
    if best is None:
        return None
    r, checks = best
    return CriticalLoop(
        loop=_loop_from_cycle(code, bits, checks), r=r, threshold=threshold, cycle_bits=bits, cycle_checks=checks
    )


def _triad_graph(triads: list[TriadAmplitude], threshold: float) -> nx.Graph:
    g = nx.Graph()
    for t in triads:
        if abs(t.value) >= threshold:
            if g.has_edge(*t.bits):
                g.edges[t.bits]["triads"].append((t.check, t.value))
            else:
                g.add_edge(*t.bits, triads=[(t.check, t.value)])
    return g


def _cycles_at(
    code: ParityCheckCode, triads: list[TriadAmplitude], threshold: float, max_loop_bits: int, max_cycles: int
) -> list[CriticalLoop]:
    graph = _triad_graph(triads, threshold)
    seen: set[tuple[int, ...]] = set()
    found: list[CriticalLoop] = []

    # two bits sharing two checks
    for u, v, data in graph.edges(data=True):
        if len(data["triads"]) >= 2:
            bits = (min(u, v), max(u, v))
            scored = _score_cycle(code, graph, bits, threshold)
            if scored is not None and bits not in seen:
                seen.add(bits)
                found.append(scored)

    for cycle in nx.simple_cycles(graph, length_bound=max_loop_bits):
        if len(cycle) < 3:
            continue
        key = _canonical(cycle)
        if key in seen:
            continue
        seen.add(key)
        if len(seen) > max_cycles:
            logger.warning("Cycle cap %d reached at threshold %.3f; ranking a partial list", max_cycles, threshold)
            break
        scored = _score_cycle(code, graph, key, threshold)
        if scored is not None:
            found.append(scored)

    found.sort(key=lambda c: (-abs(c.r), len(c.cycle_bits), c.cycle_bits))
    return found


def _filtered_bits(beliefs: Beliefs, llr_threshold: float | None) -> np.ndarray | None:
    if llr_threshold is None:
        return None
    return np.flatnonzero(np.abs(beliefs.bit_fields) > llr_threshold)


def _validate_thresholds(thresholds) -> list[float]:
    ts = [float(t) for t in thresholds]
    if not ts or any(not 0.0 < t <= 1.0 for t in ts) or any(a <= b for a, b in zip(ts, ts[1:])):
        raise ValueError(f"thresholds must be strictly descending in (0, 1], got {ts}")
    return ts


def rank_critical_loops(
    code: ParityCheckCode,
    beliefs: Beliefs,
    thresholds=None,
    max_loop_bits: int | None = None,
    llr_threshold: float | None = None,
    max_cycles: int | None = None,
) -> list[CriticalLoop]:
    """Every single-connected candidate, grouped by the first threshold admitting it,
    ranked by |r| (then length, then bit order) inside each group."""
    thresholds = _validate_thresholds(settings.triad_thresholds if thresholds is None else thresholds)
    max_loop_bits = settings.max_loop_bits if max_loop_bits is None else max_loop_bits
    if max_loop_bits < 2:
        raise ValueError("max_loop_bits must be at least 2")
    llr_threshold = settings.llr_threshold if llr_threshold is None else llr_threshold
    max_cycles = settings.max_cycles if max_cycles is None else max_cycles

    triads = triad_amplitudes(code, beliefs, bit_filter=_filtered_bits(beliefs, llr_threshold), skip_saturated=True)
    ranked: list[CriticalLoop] = []
    seen: set[tuple[tuple[int, ...], tuple[int, ...]]] = set()
    for t in thresholds:
        for c in _cycles_at(code, triads, t, max_loop_bits, max_cycles):
            key = (c.loop.edges, ())
            if key not in seen:
                seen.add(key)
                ranked.append(c)
    return ranked


def find_critical_loop(
    code: ParityCheckCode,
    beliefs: Beliefs,
    thresholds=None,
    max_loop_bits: int | None = None,
    llr_threshold: float | None = None,
) -> list[CriticalLoop]:
    """Maximal-|r| cycles at the first threshold yielding any cycle.

    Returns an empty list when no threshold produces a cycle; several entries
    when distinct loops tie for the maximum.
    """
    thresholds = _validate_thresholds(settings.triad_thresholds if thresholds is None else thresholds)
    max_loop_bits = settings.max_loop_bits if max_loop_bits is None else max_loop_bits
    llr_threshold = settings.llr_threshold if llr_threshold is None else llr_threshold

    triads = triad_amplitudes(code, beliefs, bit_filter=_filtered_bits(beliefs, llr_threshold), skip_saturated=True)
    for t in thresholds:
        cycles = _cycles_at(code, triads, t, max_loop_bits, settings.max_cycles)
        if cycles:
            top = abs(cycles[0].r)
            best = [c for c in cycles if abs(c.r) >= top * (1 - 1e-12)]
            logger.info(
                "Critical loop at threshold %.3f: %d bits, |r|=%.6f (%d tied)",
                t, len(best[0].cycle_bits), top, len(best),
            )
            return best
    return []
