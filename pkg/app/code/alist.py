"""alist reader/writer plus the JSON mirror of a code.

alist layout (1-based indices, rows zero-padded to the max degree):

    n m
    max_bit_degree max_check_degree
    bit degrees (n values)
    check degrees (m values)
    n lines: checks of each bit
    m lines: bits of each check
"""

from __future__ import annotations

import json
from pathlib import Path

from app.code.tanner import ParityCheckCode


class AlistFormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _int_rows(text: str) -> list[tuple[int, list[int]]]:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split()
        if not tokens:
            continue
        values = []
        for pos, token in enumerate(tokens, start=1):
            try:
                values.append(int(token))
            except ValueError:
                raise AlistFormatError(lineno, f"non-integer token at position {pos}") from None
        rows.append((lineno, values))
    return rows


def _neighbors(line: int, values: list[int], degree: int, limit: int, what: str) -> list[int]:
    """Strip trailing zero padding and convert to 0-based indices."""
    nbrs = values[:degree]
    if any(v != 0 for v in values[degree:]):
        raise AlistFormatError(line, f"{len(values)} entries but degree is {degree}")
    for v in nbrs:
        if v == 0:
            raise AlistFormatError(line, f"{what} index 0 (indices are 1-based)")
        if not 1 <= v <= limit:
            raise AlistFormatError(line, f"{what} index {v} out of range 1..{limit}")
    return [v - 1 for v in nbrs]


def parse_alist(text: str, name: str = "") -> ParityCheckCode:
    rows = _int_rows(text)
    if len(rows) < 4:
        raise AlistFormatError(rows[-1][0] if rows else 1, "truncated header")

    ln, header = rows[0]
    if len(header) != 2 or header[0] <= 0 or header[1] < 0:
        raise AlistFormatError(ln, f"malformed header {header}, expected 'n m'")
    n, m = header

    ln, maxdeg = rows[1]
    if len(maxdeg) != 2:
        raise AlistFormatError(ln, "expected 'max_bit_degree max_check_degree'")

    ln, bit_deg = rows[2]
    if len(bit_deg) != n:
        raise AlistFormatError(ln, f"expected {n} bit degrees, got {len(bit_deg)}")
    if max(bit_deg) > maxdeg[0]:
        raise AlistFormatError(ln, f"bit degree {max(bit_deg)} exceeds declared max {maxdeg[0]}")
    ln, check_deg = rows[3]
    if len(check_deg) != m:
        raise AlistFormatError(ln, f"expected {m} check degrees, got {len(check_deg)}")
    if m and max(check_deg) > maxdeg[1]:
        raise AlistFormatError(ln, f"check degree {max(check_deg)} exceeds declared max {maxdeg[1]}")
    if sum(bit_deg) != sum(check_deg):
        raise AlistFormatError(ln, f"degree sums differ: bits {sum(bit_deg)}, checks {sum(check_deg)}")

    body = rows[4:]
    if len(body) < n + m:
        last = body[-1][0] if body else rows[3][0]
        raise AlistFormatError(last, f"expected {n + m} neighbor lines, got {len(body)}")

    edges_from_bits: set[tuple[int, int]] = set()
    for i, (ln, values) in enumerate(body[:n]):
        for a in _neighbors(ln, values, bit_deg[i], m, "check"):
            edges_from_bits.add((i, a))

    check_lists: list[tuple[int, ...]] = []
    for a, (ln, values) in enumerate(body[n:n + m]):
        check_lists.append(tuple(_neighbors(ln, values, check_deg[a], n, "bit")))
    edges_from_checks = {(i, a) for a, bits in enumerate(check_lists) for i in bits}

    if edges_from_bits != edges_from_checks:
        i, a = sorted(edges_from_bits ^ edges_from_checks)[0]
        ln = body[n + a][0] if a < m else body[n][0]
        raise AlistFormatError(ln, f"bit and check lists disagree on edge (bit {i + 1}, check {a + 1})")

    try:
        return ParityCheckCode(n_bits=n, check_neighbors=tuple(check_lists), name=name)
    except ValueError as e:
        raise AlistFormatError(body[n][0] if m else rows[0][0], str(e)) from None


def emit_alist(code: ParityCheckCode) -> str:
    bit_deg = [len(c) for c in code.bit_neighbors]
    check_deg = [len(b) for b in code.check_neighbors]
    max_b = max(bit_deg, default=0)
    max_c = max(check_deg, default=0)

    def padded(values: tuple[int, ...], width: int) -> str:
        cells = [v + 1 for v in values] + [0] * (width - len(values))
        return " ".join(str(c) for c in cells) or "0"

    lines = [
        f"{code.n_bits} {code.n_checks}",
        f"{max_b} {max_c}",
        " ".join(map(str, bit_deg)),
        " ".join(map(str, check_deg)),
    ]
    lines += [padded(nbrs, max_b) for nbrs in code.bit_neighbors]
    lines += [padded(nbrs, max_c) for nbrs in code.check_neighbors]
    return "\n".join(lines) + "\n"


def code_to_json(code: ParityCheckCode) -> str:
    return json.dumps({
        "name": code.name,
        "n": code.n_bits,
        "m": code.n_checks,
        "check_neighbors": [list(c) for c in code.check_neighbors],
    })


def code_from_json(text: str) -> ParityCheckCode:
    doc = json.loads(text)
    checks = tuple(tuple(int(i) for i in c) for c in doc["check_neighbors"])
    if len(checks) != doc["m"]:
        raise ValueError(f"JSON code declares m={doc['m']} but lists {len(checks)} checks")
    return ParityCheckCode(n_bits=int(doc["n"]), check_neighbors=checks, name=doc.get("name", ""))


def load_code(path: str | Path) -> ParityCheckCode:
    """Read a code from an alist or JSON file (chosen by suffix)."""
    p = Path(path)
    text = p.read_text(encoding="utf-8")
    if p.suffix == ".json":
        return code_from_json(text)
    return parse_alist(text, name=p.stem)
