"""Pseudo-codeword search: alternate LP decoding with the equal-cost projection.

From a random noise point, LP yields a pseudo-codeword omega; the minimum-norm
noise on the surface where omega and the zero word cost the same becomes the
next input. The fixed point is an instanton.
"""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path

import numpy as np

from app.channel.awgn import LlrVector, read_llr_csv, write_llr_csv
from app.channel.geometry import instanton_noise_for, push_past_surface
from app.code.tanner import ParityCheckCode
from app.config import settings
from app.lp.decoder import PseudoCodeword, decode_lp

logger = logging.getLogger(__name__)

GROWTH_FACTOR = 1.25
MAX_GROWTH_STEPS = 20


@dataclass
class InstantonRecord:
    pseudo_codeword: PseudoCodeword
    instanton_llr: LlrVector
    effective_distance: float
    trajectory: list[tuple[int, float]] = field(default_factory=list)
    seed: int = 0
    converged: bool = True

    @property
    def steps(self) -> int:
        return len(self.trajectory)

    def dedup_key(self) -> str:
        omega = self.pseudo_codeword.omega
        support = np.flatnonzero(omega > settings.lp_integrality_tol)
        values = np.round(omega[support], 6)
        payload = json.dumps([support.tolist(), values.tolist()])
        return hashlib.sha1(payload.encode()).hexdigest()


def _omega_from(result) -> np.ndarray | None:
    """omega of an LP outcome; None when LP returned the zero codeword."""
    pc = result.pseudo_codeword
    if pc is None or not np.any(pc.omega > settings.lp_integrality_tol):
        return None
    return pc.omega


def search_instanton(
    code: ParityCheckCode,
    seed: int,
    max_steps: int | None = None,
    noise_variance: float | None = None,
    push: float | None = None,
) -> InstantonRecord | None:
    """Returns the converged (or last) record, or None when no LP failure was reached."""
    max_steps = settings.instanton_max_steps if max_steps is None else max_steps
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    variance = settings.instanton_noise_variance if noise_variance is None else noise_variance
    factor = 1.0 + (settings.instanton_push if push is None else push)

    rng = np.random.default_rng(seed)
    h = 1.0 + rng.normal(0.0, np.sqrt(variance), size=code.n_bits)

    omega = _omega_from(decode_lp(code, h))
    growth = 0
    while omega is None and growth < MAX_GROWTH_STEPS:
        h = push_past_surface(h, GROWTH_FACTOR)
        growth += 1
        omega = _omega_from(decode_lp(code, h))
    if omega is None:
        logger.info("Instanton [seed=%d]: LP never failed, no pseudo-codeword", seed)
        return None

    trajectory: list[tuple[int, float]] = []
    record: InstantonRecord | None = None
    converged = False
    for step in range(max_steps):
        noise = instanton_noise_for(omega)
        pc = PseudoCodeword.from_vertex(omega, float(2.0 * noise.h @ omega))
        trajectory.append((step, pc.effective_distance))
        record = InstantonRecord(pseudo_codeword=pc, instanton_llr=noise, effective_distance=pc.effective_distance,
                                 trajectory=list(trajectory), seed=seed, converged=False)

        nxt = _omega_from(decode_lp(code, push_past_surface(noise.h, factor)))
        if nxt is None:
            logger.debug("Instanton [seed=%d]: LP returned the zero word at step %d", seed, step)
            break
        if nxt.shape == omega.shape and float(np.max(np.abs(nxt - omega))) < 1e-9:
            converged = True
            break
        omega = nxt

    record.converged = converged
    d_values = [d for _, d in trajectory]
    if any(b > a + 1e-9 for a, b in zip(d_values, d_values[1:])):
        logger.warning("Instanton [seed=%d]: effective distance rose along the trajectory", seed)
    logger.info(
        "Instanton [seed=%d]: d_eff=%.4f steps=%d converged=%s", seed, record.effective_distance, record.steps, converged
    )
    return record


def _catalog_row(record: InstantonRecord, index: int) -> dict:
    return {
        "seed": record.seed,
        "d_eff": record.effective_distance,
        "omega": f"vectors/omega_{index:04d}.csv",
        "h": f"vectors/h_{index:04d}.csv",
        "steps": record.steps,
        "converged": record.converged,
        "integral": record.pseudo_codeword.is_integral,
        "trajectory": [[t, d] for t, d in record.trajectory],
    }


def build_instanton_catalog(
    code: ParityCheckCode,
    n_seeds: int,
    out_dir: str | Path,
    first_seed: int = 0,
    workers: int | None = None,
    max_steps: int | None = None,
) -> list[InstantonRecord]:
    """Search over seeds first_seed..first_seed+n_seeds-1 and write the deduplicated catalog.

    Layout: catalog.jsonl (ascending d_eff), vectors/*.csv, summary.json.
    """
    workers = settings.workers if workers is None else workers
    seeds = list(range(first_seed, first_seed + n_seeds))
    run = partial(search_instanton, code, max_steps=max_steps)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            found = list(pool.map(run, seeds))
    else:
        found = [run(s) for s in seeds]

    raw = [r for r in found if r is not None]
    distinct: dict[str, InstantonRecord] = {}
    for record in raw:
        key = record.dedup_key()
        if key not in distinct or record.seed < distinct[key].seed:
            distinct[key] = record
    catalog = sorted(distinct.values(), key=lambda r: (r.effective_distance, r.seed))

    out = Path(out_dir)
    (out / "vectors").mkdir(parents=True, exist_ok=True)
    with open(out / "catalog.jsonl", "w", encoding="utf-8") as f:
        for index, record in enumerate(catalog):
            row = _catalog_row(record, index)
            write_llr_csv(out / row["omega"], record.pseudo_codeword.omega)
            write_llr_csv(out / row["h"], record.instanton_llr.h)
            f.write(json.dumps(row) + "\n")

    summary = {
        "code": code.name,
        "seeds": n_seeds,
        "raw_count": len(raw),
        "distinct_count": len(catalog),
        "no_failure_seeds": n_seeds - len(raw),
        "min_d_eff": catalog[0].effective_distance if catalog else None,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2), encoding="utf-8")
    logger.info("Catalog for %s: %d records, %d distinct -> %s", code.name, len(raw), len(catalog), out)
    return catalog


def load_instanton_catalog(path: str | Path) -> list[InstantonRecord]:
    """Read catalog.jsonl (or the directory holding it) back into records."""
    path = Path(path)
    if path.is_dir():
        path = path / "catalog.jsonl"
    base = path.parent
    records = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        row = json.loads(line)
        omega = read_llr_csv(base / row["omega"]).h
        h = read_llr_csv(base / row["h"])
        pc = PseudoCodeword.from_vertex(omega, float(2.0 * h.h @ omega))
        records.append(
            InstantonRecord(
                pseudo_codeword=pc,
                instanton_llr=h,
                effective_distance=float(row["d_eff"]),
                trajectory=[(int(t), float(d)) for t, d in row.get("trajectory", [])],
                seed=int(row["seed"]),
                converged=bool(row.get("converged", True)),
            )
        )
    return records
