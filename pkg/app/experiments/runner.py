"""Campaigns: instanton correction, FER sweep and the loop-series z-check.

Every campaign writes a run directory with manifest.json, rows.jsonl and
summary.csv. Trials draw from per-trial seeds so results do not depend on the
worker count.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import time
from collections.abc import Callable, Iterable
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from importlib import metadata
from pathlib import Path

import numpy as np

from app.bp.engine import run_bp
from app.bp.exact import brute_force
from app.channel.awgn import awgn_sample, llr_from_output, trial_seed
from app.channel.geometry import push_past_surface
from app.code.alist import emit_alist
from app.code.construct import SMALL_GRAPH_SUITE, get_code, resolve_code
from app.code.tanner import Codeword, ParityCheckCode
from app.config import settings
from app.instanton.search import InstantonRecord, build_instanton_catalog, load_instanton_catalog
from app.loops.enumerate import enumerate_generalized_loops
from app.loops.series import partition_function_series
from app.lp.decoder import decode_lp
from app.lp.erasure import decode_lp_erasure
from app.models.schemas import CorrectionReport, CorrectionRow, ExperimentConfig, FerRow, ZCheckRow

logger = logging.getLogger(__name__)

ZCHECK_TOLERANCE = 1e-8
_VERSIONED = ("loopcalc", "numpy", "networkx", "pydantic", "pydantic-settings")


def wilson_interval(failures: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    if trials == 0:
        return (0.0, 1.0)
    p = failures / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return (max(0.0, centre - half), min(1.0, centre + half))


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _versions() -> dict[str, str | None]:
    out = {}
    for name in _VERSIONED:
        try:
            out[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            out[name] = None
    return out


def prepare_run_dir(config: ExperimentConfig, code: ParityCheckCode | None) -> Path:
    config_json = config.model_dump_json()
    config_hash = _sha256(config_json)
    out = Path(config.out_dir) if config.out_dir else Path(settings.runs_dir) / f"{config.kind.value}-{config_hash[:10]}"
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "config": json.loads(config_json),
        "config_hash": config_hash,
        "code_hash": _sha256(emit_alist(code)) if code is not None else None,
        "versions": _versions(),
        "settings": settings.model_dump(),
        "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str), encoding="utf-8")
    return out


def write_rows(out: Path, rows: Iterable[dict]) -> None:
    with open(out / "rows.jsonl", "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row) + "\n")


def write_summary_csv(out: Path, rows: list[dict]) -> None:
    with open(out / "summary.csv", "w", newline="", encoding="utf-8") as f:
        if not rows:
            return
        writer = csv.DictWriter(f, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)


def _map(fn: Callable, items: list, workers: int) -> list:
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def correction_rows(
    code: ParityCheckCode, config: ExperimentConfig, indexed: tuple[int, InstantonRecord]
) -> list[CorrectionRow]:
    """Bare LP, then LP-erasure when the bare vertex is fractional, per rescale.

    An integral bare output is a valid codeword, so erasure never runs on it;
    such rows stay outside the eligible population even when the codeword is
    the wrong one.
    """
    index, record = indexed
    rows = []
    for scale in config.rescales:
        h = push_past_surface(record.instanton_llr.h, scale * (1.0 + settings.instanton_push))
        bare = decode_lp(code, h)
        bare_failed = not bare.decoded_transmitted()
        integral = bare.pseudo_codeword.is_integral
        attempted = not bare.success
        tried: list[dict] = []
        erasure_success = None
        decoded = bare.decoded_transmitted()
        if attempted:
            result = decode_lp_erasure(
                code, h, epsilon=config.epsilon, thresholds=config.thresholds, max_loop_bits=config.max_loop_bits
            )
            tried = result.diagnostics.get("loops_tried", [])
            erasure_success = result.success
            decoded = result.decoded_transmitted()
        rows.append(
            CorrectionRow(
                instanton=index,
                seed=record.seed,
                d_eff=record.effective_distance,
                rescale=scale,
                bare_lp_failed=bare_failed,
                bare_lp_integral=integral,
                erasure_attempted=attempted,
                eligible=bare_failed and not integral and record.effective_distance < config.d_eff_cutoff,
                loops_found=len(tried),
                loop_r=[t["r"] for t in tried],
                loop_bits=[t["bits"] for t in tried],
                erasure_success=erasure_success,
                decoded_correctly=decoded,
            )
        )
    return rows


def run_instanton_correction(config: ExperimentConfig) -> CorrectionReport:
    """LP-erasure on every catalog instanton and its rescaled copies.

    Every record gets rows; `corrected_fraction` counts only the eligible ones
    (bare LP fails on a fractional vertex with d_eff below `d_eff_cutoff`).
    """
    code = resolve_code(config.code)
    out = prepare_run_dir(config, code)
    if config.catalog:
        catalog = load_instanton_catalog(config.catalog)
    else:
        catalog = build_instanton_catalog(
            code, config.seeds, out / "catalog", first_seed=config.master_seed, workers=config.workers
        )

    workers = settings.workers if config.workers is None else config.workers
    per_instanton = _map(partial(correction_rows, code, config), list(enumerate(catalog)), workers)
    report = CorrectionReport(rows=[row for rows in per_instanton for row in rows])

    write_rows(out, (r.model_dump() for r in report.rows))
    write_summary_csv(out, [report.summary()])
    logger.info(
        "Correction [%s]: %d instantons, %d rows, %d eligible, corrected_fraction=%s",
        code.name, len(catalog), len(report.rows), len(report.eligible_rows), report.corrected_fraction,
    )
    return report


def fer_trial(code: ParityCheckCode, epsilon: float, job: tuple[float, int, int]) -> dict:
    s2, trial, seed = job
    noise = awgn_sample(code, Codeword.zero(code.n_bits), s2, seed)
    llr = llr_from_output(noise, s2)
    lp_ok = decode_lp(code, llr).decoded_transmitted()
    erasure_ok = lp_ok or decode_lp_erasure(code, llr, epsilon=epsilon).decoded_transmitted()
    return {"s2": s2, "trial": trial, "seed": seed, "lp_failed": not lp_ok, "erasure_failed": not erasure_ok}


def run_fer_sweep(config: ExperimentConfig) -> list[FerRow]:
    code = resolve_code(config.code)
    out = prepare_run_dir(config, code)
    workers = settings.workers if config.workers is None else config.workers
    jobs = [
        (s2, t, trial_seed(config.master_seed, k * config.seeds + t))
        for k, s2 in enumerate(config.s2_grid)
        for t in range(config.seeds)
    ]
    trials = _map(partial(fer_trial, code, config.epsilon), jobs, workers)
    write_rows(out, trials)

    table = []
    for s2 in config.s2_grid:
        at = [t for t in trials if t["s2"] == s2]
        lp_fail = sum(t["lp_failed"] for t in at)
        er_fail = sum(t["erasure_failed"] for t in at)
        if any(t["erasure_failed"] and not t["lp_failed"] for t in at):
            logger.error("FER [s2=%.3f]: LP-erasure failed where LP succeeded", s2)
        table.append(
            FerRow(
                s2=s2,
                trials=len(at),
                lp_failures=lp_fail,
                erasure_failures=er_fail,
                lp_ci=wilson_interval(lp_fail, len(at)),
                erasure_ci=wilson_interval(er_fail, len(at)),
            )
        )
        logger.info("FER [%s s2=%.3f]: LP %d/%d, LP-erasure %d/%d", code.name, s2, lp_fail, len(at), er_fail, len(at))

    write_summary_csv(out, [row.model_dump() for row in table])
    return table


def zcheck_code(code: ParityCheckCode, draws: int, master_seed: int = 0) -> ZCheckRow:
    """Max relative error of Z0 (1 + sum r) against brute force over random h."""
    loops = enumerate_generalized_loops(code)
    worst: float | None = None
    converged = 0
    for k in range(draws):
        rng = np.random.default_rng(trial_seed(master_seed, k))
        h = 0.5 + 0.5 * rng.standard_normal(code.n_bits)
        state, beliefs = run_bp(code, h, max_iters=5000, tol=1e-13, damping=0.5)
        if not state.converged:
            continue
        converged += 1
        series = partition_function_series(code, h, beliefs, loops)
        exact = brute_force(code, h)
        err = abs(series.z_series - exact.z) / abs(exact.z)
        worst = err if worst is None else max(worst, err)
    passed = worst is not None and worst <= ZCHECK_TOLERANCE
    logger.info("Z-check [%s]: %d loops, %d/%d converged, max rel err %s", code.name, len(loops), converged, draws, worst)
    return ZCheckRow(
        code=code.name, n_loops=len(loops), draws=draws, converged_draws=converged, max_rel_error=worst, passed=passed
    )


def run_zcheck_suite(config: ExperimentConfig, names: Iterable[str] = SMALL_GRAPH_SUITE) -> list[ZCheckRow]:
    out = prepare_run_dir(config, None)
    rows = [zcheck_code(get_code(name), config.zcheck_draws, config.master_seed) for name in names]
    write_rows(out, (r.model_dump() for r in rows))
    write_summary_csv(out, [r.model_dump() for r in rows])
    return rows


RUNNERS = {
    "instanton-correction": run_instanton_correction,
    "fer-sweep": run_fer_sweep,
    "z-check-suite": run_zcheck_suite,
}


def run_campaign(config: ExperimentConfig):
    return RUNNERS[config.kind.value](config)
