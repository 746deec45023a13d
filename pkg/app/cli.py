"""Command-line entry point: `loopcalc <group> <command> ...`."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from app.config import settings

logger = logging.getLogger("loopcalc")


def _emit(payload: dict) -> None:
    json.dump(payload, sys.stdout, indent=2, default=float)
    sys.stdout.write("\n")


def _load(args):
    from app.channel.awgn import read_llr_csv
    from app.code.construct import resolve_code

    code = resolve_code(args.code)
    llr = read_llr_csv(args.llr)
    llr.check_length(code)
    return code, llr


def cmd_code_info(args) -> int:
    from app.code.construct import girth, resolve_code
    from app.code.gf2 import dimension

    code = resolve_code(args.file)
    _emit({**code.describe(), "girth": girth(code), "dimension": dimension(code)})
    return 0


def cmd_code_make_tanner155(args) -> int:
    from app.code.alist import code_to_json, emit_alist
    from app.code.construct import build_tanner_155

    code = build_tanner_155()
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(code_to_json(code) if args.json else emit_alist(code), encoding="utf-8")
    logger.info("Wrote %s (%d bits, %d checks)", out, code.n_bits, code.n_checks)
    return 0


def cmd_bp_decode(args) -> int:
    from app.bp.engine import decode_bp

    code, llr = _load(args)
    result = decode_bp(code, llr, max_iters=args.max_iters, tol=args.tol, damping=args.damping)
    _emit({
        "success": result.success,
        "bits": result.bits.tolist(),
        "magnetizations": result.beliefs.bit_magnetizations.tolist(),
        **result.diagnostics,
    })
    return 0 if result.success else 1


def cmd_bp_decode_loop(args) -> int:
    from app.effective.solver import decode_loop_corrected_bp

    code, llr = _load(args)
    result = decode_loop_corrected_bp(
        code, llr, max_loops=args.max_loops, bp_max_iters=args.max_iters, bp_damping=args.damping
    )
    d = result.diagnostics
    _emit({
        "success": result.success,
        "loops_used": d.get("loops_used", []),
        "r": [loop["r"] for loop in d.get("loops_used", [])],
        "residual_history": d.get("residual_history", []),
        "m_eff": d.get("m_eff", result.beliefs.bit_magnetizations.tolist()),
        "bits": result.bits.tolist(),
    })
    return 0 if result.success else 1


def cmd_loops_analyze(args) -> int:
    from app.bp.engine import run_bp
    from app.loops.critical import rank_critical_loops

    code, llr = _load(args)
    state, beliefs = run_bp(code, llr)
    ranked = rank_critical_loops(code, beliefs, max_loop_bits=args.max_loop_bits)
    _emit({
        "bp_converged": state.converged,
        "iterations": state.iterations_run,
        "loops": [c.to_dict() for c in ranked],
    })
    return 0


def cmd_loops_zcheck(args) -> int:
    from app.bp.engine import run_bp
    from app.bp.exact import brute_force
    from app.loops.series import partition_function_series

    code, llr = _load(args)
    state, beliefs = run_bp(code, llr, max_iters=5000, tol=1e-13)
    series = partition_function_series(code, llr, beliefs)
    exact = brute_force(code, llr)
    rel = abs(series.z_series - exact.z) / abs(exact.z)
    _emit({
        "bp_converged": state.converged,
        "n_loops": len(series.corrections),
        "z0": series.z0,
        "z_series": series.z_series,
        "z_exact": exact.z,
        "rel_error": rel,
    })
    return 0 if rel <= 1e-8 else 1


def cmd_lp_decode(args) -> int:
    from app.lp.decoder import decode_lp
    from app.lp.erasure import decode_lp_erasure

    code, llr = _load(args)
    result = decode_lp_erasure(code, llr, epsilon=args.epsilon) if args.erasure else decode_lp(code, llr)
    pc = result.pseudo_codeword
    _emit({
        "status": result.diagnostics.get("status"),
        "success": result.success,
        "x": None if pc is None else pc.omega.tolist(),
        "integral": None if pc is None else pc.is_integral,
        "objective": result.diagnostics.get("objective"),
        "d_eff": None if pc is None else pc.effective_distance,
        "loops_tried": result.diagnostics.get("loops_tried", []),
    })
    return 0 if result.success else 1


def cmd_instanton_search(args) -> int:
    from app.code.construct import resolve_code
    from app.instanton.search import build_instanton_catalog

    code = resolve_code(args.code)
    catalog = build_instanton_catalog(
        code, args.seeds, args.output, first_seed=args.first_seed, workers=args.workers, max_steps=args.max_steps
    )
    _emit({
        "distinct": len(catalog),
        "min_d_eff": catalog[0].effective_distance if catalog else None,
        "out": str(args.output),
    })
    return 0


_CAMPAIGNS = {"correct": "instanton-correction", "fer": "fer-sweep", "zcheck": "z-check-suite"}
_OVERRIDES = ("code", "seeds", "master_seed", "epsilon", "catalog", "workers", "out_dir")


def cmd_exp(args) -> int:
    from app.experiments.runner import run_campaign
    from app.models.schemas import ExperimentConfig

    doc = json.loads(Path(args.config).read_text(encoding="utf-8")) if args.config else {}
    doc["kind"] = _CAMPAIGNS[args.campaign]
    for field in _OVERRIDES:
        value = getattr(args, field)
        if value is not None:
            doc[field] = value
    if args.s2 is not None:
        doc["s2_grid"] = args.s2
    try:
        config = ExperimentConfig.model_validate(doc)
    except ValidationError as e:
        logger.error("Invalid experiment config: %s", e)
        return 2

    result = run_campaign(config)
    if isinstance(result, list):
        _emit({"rows": [r.model_dump() for r in result]})
    else:
        _emit(result.summary())
    return 0


def cmd_serve(args) -> int:
    from app.main import main as serve

    serve()
    return 0


def _add_code_llr(p: argparse.ArgumentParser) -> None:
    p.add_argument("--code", required=True, help="library name or alist/JSON path")
    p.add_argument("--llr", required=True, help="CSV with one log-likelihood per line")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="loopcalc", description="LDPC decoding lab: BP, LP and loop calculus")
    parser.add_argument("--log-level", default=None, help=f"default {settings.log_level}")
    groups = parser.add_subparsers(dest="group", required=True)

    code = groups.add_parser("code", help="code files").add_subparsers(dest="command", required=True)
    p = code.add_parser("info")
    p.add_argument("file")
    p.set_defaults(func=cmd_code_info)
    p = code.add_parser("make-tanner155")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--json", action="store_true", help="write JSON instead of alist")
    p.set_defaults(func=cmd_code_make_tanner155)

    bp = groups.add_parser("bp", help="belief propagation").add_subparsers(dest="command", required=True)
    p = bp.add_parser("decode")
    _add_code_llr(p)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--damping", type=float)
    p.set_defaults(func=cmd_bp_decode)
    p = bp.add_parser("decode-loop")
    _add_code_llr(p)
    p.add_argument("--max-loops", type=int)
    p.add_argument("--max-iters", type=int, help="bare BP sweeps")
    p.add_argument("--damping", type=float, help="bare BP damping")
    p.set_defaults(func=cmd_bp_decode_loop)

    loops = groups.add_parser("loops", help="loop calculus").add_subparsers(dest="command", required=True)
    p = loops.add_parser("analyze")
    _add_code_llr(p)
    p.add_argument("--max-loop-bits", type=int)
    p.set_defaults(func=cmd_loops_analyze)
    p = loops.add_parser("z-check")
    _add_code_llr(p)
    p.set_defaults(func=cmd_loops_zcheck)

    lp = groups.add_parser("lp", help="LP decoding").add_subparsers(dest="command", required=True)
    p = lp.add_parser("decode")
    _add_code_llr(p)
    p.add_argument("--erasure", action="store_true")
    p.add_argument("--epsilon", type=float)
    p.set_defaults(func=cmd_lp_decode)

    inst = groups.add_parser("instanton", help="pseudo-codeword search").add_subparsers(dest="command", required=True)
    p = inst.add_parser("search")
    p.add_argument("--code", required=True)
    p.add_argument("--seeds", type=int, required=True)
    p.add_argument("--first-seed", type=int, default=0)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_instanton_search)

    p = groups.add_parser("exp", help="campaigns")
    p.add_argument("campaign", choices=sorted(_CAMPAIGNS))
    p.add_argument("--config", help="flat JSON experiment config")
    p.add_argument("--code")
    p.add_argument("--seeds", type=int)
    p.add_argument("--master-seed", dest="master_seed", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--s2", type=float, nargs="+")
    p.add_argument("--catalog")
    p.add_argument("--workers", type=int)
    p.add_argument("--out", dest="out_dir")
    p.set_defaults(func=cmd_exp)

    p = groups.add_parser("serve", help="run the HTTP/WebSocket service")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = (args.log_level or settings.log_level).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, KeyError) as e:
        logger.error("%s", e)
        return 2


if __name__ == "__main__":
    sys.exit(main())
