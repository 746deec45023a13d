from app.lp.decoder import (
    LpProblem,
    PseudoCodeword,
    build_decoding_lp,
    decode_lp,
    forbidden_set_polytope,
    lp_solve,
)
from app.lp.erasure import decode_lp_erasure
from app.lp.simplex import LpSolution, LpStallError, LpStatus, solve_box_lp

__all__ = [
    "LpProblem",
    "LpSolution",
    "LpStallError",
    "LpStatus",
    "PseudoCodeword",
    "build_decoding_lp",
    "decode_lp",
    "decode_lp_erasure",
    "forbidden_set_polytope",
    "lp_solve",
    "solve_box_lp",
]
