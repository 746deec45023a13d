from app.code.alist import AlistFormatError, code_from_json, code_to_json, emit_alist, load_code, parse_alist
from app.code.construct import SMALL_GRAPH_SUITE, build_tanner_155, get_code, girth, library_names, resolve_code
from app.code.gf2 import DimensionTooLargeError, codeword_matrix, dimension, enumerate_codewords, gf2_rank
from app.code.tanner import Codeword, ParityCheckCode, is_codeword, syndrome

__all__ = [
    "AlistFormatError",
    "Codeword",
    "DimensionTooLargeError",
    "ParityCheckCode",
    "SMALL_GRAPH_SUITE",
    "build_tanner_155",
    "code_from_json",
    "code_to_json",
    "codeword_matrix",
    "dimension",
    "emit_alist",
    "enumerate_codewords",
    "get_code",
    "gf2_rank",
    "girth",
    "is_codeword",
    "library_names",
    "load_code",
    "parse_alist",
    "resolve_code",
    "syndrome",
]
