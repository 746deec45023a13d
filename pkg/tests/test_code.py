from __future__ import annotations

import numpy as np
import pytest

from app.code.alist import AlistFormatError, code_from_json, code_to_json, emit_alist, load_code, parse_alist
from app.code.construct import (
    HAMMING_7_4_ALIST,
    build_tanner_155,
    get_code,
    girth,
    library_names,
    resolve_code,
    tanner_shifts,
)
from app.code.gf2 import (
    DimensionTooLargeError,
    codeword_matrix,
    dimension,
    gf2_rank,
    lightest_codeword,
    random_codewords,
)
from app.code.tanner import Codeword, ParityCheckCode, is_codeword, syndrome


class TestParityCheckCode:
    def test_edges_are_check_major(self, hamming):
        assert hamming.check_neighbors[0] == (0, 2, 4, 6)
        assert list(hamming.edge_checks[:4]) == [0, 0, 0, 0]
        assert list(hamming.edge_bits[:4]) == [0, 2, 4, 6]
        assert hamming.edge_id(2, 0) == 1

    def test_empty_check_rejected(self):
        with pytest.raises(ValueError):
            ParityCheckCode(n_bits=3, check_neighbors=((0, 1), ()))

    def test_matrix_round_trip(self, hamming):
        again = ParityCheckCode.from_matrix(hamming.to_matrix())
        assert again == hamming

    def test_isolated_bits_and_no_checks(self):
        free = ParityCheckCode(n_bits=2, check_neighbors=())
        assert free.n_edges == 0
        assert list(free.bit_degrees) == [0, 0]
        assert syndrome(free, np.array([1, -1])).size == 0


class TestSyndrome:
    def test_codewords_satisfy_every_check(self, hamming):
        for row in codeword_matrix(hamming):
            assert is_codeword(hamming, Codeword(bits=row).spins)

    def test_single_flip_violates(self, hamming):
        spins = np.ones(7, dtype=np.int64)
        spins[6] = -1
        assert list(syndrome(hamming, spins)) == [-1, -1, -1]

    def test_length_mismatch(self, hamming):
        with pytest.raises(ValueError):
            syndrome(hamming, np.ones(6))


class TestGf2:
    def test_hamming_dimension(self, hamming):
        assert dimension(hamming) == 4
        words = codeword_matrix(hamming)
        assert words.shape == (16, 7)
        assert not words[0].any()

    def test_rank_of_dependent_rows(self):
        m = np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]], dtype=np.uint8)
        assert gf2_rank(m) == 2

    def test_enumeration_guard(self):
        with pytest.raises(DimensionTooLargeError):
            codeword_matrix(build_tanner_155())

    def test_random_codewords_are_codewords(self):
        code = build_tanner_155()
        for row in random_codewords(code, 5, seed=3):
            assert is_codeword(code, 1 - 2 * row.astype(np.int64))


class TestTanner155:
    def test_shape_and_dimension(self):
        code = build_tanner_155()
        assert (code.n_bits, code.n_checks) == (155, 93)
        assert set(code.bit_degrees) == {3}
        assert set(code.check_degrees) == {5}
        assert dimension(code) == 64

    def test_girth_eight(self):
        assert girth(build_tanner_155()) == 8

    def test_shifts(self):
        assert tanner_shifts().tolist() == [[1, 2, 4, 8, 16], [5, 10, 20, 9, 18], [25, 19, 7, 14, 28]]

    def test_random_codewords_respect_distance(self):
        words = random_codewords(build_tanner_155(), 10_000, seed=8)
        weights = words.sum(axis=1, dtype=np.int64)
        assert np.all((weights == 0) | (weights >= 20))

    @pytest.mark.slow
    def test_weight_twenty_codeword(self):
        code = build_tanner_155()
        word = lightest_codeword(code, iterations=3000, seed=0, stop_at=20)
        assert int(word.sum()) == 20
        assert is_codeword(code, 1 - 2 * word.astype(np.int64))


class TestLightestCodeword:
    def test_hamming_distance_three(self, hamming):
        word = lightest_codeword(hamming, iterations=20, seed=1)
        assert int(word.sum()) == 3
        assert is_codeword(hamming, 1 - 2 * word.astype(np.int64))

    def test_stops_early(self, hamming):
        word = lightest_codeword(hamming, iterations=1000, seed=2, stop_at=7)
        assert word is not None and word.sum() > 0


class TestSmallGraphs:
    def test_library(self):
        assert {"tree7", "cycle4", "k4", "tanner155"} <= set(library_names())
        with pytest.raises(KeyError):
            get_code("nope")

    def test_girths(self):
        assert girth(get_code("tree7")) is None
        assert girth(get_code("cycle4")) == 8
        assert girth(get_code("k4")) == 6


class TestAlist:
    def test_parse_hamming(self):
        code = parse_alist(HAMMING_7_4_ALIST, name="h")
        assert code.n_bits == 7 and code.n_checks == 3
        assert code.check_neighbors[2] == (3, 4, 5, 6)

    def test_emit_then_parse(self):
        code = build_tanner_155()
        assert parse_alist(emit_alist(code)) == code

    def test_zero_index_rejected(self):
        text = HAMMING_7_4_ALIST.replace("1 3 5 7", "1 0 5 7")
        with pytest.raises(AlistFormatError) as exc:
            parse_alist(text)
        assert "1-based" in str(exc.value)

    def test_degree_sum_mismatch(self):
        text = HAMMING_7_4_ALIST.replace("4 4 4", "4 4 3", 1)
        with pytest.raises(AlistFormatError):
            parse_alist(text)

    def test_inconsistent_lists(self):
        text = HAMMING_7_4_ALIST.replace("1 3 5 7", "1 3 5 6")
        with pytest.raises(AlistFormatError):
            parse_alist(text)

    def test_json_mirror(self, hamming):
        assert code_from_json(code_to_json(hamming)) == hamming

    def test_load_from_disk(self, tmp_path, hamming):
        alist = tmp_path / "h.alist"
        alist.write_text(emit_alist(hamming))
        js = tmp_path / "h.json"
        js.write_text(code_to_json(hamming))
        assert load_code(alist) == hamming
        assert load_code(js) == hamming
        assert resolve_code(str(alist)) == hamming
        assert resolve_code("hamming74") is get_code("hamming74")
