from __future__ import annotations

import itertools

import numpy as np
import pytest

from app.channel.geometry import instanton_noise_for, push_past_surface
from app.code.construct import get_code, single_check_code
from app.code.gf2 import codeword_matrix
from app.code.tanner import is_codeword
from app.loops.critical import CriticalLoop
from app.loops.enumerate import GeneralizedLoop
from app.lp import simplex
from app.lp.decoder import (
    LpProblem,
    PseudoCodeword,
    build_decoding_lp,
    decode_lp,
    forbidden_set_polytope,
    lp_solve,
)
from app.lp.erasure import _erasure_schedule, decode_lp_erasure
from app.lp.simplex import LpStallError, LpStatus, solve_box_lp


class TestSimplex:
    def test_toy_problem(self):
        x, objective, status = solve_box_lp(np.array([-1.0, -1.0]), np.array([[1.0, 1.0]]), np.array([1.5]))
        assert objective == pytest.approx(-1.5)
        assert x.sum() == pytest.approx(1.5)
        assert status is LpStatus.OPTIMAL

    def test_box_only(self):
        solution = solve_box_lp(np.array([2.0, -3.0, 0.5]), np.zeros((0, 3)), np.zeros(0))
        assert np.allclose(solution.x, [0.0, 1.0, 0.0])
        assert solution.max_violation <= 1e-12

    def test_infeasible_origin_rejected(self):
        with pytest.raises(ValueError):
            solve_box_lp(np.ones(2), np.array([[1.0, 0.0]]), np.array([-0.5]))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            solve_box_lp(np.ones(2), np.array([[1.0, 0.0]]), np.array([1.0, 2.0]))

    def test_breakdown_falls_into_restart(self, hamming, monkeypatch):
        real = simplex._pivot_loop
        calls = []

        def flaky(*args, **kwargs):
            calls.append(kwargs["bland"])
            if len(calls) == 1:
                raise simplex._Breakdown("singular working set")
            return real(*args, **kwargs)

        monkeypatch.setattr(simplex, "_pivot_loop", flaky)
        problem = build_decoding_lp(hamming, np.linspace(-0.4, 1.2, 7))
        solution = lp_solve(problem)
        assert solution.status is LpStatus.RESTARTED
        assert calls == [False, True]
        assert problem.violation(solution.x) <= 1e-9

    def test_second_breakdown_raises_stall(self, hamming, monkeypatch):
        def broken(*args, **kwargs):
            raise simplex._Breakdown("singular working set")

        monkeypatch.setattr(simplex, "_pivot_loop", broken)
        with pytest.raises(LpStallError):
            decode_lp(hamming, np.ones(7))

    def test_iteration_cap_stalls_twice(self):
        c = np.array([-1.0, -2.0, -0.5])
        a = np.array([[1.0, 1.0, 1.0], [1.0, -1.0, 0.0]])
        b = np.array([2.0, 0.0])
        with pytest.raises(LpStallError):
            solve_box_lp(c, a, b, max_iters=1)
        solution = solve_box_lp(c, a, b)
        assert solution.objective == pytest.approx(-3.0)


class TestTannerLp:
    def _check(self, code, seed):
        rng = np.random.default_rng(seed)
        h = 1.0 + rng.normal(size=code.n_bits)
        problem = build_decoding_lp(code, h)
        solution = lp_solve(problem)
        assert solution.status in (LpStatus.OPTIMAL, LpStatus.RESTARTED)
        assert problem.violation(solution.x) <= 1e-9
        # the transmitted word is feasible, so the optimum cannot exceed its cost
        assert solution.objective <= 1e-9
        result = decode_lp(code, h)
        assert result.diagnostics["objective"] == pytest.approx(solution.objective, abs=1e-9)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_awgn_draws(self, seed):
        self._check(get_code("tanner155"), seed)

    @pytest.mark.slow
    def test_many_awgn_draws(self):
        code = get_code("tanner155")
        for seed in range(30):
            self._check(code, seed)


class TestPolytope:
    def test_row_counts(self):
        rows, rhs, checks = forbidden_set_polytope(get_code("tanner155"))
        assert rows.shape == (93 * 16, 155)
        assert rows.shape[0] == 1488
        assert set(np.bincount(checks)) == {16}

    def test_degree_three_check(self):
        rows, rhs, _ = forbidden_set_polytope(single_check_code(3))
        assert rows.shape == (4, 3)
        assert sorted(rhs.tolist()) == [0.0, 0.0, 0.0, 2.0]

    def test_codewords_are_feasible(self, hamming):
        problem = build_decoding_lp(hamming, np.ones(7))
        for word in codeword_matrix(hamming):
            assert problem.violation(word.astype(float)) == 0.0

    def test_cached_arrays_are_read_only(self, hamming):
        rows, _, _ = forbidden_set_polytope(hamming)
        with pytest.raises(ValueError):
            rows[0, 0] = 5.0

    def test_problem_validation(self):
        with pytest.raises(ValueError):
            LpProblem(objective=np.ones(3), rows=np.ones((2, 2)), rhs=np.ones(2), row_checks=np.zeros(2, dtype=int))
        with pytest.raises(ValueError):
            LpProblem(
                objective=np.array([1.0, np.nan]), rows=np.ones((1, 2)), rhs=np.ones(1), row_checks=np.zeros(1, dtype=int)
            )


class TestDecodeLp:
    def test_positive_h_gives_zero_word(self, hamming):
        result = decode_lp(hamming, np.linspace(0.2, 1.5, 7))
        assert result.success
        assert result.decoded_transmitted()
        assert result.pseudo_codeword.effective_distance is None
        assert result.diagnostics["status"] == "optimal"

    def test_repetition_flips_to_all_ones(self):
        code = get_code("repetition3")
        result = decode_lp(code, np.array([1.0, 1.0, -3.0]))
        assert result.success
        assert result.bits.tolist() == [1, 1, 1]
        assert result.diagnostics["objective"] == pytest.approx(-2.0)

    def test_relaxation_against_ml(self, hamming):
        words = codeword_matrix(hamming).astype(float)
        for signs in itertools.product((1.0, -1.0), repeat=7):
            h = np.array(signs) * np.linspace(0.5, 1.1, 7)
            ml = float(np.min(words @ (2.0 * h)))
            result = decode_lp(hamming, h)
            objective = result.diagnostics["objective"]
            assert objective <= ml + 1e-9
            if result.pseudo_codeword.is_integral:
                assert objective == pytest.approx(ml, abs=1e-9)
                assert is_codeword(hamming, result.spins)

    def test_scale_invariance(self, hamming):
        rng = np.random.default_rng(4)
        h = rng.normal(0.3, 1.0, size=7)
        a = decode_lp(hamming, h).pseudo_codeword.omega
        b = decode_lp(hamming, 3.7 * h).pseudo_codeword.omega
        assert np.allclose(a, b, atol=1e-9)

    def test_equal_cost_point(self, hamming):
        word = codeword_matrix(hamming)[1].astype(float)
        h = instanton_noise_for(word).h
        problem = build_decoding_lp(hamming, h)
        assert problem.objective @ word == pytest.approx(0.0, abs=1e-12)
        assert lp_solve(problem).objective <= 1e-9
        pushed = decode_lp(hamming, push_past_surface(h, 1.0 + 1e-6))
        assert not pushed.decoded_transmitted()
        assert pushed.diagnostics["objective"] < 0.0

    def test_length_mismatch(self, hamming):
        with pytest.raises(ValueError):
            decode_lp(hamming, np.ones(5))


class TestPseudoCodeword:
    def test_near_integral_is_rounded(self):
        pc = PseudoCodeword.from_vertex(np.array([1.0 - 1e-9, 1e-10, 1.0]), -1.0)
        assert pc.is_integral
        assert pc.omega.tolist() == [1.0, 0.0, 1.0]
        assert pc.effective_distance == pytest.approx(2.0)
        assert pc.support.tolist() == [0, 2]

    def test_fractional(self):
        pc = PseudoCodeword.from_vertex(np.array([0.5, 0.5, 1.0, 0.0]), -0.3)
        assert not pc.is_integral
        assert pc.to_dict()["d_eff"] == pytest.approx(4.0 / 1.5)


def _critical(code, bits, checks, r, threshold):
    edges = []
    for k, a in enumerate(checks):
        edges.append(code.edge_id(bits[k], a))
        edges.append(code.edge_id(bits[(k + 1) % len(bits)], a))
    loop = GeneralizedLoop.from_edges(code, edges)
    return CriticalLoop(loop=loop, r=r, threshold=threshold, cycle_bits=bits, cycle_checks=checks)


class TestErasure:
    def test_noiseless_needs_no_erasure(self):
        code = get_code("tanner155")
        result = decode_lp_erasure(code, np.ones(155))
        assert result.success
        assert result.decoder == "lp-erasure"
        assert result.diagnostics["loops_tried"] == []

    def test_epsilon_range(self, hamming):
        with pytest.raises(ValueError):
            decode_lp_erasure(hamming, np.ones(7), epsilon=1.0)

    def test_schedule_starts_with_tied_union(self, k4):
        # K4 vertex model: bits are the graph edges, checks the vertices
        ranked = [
            _critical(k4, (0, 1, 3), (0, 2, 1), 0.8, 0.9),
            _critical(k4, (0, 2, 4), (0, 3, 1), -0.8, 0.9),
            _critical(k4, (1, 2, 5), (0, 3, 2), 0.5, 0.9),
            _critical(k4, (3, 4, 5), (1, 3, 2), 0.4, 0.7),
        ]
        schedule = _erasure_schedule(ranked, candidates=2)
        assert schedule[0][:2] == (0.9, (0, 1, 2, 3, 4))
        # two candidates at 0.9, then the 0.7 loop
        assert [s[1] for s in schedule[1:]] == [(0, 1, 3), (0, 2, 4), (3, 4, 5)]

    def test_empty_schedule(self):
        assert _erasure_schedule([], candidates=3) == []

    def test_trail_records_attempts(self, hamming):
        h = np.array([1.0, 1.0, 1.0, -0.2, -0.2, 1.0, -0.2])
        result = decode_lp_erasure(hamming, h, thresholds=[0.5, 0.1, 0.01])
        for entry in result.diagnostics["loops_tried"]:
            assert set(entry) == {"threshold", "bits", "r", "outcome"}
        if result.success:
            assert is_codeword(hamming, result.spins)
