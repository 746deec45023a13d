from __future__ import annotations

import math

import numpy as np
import pytest

from app.bp.engine import (
    BpState,
    ForbiddenConfigurationError,
    beliefs_from_state,
    bethe_free_energy,
    bp_sweep,
    check_beliefs,
    check_messages,
    decode_bp,
    directed_magnetizations,
    even_configurations,
    gauge_from_state,
    log_z0,
    run_bp,
)
from app.bp.exact import brute_force
from app.code.construct import get_code, single_check_code
from app.code.gf2 import codeword_matrix
from tests.conftest import random_h, tight_bp


class TestConfigurations:
    def test_degree_three_order(self):
        assert even_configurations(3).tolist() == [[1, 1, 1], [-1, 1, -1], [1, -1, -1], [-1, -1, 1]]

    def test_all_even(self):
        for d in range(1, 7):
            configs = even_configurations(d)
            assert configs.shape == (2 ** (d - 1), d)
            assert np.all(np.prod(configs, axis=1) == 1)
            assert len({tuple(r) for r in configs}) == configs.shape[0]


class TestMessages:
    def test_check_belief_single_check(self):
        code = single_check_code(3)
        beliefs, _ = check_beliefs(code, np.ones(3))
        z = math.exp(3) + 3 * math.exp(-1)
        assert np.allclose(beliefs[0], [math.exp(3) / z] + [math.exp(-1) / z] * 3)

    def test_check_message_product_rule(self):
        code = single_check_code(3)
        eta = np.array([0.4, -1.2, 2.0])
        u = check_messages(code, eta)
        t = np.tanh(eta)
        assert u[0] == pytest.approx(math.atanh(t[1] * t[2]))
        assert u[1] == pytest.approx(math.atanh(t[0] * t[2]))

    def test_sweep_validates(self, hamming):
        state = BpState.initial(hamming, np.ones(7))
        with pytest.raises(ValueError):
            bp_sweep(hamming, np.ones(7), state, damping=1.0)
        with pytest.raises(ValueError):
            bp_sweep(hamming, np.ones(7), BpState(eta=np.zeros(3)), damping=0.5)

    def test_messages_stay_clipped(self, hamming):
        state = BpState.initial(hamming, np.full(7, 1e3))
        state = bp_sweep(hamming, np.full(7, 1e3), state, damping=0.0)
        assert np.all(np.abs(state.eta) <= 30.0)


class TestTreeExactness:
    @pytest.mark.parametrize("seed", range(5))
    def test_magnetizations_match_brute_force(self, tree7, seed):
        h = random_h(tree7, seed)
        state, beliefs = run_bp(tree7, h, max_iters=200, tol=1e-14, damping=0.0)
        assert state.converged
        exact = brute_force(tree7, h)
        assert np.allclose(beliefs.bit_magnetizations, exact.magnetizations, atol=1e-10)

    @pytest.mark.parametrize("seed", range(5))
    def test_bethe_free_energy_is_exact(self, tree7, seed):
        h = random_h(tree7, seed)
        _, beliefs = run_bp(tree7, h, max_iters=200, tol=1e-14, damping=0.0)
        assert -bethe_free_energy(tree7, beliefs) == pytest.approx(brute_force(tree7, h).log_z, abs=1e-9)


class TestFreeEnergy:
    def test_gauge_functional_equals_bethe_at_fixed_point(self, cycle4):
        h = random_h(cycle4, 3)
        state, beliefs = tight_bp(cycle4, h)
        assert state.converged
        eta_bit, eta_check = gauge_from_state(cycle4, state)
        assert log_z0(cycle4, h, eta_bit, eta_check) == pytest.approx(-bethe_free_energy(cycle4, beliefs), abs=1e-9)

    def test_gauge_gradient(self, hamming):
        rng = np.random.default_rng(0)
        h = rng.normal(size=7)
        eta_bit = rng.normal(size=hamming.n_edges)
        eta_check = rng.normal(size=hamming.n_edges)
        m_bit, m_check, m_edge = directed_magnetizations(hamming, h, eta_bit, eta_check)
        step = 1e-6
        for e in (0, 5, 11):
            bump = np.zeros(hamming.n_edges)
            bump[e] = step
            d_bit = (log_z0(hamming, h, eta_bit + bump, eta_check) - log_z0(hamming, h, eta_bit - bump, eta_check)) / (2 * step)
            d_check = (log_z0(hamming, h, eta_bit, eta_check + bump) - log_z0(hamming, h, eta_bit, eta_check - bump)) / (2 * step)
            assert d_bit == pytest.approx(m_bit[e] - m_edge[e], abs=1e-7)
            assert d_check == pytest.approx(m_check[e] - m_edge[e], abs=1e-7)

    def test_bp_point_is_stationary(self, k4):
        h = random_h(k4, 1)
        state, _ = tight_bp(k4, h)
        assert state.converged
        m_bit, m_check, m_edge = directed_magnetizations(k4, h, *gauge_from_state(k4, state))
        assert np.max(np.abs(m_bit - m_edge)) < 1e-10
        assert np.max(np.abs(m_check - m_edge)) < 1e-10

    def test_full_table_with_odd_mass_rejected(self):
        code = single_check_code(2)
        _, beliefs = run_bp(code, np.array([0.3, 0.1]))
        beliefs.check_beliefs[0] = np.array([0.25, 0.25, 0.25, 0.25])
        with pytest.raises(ForbiddenConfigurationError):
            bethe_free_energy(code, beliefs)

    def test_full_table_on_even_rows_accepted(self):
        code = single_check_code(2)
        _, beliefs = run_bp(code, np.array([0.3, 0.1]))
        even = beliefs.check_beliefs[0]
        full = np.zeros(4)
        # full rows in binary-digit order: ++, -+, +-, --
        full[0], full[3] = even[0], even[1]
        baseline = bethe_free_energy(code, beliefs)
        beliefs.check_beliefs[0] = full
        assert bethe_free_energy(code, beliefs) == pytest.approx(baseline)


class TestDecode:
    def test_noiseless(self):
        code = get_code("tanner155")
        result = decode_bp(code, np.ones(155))
        assert result.success
        assert result.decoded_transmitted()
        assert not result.bits.any()

    def test_non_convergence_is_reported(self, k4):
        result = decode_bp(k4, random_h(k4, 0), max_iters=1)
        assert result.diagnostics["iterations"] == 1
        assert result.diagnostics["converged"] is False

    def test_bad_parameters(self, hamming):
        with pytest.raises(ValueError):
            run_bp(hamming, np.ones(7), max_iters=0)
        with pytest.raises(ValueError):
            run_bp(hamming, np.ones(6))

    def test_beliefs_from_raw_eta(self, hamming):
        state, beliefs = tight_bp(hamming, np.linspace(-0.5, 2.0, 7))
        again = beliefs_from_state(hamming, np.linspace(-0.5, 2.0, 7), state.eta)
        assert np.allclose(again.bit_magnetizations, beliefs.bit_magnetizations)


class TestSymmetry:
    @pytest.mark.parametrize("seed", range(5))
    def test_codeword_flip_flips_magnetizations(self, hamming, seed):
        h = random_h(hamming, seed)
        _, beliefs = tight_bp(hamming, h)
        exact = brute_force(hamming, h).magnetizations
        for word in codeword_matrix(hamming)[1:4]:
            signs = 1.0 - 2.0 * word
            _, flipped = tight_bp(hamming, signs * h)
            assert np.allclose(flipped.bit_magnetizations, signs * beliefs.bit_magnetizations, atol=1e-10)
            assert np.allclose(brute_force(hamming, signs * h).magnetizations, signs * exact, atol=1e-12)

    @pytest.mark.parametrize("name", ["repetition3", "check4"])
    def test_negated_h_negates_magnetizations(self, name):
        # the all-ones word is a codeword here, so negation is a codeword flip
        code = get_code(name)
        for seed in range(3):
            h = random_h(code, seed)
            _, beliefs = tight_bp(code, h)
            _, negated = tight_bp(code, -h)
            assert np.allclose(negated.bit_magnetizations, -beliefs.bit_magnetizations, atol=1e-10)
            assert np.allclose(brute_force(code, -h).magnetizations, -brute_force(code, h).magnetizations, atol=1e-12)
