from __future__ import annotations

import json

import numpy as np
import pytest

from app.channel.awgn import (
    LlrVector,
    awgn_sample,
    llr_from_output,
    llr_to_json,
    read_llr_csv,
    trial_seed,
    write_llr_csv,
)
from app.channel.geometry import effective_distance, instanton_noise_for, push_past_surface
from app.code.tanner import Codeword


class TestLlrVector:
    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            LlrVector(np.array([1.0, np.inf]))

    def test_rejects_matrix(self):
        with pytest.raises(ValueError):
            LlrVector(np.ones((2, 2)))

    def test_length_check(self, hamming):
        with pytest.raises(ValueError):
            LlrVector(np.ones(6)).check_length(hamming)

    def test_json(self):
        doc = json.loads(llr_to_json(LlrVector(np.array([0.5, -1.0]), snr_s2=2.0)))
        assert doc == {"h": [0.5, -1.0], "snr_s2": 2.0}


class TestAwgn:
    def test_seeded_sample_is_reproducible(self, hamming):
        a = awgn_sample(hamming, Codeword.zero(7), 2.0, seed=11)
        b = awgn_sample(hamming, Codeword.zero(7), 2.0, seed=11)
        assert np.array_equal(a.x, b.x)

    def test_large_snr_stays_near_transmitted(self, hamming):
        noise = awgn_sample(hamming, Codeword.zero(7), 1e8, seed=1)
        assert np.allclose(llr_from_output(noise).h, 1.0, atol=1e-2)

    def test_bad_snr(self, hamming):
        with pytest.raises(ValueError):
            awgn_sample(hamming, Codeword.zero(7), 0.0, seed=1)

    def test_noise_moments(self, hamming):
        g = np.concatenate(
            [awgn_sample(hamming, Codeword.zero(7), 1.0, seed=trial_seed(0, k)).x - 1.0 for k in range(20_000)]
        )
        assert abs(g.mean()) < 0.02
        assert abs(g.var() - 1.0) < 0.02

    def test_noise_variance_scales_with_snr(self, hamming):
        g = np.concatenate(
            [awgn_sample(hamming, Codeword.zero(7), 4.0, seed=trial_seed(1, k)).x - 1.0 for k in range(20_000)]
        )
        assert abs(g.var() - 0.25) < 0.01

    def test_trial_seeds_differ(self):
        seeds = {trial_seed(5, k) for k in range(100)}
        assert len(seeds) == 100
        assert trial_seed(5, 3) == trial_seed(5, 3)

    def test_csv(self, tmp_path):
        values = np.array([0.25, -1.5, 3.0])
        path = tmp_path / "sub" / "h.csv"
        write_llr_csv(path, values)
        assert np.array_equal(read_llr_csv(path).h, values)

    def test_csv_bad_value(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text("1.0\nabc\n")
        with pytest.raises(ValueError, match="h.csv:2"):
            read_llr_csv(path)


class TestGeometry:
    def test_integral_distance_is_weight(self):
        w = np.zeros(20)
        w[[1, 4, 7, 9, 13]] = 1.0
        assert effective_distance(w) == pytest.approx(5.0, abs=1e-12)

    def test_fractional_distance(self):
        w = np.array([1.0, 0.5, 0.5, 0.0])
        assert effective_distance(w) == pytest.approx(4.0 / 1.5)

    def test_equal_cost_surface(self):
        w = np.array([1.0, 0.5, 0.5, 0.25, 0.0, 0.0])
        h = instanton_noise_for(w).h
        assert abs(2.0 * h @ w) < 1e-9
        assert np.allclose(h[w == 0], 1.0)

    def test_minimum_norm_on_surface(self):
        # any other point on the surface is farther from the transmitted point
        w = np.array([1.0, 0.5, 0.5, 0.0])
        h = instanton_noise_for(w).h
        shift = np.array([0.3, -0.6, 0.0, 0.2])
        shift -= w * (shift @ w) / (w @ w)
        assert np.linalg.norm(h + shift - 1.0) > np.linalg.norm(h - 1.0)

    def test_push_moves_past_surface(self):
        w = np.array([1.0, 1.0, 0.0])
        h = instanton_noise_for(w).h
        pushed = push_past_surface(h, 1.0 + 1e-6)
        assert pushed @ w < 0

    def test_zero_or_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            effective_distance(np.zeros(3))
        with pytest.raises(ValueError):
            instanton_noise_for(np.array([1.5, 0.0]))
