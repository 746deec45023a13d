from __future__ import annotations

import json

import numpy as np
import pytest

from app.bp.engine import run_bp
from app.channel.geometry import push_past_surface
from app.code.construct import get_code
from app.code.tanner import is_codeword
from app.config import settings
from app.instanton.search import build_instanton_catalog, load_instanton_catalog, search_instanton
from app.loops.critical import find_critical_loop


@pytest.fixture
def check4():
    return get_code("check4")


class TestSearch:
    def test_single_check_reaches_weight_two(self, check4):
        records = [search_instanton(check4, seed) for seed in range(20)]
        found = [r for r in records if r is not None]
        assert found
        assert min(r.effective_distance for r in found) == pytest.approx(2.0)
        for r in found:
            # a single parity check has no fractional vertices
            assert r.pseudo_codeword.is_integral
            assert is_codeword(check4, 1 - 2 * r.pseudo_codeword.omega.astype(np.int64))
            assert r.converged

    def test_instanton_is_on_equal_cost_surface(self, check4):
        record = next(r for r in (search_instanton(check4, s) for s in range(10)) if r is not None)
        omega = record.pseudo_codeword.omega
        assert record.pseudo_codeword.objective_value == pytest.approx(0.0, abs=1e-9)
        assert 2.0 * record.instanton_llr.h @ omega == pytest.approx(0.0, abs=1e-9)

    def test_deterministic(self, hamming):
        a = search_instanton(hamming, 3)
        b = search_instanton(hamming, 3)
        assert (a is None) == (b is None)
        if a is not None:
            assert np.array_equal(a.pseudo_codeword.omega, b.pseudo_codeword.omega)
            assert a.trajectory == b.trajectory
            assert a.dedup_key() == b.dedup_key()

    def test_max_steps_validated(self, check4):
        with pytest.raises(ValueError):
            search_instanton(check4, 0, max_steps=0)


class TestCatalog:
    def test_layout_and_counts(self, check4, tmp_path):
        catalog = build_instanton_catalog(check4, 8, tmp_path)
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["seeds"] == 8
        assert summary["distinct_count"] == len(catalog)
        assert summary["raw_count"] + summary["no_failure_seeds"] == 8
        assert summary["distinct_count"] <= summary["raw_count"]

        rows = [json.loads(line) for line in (tmp_path / "catalog.jsonl").read_text().splitlines()]
        assert len(rows) == len(catalog)
        assert [r["d_eff"] for r in rows] == sorted(r["d_eff"] for r in rows)
        for row in rows:
            assert (tmp_path / row["omega"]).exists()
            assert (tmp_path / row["h"]).exists()

    def test_distinct_keys(self, check4, tmp_path):
        catalog = build_instanton_catalog(check4, 12, tmp_path)
        keys = [r.dedup_key() for r in catalog]
        assert len(keys) == len(set(keys))

    def test_load(self, check4, tmp_path):
        catalog = build_instanton_catalog(check4, 6, tmp_path)
        loaded = load_instanton_catalog(tmp_path)
        assert len(loaded) == len(catalog)
        for a, b in zip(catalog, loaded):
            assert np.allclose(a.pseudo_codeword.omega, b.pseudo_codeword.omega)
            assert np.allclose(a.instanton_llr.h, b.instanton_llr.h)
            assert a.effective_distance == pytest.approx(b.effective_distance)
            assert a.seed == b.seed


@pytest.mark.slow
def test_tanner_instanton(tmp_path):
    code = get_code("tanner155")
    catalog = build_instanton_catalog(code, 3, tmp_path, max_steps=30)
    assert catalog
    for record in catalog:
        assert 0.0 < record.effective_distance < code.n_bits
        assert record.pseudo_codeword.objective_value == pytest.approx(0.0, abs=1e-8)


def _bp_at(code, record):
    h = push_past_surface(record.instanton_llr.h, 1.0 + settings.instanton_push)
    return run_bp(code, h)[1]


@pytest.mark.slow
class TestTannerCatalog:
    def test_minimum_effective_distance(self, tanner_catalog):
        assert min(r.effective_distance for r in tanner_catalog) == pytest.approx(16.4037, abs=0.05)

    def test_lowest_family_has_unit_loop(self, tanner_catalog):
        code = get_code("tanner155")
        lowest = min(r.effective_distance for r in tanner_catalog)
        family = [r for r in tanner_catalog if r.effective_distance < lowest + 1e-6]
        for record in family:
            found = find_critical_loop(code, _bp_at(code, record), thresholds=[0.999])
            assert found
            assert all(c.loop.is_single_connected() for c in found)
            assert abs(found[0].r) == pytest.approx(1.0, abs=1e-6)

    def test_some_loop_is_critical_but_below_one(self, tanner_catalog):
        code = get_code("tanner155")
        magnitudes = []
        for record in tanner_catalog:
            if record.effective_distance >= 20.0:
                continue
            magnitudes += [abs(c.r) for c in find_critical_loop(code, _bp_at(code, record))]
        assert any(0.5 < m < 1.0 - 1e-6 for m in magnitudes)
