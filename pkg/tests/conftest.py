from __future__ import annotations

import os

import numpy as np
import pytest

from app.bp.engine import run_bp
from app.code.construct import get_code
from app.instanton.search import build_instanton_catalog, load_instanton_catalog


@pytest.fixture
def hamming():
    return get_code("hamming74")


@pytest.fixture
def cycle4():
    return get_code("cycle4")


@pytest.fixture
def tree7():
    return get_code("tree7")


@pytest.fixture
def k4():
    return get_code("k4")


def random_h(code, seed: int) -> np.ndarray:
    """h ~ 0.5 + 0.5 N(0, 1), the draw used by the loop-series regression."""
    rng = np.random.default_rng(seed)
    return 0.5 + 0.5 * rng.standard_normal(code.n_bits)


def tight_bp(code, h):
    return run_bp(code, h, max_iters=5000, tol=1e-13, damping=0.5)


@pytest.fixture(scope="session")
def tanner_catalog_dir(tmp_path_factory):
    """Instanton catalog of the Tanner code over 500 seeds, built once per session."""
    out = tmp_path_factory.mktemp("tanner-catalog")
    build_instanton_catalog(get_code("tanner155"), 500, out, workers=os.cpu_count() or 1)
    return out


@pytest.fixture(scope="session")
def tanner_catalog(tanner_catalog_dir):
    return load_instanton_catalog(tanner_catalog_dir)
