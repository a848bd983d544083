# conftest.py
"""
Shared fixtures: seeded generators, builtin families and JSON input files
"""

import json
import os
import sys

import numpy as np
import pytest

PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, PROJECT_ROOT)

from src.config.data_structures import PiecewiseLinearPath  # noqa: E402
from src.fields.vector_fields import builtin_family, signature_ode_family  # noqa: E402

SCHEMA_DIR = os.path.join(PROJECT_ROOT, 'schemas')


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope='session')
def rotation():
    return builtin_family('rotation')


@pytest.fixture(scope='session')
def bracket_demo():
    return builtin_family('bracket-demo')


@pytest.fixture(scope='session')
def heisenberg():
    return builtin_family('heisenberg')


@pytest.fixture(scope='session')
def sig2():
    return signature_ode_family(2, 2)


@pytest.fixture(scope='session')
def sig3():
    return signature_ode_family(3, 2)


def random_path(rng, segments: int, dimension: int, scale: float = 1.0) -> PiecewiseLinearPath:
    """Random polygon with segment durations in [0.1, 0.6]"""
    times = np.concatenate([[0.0], np.cumsum(rng.uniform(0.1, 0.6, size=segments))])
    points = np.vstack([np.zeros(dimension), np.cumsum(rng.normal(0.0, scale, size=(segments, dimension)), axis=0)])
    return PiecewiseLinearPath(times, points)


def load_schema(name: str):
    with open(os.path.join(SCHEMA_DIR, name), 'r', encoding='utf-8') as f:
        return json.load(f)


@pytest.fixture
def write_json(tmp_path):
    """Write an object to a JSON file under tmp_path and return its path"""
    def _write(name, data):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding='utf-8')
        return str(path)
    return _write


@pytest.fixture(scope='session')
def iisignature():
    """Independent signature library, used as an oracle when installed"""
    return pytest.importorskip('iisignature')
