# File: tests/conftest.py
import pytest

from satharm.config import resolve_scenario
from satharm.dsp.harmonic_model import decompose
from satharm.processing import ScenarioRunner

# Rounded amplitudes used when a value is quoted directly.
A: float = 1.0
B: float = 31.62
S_A: float = 16.31


@pytest.fixture(scope="session")
def default_config(tmp_path_factory):
    return resolve_scenario({"output_dir": tmp_path_factory.mktemp("scenario")})


@pytest.fixture(scope="session")
def default_scenario(default_config):
    return ScenarioRunner(default_config).scenario


@pytest.fixture(scope="session")
def default_table(default_config):
    cfg = default_config
    return decompose(cfg.a, cfg.b, cfg.s_a, 7)


@pytest.fixture(scope="session")
def unclipped_table():
    return decompose(1.0, 0.5, 2.0, 5)
