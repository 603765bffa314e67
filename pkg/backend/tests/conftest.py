import numpy as np
import pytest

from app.config import get_settings
from app.services.streams import MonteCarloRunner, SeedBank


@pytest.fixture
def settings(monkeypatch, tmp_path):
    """Settings with small replicate counts and a temporary output directory."""
    monkeypatch.setenv("LR_OUTPUT_DIR", str(tmp_path / "results"))
    monkeypatch.setenv("LR_N_CALIB", "20000")
    monkeypatch.setenv("LR_N_POWER", "20000")
    monkeypatch.setenv("LR_CHUNK_SIZE", "4096")
    monkeypatch.setenv("LR_MASTER_SEED", "7")
    get_settings.cache_clear()
    yield get_settings()
    get_settings.cache_clear()


@pytest.fixture
def bank():
    return SeedBank(20240601)


@pytest.fixture
def runner():
    return MonteCarloRunner(workers=1, chunk_size=4096)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(12345))
