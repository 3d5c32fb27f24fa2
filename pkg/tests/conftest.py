from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from synth import make_tagger, synth_corpus  # noqa: E402

DATA_DIR = Path(__file__).resolve().parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def tagger():
    return make_tagger()


@pytest.fixture(scope="session")
def small_corpus():
    return synth_corpus(20, seed=11)
