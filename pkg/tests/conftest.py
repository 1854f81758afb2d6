from pathlib import Path

import numpy as np
import pytest

from invex2d.config import Settings
from invex2d.data_handling.corpus import named_instance
from invex2d.opf import canonical_params

PROBLEMS_DIR = Path(__file__).resolve().parents[1] / "problems"


@pytest.fixture
def settings():
    return Settings()


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def unit_disk():
    return named_instance("unit-disk")


@pytest.fixture
def unit_box():
    return named_instance("unit-box")


@pytest.fixture
def anti_disk():
    return named_instance("anti-disk")


@pytest.fixture
def crescent():
    return named_instance("crescent")


@pytest.fixture
def canonical():
    return canonical_params()


@pytest.fixture
def problems_dir():
    return PROBLEMS_DIR
