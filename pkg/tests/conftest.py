import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

TESTS = Path(__file__).parent
DATA = TESTS.parent / "src" / "cuecast" / "data"


@pytest.fixture
def toy_dir() -> Path:
    return DATA / "toy"


@pytest.fixture
def golden_dir() -> Path:
    return TESTS / "golden"
