import json
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def class_number_fixture():
    return json.loads((FIXTURES / "class_numbers.json").read_text())


@pytest.fixture(scope="session")
def embedding_count_fixture():
    return json.loads((FIXTURES / "embedding_counts.json").read_text())
