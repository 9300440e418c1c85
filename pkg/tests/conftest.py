from __future__ import annotations

from pathlib import Path

import pytest

from coverdx import load_kb_path

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def kb3_path() -> Path:
    return DATA_DIR / "kb3.json"


@pytest.fixture(scope="session")
def kb3(kb3_path):
    return load_kb_path(kb3_path)


@pytest.fixture(scope="session")
def kb3_json(kb3_path) -> str:
    return kb3_path.read_text()
