"""Shared test helpers."""

from pathlib import Path

import hamforge

FIXTURES = Path(hamforge.__file__).parent / "fixtures"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text()
