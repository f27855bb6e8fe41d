from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tgs import zoo  # noqa: E402
from tgs.census import count_models  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def census_cache():
    """Census models per ``(n, m)``, computed once per session."""
    cache: dict = {}

    def get(n: int, m: int):
        if (n, m) not in cache:
            cache[n, m] = list(count_models(n, m).models())
        return cache[n, m]

    return get


@pytest.fixture(scope="session")
def small_models(census_cache):
    """Every census model with ``n <= 3`` and ``m <= 2``."""
    return [T for n in (1, 2, 3) for m in (1, 2) for T in census_cache(n, m)]


@pytest.fixture
def B():
    return zoo.boolean()


@pytest.fixture
def M3():
    return zoo.mod3()


@pytest.fixture
def Z4():
    return zoo.mod4()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
