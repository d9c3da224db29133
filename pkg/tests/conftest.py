from __future__ import annotations

import numpy as np
import pytest

from pkw.decomposition import build_decomposition_16


@pytest.fixture(scope="session")
def dec1():
    """(decomposition, kernel) for the size-16 coset construction."""
    return build_decomposition_16()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
