from pathlib import Path

import numpy as np
import pytest

from tccdec.codefile import load_code
from tccdec.trellis import IntersectionCode, build_check_trellis

ROOT = Path(__file__).resolve().parents[1]
CODES = ROOT / "codes"

ACCEPTANCE_LINES: list[str] = []


def random_checks(rng, m, n):
    """Random 0/1 matrix with no all-zero row."""
    while True:
        H = rng.integers(0, 2, size=(m, n))
        if H.sum(axis=1).min() > 0:
            return H


def random_code(rng, n, m1=None, m2=None):
    m1 = m1 or int(rng.integers(1, max(2, n // 2)))
    m2 = m2 or int(rng.integers(1, max(2, n // 2)))
    return IntersectionCode(build_check_trellis(random_checks(rng, m1, n)),
                            build_check_trellis(random_checks(rng, m2, n)))


@pytest.fixture(scope="session")
def ldpc12():
    return load_code(CODES / "ldpc12.tcc")


@pytest.fixture(scope="session")
def conv14():
    return load_code(CODES / "conv14.tcc")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
