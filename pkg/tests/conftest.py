import numpy as np
import pytest

from trapdoor_bbs.bbs import TrapdoorKey
from trapdoor_bbs.task import TaskParams, keygen

ACCEPTANCE_LINES = []


class ZeroRng:
    """Stand-in RandomSource whose every byte is zero (forces seed u = 0)."""

    def bytes(self, k):
        return b"\x00" * k


@pytest.fixture
def zero_rng():
    return ZeroRng()


@pytest.fixture
def key77():
    return TrapdoorKey(7, 11)


@pytest.fixture(scope="session")
def params128():
    return TaskParams(128, 192, 768)


@pytest.fixture(scope="session")
def key128(params128):
    key, _ = keygen(params128, np.random.default_rng(20181))
    return key


@pytest.fixture(scope="session")
def key64():
    key, _ = keygen(TaskParams.default(64), np.random.default_rng(64))
    return key


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
