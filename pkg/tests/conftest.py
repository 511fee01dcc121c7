from functools import reduce

import numpy as np
import pytest

from dicke_selftest.core import I2


def kron_operator(n, placed):
    """Dense 2^n x 2^n operator from ``{party: 2x2}`` built with np.kron.

    np.kron puts its first factor on the most significant bit, so parties are
    listed from n down to 1 to match the little-endian convention.
    """
    return reduce(np.kron, [placed.get(p, I2) for p in range(n, 0, -1)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
