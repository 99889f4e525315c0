import sys
import numpy as np
import pytest

from zkpcp.field import gf


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def gf17():
    return gf(17)


@pytest.fixture(scope="session")
def gf16():
    return gf(2, e=4, subfield_f=2)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
