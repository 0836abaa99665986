import numpy as np
import pytest
from hypothesis import settings

from z4lab.systems import SystemCoefficients

settings.register_profile("z4lab", deadline=None, max_examples=40)
settings.load_profile("z4lab")


@pytest.fixture
def concrete():
    return SystemCoefficients.concrete()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_LINES = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line for an acceptance criterion; the lines are
    printed as they happen and again in the terminal summary."""
    def emit(name, ok, detail=""):
        line = f"criterion {name}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        _LINES.append(line)
        print(line)
        return ok
    return emit


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
