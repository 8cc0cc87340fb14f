import math

import numpy as np
import pytest

from anchordeploy import kernels
from anchordeploy.ssp import builtin_profile, iso_profile, standardize


@pytest.fixture(scope="session")
def iso():
    return iso_profile(1500.0, 6000.0)


@pytest.fixture(scope="session")
def ssp1():
    return standardize(builtin_profile("ssp1"))


@pytest.fixture(scope="session")
def ssp2():
    return standardize(builtin_profile("ssp2"))


@pytest.fixture(scope="session")
def experiment():
    return standardize(builtin_profile("experiment"))


@pytest.fixture(params=sorted(kernels.backends()))
def backend(request):
    """Run the test once per available kernel backend."""
    prev = kernels.set_backend(request.param)
    yield request.param
    kernels.set_backend(prev)


def deg(x):
    return math.radians(x)


def ring_refs(radius, J, beta0=0.0):
    b = 2 * np.pi * np.arange(J) / J + beta0
    return np.column_stack([radius * np.cos(b), radius * np.sin(b), np.zeros(J)])


ACCEPTANCE_RESULTS: list[str] = []


def record(number, title, ok, detail=""):
    """Print and keep one pass/fail line for an acceptance criterion."""
    line = f"AC{number:02d} {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
    print(line)
    ACCEPTANCE_RESULTS.append(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_RESULTS):
            terminalreporter.write_line(line)
