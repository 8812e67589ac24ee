from fractions import Fraction

import numpy as np
import pytest

from chaingeom.graded_lie import build_algebra

_acceptance = []


def elementary(alg, i, j, coeff=1):
    """Element for coeff * E_ij (1-based indices, as in matrix displays)."""
    m = np.zeros((alg.matrix_size, alg.matrix_size), dtype=object)
    m[:, :] = Fraction(0)
    m[i - 1, j - 1] = Fraction(coeff)
    return alg.from_matrix(m)


@pytest.fixture(scope="session")
def lag1():
    return build_algebra("lagrangean", 1)


@pytest.fixture(scope="session")
def lag2():
    return build_algebra("lagrangean", 2)


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{name}: {'PASS' if outcome == 'passed' else 'FAIL'}")
