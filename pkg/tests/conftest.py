import warnings

import pytest

from optospec.model import ModelParams

# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: dict = {}


@pytest.fixture
def record_criterion():
    def _record(number, passed, detail=""):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}".rstrip()
        ACCEPTANCE_LINES[number] = line
        print(line)

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture(autouse=True)
def _quiet_truncation():
    from optospec.eigensystem import TruncationWarning

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        yield


def params(**kw):
    base = dict(omega=50.0, nu=1.0, chi=0.5, kappa=0.01, gamma=0.01, mbar=1.0, variant="ds")
    base.update(kw)
    return ModelParams(**base)
