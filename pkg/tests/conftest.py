import warnings

import numpy as np
import pytest

from nanotrap.schemes import PerturbativeValidityWarning

ACCEPTANCE_LINES = []


def record(criterion, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(autouse=True)
def _quiet_validity_warnings():
    # matched traps sit deliberately near the elimination margin
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PerturbativeValidityWarning)
        yield


OMEGA0 = 2 * np.pi * 1e9
SIGMA = 3e-6
