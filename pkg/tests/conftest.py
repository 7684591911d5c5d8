import sys

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    # one verdict line per acceptance criterion, when that module ran
    for name, module in list(sys.modules.items()):
        if name.rsplit(".", 1)[-1] == "test_acceptance" and getattr(module, "RESULTS", None):
            terminalreporter.section("acceptance criteria")
            for number in sorted(module.RESULTS):
                terminalreporter.write_line(module.RESULTS[number])
