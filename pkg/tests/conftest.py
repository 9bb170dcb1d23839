import os
import sys

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_VERDICTS = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """``check(criterion, ok, detail)``: print one PASS/FAIL line, keep it for the summary, assert."""
    lines = request.config.stash.setdefault(_VERDICTS, [])

    def check(criterion, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} [{criterion}] {detail}"
        print(line)
        lines.append(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("[")[1].split("]")[0].split()[0])):
            terminalreporter.write_line(line)
