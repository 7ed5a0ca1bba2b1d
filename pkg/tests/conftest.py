import pytest

from rrdps.channel import ChannelParams
from rrdps.source import REFERENCE_ENSEMBLE, SourceEnsemble


@pytest.fixture
def table1():
    return ChannelParams.table1(train_len=16, distance=30.0)


@pytest.fixture
def reference_ensemble():
    def make(delta=0.0):
        return SourceEnsemble.from_intensities(*REFERENCE_ENSEMBLE, delta)

    return make


# Acceptance criteria record one line each; they are echoed after the run.
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
