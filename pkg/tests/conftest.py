import pytest

from roughsing.acceptance import Workspace
from roughsing.wavelet import build_wavelet_pair

_LINES = []


@pytest.fixture(scope="session")
def workspace():
    return Workspace()


@pytest.fixture(scope="session")
def wp8():
    return build_wavelet_pair(8, 12)


@pytest.fixture(scope="session")
def acceptance_lines():
    return _LINES


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in _LINES:
        terminalreporter.write_line(line)
