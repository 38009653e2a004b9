import pytest

from dynrefl.exactfield import VariableRegistry
from dynrefl.models import rational_model


@pytest.fixture(scope="session")
def model2():
    return rational_model(2)


@pytest.fixture(scope="session")
def model3():
    return rational_model(3)


@pytest.fixture
def reg2():
    return VariableRegistry.standard(2)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
