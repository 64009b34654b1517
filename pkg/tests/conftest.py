import pytest

from hypfir.spaces import TreeOracle, parse_oracle


@pytest.fixture(scope="session")
def tree():
    return TreeOracle(2)


@pytest.fixture(scope="session")
def cayley6():
    return parse_oracle("cayley:2:ab:6")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
