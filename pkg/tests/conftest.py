import pytest
from hypothesis import HealthCheck, settings

from macsearch.oracle import build_running_example_fixture

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def example():
    """(rsn, region) of the worked example, plus a name -> id helper."""
    rsn, region = build_running_example_fixture()
    index = {name: i for i, name in enumerate(rsn.social.names)}

    def ids(*numbers):
        return frozenset(index[f"v{n}"] for n in numbers)

    return rsn, region, ids


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
