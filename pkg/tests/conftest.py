import warnings

import pytest

warnings.filterwarnings("ignore", message=".*TBB.*")

from zloop.spectrum import length_spectrum  # noqa: E402
from zloop.surfaces import bolza, cylinder, funnel3  # noqa: E402


@pytest.fixture(scope="session")
def cyl1():
    return cylinder(1.0)


@pytest.fixture(scope="session")
def funnel():
    return funnel3(5.0)


@pytest.fixture(scope="session")
def octagon():
    return bolza()


@pytest.fixture(scope="session")
def cyl1_spec(cyl1):
    return length_spectrum(cyl1, 40.0)


@pytest.fixture(scope="session")
def funnel_spec(funnel):
    return length_spectrum(funnel, 24.0)


@pytest.fixture(scope="session")
def bolza_spec(octagon):
    return length_spectrum(octagon, 6.0)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import CRITERIA, RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in CRITERIA:
        terminalreporter.write_line(RESULTS.get(name, f"{name:>4} NOT RUN"))
