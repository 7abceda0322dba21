import random

import pytest

from md4relax.attack import get_pipeline
from md4relax.encoder import encode_template


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running solver checks")


@pytest.fixture(scope="session")
def template39():
    return encode_template(39)


@pytest.fixture(scope="session")
def pipeline39():
    return get_pipeline(39, 0)


@pytest.fixture
def rng():
    return random.Random(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
