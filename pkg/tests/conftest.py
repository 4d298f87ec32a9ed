import time

import pytest

from dualpinhole.config import SetupConfig
from dualpinhole.propagation import run_pipeline
from dualpinhole import wavepacket as wp

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def config():
    return SetupConfig()


@pytest.fixture(scope="session")
def pipeline(config):
    """Memoized ``run_pipeline(config, variant, dims, pinholes=...)`` for the default config."""
    cache = {}

    def run(variant, dims=1, pinholes=None, wires=None):
        key = (variant, dims, pinholes, wires)
        if key not in cache:
            cache[key] = run_pipeline(config, variant, dims, pinholes=pinholes, wires=wires)
        return cache[key]

    return run


@pytest.fixture(scope="session")
def scenarios():
    """Default 512^2 hit / graze / miss trajectories, computed once per session.

    Wall-clock seconds per scenario are kept in ``get.seconds``.
    """
    cache = {}

    def get(name):
        if name not in cache:
            t0 = time.perf_counter()
            cache[name] = wp.run_scenario(name)
            get.seconds[name] = time.perf_counter() - t0
        return cache[name]

    get.seconds = {}
    return get


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
