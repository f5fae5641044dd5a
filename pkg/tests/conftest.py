import time
from importlib import resources

import pytest

import elevform as ef


def scenario_path(name):
    return str(resources.files("elevform") / "scenarios" / f"{name}.cfg")


@pytest.fixture(scope="session")
def tetrahedron_scenario():
    return ef.load_scenario(scenario_path("tetrahedron"))


@pytest.fixture(scope="session")
def hexagon_scenario():
    return ef.load_scenario(scenario_path("hexagon"))


@pytest.fixture(scope="session")
def tetrahedron_run(tetrahedron_scenario):
    """Full tetrahedron run with its wall-clock time, shared across tests."""
    t0 = time.perf_counter()
    log = ef.run(tetrahedron_scenario)
    elapsed = time.perf_counter() - t0
    return log, elapsed


@pytest.fixture(scope="session")
def hexagon_run(hexagon_scenario):
    t0 = time.perf_counter()
    log = ef.run(hexagon_scenario)
    elapsed = time.perf_counter() - t0
    return log, elapsed
