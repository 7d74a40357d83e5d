import time
from dataclasses import dataclass

import pytest

from otto3.engine import Engine, EngineResult, FixedCycles
from otto3.explore import PrepFamily, random_scan

from helpers import optimized_params


@dataclass(frozen=True)
class TimedRun:
    result: EngineResult
    seconds: float


def _timed(params, **kwargs):
    t0 = time.perf_counter()
    result = Engine(params).run(**kwargs)
    return TimedRun(result, time.perf_counter() - t0)


@pytest.fixture(scope="session")
def optimized_run():
    """Open-ended run at the pinned operating point, stops on its own."""
    return _timed(optimized_params())


@pytest.fixture(scope="session")
def fixed140_run():
    """Same point driven for 140 cycles, through the work-positive regime."""
    return _timed(optimized_params(stop=FixedCycles(140)))


@pytest.fixture(scope="session")
def twin140_run():
    """140 cycles with the cold contact removed entirely."""
    return _timed(optimized_params(stop=FixedCycles(140), alpha23=0.0))


@pytest.fixture(scope="session")
def thermal_scan_10k():
    return random_scan(10_000, 12345, family=PrepFamily.THERMAL, beta1=0.01)


@pytest.fixture(scope="session")
def squeezed_scan_10k():
    return random_scan(10_000, 12345, family=PrepFamily.SQUEEZED, beta1=0.01)
