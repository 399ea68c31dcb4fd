import math
from dataclasses import replace

import pytest
from hypothesis import settings

from slowlight.config import parse_config, preset_fig1
from slowlight.physics import PhysicalParams
from slowlight.pulses import PulseEnvelope
from slowlight.report import simulate
from slowlight.solver import ControlStep, EventSchedule, RfEvent, SimGrid

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def fig1_config():
    return parse_config(preset_fig1())


@pytest.fixture(scope="session")
def fig1_run(fig1_config):
    return simulate(fig1_config)


@pytest.fixture(scope="session")
def fig1_pi_run(fig1_config):
    """Same protocol with a pi-area (area pi/2) retrieval pulse."""
    s = fig1_config.schedule
    ev = replace(s.rf_events[1], area=math.pi / 2)
    return simulate(replace(fig1_config, schedule=replace(s, rf_events=(s.rf_events[0], ev))))


# Short scenario for unit tests: FWHM 100 pulse through a 2-unit sample.
SMALL_PARAMS = PhysicalParams(h=0.0)
SMALL_PULSE = PulseEnvelope("gaussian", 0.05, 300.0, 100.0)
SMALL_GRID = SimGrid(2.0, 0.01, 0.0, 800.0, 0.025, save_dz=0.1, save_dtau=0.25)


@pytest.fixture
def small():
    return SMALL_PARAMS, SMALL_PULSE, SMALL_GRID


def step_schedule(t1=160.0, h=math.sqrt(2) - 1, rf=()):
    return EventSchedule(ControlStep(t1, h), tuple(RfEvent(*e) for e in rf))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
