import math

import hypothesis
import pytest

from apvsim.budget import load_scenario
from apvsim.config import data_path
from apvsim.physics import TWO_PI, crossed_fields
from apvsim.ramsey import ExperimentPlan, NoiseModel, RamseySequence
from apvsim.species import load_species

hypothesis.settings.register_profile("ci", max_examples=200, deadline=None)
hypothesis.settings.load_profile("ci")


@pytest.fixture(scope="session")
def ba138():
    return load_species(data_path("species", "ba138.yaml"))


@pytest.fixture(scope="session")
def ra226():
    return load_species(data_path("species", "ra226.yaml"))


@pytest.fixture(scope="session")
def scenario():
    return load_scenario(data_path("scenarios", "default.yaml"))


@pytest.fixture
def noiseless():
    return NoiseModel(projection_noise=False, decoherence_tau=math.inf, quench_rates={})


def make_plan(species, free_time=0.01, detune_hz=3.0, on_offset=0.0, tpb=100, blocks=20,
              seed=1, zeeman_hz=1e5, **kw):
    e_prime, e_dprime = crossed_fields(species, 2e6, 2e6)
    zeeman = TWO_PI * zeeman_hz
    seq = RamseySequence(free_time, zeeman + TWO_PI * detune_hz, 1.0, on_offset=on_offset)
    return ExperimentPlan(species, e_prime, e_dprime, seq, tpb, blocks, zeeman, seed=seed, **kw)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
