import json
from pathlib import Path

import numpy as np
import pytest

from rmt_lab.montecarlo import MonteCarloConfig

ORACLES = json.loads((Path(__file__).with_name("data") / "oracles.json").read_text())

ACCEPTANCE_LINES = []  # (criterion number, result line)


@pytest.fixture(scope="session")
def oracles():
    return ORACLES


@pytest.fixture
def cfg():
    def make(n_samples, seed=7, workers=1):
        return MonteCarloConfig(n_samples, seed, workers)

    return make


def random_hermitian(rng, n, field="real"):
    a = rng.standard_normal((n, n))
    if field == "complex":
        a = a + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / 2


def e1(n):
    v = np.zeros(n)
    v[0] = 1.0
    return v


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
