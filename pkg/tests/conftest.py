import numpy as np
import pytest

from polymerlab.weights import DistSpec, WeightModel, assign_weights


@pytest.fixture
def mixed_model():
    return WeightModel.mixed(0.5, seed=11)


@pytest.fixture
def iid_model():
    return WeightModel.iid(DistSpec("lognormal", (0.0, 0.5)), seed=12)


@pytest.fixture
def signed_model():
    """i.i.d. weights of both signs, so path sums cancel."""
    return WeightModel.iid(DistSpec("two-point", (1.5, 0.7)), seed=13)


def lattice(model, n, replica=0):
    return assign_weights(model, n, replica)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


# -- acceptance summary ------------------------------------------------------------------

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_line():
    """Record one summary line per acceptance criterion; printed at the end of the run."""

    def record(label, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
