import math
from pathlib import Path

import numpy as np
import pytest

from transfer_sl import BoundaryAngles, Problem, spectrum
from transfer_sl import propagation

HALF_PI = math.pi / 2
FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

# Every propagation made by the suite is audited for determinant drift.
# Entries: (kind, drift, floor). See the Wronskian criterion in test_acceptance.
WRONSKIAN_LOG = []


def _record(kind, drift, floor):
    WRONSKIAN_LOG.append((kind, drift, floor))


propagation.add_observer(_record)

WRONSKIAN_TOL = 1e-10


def wronskian_summary():
    """(n_total, n_resolvable, worst_resolvable, n_floor_limited, floor_violations, worst_overall)."""
    log = np.array([(d, f) for _, d, f in WRONSKIAN_LOG]) if WRONSKIAN_LOG else np.zeros((0, 2))
    if log.size == 0:
        return 0, 0, 0.0, 0, 0, 0.0
    drift, floor = log[:, 0], log[:, 1]
    resolvable = floor < WRONSKIAN_TOL
    worst = float(drift[resolvable].max()) if np.any(resolvable) else 0.0
    bad_floor = int(np.count_nonzero(drift[~resolvable] > floor[~resolvable]))
    return len(log), int(resolvable.sum()), worst, int((~resolvable).sum()), bad_floor, float(drift.max())


def pytest_sessionfinish(session, exitstatus):
    n, n_res, worst, n_floor, bad, worst_all = wronskian_summary()
    if n == 0:
        return
    msg = (
        f"\nWronskian audit: {n} propagations; {n_res} resolvable in float64, worst drift {worst:.2e}; "
        f"{n_floor} beyond float64 resolution (lam << 0), {bad} above their rounding floor; "
        f"worst drift overall {worst_all:.2e}"
    )
    print(msg)
    if worst > WRONSKIAN_TOL or bad:
        session.exitstatus = 1


def bump(x):
    return 3 * np.exp(-((x - 0.3) ** 2) / 0.1)


def symmetric_bump(x):
    return 2 * np.exp(-(x**2) / 0.2)


def well(x):
    return -4 * np.exp(-(x**2) / 0.3)


def make_problems():
    return {
        "identity": Problem.free(HALF_PI),
        "diag": Problem.free(HALF_PI, np.diag([2.0, 0.5])),
        "shear": Problem.free(HALF_PI, [[1.0, 1.0], [0.0, 1.0]]),
        "bump": Problem.from_function(HALF_PI, bump, np.diag([2.0, 0.5])),
    }


PROBLEM_NAMES = ["identity", "diag", "shear", "bump"]


@pytest.fixture(scope="session")
def problems():
    return make_problems()


@pytest.fixture(scope="session")
def free():
    return Problem.free(HALF_PI)


@pytest.fixture(scope="session")
def diag():
    return Problem.free(HALF_PI, np.diag([2.0, 0.5]))


@pytest.fixture(scope="session")
def shear():
    return Problem.free(HALF_PI, [[1.0, 1.0], [0.0, 1.0]])


@pytest.fixture(scope="session")
def bump_problem():
    return Problem.from_function(HALF_PI, bump, np.diag([2.0, 0.5]))


@pytest.fixture(scope="session")
def symmetric_problem():
    return Problem.from_function(HALF_PI, symmetric_bump)


@pytest.fixture(scope="session")
def well_problem():
    return Problem.from_function(HALF_PI, well)


DIRICHLET = BoundaryAngles(0.0, math.pi)
NEUMANN_LEFT_DIRICHLET_RIGHT = BoundaryAngles(HALF_PI, math.pi)


class SpectrumCache:
    """Large spectra are expensive (bump: ~20 s at N=2000); compute each once per session."""

    def __init__(self, problems):
        self.problems = problems
        self._cache = {}

    def get(self, name, angles, n, norming=False):
        key = (name, angles.alpha, angles.beta, n, norming)
        if key not in self._cache:
            # reuse a normed entry for un-normed requests
            alt = (name, angles.alpha, angles.beta, n, True)
            if not norming and alt in self._cache:
                return self._cache[alt]
            self._cache[key] = spectrum(self.problems[name], angles, n, norming=norming)
        return self._cache[key]


@pytest.fixture(scope="session")
def spectra(problems):
    return SpectrumCache(problems)
