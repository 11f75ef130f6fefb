import random

import pytest
from hypothesis import strategies as st

from fairsched import JobSpec, Workload

# Acceptance verdict lines, echoed once more in the terminal summary.
VERDICTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[VERDICTS] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance")
        for line in lines:
            terminalreporter.write_line(line)


def make_workload(*rows):
    """Rows are (id, release, size[, estimate[, weight]]); estimate defaults to size."""
    jobs = []
    for row in rows:
        job_id, release, size, *rest = row
        estimate = rest[0] if rest else size
        weight = rest[1] if len(rest) > 1 else 1.0
        jobs.append(JobSpec(job_id, float(release), float(size), float(estimate), float(weight)))
    return Workload(jobs)


def random_instance(seed, max_jobs=25, sigma=0.0, weights=(1.0, 2.0, 3.0, 5.0), horizon=10.0):
    """Small random workload: uniform releases and sizes, weights from ``weights``."""
    rng = random.Random(seed)
    n = rng.randint(1, max_jobs)
    jobs = []
    for i in range(n):
        size = rng.uniform(0.05, 2.0)
        estimate = size * rng.lognormvariate(0.0, sigma) if sigma else size
        jobs.append(JobSpec(i, rng.uniform(0.0, horizon), size, estimate, rng.choice(weights)))
    return Workload(jobs)


@st.composite
def workloads(draw, max_jobs=12, exact=True, weighted=True):
    n = draw(st.integers(1, max_jobs))
    jobs = []
    for i in range(n):
        # coarse grids make simultaneous releases and equal sizes common
        release = draw(st.integers(0, 20)) / 4
        size = draw(st.integers(1, 16)) / 4
        estimate = size if exact else draw(st.integers(1, 16)) / 4
        weight = float(draw(st.sampled_from([1, 2, 3]))) if weighted else 1.0
        jobs.append(JobSpec(i, release, size, estimate, weight))
    return Workload(jobs)


@pytest.fixture
def two_jobs():
    """A(r=0, s=4) and B(r=1, s=1): the running example across policies."""
    return make_workload((0, 0, 4), (1, 1, 1))


@pytest.fixture
def blocking_jobs():
    """A is hugely underestimated and released first."""
    return make_workload((0, 0, 10, 1), (1, 1, 1, 1))
