import pytest

from fairsched import engine
from fairsched.errors import OracleDivergence, ParameterError
from fairsched.oracle import OracleConfig, step_simulate
from fairsched.schedulers import PS, SRPT, policy_factory

from conftest import make_workload, random_instance

POLICIES = ["ps", "dps", "fifo", "srpt", "srpte", "fsp", "psbs", "pri:ps", "pri:dps"]


def test_single_job():
    res = step_simulate(make_workload((0, 0, 3)), PS)
    assert res.completion(0) == pytest.approx(3.0, abs=1e-4)


def test_symmetric_pair():
    res = step_simulate(make_workload((0, 0, 2), (1, 0, 2)), PS)
    assert res.completion(0) == pytest.approx(4.0, abs=2e-4)
    assert res.completion(1) == pytest.approx(4.0, abs=2e-4)


def test_ps_staggered(two_jobs):
    res = step_simulate(two_jobs, PS)
    assert res.completion(1) == pytest.approx(3.0, abs=1e-3)
    assert res.completion(0) == pytest.approx(5.0, abs=1e-3)


def test_srpte_blocking(blocking_jobs):
    res = step_simulate(blocking_jobs, lambda: SRPT(True))
    assert res.completions() == pytest.approx({0: 10.0, 1: 11.0}, abs=1e-3)


def test_psbs_late_sharing():
    w = make_workload((0, 0, 10, 1), (1, 0.5, 1, 1))
    res = step_simulate(w, policy_factory("psbs"))
    assert res.completions() == pytest.approx({0: 11.0, 1: 4.0}, abs=1e-3)


def test_horizon():
    with pytest.raises(OracleDivergence):
        step_simulate(make_workload((0, 0, 3)), PS, OracleConfig(max_time=1.0))


def test_bad_dt():
    with pytest.raises(ParameterError):
        OracleConfig(dt=0)


def test_empty():
    assert step_simulate(make_workload(), PS).records == {}


@pytest.mark.parametrize("name", POLICIES)
@pytest.mark.parametrize("seed", range(6))
def test_agrees_with_engine(name, seed):
    w = random_instance(seed, max_jobs=15, sigma=1.0, horizon=3.0)
    dt = 1e-4
    expected = engine.run(w, policy_factory(name, w)()).completions()
    got = step_simulate(w, policy_factory(name, w), OracleConfig(dt=dt)).completions()
    for job_id, c in expected.items():
        assert got[job_id] == pytest.approx(c, abs=max(10 * dt, 1e-9))


def test_oracle_never_early():
    # releases are only seen at grid points, so the oracle can only lag
    w = random_instance(3, max_jobs=10, horizon=3.0)
    exact = engine.run(w, policy_factory("fifo")()).completions()
    got = step_simulate(w, policy_factory("fifo"), OracleConfig(dt=1e-3)).completions()
    assert all(got[i] >= exact[i] - 1e-12 for i in exact)
