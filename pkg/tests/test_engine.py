import io
import random

import pytest
from hypothesis import given, settings

from fairsched import engine
from fairsched.engine import replay_events, run, write_event_log
from fairsched.errors import MissingEventLog, NonProgressError, PolicyViolation
from fairsched.schedulers import POLICIES, PS, make_policy

from conftest import make_workload, random_instance, workloads

ALL = sorted(POLICIES) + ["pri:ps", "pri:dps", "pri:fifo"]


@pytest.mark.parametrize("name", ALL)
def test_single_job(name):
    w = make_workload((0, 0, 3))
    assert run(w, make_policy(name, w)).completion(0) == 3.0


def test_ps_symmetric_pair():
    w = make_workload((0, 0, 2), (1, 0, 2))
    res = run(w, PS(), log_events=True)
    assert res.completions() == {0: 4.0, 1: 4.0}
    for ev in replay_events(res):
        if ev.kind == "arrival":
            assert ev.allocation == {0: 0.5, 1: 0.5}


def test_ps_staggered(two_jobs):
    # fluid oracle at dt=1e-4 gives C_B=3, C_A=5 (see test_oracle)
    res = run(two_jobs, PS())
    assert res.completions() == {0: 5.0, 1: 3.0}
    assert res.completion_sequence == [1, 0]


def test_empty_workload():
    res = run(make_workload(), PS(), log_events=True)
    assert res.records == {} and replay_events(res) == []


def test_event_log_single_job():
    res = run(make_workload((0, 1.5, 2)), PS(), log_events=True)
    assert [(e.time, e.kind, e.job_id) for e in replay_events(res)] == [
        (1.5, "arrival", 0),
        (3.5, "completion", 0),
    ]


def test_event_log_pair():
    res = run(make_workload((0, 0, 2), (1, 0, 2)), PS(), log_events=True)
    kinds = [(e.time, e.kind) for e in replay_events(res)]
    assert kinds == [(0, "arrival"), (0, "arrival"), (4, "completion"), (4, "completion")]
    buf = io.StringIO()
    write_event_log(res, buf)
    assert buf.getvalue().splitlines()[0] == "time,kind,job_id"
    assert len(buf.getvalue().splitlines()) == 5


def test_event_log_needs_logging():
    with pytest.raises(MissingEventLog):
        replay_events(run(make_workload((0, 0, 1)), PS()))


def test_internal_events_are_logged(blocking_jobs):
    res = run(blocking_jobs, make_policy("psbs"), log_events=True)
    assert any(e.kind == "internal" for e in replay_events(res))


def test_idle_gap():
    w = make_workload((0, 0, 1), (1, 5, 1))
    assert run(w, PS()).completions() == {0: 1.0, 1: 6.0}


class Greedy(PS):
    def allocation(self, t):
        return dict.fromkeys(self.pending, 1.0)


class Lazy(PS):
    def allocation(self, t):
        return {}


class Ghost(PS):
    def allocation(self, t):
        return {99: 1.0}


class Negative(PS):
    def allocation(self, t):
        return {k: -0.5 for k in self.pending}


class Stuck(PS):
    def next_internal_event(self, t):
        return t


@pytest.mark.parametrize("policy", [Greedy, Ghost, Negative])
def test_policy_violation(policy):
    w = make_workload((0, 0, 1), (1, 0.5, 1))
    with pytest.raises(PolicyViolation) as err:
        run(w, policy())
    assert err.value.time is not None


def test_idle_while_pending_is_detected():
    with pytest.raises(NonProgressError):
        run(make_workload((0, 0, 1)), Lazy())
    with pytest.raises(NonProgressError):
        run(make_workload((0, 0, 1)), Lazy(), work_conserving=False)


def test_internal_event_loop_is_detected():
    with pytest.raises(NonProgressError):
        run(make_workload((0, 0, 1)), Stuck())


class Recorder:
    """Wraps a policy and checks work conservation at every allocation query."""

    def __init__(self, inner):
        self.inner = inner
        self.pending = set()
        self.queries = 0

    def notify_arrival(self, job, t):
        self.pending.add(job.id)
        self.inner.notify_arrival(job, t)

    def notify_real_completion(self, job_id, t):
        self.pending.discard(job_id)
        self.inner.notify_real_completion(job_id, t)

    def allocation(self, t):
        alloc = self.inner.allocation(t)
        self.queries += 1
        if self.pending:
            assert sum(alloc.values()) == pytest.approx(1.0, abs=1e-9)
        return alloc

    def next_internal_event(self, t):
        return self.inner.next_internal_event(t)


@pytest.mark.parametrize("name", ALL)
@pytest.mark.parametrize("seed", range(8))
def test_work_conserving_and_work_conserved(name, seed):
    w = random_instance(seed, sigma=1.0)
    rec = Recorder(make_policy(name, w))
    res = run(w, rec)
    assert rec.queries > 0
    for job in w:
        assert res.service[job.id] == pytest.approx(job.size, rel=1e-6)
        assert res.records[job.id].sojourn > 0
        assert res.records[job.id].completion >= job.release


@settings(max_examples=40, deadline=None)
@given(workloads(max_jobs=8, exact=False))
def test_tie_order_invariance(w):
    # coarse grids in the strategy produce many simultaneous events
    for name in ALL:
        base = run(w, make_policy(name, w)).completions()
        for s in range(3):
            shuffled = run(w, make_policy(name, w), tie_rng=random.Random(s)).completions()
            for job_id, c in base.items():
                assert shuffled[job_id] == pytest.approx(c, abs=1e-9)


def test_completion_sequence_ties_by_id():
    w = make_workload((3, 0, 2), (1, 0, 2), (2, 0, 2))
    assert run(w, PS()).completion_sequence == [1, 2, 3]


def test_result_metadata(two_jobs):
    res = run(two_jobs, make_policy("fsp"))
    assert res.policy == "fsp"
    assert res.event_count == 4
    assert res.wall_time >= 0
    assert isinstance(res.records[0], engine.CompletionRecord)
