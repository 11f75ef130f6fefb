"""Event-driven fluid simulation of one preemptive unit-rate machine.

Between two events the scheduler's allocation is constant, so the work each
job receives is integrated exactly; events are job releases, job completions
and scheduler-internal instants (e.g. a job going late in PSBS).
"""

from __future__ import annotations

import csv
import math
import random
import time
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Optional, Protocol, TextIO

from .errors import MissingEventLog, NonProgressError, PolicyViolation
from .workload import JobSpec, Workload

EPS = 1e-9
# Remaining work at or below this is treated as done.
WORK_EPS = 1e-12
MAX_STALLED_STEPS = 10_000

AllocationVector = Mapping[int, float]


class Scheduler(Protocol):
    """What the engine (and the oracle) need from a policy.

    ``allocation`` may only change at instants where the scheduler is told
    about an event or at the instant returned by ``next_internal_event``.
    """

    def notify_arrival(self, job: JobSpec, t: float) -> None: ...

    def notify_real_completion(self, job_id: int, t: float) -> None: ...

    def allocation(self, t: float) -> AllocationVector: ...

    def next_internal_event(self, t: float) -> Optional[float]: ...


class CompletionRecord(NamedTuple):
    job_id: int
    completion: float
    sojourn: float


class Event(NamedTuple):
    time: float
    kind: str  # "arrival", "completion" or "internal"
    job_id: Optional[int]
    allocation: dict


@dataclass
class SimulationResult:
    records: dict[int, CompletionRecord]
    completion_sequence: list[int]
    event_count: int = 0
    wall_time: float = 0.0
    service: dict[int, float] = field(default_factory=dict)
    events: Optional[list[Event]] = None
    policy: str = ""

    def __len__(self):
        return len(self.records)

    def completion(self, job_id: int) -> float:
        return self.records[job_id].completion

    def completions(self) -> dict[int, float]:
        return {i: r.completion for i, r in self.records.items()}

    @classmethod
    def from_completions(cls, workload: Workload, completions: Mapping[int, float], **kw):
        records = {
            j.id: CompletionRecord(j.id, completions[j.id], completions[j.id] - j.release)
            for j in workload
        }
        sequence = sorted(records, key=lambda i: (records[i].completion, i))
        return cls(records, sequence, **kw)


def check_allocation(alloc: AllocationVector, pending, t: float, work_conserving: bool) -> float:
    total = 0.0
    for job_id, frac in alloc.items():
        if job_id not in pending:
            raise PolicyViolation(f"allocation names job {job_id}, which is not pending", t)
        if not 0.0 <= frac <= 1.0 + EPS:
            raise PolicyViolation(f"fraction {frac!r} for job {job_id} outside [0, 1]", t)
        total += frac
    if total > 1.0 + EPS:
        raise PolicyViolation(f"allocation sums to {total!r} > 1", t)
    if work_conserving and pending and total < 1.0 - EPS:
        raise NonProgressError(
            f"allocation sums to {total!r} with {len(pending)} pending jobs", t
        )
    return total


def run(
    workload: Workload,
    scheduler: Scheduler,
    *,
    log_events: bool = False,
    work_conserving: bool = True,
    tie_rng: Optional[random.Random] = None,
) -> SimulationResult:
    """Simulate ``workload`` under ``scheduler`` until every job completes.

    Events at the same instant are processed completions first, then
    arrivals; ``tie_rng`` shuffles the order within each group, which must
    not change any completion time.
    """
    started = time.perf_counter()
    jobs = workload.jobs
    n = len(jobs)
    remaining: dict[int, float] = {}
    service: dict[int, float] = {}
    completions: dict[int, float] = {}
    log: Optional[list[Event]] = [] if log_events else None

    i = 0
    t = jobs[0].release if n else 0.0
    completing: list[int] = []
    internal_fired = False
    event_count = 0
    stalled = 0

    while True:
        if tie_rng is not None:
            tie_rng.shuffle(completing)
        for job_id in completing:
            del remaining[job_id]
            completions[job_id] = t
            scheduler.notify_real_completion(job_id, t)
        arriving = []
        while i < n and jobs[i].release <= t + EPS:
            arriving.append(jobs[i])
            i += 1
        if tie_rng is not None:
            tie_rng.shuffle(arriving)
        for job in arriving:
            remaining[job.id] = job.size
            service[job.id] = 0.0
            scheduler.notify_arrival(job, t)
        event_count += len(completing) + len(arriving) + internal_fired

        if not remaining:
            if log is not None:
                _log_step(log, t, completing, arriving, internal_fired, {})
            if i >= n:
                break
            t = jobs[i].release
            completing, internal_fired = [], False
            continue

        alloc = scheduler.allocation(t)
        check_allocation(alloc, remaining, t, work_conserving)
        if log is not None:
            _log_step(log, t, completing, arriving, internal_fired, dict(alloc))

        next_arrival = jobs[i].release if i < n else math.inf
        internal = scheduler.next_internal_event(t)
        next_internal = math.inf if internal is None else max(internal, t)
        finish = {}
        for job_id, frac in alloc.items():
            if frac > 0:
                finish[job_id] = t + remaining[job_id] / frac
        next_finish = min(finish.values(), default=math.inf)
        t_next = min(next_arrival, next_internal, next_finish)
        if t_next == math.inf:
            raise NonProgressError(f"{len(remaining)} jobs pending but nothing is served", t)

        dt = t_next - t
        progressed = bool(completing or arriving) or dt > 0
        completing = []
        for job_id, frac in alloc.items():
            if frac <= 0:
                continue
            work = frac * dt
            service[job_id] += work
            if finish[job_id] <= t_next + EPS or remaining[job_id] - work <= WORK_EPS:
                completing.append(job_id)
            else:
                remaining[job_id] -= work
        internal_fired = next_internal <= t_next and not completing and next_arrival > t_next
        stalled = 0 if progressed else stalled + 1
        if stalled > MAX_STALLED_STEPS:
            raise NonProgressError("scheduler keeps requesting events without progress", t)
        t = t_next

    records = {
        j.id: CompletionRecord(j.id, completions[j.id], completions[j.id] - j.release)
        for j in jobs
    }
    sequence = sorted(records, key=lambda k: (records[k].completion, k))
    return SimulationResult(
        records,
        sequence,
        event_count=event_count,
        wall_time=time.perf_counter() - started,
        service=service,
        events=log,
        policy=getattr(scheduler, "name", type(scheduler).__name__),
    )


def _log_step(log, t, completing, arriving, internal_fired, snapshot):
    for job_id in completing:
        log.append(Event(t, "completion", job_id, snapshot))
    for job in arriving:
        log.append(Event(t, "arrival", job.id, snapshot))
    if internal_fired:
        log.append(Event(t, "internal", None, snapshot))


def replay_events(result: SimulationResult) -> list[Event]:
    if result.events is None:
        raise MissingEventLog("result was produced without log_events=True")
    return list(result.events)


def write_event_log(result: SimulationResult, sink: TextIO) -> None:
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(("time", "kind", "job_id"))
    for ev in replay_events(result):
        writer.writerow((format(ev.time, ".17g"), ev.kind, "" if ev.job_id is None else ev.job_id))
