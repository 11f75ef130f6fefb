"""Brute-force fixed-step fluid simulation, used to check the engine.

Time moves in fixed steps of ``dt``. The policy is asked for its allocation at
every grid point, even when nothing happened, and the allocation is applied
for the whole step. A release that finds jobs in the system takes effect at
the next grid point, which is the source of the oracle's first-order error. A
release that finds the machine idle restarts the grid at that instant, so the
lag does not pile up across busy periods. A job whose work
runs out inside a step completes at the interpolated instant, and the rest of
the step is served with a fresh allocation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .engine import Scheduler, SimulationResult
from .errors import OracleDivergence, ParameterError
from .workload import Workload

# Remaining work at or below this counts as done.
WORK_EPS = 1e-12


@dataclass(frozen=True)
class OracleConfig:
    dt: float = 1e-4
    # None: last release + total work + 1, which no work-conserving policy exceeds
    max_time: Optional[float] = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ParameterError("dt must be > 0")


def step_simulate(
    workload: Workload,
    scheduler_factory: Callable[[], Scheduler],
    config: OracleConfig = OracleConfig(),
) -> SimulationResult:
    jobs = workload.jobs
    n = len(jobs)
    dt = config.dt
    horizon = config.max_time
    if horizon is None:
        horizon = (jobs[-1].release if n else 0.0) + sum(j.size for j in jobs) + 1.0
    scheduler = scheduler_factory()

    remaining: dict[int, float] = {}
    completions: dict[int, float] = {}
    clock = 0.0  # latest instant reported to the scheduler
    i = 0
    anchor = 0.0
    k = 0
    while len(completions) < n:
        t = anchor + k * dt
        if t > horizon:
            raise OracleDivergence(
                f"{n - len(completions)} jobs unfinished at horizon {horizon!r}"
            )
        while i < n and jobs[i].release <= t:
            if jobs[i].release > clock:
                clock = jobs[i].release
            remaining[jobs[i].id] = jobs[i].size
            scheduler.notify_arrival(jobs[i], clock)
            i += 1
        if not remaining:
            anchor, k = jobs[i].release, 0
            continue

        t_end = anchor + (k + 1) * dt
        now = t
        while remaining and now < t_end:
            if now > clock:
                clock = now
            alloc = scheduler.allocation(clock)
            span = t_end - now
            first = span
            for job_id, frac in alloc.items():
                if frac > 0 and remaining[job_id] < frac * first:
                    first = remaining[job_id] / frac
            for job_id, frac in alloc.items():
                remaining[job_id] -= frac * first
            if first == span:
                break
            now += first
            done = sorted(j for j, f in alloc.items() if f > 0 and remaining[j] <= WORK_EPS)
            for job_id in done:
                del remaining[job_id]
                completions[job_id] = now
                if now > clock:
                    clock = now
                scheduler.notify_real_completion(job_id, clock)
            if not done:
                break
        k += 1

    return SimulationResult.from_completions(
        workload, completions, policy=getattr(scheduler, "name", "")
    )
