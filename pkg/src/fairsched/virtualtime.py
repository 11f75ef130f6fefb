"""Weighted virtual time for simulating PS/DPS on (estimated) job sizes.

Virtual time ``v`` advances at rate ``1 / W`` where ``W`` is the total weight
of the jobs still pending in the simulated schedule. A job arriving when the
clock reads ``v`` gets the immutable finish tag ``v + estimate / weight`` and
completes in the simulation exactly when ``v`` reaches its tag, so the order
of simulated completions is the order of the tags.  Each arrival and each
simulated completion is one heap operation.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .errors import ContractViolation

EPS = 1e-9


@dataclass(frozen=True)
class VirtualJob:
    id: int
    finish_tag: float
    weight: float
    release: float


class VirtualCompletion(NamedTuple):
    job_id: int
    time: float


class VirtualClock:
    def __init__(self):
        self.v_now = 0.0
        self.last_real_time = 0.0
        self.active_weight = 0.0
        self.tag_queue: list[tuple[float, float, int]] = []
        self.jobs: dict[int, VirtualJob] = {}
        self._pending: set[int] = set()
        # heap pushes + pops, for complexity measurements
        self.heap_ops = 0

    def __len__(self):
        return len(self.tag_queue)

    def is_virtually_pending(self, job_id: int) -> bool:
        return job_id in self._pending

    def advance_to(self, t: float) -> list[VirtualCompletion]:
        if t < self.last_real_time - EPS:
            raise ContractViolation(
                f"cannot move virtual clock back from {self.last_real_time!r} to {t!r}"
            )
        t = max(t, self.last_real_time)
        done = []
        queue = self.tag_queue
        while queue:
            tag, _, job_id = queue[0]
            reach = self.last_real_time + (tag - self.v_now) * self.active_weight
            if reach > t:
                break
            heapq.heappop(queue)
            self.heap_ops += 1
            self._pending.discard(job_id)
            self.v_now = max(self.v_now, tag)
            self.last_real_time = max(self.last_real_time, reach)
            if queue:
                self.active_weight -= self.jobs[job_id].weight
            else:
                self.active_weight = 0.0  # drop accumulated rounding
            done.append(VirtualCompletion(job_id, self.last_real_time))
        if queue:
            self.v_now += (t - self.last_real_time) / self.active_weight
        self.last_real_time = t
        return done

    def on_arrival(self, t: float, job_id: int, estimate: float, weight: float) -> float:
        if t > self.last_real_time + EPS:
            raise ContractViolation("advance the clock to the arrival instant first")
        if t < self.last_real_time - EPS:
            raise ContractViolation(f"arrival at {t!r} is in the clock's past")
        if job_id in self.jobs:
            raise ContractViolation(f"job {job_id} already added to the virtual clock")
        if not (estimate > 0 and weight > 0):
            raise ContractViolation("estimate and weight must be > 0")
        tag = self.v_now + estimate / weight
        self.jobs[job_id] = VirtualJob(job_id, tag, weight, t)
        heapq.heappush(self.tag_queue, (tag, t, job_id))
        self._pending.add(job_id)
        self.heap_ops += 1
        self.active_weight += weight
        return tag

    def next_virtual_completion(self, now: float) -> VirtualCompletion | None:
        """Real instant of the next simulated completion, absent new arrivals."""
        if not self.tag_queue:
            return None
        tag, _, job_id = self.tag_queue[0]
        return VirtualCompletion(job_id, now + (tag - self.v_now) * self.active_weight)

    def finish_tag(self, job_id: int) -> float:
        try:
            return self.jobs[job_id].finish_tag
        except KeyError:
            raise ContractViolation(f"unknown job {job_id}") from None

    def peek_order(self, pending_ids: Iterable[int]) -> int:
        """Of the given jobs, the one completing first in the simulation."""
        best = None
        for job_id in pending_ids:
            try:
                job = self.jobs[job_id]
            except KeyError:
                raise ContractViolation(f"unknown job {job_id}") from None
            key = (job.finish_tag, job.release, job.id)
            if best is None or key < best:
                best = key
        if best is None:
            raise ContractViolation("peek_order needs at least one job")
        return best[2]
