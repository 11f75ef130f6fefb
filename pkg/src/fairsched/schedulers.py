"""Scheduling policies for the single-machine engine.

Every policy follows the engine's scheduler protocol. Allocations are
recomputed lazily when the engine asks for them; ties are always broken by
(release, id).

    ps, dps      processor sharing, equal or weight-proportional
    fifo         serial in release order
    srpt, srpte  shortest remaining processing time on true / estimated sizes
    fsp          serial in the completion order of a virtual PS
    psbs         serial in the completion order of a virtual DPS, with late
                 jobs sharing the machine by weight
    pri:<ref>    offline: serial in the completion order of <ref> on the
                 same workload
"""

from __future__ import annotations

import heapq
from typing import Callable, Optional, Sequence

from . import engine
from .errors import ContractViolation, UnknownPolicy
from .virtualtime import VirtualClock
from .workload import JobSpec, Workload


class Policy:
    name = "policy"

    def notify_arrival(self, job: JobSpec, t: float) -> None:
        raise NotImplementedError

    def notify_real_completion(self, job_id: int, t: float) -> None:
        raise NotImplementedError

    def allocation(self, t: float) -> dict[int, float]:
        raise NotImplementedError

    def next_internal_event(self, t: float) -> Optional[float]:
        return None

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class PS(Policy):
    name = "ps"

    def __init__(self):
        self.pending: dict[int, None] = {}
        self._alloc: Optional[dict[int, float]] = None

    def notify_arrival(self, job, t):
        self.pending[job.id] = None
        self._alloc = None

    def notify_real_completion(self, job_id, t):
        del self.pending[job_id]
        self._alloc = None

    def allocation(self, t):
        if self._alloc is None:
            share = 1.0 / len(self.pending) if self.pending else 0.0
            self._alloc = dict.fromkeys(self.pending, share)
        return self._alloc


class DPS(Policy):
    name = "dps"

    def __init__(self):
        self.weights: dict[int, float] = {}
        self._alloc: Optional[dict[int, float]] = None

    def notify_arrival(self, job, t):
        self.weights[job.id] = job.weight
        self._alloc = None

    def notify_real_completion(self, job_id, t):
        del self.weights[job_id]
        self._alloc = None

    def allocation(self, t):
        if self._alloc is None:
            self._alloc = _share_by_weight(self.weights)
        return self._alloc


def _share_by_weight(weights: dict[int, float]) -> dict[int, float]:
    total = sum(weights.values())
    return {i: w / total for i, w in weights.items()}


class _SerialPolicy(Policy):
    """Whole machine to the pending job with the smallest heap key."""

    def __init__(self):
        self.heap: list[tuple] = []
        self.pending: set[int] = set()

    def _push(self, key: tuple) -> None:
        heapq.heappush(self.heap, key)

    def _head(self) -> Optional[int]:
        heap = self.heap
        while heap and heap[0][-1] not in self.pending:
            heapq.heappop(heap)
        return heap[0][-1] if heap else None

    def notify_real_completion(self, job_id, t):
        self.pending.discard(job_id)

    def allocation(self, t):
        head = self._head()
        return {} if head is None else {head: 1.0}


class FIFO(_SerialPolicy):
    name = "fifo"

    def notify_arrival(self, job, t):
        self.pending.add(job.id)
        self._push((job.release, job.id))


class Pri(_SerialPolicy):
    """Serve the first pending job of a fixed completion sequence."""

    name = "pri"

    def __init__(self, sequence: Sequence[int], name: str = "pri"):
        super().__init__()
        self.position = {job_id: k for k, job_id in enumerate(sequence)}
        if len(self.position) != len(sequence):
            raise ContractViolation("completion sequence repeats a job id")
        self.name = name

    def notify_arrival(self, job, t):
        try:
            pos = self.position[job.id]
        except KeyError:
            raise ContractViolation(f"job {job.id} missing from the completion sequence") from None
        self.pending.add(job.id)
        self._push((pos, job.id))


class SRPT(Policy):
    """Shortest remaining processing time.

    With ``use_estimates`` the remaining time is ``estimate - attained`` and
    may go negative for underestimated jobs; such a job keeps the machine
    until it really completes.
    """

    def __init__(self, use_estimates: bool = False):
        self.use_estimates = use_estimates
        self.name = "srpte" if use_estimates else "srpt"
        self.heap: list[tuple[float, float, int]] = []
        self.pending: set[int] = set()
        self.running: Optional[tuple[float, float, int]] = None
        self.since = 0.0

    def _charge(self, t: float) -> None:
        if self.running is not None:
            remaining, release, job_id = self.running
            self.running = (remaining - (t - self.since), release, job_id)
        self.since = t

    def notify_arrival(self, job, t):
        self._charge(t)
        self.pending.add(job.id)
        size = job.estimate if self.use_estimates else job.size
        heapq.heappush(self.heap, (size, job.release, job.id))

    def notify_real_completion(self, job_id, t):
        self._charge(t)
        self.pending.discard(job_id)
        if self.running is not None and self.running[2] == job_id:
            self.running = None

    def allocation(self, t):
        self._charge(t)
        heap = self.heap
        while heap and heap[0][2] not in self.pending:
            heapq.heappop(heap)
        if heap and (self.running is None or heap[0] < self.running):
            if self.running is not None:
                heapq.heappush(heap, self.running)
            self.running = heapq.heappop(heap)
        return {} if self.running is None else {self.running[2]: 1.0}


class FSP(_SerialPolicy):
    """Serial service in the order jobs finish in a virtual PS on estimates.

    Late jobs (virtually done, really pending) get no special treatment: they
    keep their place in tag order.
    """

    name = "fsp"

    def __init__(self):
        super().__init__()
        self.clock = VirtualClock()

    def notify_arrival(self, job, t):
        self.clock.advance_to(t)
        tag = self.clock.on_arrival(t, job.id, job.estimate, 1.0)
        self.pending.add(job.id)
        self._push((tag, job.release, job.id))


class PSBS(_SerialPolicy):
    """Serial service in virtual-DPS completion order; late jobs share.

    The virtual DPS runs on estimates and weights and only sees arrivals, so
    jobs that really completed keep occupying it until their tags pass. A job
    is late while its tag has been reached but it is still really pending;
    whenever late jobs exist they split the machine in proportion to their
    weights.
    """

    name = "psbs"

    def __init__(self):
        super().__init__()
        self.clock = VirtualClock()
        self.weights: dict[int, float] = {}
        self.late: dict[int, float] = {}
        self.late_count = 0  # jobs that were ever late
        self._late_alloc: Optional[dict[int, float]] = None

    def _sync(self, t: float) -> None:
        for done in self.clock.advance_to(t):
            if done.job_id in self.pending:
                self.late[done.job_id] = self.weights[done.job_id]
                self.late_count += 1
                self._late_alloc = None

    def notify_arrival(self, job, t):
        self._sync(t)
        tag = self.clock.on_arrival(t, job.id, job.estimate, job.weight)
        self.pending.add(job.id)
        self.weights[job.id] = job.weight
        self._push((tag, job.release, job.id))

    def notify_real_completion(self, job_id, t):
        self.pending.discard(job_id)
        del self.weights[job_id]
        if self.late.pop(job_id, None) is not None:
            self._late_alloc = None
        self._sync(t)

    def allocation(self, t):
        self._sync(t)
        if self.late:
            if self._late_alloc is None:
                self._late_alloc = _share_by_weight(self.late)
            return self._late_alloc
        return super().allocation(t)

    def next_internal_event(self, t):
        upcoming = self.clock.next_virtual_completion(t)
        return None if upcoming is None else upcoming.time


POLICIES: dict[str, Callable[[], Policy]] = {
    "ps": PS,
    "dps": DPS,
    "fifo": FIFO,
    "srpt": lambda: SRPT(use_estimates=False),
    "srpte": lambda: SRPT(use_estimates=True),
    "fsp": FSP,
    "psbs": PSBS,
}


def ps_policy() -> PS:
    return PS()


def dps_policy() -> DPS:
    return DPS()


def fifo_policy() -> FIFO:
    return FIFO()


def srpt_policy(use_estimates: bool = False) -> SRPT:
    return SRPT(use_estimates)


def fsp_policy() -> FSP:
    return FSP()


def psbs_policy() -> PSBS:
    return PSBS()


def pri_completion_sequence(workload: Workload, reference: Policy) -> list[int]:
    """Job ids in order of completion under ``reference`` (ties by id)."""
    return engine.run(workload, reference).completion_sequence


def pri_policy(sequence: Sequence[int], name: str = "pri") -> Pri:
    return Pri(sequence, name)


def is_registered(name: str) -> bool:
    if name.startswith("pri:"):
        return is_registered(name[4:])
    return name in POLICIES


def registered_names() -> list[str]:
    return list(POLICIES) + ["pri:<reference>"]


def policy_factory(name: str, workload: Optional[Workload] = None) -> Callable[[], Policy]:
    """Zero-argument constructor for the named policy.

    ``pri:<ref>`` simulates ``<ref>`` on ``workload`` once, up front.
    """
    if name.startswith("pri:"):
        if workload is None:
            raise ContractViolation("pri policies need the workload to derive their sequence")
        reference = make_policy(name[4:], workload)
        sequence = pri_completion_sequence(workload, reference)
        return lambda: Pri(sequence, name)
    try:
        return POLICIES[name]
    except KeyError:
        raise UnknownPolicy(
            f"unknown policy {name!r}; registered: {', '.join(registered_names())}"
        ) from None


def make_policy(name: str, workload: Optional[Workload] = None) -> Policy:
    return policy_factory(name, workload)()
