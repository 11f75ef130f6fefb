"""Fair size-based scheduling on one preemptive machine.

Policies (PS, DPS, FIFO, SRPT, FSP, Pri, PSBS), an exact event-driven fluid
engine, a brute-force time-stepped oracle, synthetic Weibull workloads with
log-normal size estimation errors, and metrics for comparing schedules.
"""

from .engine import CompletionRecord, SimulationResult, replay_events, run
from .oracle import OracleConfig, step_simulate
from .schedulers import make_policy, policy_factory, pri_completion_sequence, pri_policy
from .virtualtime import VirtualClock
from .workload import JobSpec, WeightModel, Workload, WorkloadParams, generate, read_trace, write_trace

__all__ = [
    "CompletionRecord",
    "JobSpec",
    "OracleConfig",
    "SimulationResult",
    "VirtualClock",
    "WeightModel",
    "Workload",
    "WorkloadParams",
    "generate",
    "make_policy",
    "policy_factory",
    "pri_completion_sequence",
    "pri_policy",
    "read_trace",
    "replay_events",
    "run",
    "step_simulate",
    "write_trace",
]
