"""Sojourn statistics, PS normalization, dominance checks and correlation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .engine import SimulationResult
from .errors import ContractViolation, UndefinedMetricError
from .workload import Workload

DOMINANCE_TOL = 1e-9


class Violation(NamedTuple):
    job_id: int
    candidate: float
    reference: float


@dataclass
class MetricsReport:
    mst: float
    makespan: float
    mst_normalized: Optional[float] = None
    sojourns: dict[int, float] = field(default_factory=dict)
    slowdowns: dict[int, float] = field(default_factory=dict)
    dominance_violations: list[Violation] = field(default_factory=list)


def mean_sojourn(result: SimulationResult) -> float:
    if not result.records:
        raise UndefinedMetricError("mean sojourn time of an empty result")
    return math.fsum(r.sojourn for r in result.records.values()) / len(result.records)


def normalized_mst(result: SimulationResult, baseline: SimulationResult) -> float:
    base = mean_sojourn(baseline)
    if base == 0:
        raise UndefinedMetricError("baseline mean sojourn time is zero")
    return mean_sojourn(result) / base


def makespan(result: SimulationResult) -> float:
    if not result.records:
        raise UndefinedMetricError("makespan of an empty result")
    return max(r.completion for r in result.records.values())


def dominance_violations(
    candidate: SimulationResult, reference: SimulationResult, tol: float = DOMINANCE_TOL
) -> list[Violation]:
    """Jobs completing later in ``candidate`` than in ``reference`` by more than ``tol``."""
    if candidate.records.keys() != reference.records.keys():
        raise ContractViolation("results cover different job sets")
    out = []
    for job_id in sorted(candidate.records):
        c = candidate.records[job_id].completion
        r = reference.records[job_id].completion
        if c > r + tol:
            out.append(Violation(job_id, c, r))
    return out


def dominates(candidate: SimulationResult, reference: SimulationResult, tol: float = DOMINANCE_TOL) -> bool:
    return not dominance_violations(candidate, reference, tol)


def pearson_correlation(xs: Sequence[float], ys: Sequence[float]) -> float:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise UndefinedMetricError("correlation needs two equally long samples of size >= 2")
    x = x - x.mean()
    y = y - y.mean()
    denom = math.sqrt(float(x @ x) * float(y @ y))
    if denom == 0:
        raise UndefinedMetricError("correlation of a constant sample")
    return max(-1.0, min(1.0, float(x @ y) / denom))


def log_correlation(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson correlation of the logs; diagnostics for heavy-tailed samples."""
    return pearson_correlation(np.log(xs), np.log(ys))


def size_estimate_correlation(workload: Workload) -> float:
    return pearson_correlation([j.size for j in workload], [j.estimate for j in workload])


def report(
    result: SimulationResult,
    workload: Workload,
    baseline: Optional[SimulationResult] = None,
    tol: float = DOMINANCE_TOL,
) -> MetricsReport:
    sizes = {j.id: j.size for j in workload}
    sojourns = {i: r.sojourn for i, r in result.records.items()}
    rep = MetricsReport(
        mst=mean_sojourn(result),
        makespan=makespan(result),
        sojourns=sojourns,
        slowdowns={i: s / sizes[i] for i, s in sojourns.items()},
    )
    if baseline is not None:
        rep.mst_normalized = normalized_mst(result, baseline)
        rep.dominance_violations = dominance_violations(result, baseline, tol)
    return rep
