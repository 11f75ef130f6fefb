"""Synthetic workloads and trace files.

Job sizes are Weibull with a chosen mean, inter-arrival times are exponential
so that the offered load equals ``load``, and each job carries a size
estimate ``size * exp(sigma * Z)`` with ``Z`` standard normal.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import ParameterError, TraceError

TRACE_HEADER = ("id", "release", "size", "estimate", "weight")

# Sub-stream indices mixed with the master seed; fixed so that e.g. changing
# sigma never perturbs the sizes drawn for a given seed.
SIZES_STREAM, ARRIVALS_STREAM, ERRORS_STREAM, WEIGHTS_STREAM = range(4)


@dataclass(frozen=True)
class JobSpec:
    id: int
    release: float
    size: float
    estimate: float
    weight: float = 1.0

    def __post_init__(self):
        if self.id < 0:
            raise ParameterError(f"job id must be non-negative, got {self.id}")
        if not self.release >= 0:
            raise ParameterError(f"job {self.id}: release must be >= 0")
        for name in ("size", "estimate", "weight"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ParameterError(f"job {self.id}: {name} must be > 0, got {value!r}")


class Workload(Sequence[JobSpec]):
    """Jobs ordered by (release, id), with unique ids."""

    def __init__(self, jobs: Iterable[JobSpec] = ()):
        self.jobs = tuple(sorted(jobs, key=lambda j: (j.release, j.id)))
        seen = set()
        for job in self.jobs:
            if job.id in seen:
                raise ParameterError(f"duplicate job id {job.id}")
            seen.add(job.id)

    def __getitem__(self, index):
        return self.jobs[index]

    def __len__(self):
        return len(self.jobs)

    def __eq__(self, other):
        if not isinstance(other, Workload):
            return NotImplemented
        return self.jobs == other.jobs

    def __repr__(self):
        return f"Workload({len(self.jobs)} jobs)"

    def by_id(self) -> dict[int, JobSpec]:
        return {job.id: job for job in self.jobs}

    def with_exact_estimates(self) -> Workload:
        return Workload(
            JobSpec(j.id, j.release, j.size, j.size, j.weight) for j in self.jobs
        )


@dataclass(frozen=True)
class WeightModel:
    """Discrete weight distribution; the default gives every job weight 1."""

    values: tuple[float, ...] = (1.0,)
    probs: tuple[float, ...] | None = None

    def __post_init__(self):
        if not self.values:
            raise ParameterError("weight model needs at least one value")
        if any(not v > 0 for v in self.values):
            raise ParameterError("weights must be > 0")
        if self.probs is not None:
            if len(self.probs) != len(self.values):
                raise ParameterError("weight values and probabilities differ in length")
            if any(p < 0 for p in self.probs) or not math.isclose(sum(self.probs), 1.0):
                raise ParameterError("weight probabilities must be >= 0 and sum to 1")

    @property
    def is_uniform(self) -> bool:
        return self.values == (1.0,)

    @classmethod
    def parse(cls, text: str) -> WeightModel:
        """Parse ``uniform``, ``1,2,4`` (equiprobable) or ``1:0.7,2:0.3``."""
        text = text.strip()
        if text in ("", "uniform"):
            return cls()
        values, probs = [], []
        try:
            for item in text.split(","):
                if ":" in item:
                    v, p = item.split(":", 1)
                    values.append(float(v))
                    probs.append(float(p))
                else:
                    values.append(float(item))
        except ValueError as exc:
            raise ParameterError(f"bad weight model {text!r}") from exc
        if probs and len(probs) != len(values):
            raise ParameterError("give a probability for every weight value or for none")
        return cls(tuple(values), tuple(probs) if probs else None)

    def __str__(self):
        if self.is_uniform:
            return "uniform"
        if self.probs is None:
            return ",".join(repr(v) for v in self.values)
        return ",".join(f"{v!r}:{p!r}" for v, p in zip(self.values, self.probs))


@dataclass(frozen=True)
class WorkloadParams:
    n_jobs: int
    shape: float
    mean_size: float = 1.0
    load: float = 0.9
    sigma: float = 0.0
    weight_model: WeightModel = field(default_factory=WeightModel)
    seed: int = 0

    def __post_init__(self):
        if self.n_jobs < 1:
            raise ParameterError("n_jobs must be a positive integer")
        if not self.shape > 0:
            raise ParameterError("Weibull shape must be > 0")
        if not self.mean_size > 0:
            raise ParameterError("mean size must be > 0")
        if not 0 < self.load < 1:
            raise ParameterError("load must lie in (0, 1)")
        if not self.sigma >= 0:
            raise ParameterError("sigma must be >= 0")


def substream(seed: int, stream: int) -> np.random.Generator:
    """Independent generator for one (seed, stream) pair.

    The pair is hashed by numpy's SeedSequence, so nearby seeds and streams
    give uncorrelated generators.
    """
    return np.random.default_rng(np.random.SeedSequence([seed % 2**64, stream]))


def weibull_scale_for_mean(shape: float, mean: float) -> float:
    if not (shape > 0 and mean > 0):
        raise ParameterError("shape and mean must be > 0")
    return mean / math.gamma(1.0 + 1.0 / shape)


def gen_sizes(n: int, shape: float, mean: float, rng: np.random.Generator) -> np.ndarray:
    if n < 0:
        raise ParameterError("n must be >= 0")
    scale = weibull_scale_for_mean(shape, mean)
    return scale * rng.weibull(shape, n)


def gen_arrivals(n: int, load: float, mean_size: float, rng: np.random.Generator) -> np.ndarray:
    if not 0 < load < 1:
        raise ParameterError("load must lie in (0, 1)")
    if not mean_size > 0:
        raise ParameterError("mean size must be > 0")
    if n < 0:
        raise ParameterError("n must be >= 0")
    return np.cumsum(rng.exponential(mean_size / load, n))


def gen_estimates(sizes: Sequence[float], sigma: float, rng: np.random.Generator) -> np.ndarray:
    sizes = np.asarray(sizes, dtype=float)
    if not sigma >= 0:
        raise ParameterError("sigma must be >= 0")
    if np.any(sizes <= 0):
        raise ParameterError("sizes must be > 0")
    # Draw Z even when sigma == 0 so the stream position does not depend on it.
    z = rng.standard_normal(sizes.shape[0])
    if sigma == 0:
        return sizes.copy()
    return sizes * np.exp(sigma * z)


def gen_weights(n: int, model: WeightModel, rng: np.random.Generator) -> np.ndarray:
    if model.is_uniform:
        return np.ones(n)
    values = np.asarray(model.values, dtype=float)
    idx = rng.choice(len(values), size=n, p=model.probs)
    return values[idx]


def generate(params: WorkloadParams) -> Workload:
    n, seed = params.n_jobs, params.seed
    sizes = gen_sizes(n, params.shape, params.mean_size, substream(seed, SIZES_STREAM))
    releases = gen_arrivals(n, params.load, params.mean_size, substream(seed, ARRIVALS_STREAM))
    estimates = gen_estimates(sizes, params.sigma, substream(seed, ERRORS_STREAM))
    weights = gen_weights(n, params.weight_model, substream(seed, WEIGHTS_STREAM))
    return Workload(
        JobSpec(i, float(r), float(s), float(e), float(w))
        for i, (r, s, e, w) in enumerate(zip(releases, sizes, estimates, weights))
    )


def _fmt(x: float) -> str:
    return format(x, ".17g")


def write_trace(workload: Workload, sink: TextIO) -> None:
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for j in workload:
        writer.writerow((j.id, _fmt(j.release), _fmt(j.size), _fmt(j.estimate), _fmt(j.weight)))


def read_trace(source: TextIO | str) -> Workload:
    """Parse a trace; ``source`` is an open text file or the trace contents."""
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise TraceError("empty trace: missing header", line=1) from None
    if tuple(h.strip() for h in header) != TRACE_HEADER:
        raise TraceError(f"expected header {','.join(TRACE_HEADER)}", line=1)
    jobs = []
    seen = set()
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(TRACE_HEADER):
            raise TraceError(f"expected {len(TRACE_HEADER)} fields, got {len(row)}", line)
        try:
            job_id = int(row[0])
            release, size, estimate, weight = (float(c) for c in row[1:])
        except ValueError as exc:
            raise TraceError(f"malformed field ({exc})", line) from None
        if job_id in seen:
            raise TraceError(f"duplicate job id {job_id}", line)
        seen.add(job_id)
        try:
            jobs.append(JobSpec(job_id, release, size, estimate, weight))
        except ParameterError as exc:
            raise TraceError(str(exc), line) from None
    return Workload(jobs)
