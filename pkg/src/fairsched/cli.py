"""Command-line front end.

    fairsched generate --shape 0.25 --sigma 2 --n-jobs 10000 --out jobs.csv
    fairsched run jobs.csv --policy psbs --out completions.csv
    fairsched compare jobs.csv fsp ps
    fairsched sweep --shapes 0.25,1 --sigmas 0,1,2 --out sweep.csv

Every subcommand also takes ``--config FILE``, a plain ``key=value`` file
whose keys are the long flag names (``n-jobs=1000``); flags given on the
command line win. Exit codes: 0 ok, 2 usage or unknown policy, 3 bad input,
4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence, TextIO

import numpy as np

from . import engine, metrics
from .errors import (
    ContractViolation,
    OracleDivergence,
    ParameterError,
    PolicyViolation,
    TraceError,
    UnknownPolicy,
)
from .schedulers import is_registered, make_policy, registered_names
from .workload import WeightModel, Workload, WorkloadParams, generate, read_trace, write_trace

log = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3, 4

RESULT_HEADER = ("id", "release", "size", "estimate", "weight", "completion", "sojourn")
SWEEP_HEADER = ("shape", "sigma", "seed", "policy", "mst", "mst_norm_ps")

DEFAULT_SHAPES = tuple(float(x) for x in np.geomspace(0.125, 4, 8))
DEFAULT_SIGMAS = tuple(0.25 * k for k in range(13))
DEFAULT_POLICIES = ("srpte", "fsp", "psbs")


def _fmt(x: float) -> str:
    return format(x, ".17g")


@dataclass(frozen=True)
class SweepGrid:
    shapes: tuple[float, ...] = DEFAULT_SHAPES
    sigmas: tuple[float, ...] = DEFAULT_SIGMAS
    seeds: int = 5
    n_jobs: int = 10_000
    load: float = 0.9
    policies: tuple[str, ...] = DEFAULT_POLICIES
    weight_model: WeightModel = field(default_factory=WeightModel)
    master_seed: int = 0

    def __post_init__(self):
        if not self.shapes or not self.sigmas or self.seeds < 1 or not self.policies:
            raise ParameterError("sweep axes must be non-empty")
        for name in self.policies:
            if not is_registered(name):
                raise UnknownPolicy(
                    f"unknown policy {name!r}; registered: {', '.join(registered_names())}"
                )

    def cells(self) -> Iterator[tuple[float, float, int]]:
        """(shape, sigma, cell seed) in output order."""
        for a, shape in enumerate(self.shapes):
            for b, sigma in enumerate(self.sigmas):
                for rep in range(self.seeds):
                    yield shape, sigma, cell_seed(self.master_seed, a, b, rep)


def cell_seed(master: int, shape_index: int, sigma_index: int, replication: int) -> int:
    """64-bit seed for one sweep cell, hashed from its grid coordinates."""
    seq = np.random.SeedSequence([master % 2**64, shape_index, sigma_index, replication])
    return int(seq.generate_state(1, np.uint64)[0])


def simulate_cell(
    shape: float, sigma: float, seed: int, grid: SweepGrid
) -> list[tuple[float, float, int, str, float, float]]:
    params = WorkloadParams(
        n_jobs=grid.n_jobs,
        shape=shape,
        load=grid.load,
        sigma=sigma,
        weight_model=grid.weight_model,
        seed=seed,
    )
    workload = generate(params)
    baseline = engine.run(workload, make_policy("ps"))
    base_mst = metrics.mean_sojourn(baseline)
    rows = []
    for name in grid.policies:
        if name == "ps":
            mst = base_mst
        else:
            mst = metrics.mean_sojourn(engine.run(workload, make_policy(name, workload)))
        rows.append((shape, sigma, seed, name, mst, mst / base_mst))
    return rows


def _simulate_cell_star(args):
    shape, sigma, seed, grid = args
    try:
        return simulate_cell(shape, sigma, seed, grid)
    except Exception as exc:
        raise RuntimeError(f"sweep cell shape={shape} sigma={sigma} seed={seed}: {exc}") from exc


def run_sweep(grid: SweepGrid, workers: int = 1) -> list[tuple]:
    tasks = [(shape, sigma, seed, grid) for shape, sigma, seed in grid.cells()]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_simulate_cell_star, tasks))
    else:
        chunks = []
        for k, task in enumerate(tasks, 1):
            chunks.append(_simulate_cell_star(task))
            log.info("cell %d/%d done", k, len(tasks))
    return [row for chunk in chunks for row in chunk]


def write_sweep(rows: Sequence[tuple], sink: TextIO) -> None:
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for shape, sigma, seed, policy, mst, norm in rows:
        writer.writerow((repr(shape), repr(sigma), seed, policy, _fmt(mst), _fmt(norm)))


def write_results(workload: Workload, result: engine.SimulationResult, sink: TextIO) -> None:
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(RESULT_HEADER)
    for j in workload:
        rec = result.records[j.id]
        writer.writerow(
            (j.id, _fmt(j.release), _fmt(j.size), _fmt(j.estimate), _fmt(j.weight),
             _fmt(rec.completion), _fmt(rec.sojourn))
        )


@contextlib.contextmanager
def _open_out(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _load_trace(path: str) -> Workload:
    if path == "-":
        return read_trace(sys.stdin)
    with open(path, encoding="utf-8", newline="") as fh:
        return read_trace(fh)


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _name_list(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _weights(text: str) -> WeightModel:
    try:
        return WeightModel.parse(text)
    except ParameterError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def cmd_generate(args) -> int:
    params = WorkloadParams(
        n_jobs=args.n_jobs,
        shape=args.shape,
        mean_size=args.mean_size,
        load=args.load,
        sigma=args.sigma,
        weight_model=args.weights,
        seed=args.seed,
    )
    workload = generate(params)
    with _open_out(args.out) as out:
        write_trace(workload, out)
    return EXIT_OK


def cmd_run(args) -> int:
    workload = _load_trace(args.trace)
    policy = make_policy(args.policy, workload)
    result = engine.run(workload, policy, log_events=args.log_events is not None)
    with _open_out(args.out) as out:
        write_results(workload, result, out)
    if args.log_events is not None:
        with _open_out(args.log_events) as out:
            engine.write_event_log(result, out)
    if result.records:
        summary = sys.stderr if args.out in (None, "-") else sys.stdout
        print(
            f"mst={_fmt(metrics.mean_sojourn(result))} makespan={_fmt(metrics.makespan(result))}",
            file=summary,
        )
    return EXIT_OK


def cmd_compare(args) -> int:
    workload = _load_trace(args.trace)
    a = engine.run(workload, make_policy(args.policy_a, workload))
    b = engine.run(workload, make_policy(args.policy_b, workload))
    violations = metrics.dominance_violations(a, b, args.tol)
    verdict = "no" if violations else "yes"
    with _open_out(args.out) as out:
        print(f"{args.policy_a} vs {args.policy_b}", file=out)
        print(f"dominates: {verdict}, {len(violations)} violations", file=out)
        for v in violations:
            print(f"  job {v.job_id}: {_fmt(v.candidate)} > {_fmt(v.reference)}", file=out)
        if a.records:
            print(f"mst: {_fmt(metrics.mean_sojourn(a))} vs {_fmt(metrics.mean_sojourn(b))}", file=out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    grid = SweepGrid(
        shapes=args.shapes,
        sigmas=args.sigmas,
        seeds=args.seeds,
        n_jobs=args.n_jobs,
        load=args.load,
        policies=args.policies,
        weight_model=args.weights,
        master_seed=args.seed,
    )
    rows = run_sweep(grid, workers=args.workers)
    with _open_out(args.out) as out:
        write_sweep(rows, out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairsched", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value file with defaults for any flag")
        p.add_argument("--out", help="output file (default: stdout)")

    def workload_flags(p, n_default):
        p.add_argument("--n-jobs", type=int, default=n_default)
        p.add_argument("--load", type=float, default=0.9)
        p.add_argument("--weights", type=_weights, default=WeightModel(),
                       help="'uniform', '1,2' or '1:0.7,2:0.3'")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("generate", help="write a synthetic workload trace")
    common(p)
    workload_flags(p, 10_000)
    p.add_argument("--shape", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--mean-size", type=float, default=1.0)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", help="simulate one policy on a trace")
    common(p)
    p.add_argument("trace")
    p.add_argument("--policy", default="ps")
    p.add_argument("--log-events", metavar="PATH", help="also write the event log here")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="check whether policy A dominates policy B")
    common(p)
    p.add_argument("trace")
    p.add_argument("policy_a")
    p.add_argument("policy_b")
    p.add_argument("--tol", type=float, default=metrics.DOMINANCE_TOL)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="mean sojourn time normalized by PS over a grid")
    common(p)
    workload_flags(p, 10_000)
    p.add_argument("--shapes", type=_float_list, default=DEFAULT_SHAPES)
    p.add_argument("--sigmas", type=_float_list, default=DEFAULT_SIGMAS)
    p.add_argument("--seeds", type=int, default=5, help="replications per cell")
    p.add_argument("--policies", type=_name_list, default=DEFAULT_POLICIES)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)
    return parser


def read_config(path: str) -> dict[str, str]:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            values[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return values


def _apply_config(parser, argv, args):
    """Re-parse with config values as defaults so explicit flags still win."""
    values = read_config(args.config)
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in subparser._actions}
    unknown = set(values) - known
    if unknown:
        raise ParameterError(f"unknown config keys: {', '.join(sorted(unknown))}")
    subparser.set_defaults(**values)
    return parser.parse_args(argv)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config:
            args = _apply_config(parser, argv, args)
        return args.func(args)
    except UnknownPolicy as exc:
        print(f"fairsched: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TraceError, ParameterError, OSError) as exc:
        print(f"fairsched: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (PolicyViolation, ContractViolation, OracleDivergence) as exc:
        print(f"fairsched: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
