"""Command-line interface.

Commands: ssdt, stieltjes, spike, simulate, bench, validate.  Every command
writes CSV (or a bare number) to stdout or --out, plus a JSON run manifest
(sidecar file next to --out, stderr otherwise) recording the resolved
parameters so any output can be reproduced byte for byte.

Exit codes: 0 success, 2 input error, 3 solver/simulation failure,
4 domain violation (below the edge, undetectable signal).
"""

from __future__ import annotations

import argparse
import json
import math
import statistics
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .edge import detection_threshold, ssdt as solve_edge
from .errors import (
    EdgeViolation,
    ModelError,
    SingularPoint,
    SolverError,
    SsdtError,
    UndetectableSignal,
)
from .measure import NoiseModel, parse_model, serialize_model, validate
from .montecarlo import (
    SimConfig,
    run_edge_experiment,
    run_spiked_experiment,
    slope_fit,
)
from .spike import lambda_from_theta, spike_from_lambda
from .stieltjes import stieltjes_grid

EXIT_INPUT_ERROR = 2
EXIT_SOLVER_ERROR = 3
EXIT_DOMAIN_ERROR = 4

DEFAULT_TOL = 1e-13


def fmt(x: float) -> str:
    """Full round-trip precision: 17 significant decimal digits."""
    return format(float(x), ".17g")


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: int | None
    version: str = __version__
    duration_seconds: float = 0.0

    def to_json(self) -> str:
        return json.dumps(
            {
                "command": self.command,
                "parameters": self.parameters,
                "seed": self.seed,
                "version": self.version,
                "duration_seconds": self.duration_seconds,
            },
            indent=2,
        )


@dataclass
class CommandResult:
    payload: str
    parameters: dict
    seed: int | None = None
    extra_files: list[tuple[str, str]] = field(default_factory=list)


def _load_model(path: str) -> NoiseModel:
    return parse_model(Path(path).read_text())


def _parse_floats(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _parse_ints(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


# --- commands ----------------------------------------------------------------

def cmd_ssdt(args: argparse.Namespace) -> CommandResult:
    model = _load_model(args.model)
    solution = solve_edge(model, args.tol)
    lines = [fmt(solution.lambda_star)]
    if args.trace:
        lines.append("iteration,Q")
        for i, (_, q) in enumerate(solution.reports.edge.trace):
            lines.append(f"{i},{fmt(q)}")
    params = {"model": args.model, "tol": args.tol, "trace": bool(args.trace)}
    return CommandResult("\n".join(lines) + "\n", params)


def cmd_stieltjes(args: argparse.Namespace) -> CommandResult:
    model = _load_model(args.model)
    if args.lambdas:
        grid = _parse_floats(args.lambdas)
        resolved = {"lambdas": grid}
    else:
        if args.grid_min is None or args.grid_max is None:
            edge = detection_threshold(model, args.tol)
            lo = edge + 1.0 if args.grid_min is None else args.grid_min
            hi = edge + 10.0 if args.grid_max is None else args.grid_max
        else:
            lo, hi = args.grid_min, args.grid_max
        grid = np.linspace(lo, hi, args.grid_count).tolist()
        resolved = {"grid_min": lo, "grid_max": hi, "grid_count": args.grid_count}
    points = stieltjes_grid(model, grid, args.tol)
    lines = ["lambda,e,e1,s,s1,sbar,sbar1,D,D1"]
    for pt in points:
        lines.append(
            ",".join(
                fmt(v)
                for v in (pt.lam, pt.e, pt.e1, pt.s, pt.s1, pt.sbar, pt.sbar1, pt.d, pt.d1)
            )
        )
    params = {"model": args.model, "tol": args.tol, **resolved}
    return CommandResult("\n".join(lines) + "\n", params)


def cmd_spike(args: argparse.Namespace) -> CommandResult:
    model = _load_model(args.model)
    values = _parse_floats(args.values)
    lines = ["lambda,theta2,c2,cbar2"]
    for value in values:
        if args.direction == "from-lambda":
            params = spike_from_lambda(model, value, args.tol)
        else:
            params = lambda_from_theta(model, value, args.tol)
        lines.append(
            ",".join(fmt(v) for v in (params.lam, params.theta2, params.c2, params.cbar2))
        )
    meta = {
        "model": args.model,
        "direction": args.direction,
        "values": values,
        "tol": args.tol,
    }
    return CommandResult("\n".join(lines) + "\n", meta)


def cmd_simulate(args: argparse.Namespace) -> CommandResult:
    model = _load_model(args.model)
    k_list = _parse_ints(args.k)
    if not k_list:
        raise ModelError("simulate needs at least one k")
    if args.mode == "spike" and args.theta2 is None:
        raise ModelError("spike mode requires --theta2")

    errors: list[float] = []
    if args.mode == "edge":
        lines = ["k,mean_abs_error,mean_bias"]
        for k in k_list:
            config = SimConfig(model=model, k=k, trials=args.trials, seed=args.seed)
            report = run_edge_experiment(config, workers=args.workers)
            errors.append(report.mean_abs_error)
            lines.append(f"{k},{fmt(report.mean_abs_error)},{fmt(report.mean_bias)}")
        if len(k_list) >= 3:
            slope = slope_fit(
                [math.log2(k) for k in k_list], [math.log(e) for e in errors]
            )
            lines.append(f"slope,{fmt(slope)},")
    else:
        lines = ["k,mean_abs_error,mean_bias,left_cos_error,right_cos_error"]
        cos_errors: list[tuple[float, float]] = []
        for k in k_list:
            config = SimConfig(
                model=model,
                k=k,
                trials=args.trials,
                seed=args.seed,
                spike_theta2=args.theta2,
            )
            report = run_spiked_experiment(config, workers=args.workers)
            errors.append(report.mean_abs_error)
            cos_errors.append((report.left_cos_error, report.right_cos_error))
            lines.append(
                f"{k},{fmt(report.mean_abs_error)},{fmt(report.mean_bias)},"
                f"{fmt(report.left_cos_error)},{fmt(report.right_cos_error)}"
            )
        if len(k_list) >= 3:
            log_k = [math.log2(k) for k in k_list]
            s_sv = slope_fit(log_k, [math.log(e) for e in errors])
            s_left = slope_fit(log_k, [math.log(c[0]) for c in cos_errors])
            s_right = slope_fit(log_k, [math.log(c[1]) for c in cos_errors])
            lines.append(f"slope,{fmt(s_sv)},,{fmt(s_left)},{fmt(s_right)}")

    params = {
        "model": args.model,
        "mode": args.mode,
        "k": k_list,
        "trials": args.trials,
        "theta2": args.theta2,
        "workers": args.workers,
    }
    return CommandResult("\n".join(lines) + "\n", params, seed=args.seed)


def _bench_model(n: int, seed: int) -> NoiseModel:
    # Random spectra as in the scaling experiment: atoms Unif(1,2), random
    # normalized weights, p = n/2 so gamma = 1/2.
    rng = np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(n,)))
    )
    p = n // 2
    a = rng.uniform(1.0, 2.0, size=p)
    omega = rng.uniform(0.0, 1.0, size=p)
    b = rng.uniform(1.0, 2.0, size=n)
    pi = rng.uniform(0.0, 1.0, size=n)
    return validate(
        {"atoms": a, "weights": omega / omega.sum()},
        {"atoms": b, "weights": pi / pi.sum()},
        0.5,
    )


def cmd_bench(args: argparse.Namespace) -> CommandResult:
    sizes = _parse_ints(args.sizes)
    if len(sizes) < 2:
        raise ModelError("bench needs at least 2 sizes")
    lines = ["n,seconds_ssdt,seconds_stieltjes_grid100"]
    for n in sizes:
        model = _bench_model(n, args.seed)
        t_edge: list[float] = []
        t_grid: list[float] = []
        for _ in range(args.reps):
            start = time.perf_counter()
            solution = solve_edge(model, args.tol)
            t_edge.append(time.perf_counter() - start)
            edge = solution.lambda_star
            grid = np.linspace(edge + 1.0, edge + 10.0, 100).tolist()
            start = time.perf_counter()
            stieltjes_grid(model, grid, args.tol)
            t_grid.append(time.perf_counter() - start)
        lines.append(
            f"{n},{fmt(statistics.median(t_edge))},{fmt(statistics.median(t_grid))}"
        )
    params = {"sizes": sizes, "reps": args.reps, "tol": args.tol}
    return CommandResult("\n".join(lines) + "\n", params, seed=args.seed)


def cmd_validate(args: argparse.Namespace) -> CommandResult:
    model = _load_model(args.model)
    return CommandResult(
        serialize_model(model) + "\n", {"model": args.model}
    )


# --- driver -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssdt",
        description=(
            "Spectral signal detection threshold, Stieltjes transform, and "
            "spiked-model calculations for separable-variance noise."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, model_required: bool = True) -> None:
        if model_required:
            p.add_argument("--model", required=True, help="model file (JSON)")
        p.add_argument("--tol", type=float, default=DEFAULT_TOL)
        p.add_argument("--out", default=None, help="output path (default stdout)")

    p = sub.add_parser("ssdt", help="compute the detection threshold lambda*")
    add_common(p)
    p.add_argument("--trace", action="store_true", help="emit the Newton trace CSV")
    p.set_defaults(fn=cmd_ssdt)

    p = sub.add_parser("stieltjes", help="evaluate the transform on a lambda grid")
    add_common(p)
    p.add_argument("--grid-min", type=float, default=None)
    p.add_argument("--grid-max", type=float, default=None)
    p.add_argument("--grid-count", type=int, default=100)
    p.add_argument("--lambdas", default=None, help="explicit comma-separated grid")
    p.set_defaults(fn=cmd_stieltjes)

    p = sub.add_parser("spike", help="spiked-model parameter mapping")
    add_common(p)
    p.add_argument(
        "--direction", choices=("from-lambda", "from-theta"), default="from-lambda"
    )
    p.add_argument("--values", required=True, help="comma-separated inputs")
    p.set_defaults(fn=cmd_spike)

    p = sub.add_parser("simulate", help="finite-sample Monte Carlo experiments")
    add_common(p)
    p.add_argument("--mode", choices=("edge", "spike"), required=True)
    p.add_argument("--k", required=True, help="comma-separated row dimensions")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--theta2", type=float, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("bench", help="timing scan over model sizes")
    p.add_argument("--sizes", required=True, help="comma-separated atom counts n")
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("validate", help="parse a model file and echo it normalized")
    add_common(p)
    p.set_defaults(fn=cmd_validate)

    return parser


def _emit(result: CommandResult, manifest: RunManifest, out: str | None) -> None:
    if out is None:
        sys.stdout.write(result.payload)
        sys.stderr.write(manifest.to_json() + "\n")
    else:
        Path(out).write_text(result.payload)
        Path(out + ".manifest.json").write_text(manifest.to_json() + "\n")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        result: CommandResult = args.fn(args)
    except (EdgeViolation, UndetectableSignal) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN_ERROR
    except (SolverError, SingularPoint) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER_ERROR
    except (ModelError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except SsdtError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER_ERROR
    manifest = RunManifest(
        command=args.command,
        parameters=result.parameters,
        seed=result.seed,
        duration_seconds=time.perf_counter() - start,
    )
    _emit(result, manifest, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
