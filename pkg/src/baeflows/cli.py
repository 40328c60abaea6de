"""Command-line front end: JSON in, JSON out.

Exit status is 0 when every check passes, 1 on a verification failure (a
report {"module", "op", "witness"} is printed) and 2 on malformed input.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

from . import bethe, generation, grassmann, periodic_inverse, rs_hierarchy, rs_spectral
from .errors import BaeflowsError
from .exactcore import DEFAULT_TIMES, default_tolerance, poly_to_json, rat, rat_to_str, scalar_to_json


class InputError(Exception):
    """Malformed command-line or JSON input."""


class VerificationFailure(Exception):
    def __init__(self, module: str, op: str, witness: Any):
        super().__init__(f"{module}.{op} failed")
        self.report = {"module": module, "op": op, "witness": witness}


@dataclass
class RunConfig:
    command: str
    out: Path | None = None
    N: int = 3
    M: int = DEFAULT_TIMES
    tol: float = field(default_factory=default_tolerance)
    seed: int = 0
    jobs: int = 1
    options: argparse.Namespace = field(default_factory=argparse.Namespace)

    def __post_init__(self):
        if not self.tol > 0:
            raise InputError("tolerance must be positive")
        if self.M < 1:
            raise InputError("the number of active times must be at least 1")
        if self.jobs < 1:
            raise InputError("--jobs must be at least 1")


# ---------------------------------------------------------------------------
# helpers


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InputError(f"expected comma-separated integers, got {text!r}") from exc


def _rats(text: str) -> list:
    try:
        return [rat(v) for v in text.split(",") if v.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"expected comma-separated rationals, got {text!r}") from exc


def _complexes(text: str) -> list[complex]:
    try:
        return [complex(v.replace(" ", "")) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InputError(f"expected comma-separated numbers, got {text!r}") from exc


def _load(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _parse(loader: Callable[[Any], Any], data: Any, what: str) -> Any:
    try:
        return loader(data)
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise InputError(f"malformed {what}: {exc}") from exc


def _emit(config: RunConfig, payload: Any) -> None:
    text = json.dumps(payload, indent=2, default=str)
    if config.out is not None:
        config.out.write_text(text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# commands


def cmd_gen(config: RunConfig) -> int:
    o = config.options
    J, c = _ints(o.J), _rats(o.c)
    if len(J) != len(c):
        raise InputError("--J and --c must have the same length")
    if any(not 1 <= j <= config.N for j in J):
        raise InputError(f"directions must lie in 1..{config.N}")
    y = generation.multistep(generation.GenerationPath(tuple(J), tuple(c)), config.N)
    _emit(config, y.to_json())
    return 0


def cmd_verify(config: RunConfig) -> int:
    y = _parse(bethe.SolutionTuple.from_json, _load(config.options.file), "solution tuple")
    report = bethe.verify_bae(y)
    if not report.satisfied:
        raise VerificationFailure("bethe", "verify_bae", {"generic": report.generic, "failing": report.failing_equations})
    _emit(config, {"satisfied": True, "generic": report.generic, "degrees": list(y.degrees)})
    return 0


def cmd_spectral(config: RunConfig) -> int:
    o = config.options
    if o.point:
        p = _parse(rs_spectral.PhasePoint.from_json, _load(o.point), "phase point")
        s = rs_spectral.direct_transform(p)
        _emit(config, s.to_json())
        return 0
    if o.spectrum:
        s = _parse(rs_spectral.GenericSpectrum.from_json, _load(o.spectrum), "spectrum")
        t = _complexes(o.t) if o.t else []
        y, q = rs_spectral.inverse_transform(s, t)
        _emit(config, {"point": q.to_json(), "y": [scalar_to_json(complex(v)) for v in y.coef]})
        return 0
    raise InputError("spectral needs --point or --spectrum")


def cmd_evolve(config: RunConfig) -> int:
    o = config.options
    p = _parse(rs_spectral.PhasePoint.from_json, _load(o.point), "phase point")
    t = _complexes(o.t)
    s = rs_spectral.direct_transform(p)
    _, q = rs_spectral.inverse_transform(s, t)
    _emit(config, {"t": [scalar_to_json(v) for v in t], "point": q.to_json()})
    return 0


def cmd_rsflow(config: RunConfig) -> int:
    o = config.options
    p = _parse(rs_spectral.PhasePoint.from_json, _load(o.point), "phase point")
    s = rs_spectral.direct_transform(p)
    r = rs_hierarchy.lax_flow_check(s, o.m, h=o.h)
    report = {
        "m": o.m,
        "h": o.h,
        "lax_residual": r.lax_residual,
        "velocity_residual": r.velocity_residual,
        "conservation": r.conservation,
        "gamma_identity": r.gamma_identity,
        "resolvent_residual": r.resolvent_residual,
    }
    if max(r.lax_residual, r.velocity_residual, r.gamma_identity) > o.flow_tol:
        raise VerificationFailure("rs_hierarchy", "lax_flow_check", report)
    _emit(config, report)
    return 0


def cmd_baker(config: RunConfig) -> int:
    o = config.options
    if o.A:
        A = _parse(periodic_inverse.SpectralMatrixA.from_json, _load(o.A), "matrix A")
    elif o.seed_file:
        seed = _parse(periodic_inverse.NilpotentSeed.from_json, _load(o.seed_file), "nilpotent seed")
        A = periodic_inverse.seed_to_A(seed)
    else:
        raise InputError("baker needs --A or --seed")
    fam = periodic_inverse.build_family(A, config.M)
    if any(r != 0 for r in periodic_inverse.laxdd_residuals(fam)):
        raise VerificationFailure("periodic_inverse", "laxdd_residuals", A.to_json())
    if not periodic_inverse.check_periodicity(fam):
        raise VerificationFailure("periodic_inverse", "check_periodicity", A.to_json())
    y = periodic_inverse.bethe_from_A(A, config.M)
    report = bethe.verify_bae(y)
    if not report.satisfied:
        raise VerificationFailure("bethe", "verify_bae", y.to_json())
    _emit(config, fam.to_json())
    return 0


def cmd_tau(config: RunConfig) -> int:
    o = config.options
    flag = _parse(grassmann.MKdVSubspaceTuple.from_json, _load(o.flag), "flag")
    t = _rats(o.t) if o.t else []
    M = max(len(t), 1)
    _, taus = grassmann.mkdv_from_flag(flag, M)
    values = [grassmann.substitute_times(p, t) for p in taus]
    y = bethe.SolutionTuple.of(values)
    report = bethe.verify_bae(y)
    if not report.satisfied:
        raise VerificationFailure("grassmann", "mkdv_from_flag", {"taus": y.to_json()})
    _emit(config, {"t": [rat_to_str(v) for v in t], "taus": [poly_to_json(p) for p in values], "solution": y.to_json()})
    return 0


def crosscheck_path(N: int, J: Sequence[int], c: Sequence[Any], M: int = DEFAULT_TIMES) -> dict:
    """Run generation, Grassmannian flag and matrix-A pipelines on one path and compare."""
    y_gen = generation.multistep(generation.GenerationPath(tuple(J), tuple(c)), N)
    flag = grassmann.flag_from_path(N, J, c)
    y_flag = grassmann.solution_from_flag(flag)
    A = grassmann.spectral_matrix_from_flag(flag)
    y_A = periodic_inverse.bethe_from_A(A, M)
    return {
        "J": list(J),
        "c": [rat_to_str(v) for v in c],
        "degrees": list(y_gen.degrees),
        "bae": bethe.verify_bae(y_gen).satisfied,
        "generation_vs_flag": y_gen == y_flag,
        "generation_vs_matrix": y_gen == y_A,
        "flag_vs_matrix": y_flag == y_A,
        "solution": y_gen.to_json(),
    }


def _crosscheck_item(item: tuple) -> dict:
    N, J, c, M = item
    return crosscheck_path(N, J, [rat(v) for v in c], M)


def _passed(result: dict) -> bool:
    return all(result[k] for k in ("bae", "generation_vs_flag", "generation_vs_matrix", "flag_vs_matrix"))


def cmd_crosscheck(config: RunConfig) -> int:
    o = config.options
    items = []
    if o.J:
        J, c = _ints(o.J), _rats(o.c or "")
        if len(J) != len(c):
            raise InputError("--J and --c must have the same length")
        if any(not 1 <= j <= config.N for j in J):
            raise InputError(f"directions must lie in 1..{config.N}")
        items.append((config.N, tuple(J), tuple(rat_to_str(v) for v in c), config.M))
    if o.random:
        rng = random.Random(config.seed)
        paths = [p for p in generation.degree_increasing_paths(config.N, o.length) if p]
        for _ in range(o.random):
            J = rng.choice(paths)
            c = tuple(f"{rng.randint(-9, 9)}/{rng.randint(1, 4)}" for _ in J)
            items.append((config.N, J, c, config.M))
    if not items:
        raise InputError("crosscheck needs --J/--c or --random")
    if config.jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_crosscheck_item, items))
    else:
        results = [_crosscheck_item(i) for i in items]
    failed = [r for r in results if not _passed(r)]
    if failed:
        raise VerificationFailure("cli", "crosscheck", failed)
    _emit(config, {"passed": len(results), "results": results})
    return 0


COMMANDS = {
    "gen": cmd_gen,
    "verify": cmd_verify,
    "spectral": cmd_spectral,
    "evolve": cmd_evolve,
    "rsflow": cmd_rsflow,
    "baker": cmd_baker,
    "tau": cmd_tau,
    "crosscheck": cmd_crosscheck,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="baeflows", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, help="write the JSON result here instead of stdout")
    common.add_argument("--N", type=int, default=3, help="period (number of polynomials)")
    common.add_argument("--M", type=int, default=DEFAULT_TIMES, help="number of active times")
    common.add_argument("--tol", type=float, default=None, help="numeric tolerance (default: BAEFLOWS_TOL or 1e-8)")
    common.add_argument("--seed", type=int, default=0, help="PRNG seed for randomized sweeps")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate a Bethe solution from the trivial tuple")
    p.add_argument("--J", required=True, help="directions, e.g. 1,2,1")
    p.add_argument("--c", required=True, help="parameters, e.g. 0,1/2,-3")

    p = sub.add_parser("verify", parents=[common], help="check the Bethe equations for a solution file")
    p.add_argument("file")

    p = sub.add_parser("spectral", parents=[common], help="direct or inverse spectral transform")
    p.add_argument("--point", help="phase point JSON for the direct transform")
    p.add_argument("--spectrum", help="spectrum JSON for the inverse transform")
    p.add_argument("--t", help="times for the inverse transform, e.g. 0.1,0,0")

    p = sub.add_parser("evolve", parents=[common], help="move a phase point along the RS flows")
    p.add_argument("--point", required=True)
    p.add_argument("--t", required=True, help="times t1,t2,...")

    p = sub.add_parser("rsflow", parents=[common], help="finite-difference check of a hierarchy flow")
    p.add_argument("--point", required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--h", type=float, default=1e-5)
    p.add_argument("--flow-tol", type=float, default=1e-5, dest="flow_tol")

    p = sub.add_parser("baker", parents=[common], help="periodic family from a matrix A or a nilpotent seed")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--A", help="matrix A JSON")
    group.add_argument("--seed-file", "--W", dest="seed_file", help="nilpotent seed JSON")

    p = sub.add_parser("tau", parents=[common], help="tau functions of an mKdV flag")
    p.add_argument("--flag", required=True)
    p.add_argument("--t", default="", help="times, e.g. 0,0,0")

    p = sub.add_parser("crosscheck", parents=[common], help="compare the three construction pipelines")
    p.add_argument("--J", help="directions")
    p.add_argument("--c", help="parameters")
    p.add_argument("--random", type=int, default=0, help="number of random paths to add")
    p.add_argument("--length", type=int, default=3, help="maximal length of random paths")
    return parser


def _witness_json(w: Any) -> Any:
    if isinstance(w, dict):
        return {k if isinstance(k, str) else str(k): _witness_json(v) for k, v in w.items()}
    if isinstance(w, (list, tuple)):
        return [_witness_json(v) for v in w]
    if w is None or isinstance(w, (str, int, float, bool)):
        return w
    return str(w)


def _origin(exc: BaseException) -> tuple[str, str]:
    """Module and function of the innermost package frame that raised ``exc``."""
    module, op = "cli", "main"
    tb = exc.__traceback__
    while tb is not None:
        name = tb.tb_frame.f_globals.get("__name__", "")
        if name.startswith("baeflows."):
            module, op = name.split(".", 1)[1], tb.tb_frame.f_code.co_name
        tb = tb.tb_next
    return module, op


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    # "baker --seed W.json" is the documented spelling; --seed elsewhere is the PRNG seed
    if argv[:1] == ["baker"]:
        argv = ["--seed-file" if a == "--seed" else a for a in argv]
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        config = RunConfig(
            command=args.command,
            out=args.out,
            N=args.N,
            M=args.M,
            tol=args.tol if args.tol is not None else default_tolerance(),
            seed=args.seed,
            jobs=args.jobs,
            options=args,
        )
        return COMMANDS[args.command](config)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except VerificationFailure as exc:
        print(json.dumps(_witness_json(exc.report), indent=2))
        return 1
    except BaeflowsError as exc:
        module, op = _origin(exc)
        report = {"module": module, "op": op, "witness": _witness_json(exc.witness),
                  "error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(report, indent=2))
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
