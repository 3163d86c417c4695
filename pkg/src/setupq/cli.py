"""Command-line front end.

Subcommands: bounds (closed-form report for one parameter point), sweep
(a grid of simulations driven by a JSON spec file, written as CSV),
provision (smallest fleet meeting a wait target, per model), and verify
(the claim-check suite, emitted as a CSV manifest).

Exit codes: 0 success, 1 a gated claim failed, 2 invalid usage or
parameters. Every real number in CSV output is rendered with 17
significant digits and files are written atomically (temp file + rename),
so a rerun with the same seed reproduces every byte or nothing.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
import tempfile
from typing import Optional, Sequence

from .analytic import (
    BoundConstants,
    DEFAULT_CONSTANTS,
    bounds_report,
    erlang_c_wait,
    q_approx,
    q_low_r,
    q_lower,
    q_upper,
)
from .errors import ParameterError, SetupQueueError
from .estimate import estimate, resolve_workers
from .model import (
    DeterministicSetup,
    ExponentialSetup,
    NoSetup,
    SystemParams,
    in_assumption_region,
    policy_label,
    validate,
)
from .oracles import CLAIM_GROUPS, DEFAULT_POINT, run_verification
from .provision import (
    ANALYTIC_MODELS,
    EXP_SIM,
    provisioning_table,
    solve_provision,
)
from .simengine import SimConfig

SWEEP_HEADER = (
    "sweep_var,value,policy,mean_wait,ci,mean_q,ci_q,"
    "q_approx,q_upper,q_lower,q_low_r,in_region,seed,replications"
).split(",")

VERIFY_HEADER = (
    "claim,estimate,ci,bound,threshold,tolerance,direction,"
    "slack,passed,asserted,n,note"
).split(",")

BOUNDS_FIELDS = (
    "q_approx",
    "q_upper",
    "q_lower",
    "q_low_r",
    "t_approx",
    "t_upper",
    "t_lower",
    "tightness_ratio",
)

_SWEEP_AXES = ("k", "rho", "beta", "m")
_SWEEP_KEYS = {
    "format_version",
    "sweep",
    "values",
    "base",
    "policies",
    "replications",
    "horizon",
    "warmup",
    "seed",
}


def _fmt(value) -> str:
    """CSV cell: full-precision floats, lowercase booleans, '' for None."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def _check_output_path(path: Optional[str]) -> None:
    """Reject unusable output paths before any compute is spent on them."""
    if path is None:
        return
    directory = os.path.dirname(os.path.abspath(path)) or "."
    if not os.path.isdir(directory):
        raise ParameterError(f"output directory does not exist: {directory}")
    if os.path.isdir(path):
        raise ParameterError(f"output path is a directory: {path}")


def _write_csv(path: str, header: Sequence[str], rows) -> None:
    # write next to the target, then rename, so failures leave no partial file
    _check_output_path(path)
    directory = os.path.dirname(os.path.abspath(path)) or "."
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    except OSError as exc:
        raise ParameterError(f"cannot write {path}: {exc}") from exc
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(cell) for cell in row])
        # mkstemp creates 0600 files; give the result ordinary permissions
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except OSError as exc:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise ParameterError(f"cannot write {path}: {exc}") from exc
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_constants(pairs) -> Optional[BoundConstants]:
    if not pairs:
        return None
    overrides = {}
    names = {f.name for f in dataclasses.fields(BoundConstants)}
    for pair in pairs:
        name, sep, raw = pair.partition("=")
        if not sep:
            raise ParameterError(f"--constant expects NAME=VALUE, got {pair!r}")
        if name not in names:
            raise ParameterError(
                f"unknown constant {name!r}; known: {', '.join(sorted(names))}"
            )
        try:
            overrides[name] = float(raw)
        except ValueError:
            raise ParameterError(f"constant {name} needs a number, got {raw!r}")
    return dataclasses.replace(DEFAULT_CONSTANTS, **overrides)


def _params_from_args(args) -> SystemParams:
    params = SystemParams(k=args.k, rho=args.rho, mu=args.mu, beta=args.beta)
    validate(params)
    return params


def cmd_bounds(args) -> int:
    _check_output_path(args.csv)
    constants = _parse_constants(args.constant)
    params = _params_from_args(args)
    report = bounds_report(params, constants)
    erlang = erlang_c_wait(params.k, params.rho, params.mu)
    names = BOUNDS_FIELDS + ("erlang_c_wait", "in_region")
    values = [getattr(report, f) for f in BOUNDS_FIELDS] + [
        erlang,
        report.in_region,
    ]
    widths = [max(len(n), 12) for n in names]
    print("  ".join(n.rjust(w) for n, w in zip(names, widths)))
    print(
        "  ".join(
            (f"{v:.6g}" if isinstance(v, float) else _fmt(v)).rjust(w)
            for v, w in zip(values, widths)
        )
    )
    if report.flags:
        print("flags: " + ", ".join(report.flags))
    if args.csv:
        _write_csv(args.csv, names, [values])
    return 0


def _load_sweep_spec(path: str) -> dict:
    try:
        with open(path) as handle:
            spec = json.load(handle)
    except OSError as exc:
        raise ParameterError(f"cannot read sweep spec: {exc}")
    except json.JSONDecodeError as exc:
        raise ParameterError(f"sweep spec is not valid JSON: {exc}")
    if not isinstance(spec, dict):
        raise ParameterError("sweep spec must be a JSON object")
    unknown = set(spec) - _SWEEP_KEYS
    if unknown:
        raise ParameterError(f"unknown sweep spec keys: {sorted(unknown)}")
    if spec.get("format_version") != 1:
        raise ParameterError(
            f"sweep spec needs format_version 1, got {spec.get('format_version')!r}"
        )
    for key in ("sweep", "values", "base", "policies"):
        if key not in spec:
            raise ParameterError(f"sweep spec is missing the {key!r} key")
    if spec["sweep"] not in _SWEEP_AXES:
        raise ParameterError(
            f"sweep axis must be one of {_SWEEP_AXES}, got {spec['sweep']!r}"
        )
    values = spec["values"]
    if not isinstance(values, list) or not values:
        raise ParameterError("sweep values must be a non-empty list")
    base = spec["base"]
    if not isinstance(base, dict) or set(base) - {"k", "rho", "mu", "beta"}:
        raise ParameterError("sweep base must be an object with k, rho, mu, beta")
    if not isinstance(spec["policies"], list) or not spec["policies"]:
        raise ParameterError("sweep policies must be a non-empty list")
    return spec


def _sweep_policy(entry, beta: float, m_override: Optional[int]):
    if isinstance(entry, str):
        kind, options = entry, {}
    elif isinstance(entry, dict):
        kind = entry.get("kind")
        options = {key: val for key, val in entry.items() if key != "kind"}
    else:
        raise ParameterError(f"policy entries must be strings or objects: {entry!r}")
    if kind == "deterministic":
        unknown = set(options) - {"m"}
        if unknown:
            raise ParameterError(f"unknown deterministic policy keys: {sorted(unknown)}")
        m = int(options.get("m", 0)) if m_override is None else m_override
        return DeterministicSetup(m)
    if m_override is not None:
        raise ParameterError("an m sweep requires deterministic policies")
    if kind == "exponential":
        unknown = set(options) - {"mean"}
        if unknown:
            raise ParameterError(f"unknown exponential policy keys: {sorted(unknown)}")
        mean = float(options.get("mean", beta))
        return ExponentialSetup(mean)
    if kind == "none":
        if options:
            raise ParameterError(f"policy 'none' takes no options: {sorted(options)}")
        return NoSetup()
    raise ParameterError(
        f"unknown policy kind {kind!r}; expected deterministic, exponential or none"
    )


def cmd_sweep(args) -> int:
    _check_output_path(args.out)
    spec = _load_sweep_spec(args.spec)
    axis = spec["sweep"]
    seed = spec.get("seed", 0)
    replications = int(spec.get("replications", 4))
    horizon = float(spec.get("horizon", 10_000.0))
    warmup = spec.get("warmup")
    base = spec["base"]
    workers = resolve_workers(args.threads)

    rows = []
    row_index = 0
    for value in spec["values"]:
        fields = {
            "k": int(base.get("k", 1)),
            "rho": float(base.get("rho", 0.5)),
            "mu": float(base.get("mu", 1.0)),
            "beta": float(base.get("beta", 0.0)),
        }
        m_override = None
        if axis == "m":
            m_override = int(value)
        elif axis == "k":
            fields["k"] = int(value)
        else:
            fields[axis] = float(value)
        params = SystemParams(**fields)
        validate(params)
        analytics = (
            q_approx(params),
            q_upper(params),
            q_lower(params),
            q_low_r(params),
        )
        region = in_assumption_region(params)
        for entry in spec["policies"]:
            policy = _sweep_policy(entry, params.beta, m_override)
            cfg = SimConfig(
                horizon=horizon,
                warmup=warmup if warmup is None else float(warmup),
                seed=(seed, row_index),
            )
            pair = estimate(params, policy, cfg, replications, max_workers=workers)
            rows.append(
                (
                    axis,
                    value,
                    policy_label(policy),
                    pair.wait.mean,
                    pair.wait.ci_half_width,
                    pair.queue.mean,
                    pair.queue.ci_half_width,
                    *analytics,
                    region,
                    seed,
                    replications,
                )
            )
            row_index += 1
    _write_csv(args.out, SWEEP_HEADER, rows)
    print(f"{len(rows)} rows -> {args.out}")
    return 0


def cmd_provision(args) -> int:
    _check_output_path(args.csv)
    constants = _parse_constants(args.constant)
    if args.model == "all":
        results = provisioning_table(
            args.target,
            args.rho,
            args.mu,
            args.beta,
            k_max=args.k_max,
            constants=constants,
            seed=args.seed,
        )
    else:
        results = [
            solve_provision(
                args.target,
                args.rho,
                args.mu,
                args.beta,
                args.model,
                args.verify,
                k_max=args.k_max,
                constants=constants,
                seed=args.seed,
            )
        ]
    print(f"{'model':>12}  {'k':>9}  {'predicted_wait':>16}  note")
    for row in results:
        k_text = "-" if row.k is None else str(row.k)
        wait_text = "-" if math.isnan(row.predicted_wait) else f"{row.predicted_wait:.6g}"
        note = row.note
        if row.non_monotone:
            note = ("non-monotone; " + note).strip("; ")
        print(f"{row.model:>12}  {k_text:>9}  {wait_text:>16}  {note}")
    if args.csv:
        _write_csv(
            args.csv,
            ("model", "k", "predicted_wait", "non_monotone", "note"),
            [
                (r.model, r.k, r.predicted_wait, r.non_monotone, r.note)
                for r in results
            ],
        )
    return 0


def cmd_verify(args) -> int:
    _check_output_path(args.out)
    params = validate(
        SystemParams(k=args.k, rho=args.rho, mu=args.mu, beta=args.beta)
    )
    verdicts = run_verification(
        claims=args.claims or None,
        params=params,
        seed=args.seed,
        n_cycles=args.cycles,
        n_samples=args.samples,
        n_replications=args.reps,
        slack_override=args.slack,
        n_chunks=args.chunks,
        max_workers=args.threads,
    )
    rows = [
        (
            v.claim_id,
            v.estimate,
            v.ci_half_width,
            v.bound_value,
            v.threshold,
            v.tolerance,
            v.direction,
            v.slack,
            v.passed,
            v.asserted,
            v.n,
            v.note,
        )
        for v in verdicts
    ]
    if args.out:
        _write_csv(args.out, VERIFY_HEADER, rows)
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(VERIFY_HEADER)
        for row in rows:
            writer.writerow([_fmt(cell) for cell in row])
    failed = [v for v in verdicts if v.asserted and not v.passed]
    reported = [v for v in verdicts if not v.asserted]
    summary = (
        f"{len(verdicts)} claims: {len(verdicts) - len(reported)} asserted, "
        f"{len(reported)} reported only, {len(failed)} failed"
    )
    print(summary, file=sys.stderr)
    if failed:
        for v in failed:
            print(f"FAILED {v.claim_id}: slack={v.slack:.6g}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="setupq",
        description=(
            "Simulation and closed-form analysis of multiserver queues "
            "with setup times."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    bounds = sub.add_parser("bounds", help="closed-form bound report for one point")
    bounds.add_argument("--k", type=int, required=True, help="number of servers")
    bounds.add_argument("--rho", type=float, required=True, help="per-server load")
    bounds.add_argument("--mu", type=float, default=1.0, help="service rate")
    bounds.add_argument("--beta", type=float, required=True, help="setup duration")
    bounds.add_argument(
        "--constant",
        action="append",
        default=[],
        metavar="NAME=VALUE",
        help="override a bound constant (repeatable)",
    )
    bounds.add_argument("--csv", help="also write the row to this CSV file")
    bounds.set_defaults(func=cmd_bounds)

    sweep = sub.add_parser("sweep", help="run a JSON-specified sweep to CSV")
    sweep.add_argument("spec", help="path to the sweep spec (JSON)")
    sweep.add_argument("--out", required=True, help="output CSV path")
    sweep.add_argument("--threads", type=int, default=None, help="parallelism cap")
    sweep.set_defaults(func=cmd_sweep)

    provision = sub.add_parser("provision", help="smallest fleet meeting a wait target")
    provision.add_argument("--target", type=float, required=True, help="target mean wait")
    provision.add_argument("--rho", type=float, required=True, help="per-server load")
    provision.add_argument("--mu", type=float, default=1.0, help="service rate")
    provision.add_argument("--beta", type=float, required=True, help="setup duration")
    provision.add_argument(
        "--model",
        default="all",
        choices=("all",) + ANALYTIC_MODELS + (EXP_SIM,),
        help="one model, or all of them as a table",
    )
    provision.add_argument("--k-max", type=int, default=10**7, help="search cap")
    provision.add_argument("--seed", type=int, default=0, help="simulation seed")
    provision.add_argument(
        "--verify",
        action="store_true",
        help="confirm the answer (and reject k-1) by simulation",
    )
    provision.add_argument(
        "--constant",
        action="append",
        default=[],
        metavar="NAME=VALUE",
        help="override a bound constant (repeatable)",
    )
    provision.add_argument("--csv", help="also write the table to this CSV file")
    provision.set_defaults(func=cmd_provision)

    verify = sub.add_parser("verify", help="run the claim-check suite")
    verify.add_argument(
        "--claims",
        nargs="+",
        metavar="GROUP",
        help=(
            "claim groups to run (prefix match); known: "
            + ", ".join(g for g, _ in CLAIM_GROUPS)
        ),
    )
    verify.add_argument("--seed", type=int, default=0, help="master seed")
    verify.add_argument("--cycles", type=int, default=10_000, help="renewal cycles")
    verify.add_argument(
        "--samples", type=int, default=10**6, help="Monte-Carlo walk samples"
    )
    verify.add_argument(
        "--reps", type=int, default=4, help="replications for simulated claims"
    )
    verify.add_argument(
        "--slack",
        type=float,
        default=None,
        help="override the documented tolerance of every selected claim",
    )
    verify.add_argument("--k", type=int, default=DEFAULT_POINT.k)
    verify.add_argument("--rho", type=float, default=DEFAULT_POINT.rho)
    verify.add_argument("--mu", type=float, default=DEFAULT_POINT.mu)
    verify.add_argument("--beta", type=float, default=DEFAULT_POINT.beta)
    verify.add_argument(
        "--chunks",
        type=int,
        default=1,
        help="independent cycle-collection chunks (part of the experiment "
        "definition; results depend on it, not on --threads)",
    )
    verify.add_argument("--threads", type=int, default=None, help="parallelism cap")
    verify.add_argument("--out", help="manifest CSV path (default: stdout)")
    verify.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SetupQueueError as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
