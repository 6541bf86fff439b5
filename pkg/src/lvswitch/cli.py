"""Command-line interface: ``lvswitch {classify,invasion,curve,simulate,support}``.

Rates and mixing parameters given on the command line refer to the labels
used in the pair file.  Internally the pair is relabeled so that
``a0 <= a1``; when that happens the rates are swapped before any
computation and results are reported back in the file's labels.

Exit codes: 0 success, 2 input error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import io as lvio
from .env_model import (
    EnvPair,
    SwitchRates,
    classify,
    intervals,
    mix,
    pair_report,
    relabeled,
)
from .errors import InputError, LVSwitchError, NumericalError, PreconditionViolated
from .geometry import gamma_prime, inward_flow_check, support_region, tangency_set
from .invasion import lambda_xy
from .pdmp import DEFAULT_TOL, EXTINCTION_THRESHOLD, occupation_stats, simulate_pdmp
from .regimes import critical_curve, label, resolve_workers

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lvswitch", description="Lotka-Volterra competition under random environmental switching.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--pair-file", required=True, help="JSON file with env0 and env1")
        p.add_argument("--out", help="output path (stdout when omitted, where allowed)")

    def rates(p):
        p.add_argument("--s", type=float, help="fraction of time in env1")
        p.add_argument("--t", type=float, help="total switching rate")
        p.add_argument("--u", type=float, help="scaled weight coordinate")
        p.add_argument("--v", type=float, help="scaled total rate")

    p = sub.add_parser("classify", help="portrait types and critical intervals")
    common(p)
    p.add_argument("--s", type=float, help="also classify the averaged environment at s")

    p = sub.add_parser("invasion", help="invasion rates and regime")
    common(p)
    rates(p)

    p = sub.add_parser("curve", help="critical switching-rate curve")
    common(p)
    p.add_argument("--species", choices=("x", "y"), required=True)
    p.add_argument("--grid", type=int, default=64, help="number of s samples")
    p.add_argument("--tol", type=float, default=1e-9, help="relative bracket width in t")
    p.add_argument("--threads", type=int, default=None)

    p = sub.add_parser("simulate", help="simulate the switched process")
    common(p)
    rates(p)
    p.add_argument("--x0", type=float, required=True)
    p.add_argument("--y0", type=float, required=True)
    p.add_argument("--horizon", type=float, default=1e3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)

    p = sub.add_parser("support", help="support geometry polylines and tangency set")
    common(p)
    return parser


# ---------------------------------------------------------------------------
# helpers


def _user_pair(pair: EnvPair) -> EnvPair:
    return relabeled(pair) if pair.canonical_order_swapped else pair


def _user_s(pair: EnvPair, s: float) -> float:
    return 1.0 - s if pair.canonical_order_swapped else s


def _rates(args, pair: EnvPair) -> SwitchRates:
    """Canonical-label rates from exactly one of ``(s, t)`` or ``(u, v)``."""
    st = args.s is not None or args.t is not None
    uv = args.u is not None or args.v is not None
    if st == uv:
        raise InputError("give exactly one of (--s, --t) or (--u, --v)")
    if st:
        if args.s is None or args.t is None:
            raise InputError("--s and --t must be given together")
        rates = SwitchRates.from_st(args.s, args.t)
    else:
        if args.u is None or args.v is None:
            raise InputError("--u and --v must be given together")
        rates = SwitchRates.from_uv(_user_pair(pair), args.u, args.v)
    return rates.swapped() if pair.canonical_order_swapped else rates


def _interval(iv):
    return None if iv is None else [float(iv[0]), float(iv[1])]


def _portrait(env) -> dict:
    pt = classify(env)
    return {
        "type": pt.tag.value,
        "equilibria": [{"point": list(p), "nature": n} for p, n in pt.equilibria],
    }


def _emit(args, doc) -> list:
    if args.out:
        lvio.write_json(args.out, doc)
        return [args.out]
    sys.stdout.write(lvio.dumps(doc))
    return []


def _manifest(args, pair, outputs, started, **extra) -> None:
    if not outputs:
        return
    doc = {
        "tool": "lvswitch",
        "version": __version__,
        "command": args.command,
        "inputs": {k: v for k, v in vars(args).items() if k != "command"},
        "pair": lvio.pair_document(_user_pair(pair)),
        "relabeled": pair.canonical_order_swapped,
        "outputs": [str(o) for o in outputs],
        **extra,
        "wall_clock_seconds": time.perf_counter() - started,
    }
    lvio.write_json(lvio.manifest_path(outputs[0]), doc)


# ---------------------------------------------------------------------------
# commands


def cmd_classify(args, pair: EnvPair, started: float) -> None:
    user = _user_pair(pair)
    ci = intervals(user)
    doc = {
        "relabeled": pair.canonical_order_swapped,
        "environments": {"env0": _portrait(user.env0), "env1": _portrait(user.env1)},
        "quadratic_I": list(ci.quad_I),
        "quadratic_J": list(ci.quad_J),
        "I": _interval(ci.I),
        "J": _interval(ci.J),
        "I_tilde": _interval(ci.I_tilde),
        "J_tilde": _interval(ci.J_tilde),
        "I_and_J": _interval(ci.I_and_J),
        **pair_report(user),
    }
    if args.s is not None:
        if not 0.0 <= args.s <= 1.0:
            raise InputError(f"s must lie in [0, 1], got {args.s!r}")
        env = mix(user, args.s)
        doc["averaged"] = {"s": args.s, "environment": env.as_dict(), **_portrait(env)}
    _manifest(args, pair, _emit(args, doc), started)


def cmd_invasion(args, pair: EnvPair, started: float) -> None:
    rates = _rates(args, pair)
    result = lambda_xy(pair, rates)
    user_rates = rates.swapped() if pair.canonical_order_swapped else rates
    u, v = user_rates.uv(_user_pair(pair))
    doc = {
        "lambda_x": result.lambda_x,
        "lambda_y": result.lambda_y,
        "regime": label(result.lambda_x, result.lambda_y),
        "sign_x": int(np.sign(result.lambda_x)),
        "sign_y": int(np.sign(result.lambda_y)),
        "method": result.method,
        "error_estimate": result.error_estimate,
        "s": user_rates.s,
        "t": user_rates.t,
        "u": u,
        "v": v,
        "lambda0": user_rates.lambda0,
        "lambda1": user_rates.lambda1,
        "relabeled": pair.canonical_order_swapped,
    }
    _manifest(args, pair, _emit(args, doc), started)


def cmd_curve(args, pair: EnvPair, started: float) -> None:
    if not args.out:
        raise InputError("--out is required for curve")
    if not args.tol > 0:
        raise InputError("--tol must be positive")
    workers = resolve_workers(args.threads)
    curve = critical_curve(pair, args.species, s_count=args.grid, tol=args.tol, workers=workers)
    s_user = np.array([_user_s(pair, s) for s in curve.s])
    order = np.argsort(s_user, kind="stable")
    comments = []
    if curve.domain is None:
        comments.append(f"domain of t_{args.species} is empty; t_critical = inf for every s")
    lvio.write_csv(args.out, ["s", "t_critical"], zip(s_user[order], curve.t[order]), comments)
    failed = int(np.isnan(curve.t).sum())
    _manifest(
        args,
        pair,
        [args.out],
        started,
        tolerances={"t_relative": args.tol},
        threads=workers,
        domain=_interval(None if curve.domain is None else sorted(_user_s(pair, e) for e in curve.domain)),
        failed_samples=failed,
    )
    if failed:
        raise NumericalError(f"{failed} root searches failed (rows written as nan)")


def cmd_simulate(args, pair: EnvPair, started: float) -> None:
    if not args.out:
        raise InputError("--out is required for simulate")
    rates = _rates(args, pair)
    i0 = 1 if pair.canonical_order_swapped else 0
    traj = simulate_pdmp(pair, rates, (args.x0, args.y0), i0, args.horizon, seed=args.seed, tol=args.tol)
    env = traj.env_indices
    if pair.canonical_order_swapped:
        env = 1 - env
    rows = zip(traj.times, traj.states[:, 0], traj.states[:, 1], env.astype(float))
    lines = ["time,x,y,env"]
    lines.extend(f"{lvio.fmt(t)},{lvio.fmt(x)},{lvio.fmt(y)},{int(e)}" for t, x, y, e in rows)
    Path(args.out).write_text("\n".join(lines) + "\n")
    stats = occupation_stats(traj)
    fraction_env1 = 1.0 - stats.fraction_env1 if pair.canonical_order_swapped else stats.fraction_env1
    _manifest(
        args,
        pair,
        [args.out],
        started,
        seeds={"seed": args.seed, "trajectory_id": 0},
        tolerances={"integrator": args.tol, "extinction_threshold": EXTINCTION_THRESHOLD},
        occupation={
            "window": list(stats.window),
            "fraction_env1": fraction_env1,
            "mean_x": stats.mean_x,
            "mean_y": stats.mean_y,
            "min_x": stats.min_x,
            "min_y": stats.min_y,
            "extinct_x": stats.extinct_x,
            "extinct_y": stats.extinct_y,
        },
        samples=len(traj.times),
        switches=len(traj.jump_times),
    )


def cmd_support(args, pair: EnvPair, started: float) -> None:
    if not args.out:
        raise InputError("--out (a path prefix) is required for support")
    prefix = args.out
    outputs, notes, extra = [], [], {}
    try:
        region = gamma_prime(pair)
    except PreconditionViolated as exc:
        notes.append(f"gamma_prime skipped: PreconditionViolated: {exc}")
    else:
        path = f"{prefix}.gamma_prime.csv"
        lvio.write_polylines(path, region.arcs)
        outputs.append(path)
        extra["gamma_prime"] = {"y_axis_segment": region.notes["y_axis_segment"], "orientation": region.notes["orientation"], "inward_flow_max": inward_flow_check(region, pair)}
    try:
        tset = tangency_set(pair)
    except PreconditionViolated as exc:
        notes.append(f"tangency set skipped: PreconditionViolated: {exc}")
    else:
        path = f"{prefix}.tangency.json"
        lvio.write_json(path, [p.as_dict() for p in tset.points])
        outputs.append(path)
        extra["tangency"] = {"count": len(tset), "mixing_parameter": [_user_s(pair, p.s) for p in tset.points]}
        for k, point in enumerate(tset.points):
            region = support_region(pair, (point.x, point.y))
            path = f"{prefix}.cz_{k}.csv"
            lvio.write_polylines(path, region.arcs)
            outputs.append(path)
    for note in notes:
        print(note, file=sys.stderr)
    if not outputs:
        raise PreconditionViolated("; ".join(notes))
    # manifest sits next to the prefix rather than any single output
    _manifest(args, pair, [prefix], started, produced=outputs, notes=notes, **extra)


COMMANDS = {
    "classify": cmd_classify,
    "invasion": cmd_invasion,
    "curve": cmd_curve,
    "simulate": cmd_simulate,
    "support": cmd_support,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code
    started = time.perf_counter()
    try:
        pair = lvio.load_pair(args.pair_file)
        if pair.canonical_order_swapped:
            print("note: environments relabeled so that a0 <= a1; rates are swapped internally", file=sys.stderr)
        COMMANDS[args.command](args, pair, started)
    except InputError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, FloatingPointError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except LVSwitchError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
