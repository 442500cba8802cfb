"""Command-line front end.

Subcommands: integrate, certify, kstar, diagram, fov, convergence,
workprec, hatt.  Exit codes: 0 success, 1 configuration error, 2
numerical blow-up.  All CSV floats are written as ``%.16e`` so identical
configurations produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import harness
from .diagrams import boundary, diagram
from .errors import NoBracket, TaseRkError
from .problems import make_problem
from .splitting import fov_q
from .tase import hat_t, tase_operator

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_BLOWUP = 2


def _fmt(x):
    return f"{x:.16e}"


def _parse_y(text):
    if text.lower() in ("inf", "-inf", "infinity"):
        return -math.inf
    return float(text)


def _load_config(path):
    values = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {line!r}")
            key, val = (part.strip() for part in line.split("=", 1))
            values[key.replace("-", "_")] = val
    return values


def _add_problem_args(parser):
    parser.add_argument("--problem", required=True,
                        help="registered problem name")
    parser.add_argument("--M", type=int, default=None, help="grid points")
    parser.add_argument("--eps", type=float, default=None)
    parser.add_argument("--D", type=float, default=None)
    parser.add_argument("--a", type=float, default=None)
    parser.add_argument("--b", type=float, default=None)
    parser.add_argument("--tau", type=float, default=None)
    parser.add_argument("--kappa", type=float, default=None)
    parser.add_argument("--te", type=float, default=None)


def _build_problem(args):
    return make_problem(
        args.problem,
        M=args.M, eps=args.eps, D=args.D, a=args.a, b=args.b,
        tau=args.tau, kappa=args.kappa, te=args.te,
    )


def _write_rows(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def cmd_integrate(args):
    problem = _build_problem(args)
    run = harness.run_method(problem, args.method, args.k, t_end=args.te)
    ds_t = max(1, args.downsample_time)
    ds_x = max(1, args.downsample_space)
    d = run.states.shape[1]
    cols = list(range(0, d, ds_x))
    header = ["t"] + [f"u_{j}" for j in cols]
    rows = []
    for i in range(0, len(run.times), ds_t):
        rows.append([_fmt(run.times[i])] + [_fmt(run.states[i, j]) for j in cols])
    with open(args.out, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
        if run.blowup:
            fh.write(f"# blowup at t = {_fmt(run.times[-1])}\n")
    if run.blowup:
        print(f"blow-up at t = {run.times[-1]:.6g} (step {run.blowup_index})",
              file=sys.stderr)
        return EXIT_BLOWUP
    return EXIT_OK


def cmd_certify(args):
    problem = _build_problem(args)
    report = harness.certify(
        problem,
        ps=tuple(args.p),
        k=args.k,
        q_list=tuple(args.q),
        n_theta=args.ntheta,
    )
    text = json.dumps(report, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_kstar(args):
    problem = _build_problem(args)
    if args.homogeneous:
        problem = problem.homogeneous()
    try:
        kstar = harness.kstar_empirical(
            problem, args.method, t_end=args.te, k_init=args.k_init
        )
    except NoBracket as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print("inf" if math.isinf(kstar) else _fmt(kstar))
    return EXIT_OK


def cmd_diagram(args):
    op = tase_operator(args.p)
    for y in args.y:
        query = diagram(args.p, y, op)
        curve = boundary(query, n_theta=args.ntheta)
        label = "inf" if math.isinf(y) else f"{y:g}"
        path = f"{args.out}_p{args.p}_y{label}.csv"
        curve.to_csv(path)
        print(path)
    return EXIT_OK


def cmd_fov(args):
    problem = _build_problem(args)
    s = problem.splitting()
    fb = fov_q(s, args.q, n_theta=args.ntheta)
    fb.to_csv(args.out)
    print(args.out)
    return EXIT_OK


def cmd_hatt(args):
    ys = -np.logspace(math.log10(-args.ymax), math.log10(-args.ymin), args.n)
    ys = np.sort(ys)
    rows = []
    for p in args.p:
        op = tase_operator(p)
        for y in ys:
            rows.append([_fmt(y), str(p), _fmt(hat_t(op, y))])
    _write_rows(args.out, ["y", "p", "hat_t"], rows)
    print(args.out)
    return EXIT_OK


def _table_rows(table):
    rows = []
    for r in table:
        rows.append(
            [
                r["method"],
                _fmt(r["k"]),
                _fmt(r["error"]),
                _fmt(r["wall_time"]),
                str(r["n_solves"]),
                str(r["n_factorizations"]),
                _fmt(r["observed_order"]) if np.isfinite(r["observed_order"]) else "nan",
            ]
        )
    return rows


_TABLE_HEADER = ["method", "k", "error", "wall_time", "n_solves",
                 "n_factorizations", "observed_order"]


def cmd_convergence(args):
    problem = _build_problem(args)
    ks = [float(x) for x in args.klist.split(",")]
    table = harness.convergence_table(problem, args.method, ks, t_end=args.te)
    _write_rows(args.out, _TABLE_HEADER, _table_rows(table))
    print(args.out)
    return EXIT_OK


def cmd_workprec(args):
    problem = _build_problem(args)
    ks = [float(x) for x in args.klist.split(",")]
    methods = args.methods.split(",")
    table = harness.work_precision(problem, methods, ks, t_end=args.te)
    _write_rows(args.out, _TABLE_HEADER, _table_rows(table))
    print(args.out)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="taserk",
        description="TASE-RK integrators, stability diagrams and splitting certificates",
    )
    parser.add_argument("--config", default=None,
                        help="flat key = value file; command-line flags win")
    parser.add_argument("--seed", type=int, default=None,
                        help="seed for any randomized component")
    sub = parser.add_subparsers(dest="command", required=True)

    p_int = sub.add_parser("integrate", help="run a method and dump the trajectory")
    _add_problem_args(p_int)
    p_int.add_argument("--method", required=True, help="trk2|trk3|trk4|ros2|row:<file>")
    p_int.add_argument("--k", type=float, required=True)
    p_int.add_argument("--out", required=True)
    p_int.add_argument("--downsample-time", type=int, default=1)
    p_int.add_argument("--downsample-space", type=int, default=1)
    p_int.set_defaults(func=cmd_integrate)

    p_cert = sub.add_parser("certify", help="run the stability certificates")
    _add_problem_args(p_cert)
    p_cert.add_argument("--p", type=int, nargs="+", default=[2, 3, 4])
    p_cert.add_argument("--k", type=float, default=None)
    p_cert.add_argument("--q", type=float, nargs="+", default=[1.0 / 3.0, 0.5, 1.0, 2.0])
    p_cert.add_argument("--ntheta", type=int, default=720)
    p_cert.add_argument("--out", default=None)
    p_cert.set_defaults(func=cmd_certify)

    p_k = sub.add_parser("kstar", help="bisect the empirical stability threshold")
    _add_problem_args(p_k)
    p_k.add_argument("--method", required=True)
    p_k.add_argument("--k-init", type=float, default=0.1)
    p_k.add_argument("--homogeneous", action="store_true",
                     help="drop the constant forcing (linear problems)")
    p_k.set_defaults(func=cmd_kstar)

    p_d = sub.add_parser("diagram", help="emit stability-diagram boundary CSVs")
    p_d.add_argument("--p", type=int, required=True)
    p_d.add_argument("--y", type=_parse_y, nargs="+", required=True,
                     help="negative values, or 'inf' for the limit diagram")
    p_d.add_argument("--ntheta", type=int, default=720)
    p_d.add_argument("--out", required=True, help="output path prefix")
    p_d.set_defaults(func=cmd_diagram)

    p_f = sub.add_parser("fov", help="emit a weighted field-of-values CSV")
    _add_problem_args(p_f)
    p_f.add_argument("--q", type=float, default=1.0)
    p_f.add_argument("--ntheta", type=int, default=720)
    p_f.add_argument("--out", required=True)
    p_f.set_defaults(func=cmd_fov)

    p_h = sub.add_parser("hatt", help="sample the scalar damping function")
    p_h.add_argument("--p", type=int, nargs="+", default=[2, 3, 4])
    p_h.add_argument("--ymin", type=float, default=-1e8)
    p_h.add_argument("--ymax", type=float, default=-1e-2)
    p_h.add_argument("--n", type=int, default=400)
    p_h.add_argument("--out", required=True)
    p_h.set_defaults(func=cmd_hatt)

    p_c = sub.add_parser("convergence", help="error-versus-step table for one method")
    _add_problem_args(p_c)
    p_c.add_argument("--method", required=True)
    p_c.add_argument("--klist", required=True, help="comma-separated step sizes")
    p_c.add_argument("--out", required=True)
    p_c.set_defaults(func=cmd_convergence)

    p_w = sub.add_parser("workprec", help="work-precision table for several methods")
    _add_problem_args(p_w)
    p_w.add_argument("--methods", required=True, help="comma-separated method specs")
    p_w.add_argument("--klist", required=True)
    p_w.add_argument("--out", required=True)
    p_w.set_defaults(func=cmd_workprec)

    return parser


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    # pre-scan for --config so file values become defaults
    if "--config" in argv:
        idx = argv.index("--config")
        try:
            cfg = _load_config(argv[idx + 1])
        except (OSError, ValueError, IndexError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        for action in parser._subparsers._group_actions:
            for sp in action.choices.values():
                for a in sp._actions:
                    if a.dest in cfg:
                        a.default = _coerce(sp, a.dest, cfg[a.dest])
                        a.required = False
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    if getattr(args, "seed", None) is not None:
        np.random.seed(args.seed)
    try:
        return args.func(args)
    except (TaseRkError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def _coerce(subparser, key, value):
    for action in subparser._actions:
        if action.dest == key and action.type is not None:
            if action.nargs in ("+", "*"):
                return [action.type(v) for v in value.split()]
            return action.type(value)
    return value


if __name__ == "__main__":
    sys.exit(main())
