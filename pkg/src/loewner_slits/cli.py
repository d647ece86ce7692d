"""Command-line front end.

Every run resolves its parameters into one config dictionary, echoes it to
stderr and embeds it in the output (a leading ``# config: {...}`` line in CSV,
a ``"config"`` key in JSON).  Exit codes: 0 success, 1 usage or input errors,
2 a verification that ran but did not pass.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import verify as V
from .curves import Curve, read_curve_csv, write_curve_csv
from .driving import DrivingTerm
from .errors import LoewnerError
from .evolution import (
    evolve,
    hydrodynamic_coefficient,
    make_graded_mesh,
    singular_solutions,
    solve_forward,
    solve_inverse,
    trace_points,
)
from .measure import hm_interval, hm_mc_interval, hm_mc_oracle, hm_slit_sides, measure_series
from .zipper import compute_driving

N_MAX = 10**8
EXIT_OK, EXIT_ERROR, EXIT_FAILED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; here usage errors are status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------

def _term_arg(text: str) -> DrivingTerm:
    if text.startswith("@"):
        text = Path(text[1:]).read_text()
    try:
        return DrivingTerm.from_json(text)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"invalid --term: {exc}") from exc


def _complex_arg(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def _add_output(p):
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=None)


def _add_mesh(p, T=1.0, N=1000):
    p.add_argument("--T", type=float, default=T, help="final capacity time")
    p.add_argument("--N", type=int, default=N, help="number of mesh intervals")
    p.add_argument("--grading", type=float, default=2.0, help="mesh grading exponent")


def _add_term(p, required=True):
    p.add_argument("--term", required=required,
                   help='driving term as JSON, e.g. \'{"kind":"sqrt","c":1}\', or @file')


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="loewner-slits", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("forward", help="f(z, t_j) along the mesh")
    _add_term(p)
    _add_mesh(p)
    p.add_argument("--z", type=_complex_arg, default=1j, help="start point, e.g. 0.5+1j")
    _add_output(p)

    p = sub.add_parser("singular", help="singular solutions f1, f2 (and optionally the trace)")
    _add_term(p)
    _add_mesh(p)
    p.add_argument("--with-trace", action="store_true", help="fill the tip columns")
    _add_output(p)

    p = sub.add_parser("trace", help="trace tips as an x,y curve")
    _add_term(p)
    _add_mesh(p)
    _add_output(p)

    p = sub.add_parser("zip", help="driving term of a polyline slit")
    p.add_argument("--curve", required=True, help="x,y CSV starting with 0,0")
    _add_output(p)

    p = sub.add_parser("hm", help="harmonic measures (interval, or the two slit sides)")
    _add_term(p, required=False)
    _add_mesh(p)
    p.add_argument("--z", type=_complex_arg, default=1j, help="evaluation point (interval mode)")
    p.add_argument("--a", type=float, help="interval left end (interval mode)")
    p.add_argument("--b", type=float, help="interval right end (interval mode)")
    p.add_argument("--mc", action="store_true", help="add the random-walk estimate")
    p.add_argument("--walkers", type=int, default=100_000)
    p.add_argument("--side", type=int, choices=(1, 2), default=1)
    p.add_argument("--seed", type=int, default=0)
    _add_output(p)

    p = sub.add_parser("verify", help="run one named experiment")
    vsub = p.add_subparsers(dest="claim", required=True, parser_class=_Parser)

    q = vsub.add_parser("thm2", help="limits of f_k/sqrt(t) for lambda = c sqrt(t)")
    q.add_argument("--c", type=float, required=True)
    q.add_argument("--N", type=int, default=V.DEFAULT_N)
    _add_output(q)

    q = vsub.add_parser("thm3", help="limits +-2 for lambda = A t^alpha")
    q.add_argument("--A", type=float, required=True)
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--N", type=int, default=V.DEFAULT_N)
    q.add_argument("--T", type=float, default=None, help="ladder top (default: automatic)")
    _add_output(q)

    q = vsub.add_parser("bounds", help="bound sequences k'_n, k''_n")
    q.add_argument("--c", type=float, required=True)
    q.add_argument("--epsilon-prime", type=float, default=0.5)
    q.add_argument("--steps", type=int, default=60)
    _add_output(q)

    q = vsub.add_parser("thm1", help="m1/m2 -> 1 on the arc fixture")
    q.add_argument("--radius", type=float, default=1.0)
    q.add_argument("--n-points", type=int, default=V.DEFAULT_FIXTURE_POINTS)
    q.add_argument("--fixture", choices=("arc", "vertical"), default="arc")
    _add_output(q)

    q = vsub.add_parser("arclength", help="s(t)/sqrt(t) -> 2 on the arc fixture")
    q.add_argument("--radius", type=float, default=1.0)
    q.add_argument("--n-points", type=int, default=V.DEFAULT_FIXTURE_POINTS)
    _add_output(q)

    q = vsub.add_parser("prop1", help="M1/M2 -> (1-c)/(1+c) on a line fixture")
    q.add_argument("--c-angle", type=float, required=True)
    q.add_argument("--n-points", type=int, default=V.DEFAULT_FIXTURE_POINTS)
    _add_output(q)

    q = vsub.add_parser("cor1", help="departure angle of the trace for c != 0")
    q.add_argument("--c", type=float, required=True)
    q.add_argument("--N", type=int, default=4000)
    _add_output(q)

    q = vsub.add_parser("scaling", help="trace covariance under sqrt(n) lambda(t/n)")
    _add_term(q, required=False)
    q.add_argument("--curve", help="use the zipper driving term of this curve instead")
    q.add_argument("--n", type=float, required=True)
    q.add_argument("--T", type=float, default=1.0)
    q.add_argument("--N", type=int, default=2000)
    q.add_argument("--grading", type=float, default=2.0)
    _add_output(q)

    q = vsub.add_parser("roundtrip", help="sin(5t) -> trace -> zipper -> driving")
    q.add_argument("--N", type=int, default=10_000)
    q.add_argument("--T", type=float, default=0.2)
    _add_output(q)

    q = vsub.add_parser("mc", help="random-walk vs conformal slit-side measure")
    q.add_argument("--walkers", type=int, default=1_000_000)
    q.add_argument("--seed", type=int, default=0)
    _add_output(q)

    return parser


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _config_line(config: dict) -> str:
    return "# config: " + json.dumps(V._plain(config), sort_keys=True) + "\n"


def _emit(text: str, out: Optional[str]):
    if out:
        Path(out).write_text(text, newline="")
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _csv(config: dict, header: Sequence[str], rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(f"{float(v):.17g}" for v in row) for row in rows]
    return _config_line(config) + "\n".join(lines) + "\n"


def _json(config: dict, payload: dict) -> str:
    body = {"config": config}
    body.update(payload)
    return json.dumps(V._plain(body), indent=2) + "\n"


def _mesh(args):
    if args.N > N_MAX:
        raise UsageError(f"N must not exceed {N_MAX}")
    return make_graded_mesh(args.T, args.N, args.grading)


def _mesh_config(args) -> dict:
    return {"T": args.T, "N": args.N, "grading_exponent": args.grading}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_forward(args, config):
    term = _term_arg(args.term)
    config.update(term=term.to_dict(), mesh=_mesh_config(args), z=[args.z.real, args.z.imag])
    mesh = _mesh(args)
    f = solve_forward(term, mesh, args.z)
    if args.format == "json":
        return _json(config, {"t": mesh.nodes, "f_re": f.real, "f_im": f.imag}), EXIT_OK
    return _csv(config, ("t", "f_re", "f_im"), zip(mesh.nodes, f.real, f.imag)), EXIT_OK


def _cmd_singular(args, config):
    term = _term_arg(args.term)
    config.update(term=term.to_dict(), mesh=_mesh_config(args), with_trace=args.with_trace)
    res = evolve(term, _mesh(args), with_trace=args.with_trace)
    if args.format == "json":
        payload = {"t": res.t, "lambda": res.lam, "f1": res.f1, "f2": res.f2}
        if res.tip is not None:
            payload.update(tip_re=res.tip.real, tip_im=res.tip.imag)
        return _json(config, payload), EXIT_OK
    return _config_line(config) + res.to_csv(), EXIT_OK


def _cmd_trace(args, config):
    term = _term_arg(args.term)
    config.update(term=term.to_dict(), mesh=_mesh_config(args))
    tips = trace_points(term, _mesh(args))
    if args.format == "json":
        return _json(config, {"x": tips.real, "y": tips.imag}), EXIT_OK
    return _config_line(config) + write_curve_csv(tips), EXIT_OK


def _cmd_zip(args, config):
    config.update(curve=str(args.curve))
    if not Path(args.curve).exists():
        raise UsageError(f"curve file not found: {args.curve}")
    term, mesh = compute_driving(read_curve_csv(Path(args.curve)))
    config.update(points=int(mesh.N + 1), total_capacity=mesh.T)
    if args.format == "json":
        return _json(config, {"term": term.to_dict()}), EXIT_OK
    return _csv(config, ("t", "lambda"), zip(term.times, term.values)), EXIT_OK


def _cmd_hm(args, config):
    if args.term is None:
        if args.a is None or args.b is None:
            raise UsageError("hm needs either --term or both --a and --b")
        config.update(z=[args.z.real, args.z.imag], a=args.a, b=args.b)
        payload: dict[str, Any] = {"measure": hm_interval(args.z, args.a, args.b)}
        if args.mc:
            config.update(walkers=args.walkers, seed=args.seed)
            walk = hm_mc_interval(args.z, args.a, args.b, args.walkers, seed=args.seed)
            payload["mc"] = json.loads(walk.to_json())
        return _json(config, payload), EXIT_OK

    term = _term_arg(args.term)
    config.update(term=term.to_dict(), mesh=_mesh_config(args))
    mesh = _mesh(args)
    res = singular_solutions(term, mesh)
    if not args.mc:
        series = measure_series(res)
        if args.format == "json":
            return _json(config, {"t": series.times, "m1": series.m1, "m2": series.m2,
                                  "ratio": series.ratio}), EXIT_OK
        return _config_line(config) + series.to_csv(), EXIT_OK

    config.update(walkers=args.walkers, side=args.side, seed=args.seed)
    m1, m2 = hm_slit_sides(res, mesh.N)
    z0 = solve_inverse(term, mesh, 1j)
    curve = Curve(trace_points(term, mesh))
    walk = hm_mc_oracle(curve, args.side, z0, args.walkers, seed=args.seed)
    payload = json.loads(walk.to_json())
    payload.update(conformal=m1 if args.side == 1 else m2, z0=[z0.real, z0.imag])
    return _json(config, payload), EXIT_OK


def _run_verify(args, config):
    claim = args.claim
    if claim == "thm2":
        config.update(c=args.c, N=args.N)
        rep = V.verify_thm2(args.c, N=args.N)
    elif claim == "thm3":
        config.update(A=args.A, alpha=args.alpha, N=args.N, T=args.T)
        rep = V.verify_thm3(args.A, args.alpha, N=args.N, T=args.T)
    elif claim == "bounds":
        config.update(c=args.c, epsilon_prime=args.epsilon_prime, n_steps=args.steps)
        rep = V.verify_bounds(args.c, args.epsilon_prime, args.steps)
    elif claim == "thm1":
        config.update(radius=args.radius, n_points=args.n_points, fixture=args.fixture)
        rep = V.verify_thm1(args.radius, args.n_points, fixture=args.fixture)
    elif claim == "arclength":
        config.update(radius=args.radius, n_points=args.n_points)
        rep = V.verify_arclength(args.radius, args.n_points)
    elif claim == "prop1":
        config.update(c_angle=args.c_angle, n_points=args.n_points)
        rep = V.verify_prop1(args.c_angle, args.n_points)
    elif claim == "cor1":
        config.update(c=args.c, N=args.N)
        rep = V.verify_cor1(args.c, args.N)
    elif claim == "scaling":
        if args.curve:
            if not Path(args.curve).exists():
                raise UsageError(f"curve file not found: {args.curve}")
            term, mesh = compute_driving(read_curve_csv(Path(args.curve)))
            config.update(curve=str(args.curve), n=args.n)
        elif args.term:
            term = _term_arg(args.term)
            if args.N > N_MAX:
                raise UsageError(f"N must not exceed {N_MAX}")
            mesh = (make_graded_mesh(args.T, args.N, args.grading) if term.kind != "sampled"
                    else None)
            config.update(term=term.to_dict(), n=args.n, mesh=_mesh_config(args))
        else:
            raise UsageError("scaling needs --term or --curve")
        rep = V.verify_scaling(term, args.n, mesh)
    elif claim == "roundtrip":
        config.update(N=args.N, T=args.T)
        rep = V.verify_roundtrip(args.N, args.T)
    elif claim == "mc":
        config.update(walkers=args.walkers, seed=args.seed)
        rep = V.verify_mc(args.walkers, args.seed)
    else:  # pragma: no cover - argparse restricts the choices
        raise UsageError(f"unknown claim {claim}")
    code = EXIT_OK if rep.passed else EXIT_FAILED
    if args.format == "csv":
        if rep.series is None:
            raise UsageError(f"verify {claim} has no series to write as CSV")
        return _config_line(config) + rep.series_csv(), code
    body = {"config": config}
    body.update(rep.as_dict())
    return json.dumps(V._plain(body), indent=2) + "\n", code


COMMANDS = {
    "forward": _cmd_forward,
    "singular": _cmd_singular,
    "trace": _cmd_trace,
    "zip": _cmd_zip,
    "hm": _cmd_hm,
    "verify": _run_verify,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv``, run the command, write its output and return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    config: dict[str, Any] = {"command": args.command}
    if args.command == "verify":
        config["claim"] = args.claim
    config["format"] = args.format or ("json" if args.command in ("verify", "hm") else "csv")
    try:
        text, code = COMMANDS[args.command](args, config)
        print("config: " + json.dumps(V._plain(config), sort_keys=True), file=sys.stderr)
        _emit(text, args.out)
        return code
    except (UsageError, LoewnerError, ValueError, OSError) as exc:
        print(f"loewner-slits: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
