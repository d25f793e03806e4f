"""Command-line interface.

Exit codes: 0 when every check passes, 1 on a verification failure, 2 on a
usage or configuration error (unknown group, bad flags, invalid config).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .algebra import get_group, homogeneous_dimension, load_algebra
from .errors import AlgebraError, CarnotError, UnknownGroup
from .poly import coefficient_to_str, parse_coefficient, parse_polynomial

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(payload: dict, fmt: str, text_lines: Sequence[str] | None = None,
          out=None) -> None:
    out = out or sys.stdout
    if fmt == "json":
        out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        lines = text_lines if text_lines is not None else [f"{k}: {v}" for k, v in payload.items()]
        out.write("\n".join(lines) + "\n")


def _group(args):
    try:
        return get_group(args.group)
    except UnknownGroup as exc:
        raise UsageError(str(exc)) from exc


def _poly(args, alg):
    try:
        return parse_polynomial(args.poly, alg.ring)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _numbers(text: str, exact: bool = False) -> list:
    try:
        parts = [p for p in text.split(",") if p.strip()]
        return [parse_coefficient(p.strip()) if exact else float(p) for p in parts]
    except ValueError as exc:
        raise UsageError(f"cannot parse number list {text!r}") from exc


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError as exc:
        raise UsageError(f"cannot parse multi-index {text!r}") from exc


# -- group ------------------------------------------------------------------

def cmd_group(args) -> int:
    if args.action == "validate":
        target = args.path or args.group
        try:
            alg = load_algebra(target) if Path(target).exists() else get_group(target)
        except (AlgebraError, UnknownGroup, ValueError, KeyError, json.JSONDecodeError) as exc:
            _emit({"valid": False, "error": type(exc).__name__, "message": str(exc)}, args.format)
            return EXIT_USAGE
        _emit({"valid": True, "name": alg.name, "layer_dims": list(alg.layer_dims)}, args.format)
        return EXIT_OK
    alg = _group(args)
    payload = {
        "name": alg.name,
        "dim": alg.dim,
        "step": alg.step,
        "layer_dims": list(alg.layer_dims),
        "homogeneous_dimension": homogeneous_dimension(alg),
        "names": list(alg.names),
        "brackets": [f"[{alg.names[i]},{alg.names[j]}] = {coefficient_to_str(c)}*{alg.names[m]}"
                     for i, j, m, c in alg.brackets if i < j],
    }
    lines = [f"group {alg.name}: dim {alg.dim}, step {alg.step}, layers {tuple(alg.layer_dims)}, "
             f"Q = {payload['homogeneous_dimension']}", "coordinates: " + " ".join(alg.names)]
    lines += payload["brackets"]
    _emit(payload, args.format, lines)
    return EXIT_OK


# -- hermite / generating / moments ------------------------------------------

def cmd_hermite(args) -> int:
    from .diffops import apply_N
    from .spectral import hermite_basis

    alg = _group(args)
    basis = hermite_basis(alg, args.degree)
    if args.action == "check":
        fails = [str(h) for h in basis if apply_N(h) != h * args.degree]
        payload = {"group": alg.name, "degree": args.degree, "size": len(basis),
                   "passed": not fails, "failures": fails}
        _emit(payload, args.format, [f"{'PASS' if not fails else 'FAIL'} {len(basis)} members "
                                     f"of E_{args.degree} on {alg.name}"] + fails)
        return EXIT_OK if not fails else EXIT_FAIL
    payload = {"group": alg.name, "degree": args.degree,
               "basis": [str(h) for h in basis],
               "polynomials": [h.to_json_dict() for h in basis]}
    _emit(payload, args.format, [str(h) for h in basis])
    return EXIT_OK


def cmd_generating(args) -> int:
    from .hermite import (eigen_residual, generating_hermite, membership_check, step2_generating_hermite,
                          step2_rep_data)

    alg = _group(args)
    mu, mu_p = _ints(args.mu), _ints(args.mu_prime)
    if args.covector:
        rep = step2_rep_data(alg, _numbers(args.covector))
        h = step2_generating_hermite(alg, rep, mu, mu_p, args.degree)
        payload = {"group": alg.name, "path": "step2", "mu": list(mu), "mu_prime": list(mu_p),
                   "degree": args.degree, "representation": rep.to_dict(),
                   "omega": rep.omega.tolist(), "polynomial": h.to_json_dict(),
                   "text": str(h), "relative_residual": eigen_residual(h, args.degree)}
        ok = True
    else:
        h = generating_hermite(mu, mu_p, args.degree, alg)
        coords = membership_check(h, args.degree) if not h.is_zero() else []
        ok = coords is not None
        payload = {"group": alg.name, "path": "schrodinger", "mu": list(mu),
                   "mu_prime": list(mu_p), "degree": args.degree, "polynomial": h.to_json_dict(),
                   "text": str(h), "zero": h.is_zero(), "in_eigenspace": ok}
    if args.export:
        Path(args.export).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    _emit(payload, args.format, [payload["text"]])
    return EXIT_OK if ok else EXIT_FAIL


def cmd_moments(args) -> int:
    from .spectral import moment, monomial_basis

    alg = _group(args)
    if args.poly:
        f = _poly(args, alg)
        value = moment(f)
        _emit({"group": alg.name, "polynomial": str(f), "moment": coefficient_to_str(value)},
              args.format, [f"E[{f}] = {coefficient_to_str(value)}"])
        return EXIT_OK
    rows = []
    for d in range(args.max_degree + 1):
        for m in monomial_basis(alg, d):
            rows.append({"monomial": str(m), "degree": d, "moment": coefficient_to_str(moment(m))})
    _emit({"group": alg.name, "moments": rows}, args.format,
          [f"E[{r['monomial']}] = {r['moment']}" for r in rows])
    return EXIT_OK


# -- mehler ------------------------------------------------------------------

def cmd_mehler(args) -> int:
    from .spectral import mehler_poly

    alg = _group(args)
    f = _poly(args, alg)
    if args.action == "exact":
        if args.c is not None:
            if args.s is None:
                raise UsageError("--c needs --s")
            c, s = parse_coefficient(args.c), parse_coefficient(args.s)
            g = mehler_poly(f, circle=(c, s))
            mode = {"c": coefficient_to_str(c), "s": coefficient_to_str(s)}
        elif args.decay is not None:
            g = mehler_poly(f, decay=parse_coefficient(args.decay))
            mode = {"decay": args.decay}
        else:
            g = mehler_poly(f, t=args.t)
            mode = {"t": args.t}
        _emit({"group": alg.name, "input": str(f), **mode, "result": str(g),
               "polynomial": g.to_json_dict()}, args.format, [str(g)])
        return EXIT_OK
    from .sampling import mehler_mc

    gamma = _numbers(args.gamma) if args.gamma else [1.0] * alg.dim
    if len(gamma) != alg.dim:
        raise UsageError(f"--gamma needs {alg.dim} coordinates")
    est = mehler_mc(f, args.t, gamma, args.samples, args.seed, args.steps)
    exact_poly = mehler_poly(f, t=args.t)
    exact = float(complex(exact_poly(*[Fraction(v) for v in gamma])).real)
    z = est.z_score(exact)
    ok = abs(z) <= 4.0
    payload = {"group": alg.name, "polynomial": str(f), "t": args.t, "gamma": gamma,
               "estimate": est.to_dict(), "exact": exact, "z": z, "passed": ok}
    _emit(payload, args.format, [f"T_t f(gamma) ~ {est.value:.6f} +- {est.stderr:.6f} "
                                 f"(exact {exact:.6f}, z = {z:.3f})"])
    return EXIT_OK if ok else EXIT_FAIL


# -- kernel / sample ---------------------------------------------------------

def cmd_kernel(args) -> int:
    import numpy as np

    from .kernel import KernelEvaluator, kernel_eval, pde_and_scaling_residuals

    alg = _group(args)
    try:
        ev = KernelEvaluator(alg)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    point = np.array(_numbers(args.point)) if args.point else np.zeros(alg.dim)
    if point.shape != (alg.dim,):
        raise UsageError(f"--point needs {alg.dim} coordinates")
    if args.action == "eval":
        value = kernel_eval(point, ev, args.t)
        _emit({"group": alg.name, "point": point.tolist(), "t": args.t, "density": value},
              args.format, [repr(value)])
        return EXIT_OK
    pde, scale = pde_and_scaling_residuals(point, args.t, ev)
    ok = pde < 1e-6 and scale < 1e-8
    _emit({"group": alg.name, "point": point.tolist(), "t": args.t, "pde_residual": pde,
           "scaling_residual": scale, "passed": ok}, args.format,
          [f"pde residual {pde:.3e}", f"scaling residual (t={args.t}) {scale:.3e}"])
    return EXIT_OK if ok else EXIT_FAIL


def cmd_sample(args) -> int:
    from .sampling import BACKEND, sample_heat

    alg = _group(args)
    batch = sample_heat(alg, args.samples, args.seed, args.steps)
    if args.out:
        batch.to_csv(args.out)
    means = batch.coords.mean(axis=0).tolist()
    payload = {"group": alg.name, "samples": args.samples, "steps": args.steps,
               "seed": args.seed, "backend": BACKEND, "csv": args.out,
               "mean": means, "second_moment": (batch.coords ** 2).mean(axis=0).tolist()}
    _emit(payload, args.format)
    return EXIT_OK


# -- verify / report ---------------------------------------------------------

def cmd_verify(args) -> int:
    from .verify import Report, exact_suite, mc_suite, report_render

    alg = _group(args)
    report = Report()
    if args.suite in ("all", "exact"):
        report.extend(exact_suite(alg, args.max_degree, args.seed).items)
    if args.suite in ("all", "mc"):
        if alg.step > 3:
            raise UsageError("the Monte Carlo suite supports groups of step <= 3")
        report.extend(mc_suite(alg, args.samples, args.steps, args.seed).items)
    text = report_render(report, args.format)
    if args.out:
        Path(args.out).write_text(text + "\n")
    sys.stdout.write(text + "\n")
    return report.exit_code


def cmd_report(args) -> int:
    from .verify import Report, report_render

    try:
        data = json.loads(Path(args.input).read_text()) if args.input else {"items": []}
        report = Report.from_dict(data)
    except (OSError, json.JSONDecodeError, TypeError) as exc:
        raise UsageError(f"cannot read report: {exc}") from exc
    sys.stdout.write(report_render(report, args.format) + "\n")
    return report.exit_code


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--group", default="h1", help="builtin name or JSON config path")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--samples", type=int, default=1_000_000)
    common.add_argument("--steps", type=int, default=1024, help="random-walk steps per sample")
    common.add_argument("--max-degree", type=int, default=6)
    common.add_argument("--format", choices=("json", "text"), default="json")

    parser = argparse.ArgumentParser(prog="carnot-mehler",
                                     description="Exact Hermite/Mehler calculus on Carnot groups.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("group", parents=[common], help="inspect or validate a group")
    p.add_argument("action", nargs="?", choices=("info", "validate"), default="info")
    p.add_argument("path", nargs="?", help="config file for validate")
    p.set_defaults(func=cmd_group)

    p = sub.add_parser("hermite", parents=[common], help="generalized Hermite basis of E_n")
    p.add_argument("action", nargs="?", choices=("generate", "check"), default="generate")
    p.add_argument("--degree", type=int, default=2)
    p.set_defaults(func=cmd_hermite)

    p = sub.add_parser("generating", parents=[common], help="eigenvectors from coefficients")
    p.add_argument("--mu", default="0", help="comma-separated multi-index")
    p.add_argument("--mu-prime", default="0")
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--covector", help="comma-separated l in original coordinates (step-2 path)")
    p.add_argument("--export", help="write the eigenfunction JSON here")
    p.set_defaults(func=cmd_generating)

    p = sub.add_parser("moments", parents=[common], help="exact heat-kernel moments")
    p.add_argument("--poly", help="polynomial expression, e.g. 'x^2*y^2'")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("mehler", parents=[common], help="Mehler operator, exact or Monte Carlo")
    p.add_argument("action", choices=("exact", "mc"))
    p.add_argument("--poly", required=True)
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--c", help="circle mode: rational cosine")
    p.add_argument("--s", help="circle mode: rational sine")
    p.add_argument("--decay", help="rational e^-t")
    p.add_argument("--gamma", help="comma-separated base point (mc)")
    p.set_defaults(func=cmd_mehler)

    p = sub.add_parser("kernel", parents=[common], help="Heisenberg heat kernel")
    p.add_argument("action", choices=("eval", "pde"))
    p.add_argument("--point", help="comma-separated coordinates")
    p.add_argument("--t", type=float, default=1.0)
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("sample", parents=[common], help="heat-kernel samples")
    p.add_argument("--out", help="CSV destination")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("verify", parents=[common], help="run verification suites")
    p.add_argument("suite", nargs="?", choices=("all", "exact", "mc"), default="all")
    p.add_argument("--out", help="also write the report here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", parents=[common], help="re-render a saved JSON report")
    p.add_argument("input", nargs="?")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except CarnotError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
