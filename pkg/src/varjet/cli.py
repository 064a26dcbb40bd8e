"""Command-line front end.

Subcommands take a problem file (see docs/problemfile.md) and write the
requested derivation to stdout or --out, as plain text, LaTeX, or JSON.
Exit codes: 0 on success (a diagnosed non-regular reduction is success),
1 on domain errors, 2 on usage errors.  Output is byte-deterministic for
fixed inputs and seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from .symcore import ParseError, VarjetError, render
from .jetcalc import EquationSystem, prolong
from .variational import euler_lagrange, legendre_form
from .pdham import (
    constraints,
    derived_context,
    elh_system,
    energy_density,
    hessian,
    momentum_shift,
    reduce_lagrangian,
)
from .numeric import load_grid, residual
from .problemfile import Problem, load_problem

FORMATS = ("plain", "latex", "json")


def _emit(args, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_dump(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2)


def _system_text(system: EquationSystem, fmt: str) -> str:
    if fmt == "json":
        return _json_dump(system.to_json_dict())
    lines = [f"{label}: {render(res, system.context, fmt)} = 0"
             for label, res in system.equations]
    return "\n".join(lines) if lines else "(empty system)"


def _legendre_text(theta, fmt: str) -> str:
    ctx = theta.context
    if fmt == "json":
        return _json_dump(theta.to_json_list())
    lines = []
    for alpha, index, i in theta.support():
        word = ctx.index_word(index)
        coeff = render(theta.coefficient(alpha, index, i), ctx, fmt)
        lines.append(f"theta[{ctx.dependents[alpha]};{word}.{ctx.independents[i]}] = {coeff}")
    return "\n".join(lines) if lines else "(zero form)"


def cmd_el(args, problem: Problem) -> str:
    lag = problem.lagrangian(args.order)
    ctx = lag.context
    source = euler_lagrange(lag)
    if args.format == "json":
        return _json_dump(source.to_json_list())
    return "\n".join(
        f"{render(source.component(alpha), ctx, args.format)} = 0"
        for alpha in range(ctx.m))


def cmd_legendre(args, problem: Problem) -> str:
    return _legendre_text(legendre_form(problem.lagrangian(args.order)), args.format)


def cmd_elh(args, problem: Problem) -> str:
    lag = problem.lagrangian(args.order)
    return _system_text(elh_system(lag, lag.level), args.format)


def cmd_constraints(args, problem: Problem) -> str:
    lag = problem.lagrangian(args.order)
    return _system_text(constraints(lag, lag.level), args.format)


def cmd_hessian(args, problem: Problem) -> str:
    lag = problem.lagrangian(args.order)
    matrix, report = hessian(lag, lag.level,
                             samples=args.rank_samples or problem.rank_samples,
                             seed=args.seed if args.seed is not None else problem.seed)
    if args.format == "json":
        payload = dict(report.to_json_dict())
        payload["matrix"] = matrix.to_json_dict()["entries"]
        return _json_dump(payload)
    ctx = lag.context
    lines = [f"dim {report.dim}  rank {report.rank}  "
             f"regular {'yes' if report.regular else 'no'}  "
             f"rank_constant {'yes' if report.rank_constant else 'no'}"]
    for row in matrix.entries:
        lines.append("[ " + ", ".join(render(e, ctx, args.format) for e in row) + " ]")
    return "\n".join(lines)


def cmd_energy(args, problem: Problem) -> str:
    lag = problem.lagrangian(args.order)
    energy = energy_density(lag, lag.level)
    if args.format == "json":
        from .symcore import expr_to_json
        return _json_dump(expr_to_json(energy.expr, lag.context))
    return render(energy.expr, lag.context, args.format)


def cmd_reduce(args, problem: Problem) -> str:
    lag = problem.lagrangian(args.order)
    red = reduce_lagrangian(lag, lag.level,
                            samples=args.rank_samples or problem.rank_samples,
                            seed=args.seed if args.seed is not None else problem.seed)
    if args.format == "json":
        return _json_dump(red.to_json_dict())
    ctx = lag.context
    lines = [f"diagnosis: {red.diagnosis}"]
    lines.append("P coordinates:  " + " ".join(ctx.name(c) for c in red.p_coordinates))
    lines.append("P0 coordinates: " + " ".join(ctx.name(c) for c in red.p0_coordinates))
    for c, e in sorted(red.substitutions.items(), key=lambda t: t[0].sort_key()):
        lines.append(f"eliminate {ctx.name(c)} = {render(e, ctx, args.format)}")
    if red.energy_on_constraint is not None:
        lines.append("E|_P = " + render(red.energy_on_constraint, ctx, args.format))
    if red.hamiltonian is not None:
        lines.append("H = " + render(red.hamiltonian, ctx, args.format))
    if red.system_constraint is not None:
        lines.append("equations on P:")
        lines.append(_system_text(red.system_constraint, args.format))
    if red.system_hdw is not None:
        lines.append("HDW equations:")
        lines.append(_system_text(red.system_hdw, args.format))
    if red.offending:
        lines.append("offending rows: " + ", ".join(red.offending))
    return "\n".join(lines)


def cmd_shift(args, problem: Problem) -> str:
    lag = problem.lagrangian(args.order)
    ctx = lag.context
    if args.rho:
        from .symcore import parse
        texts = [part.strip() for part in args.rho.split(";")]
        if len(texts) != ctx.n:
            raise VarjetError(f"--rho needs {ctx.n} ';'-separated components")
        rho = [parse(text, ctx) for text in texts]
    else:
        rho = problem.rho(ctx)
    shifted = momentum_shift(elh_system(lag, lag.level), rho)
    return _system_text(shifted, args.format)


def cmd_prolong(args, problem: Problem) -> str:
    lag = problem.lagrangian(args.order)
    # the requested level is explicit, so lift the jet-order bound by exactly
    # that much; the library-level default stays strict
    ctx = lag.context.extended(lag.context.max_order + max(0, args.level))
    if args.system:
        with open(args.system, "r", encoding="utf-8") as fh:
            system = EquationSystem.from_json_dict(json.load(fh), ctx)
    else:
        source = euler_lagrange(lag)
        system = EquationSystem(ctx, tuple(
            (f"el:{ctx.dependents[a]}", source.component(a)) for a in range(ctx.m)))
    return _system_text(prolong(system, args.level), args.format)


def cmd_check_solution(args, problem: Problem) -> str:
    lag = problem.lagrangian(args.order)
    ctx = lag.context
    if not args.grid:
        raise VarjetError("check-solution needs --grid <file>")
    grid = load_grid(args.grid)
    momentum_fields = load_grid(args.momenta) if args.momenta else None
    which = args.system or "el"
    theta = None
    if which == "el":
        source = euler_lagrange(lag)
        system = EquationSystem(ctx, tuple(
            (f"el:{ctx.dependents[a]}", source.component(a)) for a in range(ctx.m)))
    elif which == "constraints":
        dc = derived_context(ctx, lag.level)
        rows = tuple((lab, dc.embed(res))
                     for lab, res in constraints(lag, lag.level).equations)
        system = EquationSystem(dc.ctx, rows, derived=dc)
        theta = legendre_form(lag)
    elif which == "elh":
        system = elh_system(lag, lag.level)
        theta = legendre_form(lag)
    elif which == "hdw":
        red = reduce_lagrangian(lag, lag.level, seed=problem.seed)
        if red.system_hdw is None:
            raise VarjetError(f"reduction did not produce HDW equations ({red.diagnosis})")
        system = red.system_hdw
        theta = legendre_form(lag)
    else:
        raise VarjetError(f"unknown system {which!r}")
    report = residual(system, grid, momentum_fields=momentum_fields, legendre=theta)
    if args.format == "json":
        return _json_dump({"system": which,
                           "equations": [{"label": k, "max_abs": v}
                                         for k, v in report.items()]})
    width = max((len(k) for k in report), default=0)
    return "\n".join(f"{k.ljust(width)}  {v:.6e}" for k, v in report.items()) \
        or "(empty system)"


_COMMANDS = {
    "el": cmd_el,
    "legendre": cmd_legendre,
    "elh": cmd_elh,
    "constraints": cmd_constraints,
    "hessian": cmd_hessian,
    "reduce": cmd_reduce,
    "energy": cmd_energy,
    "shift": cmd_shift,
    "prolong": cmd_prolong,
    "check-solution": cmd_check_solution,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="varjet",
        description="Derive Euler-Lagrange, Legendre, ELH, constraint, and "
                    "Hamilton-de Donder-Weyl data from a polynomial Lagrangian density.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("problem", help="problem file")
        p.add_argument("--format", choices=FORMATS, default="plain")
        p.add_argument("--order", type=int, default=None,
                       help="override the declared density order l+1")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--rank-samples", type=int, default=None)
        p.add_argument("--grid", default=None, help="grid file (see docs/gridfile.md)")
        p.add_argument("--momenta", default=None, help="grid file with momentum fields")
        p.add_argument("--out", default=None, help="write output to a file")
        if name == "shift":
            p.add_argument("--rho", default=None,
                           help="';'-separated shift components, one per independent")
        if name == "prolong":
            p.add_argument("--level", type=int, default=1)
            p.add_argument("--system", default=None, help="equation-system JSON file")
        if name == "check-solution":
            p.add_argument("--system", default=None,
                           choices=("el", "constraints", "elh", "hdw"))
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        problem = load_problem(args.problem)
        text = _COMMANDS[args.command](args, problem)
    except OSError as exc:
        print(f"varjet: {exc}", file=sys.stderr)
        return 1
    except ParseError as exc:
        print(f"varjet: parse error: {exc}", file=sys.stderr)
        return 1
    except VarjetError as exc:
        print(f"varjet: {exc}", file=sys.stderr)
        return 1
    _emit(args, text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
