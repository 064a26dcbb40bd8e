"""Flat key-value problem files describing a variational problem.

Lines are ``key = value``; blank lines and ``#`` comments are ignored.
Recognized keys: independents, dependents (space- or comma-separated names),
lagrangian (expression), order (declared order l+1), and the options
max_order, auto_extend, seed, rank_samples, rho (one expression per
independent variable, ';'-separated).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .symcore import Expr, JetContext, VarjetError, parse
from .variational import LagrangianDensity

_KNOWN_KEYS = {"independents", "dependents", "lagrangian", "order",
               "max_order", "auto_extend", "seed", "rank_samples", "rho"}


@dataclass
class Problem:
    independents: Tuple[str, ...]
    dependents: Tuple[str, ...]
    lagrangian_text: str
    order: int
    max_order: int
    auto_extend: bool = False
    seed: int = 0
    rank_samples: int = 5
    rho_texts: Tuple[str, ...] = ()

    def context(self, order_override: Optional[int] = None) -> JetContext:
        order = order_override if order_override is not None else self.order
        return JetContext(self.independents, self.dependents,
                          max_order=max(self.max_order, 2 * order),
                          auto_extend=self.auto_extend)

    def lagrangian(self, order_override: Optional[int] = None) -> LagrangianDensity:
        order = order_override if order_override is not None else self.order
        ctx = self.context(order_override)
        L = parse(self.lagrangian_text, ctx)
        return LagrangianDensity(ctx, L, order=order)

    def rho(self, ctx: JetContext) -> List[Expr]:
        if not self.rho_texts:
            raise VarjetError("problem file declares no rho components (key: rho)")
        if len(self.rho_texts) != len(self.independents):
            raise VarjetError(
                f"rho needs {len(self.independents)} ';'-separated components")
        return [parse(text, ctx) for text in self.rho_texts]


def _split_names(value: str) -> Tuple[str, ...]:
    return tuple(tok for tok in value.replace(",", " ").split() if tok)


def _parse_bool(value: str, key: str, lineno: int) -> bool:
    lowered = value.strip().lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise VarjetError(f"line {lineno}: {key} expects a boolean, got {value!r}")


def parse_problem_text(text: str, source: str = "<problem>") -> Problem:
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise VarjetError(f"{source}, line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _KNOWN_KEYS:
            raise VarjetError(f"{source}, line {lineno}: unknown key {key!r}")
        if key in values:
            raise VarjetError(f"{source}, line {lineno}: duplicate key {key!r}")
        values[key] = value.strip()

    for required in ("independents", "dependents", "lagrangian"):
        if required not in values:
            raise VarjetError(f"{source}: missing required key {required!r}")

    independents = _split_names(values["independents"])
    dependents = _split_names(values["dependents"])
    order = int(values.get("order", "0"))
    max_order = int(values.get("max_order", "0"))
    problem = Problem(
        independents=independents,
        dependents=dependents,
        lagrangian_text=values["lagrangian"],
        order=order,
        max_order=max_order,
        auto_extend=_parse_bool(values["auto_extend"], "auto_extend", 0)
        if "auto_extend" in values else False,
        seed=int(values.get("seed", "0")),
        rank_samples=int(values.get("rank_samples", "5")),
        rho_texts=tuple(part.strip() for part in values["rho"].split(";"))
        if "rho" in values else (),
    )
    if problem.order < 0:
        raise VarjetError(f"{source}: order must be >= 1")
    # infer declared order from the density when absent
    probe_ctx = JetContext(independents, dependents,
                           max_order=max(problem.max_order, 8), auto_extend=True)
    L = parse(problem.lagrangian_text, probe_ctx)
    minimal = max(1, L.max_jet_order())
    if problem.order == 0:
        problem.order = minimal
    elif problem.order < minimal:
        raise VarjetError(
            f"{source}: declared order {problem.order} below the density order {minimal}")
    if problem.max_order == 0:
        problem.max_order = max(4, 2 * problem.order)
    return problem


def load_problem(path: str) -> Problem:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_problem_text(fh.read(), source=path)
