"""Total derivatives and prolongation of equation systems on jet coordinates.

The jth total derivative acts on jet-side expressions as
D_j = d/dx^j + u_{Ij}^a d/du_I^a; iterated total derivatives are indexed by a
multiindex and commute, so composition order is irrelevant.  Momentum
coordinates are outside its domain; on the mixed jets-and-momenta side the
primed operator of first-order (derived) contexts applies instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Tuple

from .multiindex import MultiIndex, multiindices_up_to
from .symcore import (
    JET,
    MOMENTUM,
    CoordinateId,
    Expr,
    JetContext,
    VarjetError,
    WrongDomainError,
    parse,
    render,
)


def remove_one(I: MultiIndex):
    """All distinct (J, i, multiplicity I[i]) with Ji = I; see MultiIndex.removals."""
    return I.removals()


def total_derivative(e: Expr, i: int, ctx: JetContext) -> Expr:
    """D_i e for a jet-side expression; raises the jet order by at most one."""
    out = e.partial(CoordinateId.independent(i))
    for c in e.coordinates():
        if c.kind == MOMENTUM:
            raise WrongDomainError(
                "total_derivative acts on jet-side expressions; momenta present "
                "(use total_derivative_primed on a derived first-order context)")
        if c.kind == JET:
            lifted = c.index.with_index(i)
            ctx.check_order(lifted)
            out = out + e.partial(c) * Expr.coord(CoordinateId.jet(c.alpha, lifted))
    return out


def iterated_total_derivative(e: Expr, J: MultiIndex, ctx: JetContext) -> Expr:
    """D_J e; the empty multiindex is the identity."""
    out = e
    for i in J:
        out = total_derivative(out, i, ctx)
    return out


def total_derivative_primed(e: Expr, i: int, dc) -> Expr:
    """Total derivative treating momenta as extra dependents.

    ``dc`` is a pdham.DerivedContext; the expression (jets and momenta of the
    base context) is embedded into the derived first-order context, where the
    ordinary total derivative is the primed operator, and the result is
    returned as a derived-context expression.
    """
    return total_derivative(dc.embed(e), i, dc.ctx)


@dataclass(frozen=True)
class EquationSystem:
    """Named residual-form equations over a shared context.

    Each equation is (label, residual Expr) read as residual = 0; unknowns are
    the non-independent coordinates admitted by the system.  ``derived`` is
    optional metadata linking a first-order system back to the base context it
    was generated from (see pdham.DerivedContext).
    """

    context: JetContext
    equations: Tuple[Tuple[str, Expr], ...]
    unknowns: Tuple[CoordinateId, ...] = ()
    derived: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "equations", tuple(self.equations))
        labels = [lab for lab, _ in self.equations]
        if len(set(labels)) != len(labels):
            raise VarjetError("equation labels must be unique")
        unknowns = tuple(self.unknowns) if self.unknowns else self._collect_unknowns()
        object.__setattr__(self, "unknowns", unknowns)
        declared = set(unknowns)
        for lab, res in self.equations:
            for c in res.coordinates():
                if c.kind != "independent" and c not in declared:
                    raise VarjetError(f"equation {lab!r} uses undeclared coordinate {self.context.name(c)}")

    def _collect_unknowns(self) -> Tuple[CoordinateId, ...]:
        seen = {c for _, res in self.equations for c in res.coordinates()
                if c.kind != "independent"}
        return tuple(sorted(seen, key=lambda c: c.sort_key()))

    def residuals(self) -> List[Expr]:
        return [res for _, res in self.equations]

    def canonical_residual_set(self):
        """Multiset of sign-normalized residuals, for comparison up to row sign and order."""
        from collections import Counter
        return Counter(res.sign_normalized() for _, res in self.equations if not res.is_zero())

    def to_json_dict(self) -> dict:
        return {
            "unknowns": [self.context.name(c) for c in self.unknowns],
            "equations": [
                {"label": lab, "residual": render(res, self.context, "plain")}
                for lab, res in self.equations
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict, ctx: JetContext) -> "EquationSystem":
        equations = tuple(
            (eq["label"], parse(eq["residual"], ctx)) for eq in data["equations"])
        unknowns = tuple(ctx.resolve(name) for name in data.get("unknowns", ()))
        return cls(ctx, equations, unknowns)


def prolong(system: EquationSystem, level: int) -> EquationSystem:
    """Augment the system with D_J of every equation, |J| <= level.

    Labels of new rows carry the differentiation word; level 0 returns the
    system itself.
    """
    ctx = system.context
    for _, res in system.equations:
        for c in res.coordinates():
            if c.kind == MOMENTUM:
                raise WrongDomainError("prolongation applies to jet-side systems")
    if level == 0:
        return system
    equations = []
    for label, res in system.equations:
        for J in multiindices_up_to(ctx.n, level):
            word = ctx.index_word(J)
            new_label = label if not word else f"{label}|{word}"
            equations.append((new_label, iterated_total_derivative(res, J, ctx)))
    return EquationSystem(ctx, tuple(equations))
