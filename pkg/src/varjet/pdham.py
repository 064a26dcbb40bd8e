"""Momentum-side constructions: ELH systems, constraints, Hessian, reduction, HDW.

The mixed first-order systems live in a *derived* first-order context whose
dependents are all jet coordinates u_I^a with |I| <= l+1 and all momenta
p_a^{I.i} with |I| <= l; comma-derivatives are the first jets of that context.

The momentum equations carry the contraction term over all distinct (J, i)
with Ji = I (each counted once), at every level |I| <= l+1; at |I| = l+1 the
divergence term is absent, which turns those rows into the algebraic
constraints cutting out the constraint manifold.  Reduction solves the
constraints for top jets where possible (exact linear algebra over rational
coefficients), eliminates dependent momenta from the leftover pure-momentum
relations, restricts the energy density, and emits the reduced and the
Hamilton-de Donder-Weyl equation systems.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .multiindex import EMPTY, MultiIndex, multiindices, multiindices_up_to
from .symcore import (
    INDEPENDENT,
    JET,
    MOMENTUM,
    CoordinateId,
    Expr,
    JetContext,
    VarjetError,
    WrongDomainError,
    render,
)
from .jetcalc import EquationSystem, total_derivative
from .variational import LagrangianDensity


class DegenerateLagrangianError(VarjetError):
    pass


class DerivedContext:
    """First-order context over an explicit list of base fiber coordinates.

    Dependents are the given jets and momenta of the base context (their base
    names become opaque dependent names, rendered comma-style); ``embed`` maps
    a base expression into it, ``dep``/``comma`` give the zero-jet and the
    formal first derivative of a fiber coordinate.
    """

    def __init__(self, base: JetContext, level: int,
                 fiber: Optional[Sequence[CoordinateId]] = None):
        self.base = base
        self.level = level
        if fiber is None:
            fiber = base.jets_up_to(level + 1) + base.momenta_up_to(level)
        self.fiber: Tuple[CoordinateId, ...] = tuple(fiber)
        self._alpha: Dict[CoordinateId, int] = {c: k for k, c in enumerate(self.fiber)}
        self.ctx = JetContext(
            independents=base.independents,
            dependents=tuple(base.name(c) for c in self.fiber),
            max_order=1,
            auto_extend=base.auto_extend,
            jet_style="comma",
        )

    def contains(self, c: CoordinateId) -> bool:
        return c in self._alpha

    def dep(self, c: CoordinateId) -> CoordinateId:
        return CoordinateId.jet(self._alpha[c], EMPTY)

    def comma(self, c: CoordinateId, i: int) -> CoordinateId:
        return CoordinateId.jet(self._alpha[c], MultiIndex.of(i))

    def base_coordinate(self, alpha: int) -> CoordinateId:
        return self.fiber[alpha]

    def embed(self, e: Expr) -> Expr:
        """Base expression (jets and momenta of the fiber) -> derived expression."""
        mapping: Dict[CoordinateId, Expr] = {}
        for c in e.coordinates():
            if c.kind == INDEPENDENT:
                continue
            if c not in self._alpha:
                raise WrongDomainError(
                    f"coordinate {self.base.name(c)} is not part of the derived fiber")
            mapping[c] = Expr.coord(self.dep(c))
        return e.substitute(mapping)

    def project(self, e: Expr) -> Expr:
        """Derived expression without comma-jets -> base expression."""
        mapping: Dict[CoordinateId, Expr] = {}
        for c in e.coordinates():
            if c.kind == JET:
                if len(c.index) > 0:
                    raise WrongDomainError("cannot project a comma-derivative back to the base")
                mapping[c] = Expr.coord(self.fiber[c.alpha])
        return e.substitute(mapping)


def derived_context(lag_or_ctx, level: int) -> DerivedContext:
    base = lag_or_ctx.context if isinstance(lag_or_ctx, LagrangianDensity) else lag_or_ctx
    return DerivedContext(base, level)


def _momentum_label(ctx: JetContext, alpha: int, I: MultiIndex) -> str:
    return f"mom:{ctx.dependents[alpha]}:{ctx.index_word(I)}"


def _contact_label(ctx: JetContext, alpha: int, I: MultiIndex, i: int) -> str:
    return f"contact:{ctx.dependents[alpha]}:{ctx.index_word(I)}:{ctx.independents[i]}"


def elh_system(lag: LagrangianDensity, level: Optional[int] = None) -> EquationSystem:
    """The mixed first-order system at finite order l.

    Momentum rows (residual orientation dL/du_I - contraction - divergence):

        d_a^I L - sum_{Ji=I} p_a^{J.i} - sum_i (p_a^{I.i}),_i = 0,   |I| <= l+1,

    with the divergence absent at |I| = l+1 (the algebraic constraint rows),
    and contact rows (u_I),_i - u_{Ii} = 0 for |I| <= l.
    """
    ctx = lag.context
    l = lag.level if level is None else level
    if lag.order > l + 1:
        raise VarjetError(f"density order {lag.order} exceeds l+1 = {l + 1}")
    dc = DerivedContext(ctx, l)
    rows: List[Tuple[str, Expr]] = []
    for alpha in range(ctx.m):
        for I in multiindices_up_to(ctx.n, l + 1):
            res = dc.embed(lag.L.partial(CoordinateId.jet(alpha, I)))
            for J, i, _mult in I.removals():
                res = res - Expr.coord(dc.dep(CoordinateId.momentum(alpha, J, i)))
            if len(I) <= l:
                for i in range(ctx.n):
                    res = res - Expr.coord(dc.comma(CoordinateId.momentum(alpha, I, i), i))
            rows.append((_momentum_label(ctx, alpha, I), res))
    for alpha in range(ctx.m):
        for I in multiindices_up_to(ctx.n, l):
            for i in range(ctx.n):
                res = Expr.coord(dc.comma(CoordinateId.jet(alpha, I), i)) \
                    - Expr.coord(dc.dep(CoordinateId.jet(alpha, I.with_index(i))))
                rows.append((_contact_label(ctx, alpha, I, i), res))
    unknowns = _with_zero_jets(dc, rows)
    return EquationSystem(dc.ctx, tuple(rows), unknowns, derived=dc)


def _with_zero_jets(dc: DerivedContext, rows) -> Tuple[CoordinateId, ...]:
    seen = {c for _, res in rows for c in res.coordinates() if c.kind != INDEPENDENT}
    seen.update(CoordinateId.jet(a, EMPTY) for a in range(len(dc.fiber)))
    return tuple(sorted(seen, key=lambda c: c.sort_key()))


def constraints(lag: LagrangianDensity, level: Optional[int] = None) -> EquationSystem:
    """The algebraic rows cutting out the constraint manifold:
    dL/du_I^a - sum_{Ji=I} p_a^{J.i} = 0 for |I| = l+1, in the base context."""
    ctx = lag.context
    l = lag.level if level is None else level
    if lag.order > l + 1:
        raise VarjetError(f"density order {lag.order} exceeds l+1 = {l + 1}")
    rows: List[Tuple[str, Expr]] = []
    for alpha in range(ctx.m):
        for I in multiindices(ctx.n, l + 1):
            res = lag.L.partial(CoordinateId.jet(alpha, I))
            for J, i, _mult in I.removals():
                res = res - Expr.coord(CoordinateId.momentum(alpha, J, i))
            rows.append((f"constraint:{ctx.dependents[alpha]}:{ctx.index_word(I)}", res))
    return EquationSystem(ctx, tuple(rows))


@dataclass(frozen=True)
class HessianMatrix:
    """Symbolic matrix of second partials in the top-order jets."""

    context: JetContext
    level: int
    index: Tuple[Tuple[int, MultiIndex], ...]
    entries: Tuple[Tuple[Expr, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.index)

    def to_json_dict(self) -> dict:
        return {
            "index": [{"alpha": a + 1, "I": [i + 1 for i in I]} for a, I in self.index],
            "entries": [[render(e, self.context, "plain") for e in row]
                        for row in self.entries],
        }


@dataclass(frozen=True)
class RankReport:
    dim: int
    rank: int
    regular: bool
    rank_constant: bool
    ranks: Tuple[int, ...]
    samples: int
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "dim": self.dim,
            "rank": self.rank,
            "regular": self.regular,
            "rank_constant": self.rank_constant,
            "ranks": list(self.ranks),
            "samples": self.samples,
            "seed": self.seed,
        }


def _fraction_rank(matrix: List[List[Fraction]]) -> int:
    """Rank by exact Gaussian elimination over the rationals."""
    rows = [list(r) for r in matrix]
    n_rows = len(rows)
    n_cols = len(rows[0]) if rows else 0
    rank = 0
    for col in range(n_cols):
        pivot = next((r for r in range(rank, n_rows) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = Fraction(1) / rows[rank][col]
        rows[rank] = [v * inv for v in rows[rank]]
        for r in range(n_rows):
            if r != rank and rows[r][col]:
                f = rows[r][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
        if rank == n_rows:
            break
    return rank


def hessian(lag: LagrangianDensity, level: Optional[int] = None,
            samples: int = 5, seed: int = 0) -> Tuple[HessianMatrix, RankReport]:
    """The Hessian in the jets of order l+1, with a sampled exact-rank report.

    The rank is computed by exact elimination after evaluating the jet
    coordinates at random rational points; the report carries the maximum
    observed rank and whether it stayed constant across samples (the verdict
    is probabilistic, repetitions and seed configurable).
    """
    ctx = lag.context
    l = lag.level if level is None else level
    idx = [(alpha, I) for alpha in range(ctx.m) for I in multiindices(ctx.n, l + 1)]
    entries = tuple(
        tuple(lag.L.partial(CoordinateId.jet(a1, I1)).partial(CoordinateId.jet(a2, I2))
              for (a2, I2) in idx)
        for (a1, I1) in idx)
    matrix = HessianMatrix(ctx, l, tuple(idx), entries)

    coords = sorted({c for row in entries for e in row for c in e.coordinates()},
                    key=lambda c: c.sort_key())
    rng = random.Random(seed)
    ranks = []
    for _ in range(max(1, samples)):
        point = {c: Expr.number(Fraction(rng.randint(-9, 9), rng.randint(1, 9)))
                 for c in coords}
        numeric = [[e.substitute(point).constant_value() for e in row] for row in entries]
        if any(v is None for row in numeric for v in row):
            raise AssertionError("internal error: Hessian entry failed to evaluate")
        ranks.append(_fraction_rank(numeric) if idx else 0)
    rank = max(ranks)
    report = RankReport(dim=len(idx), rank=rank, regular=(rank == len(idx)),
                        rank_constant=(len(set(ranks)) == 1), ranks=tuple(ranks),
                        samples=max(1, samples), seed=seed)
    return matrix, report


@dataclass(frozen=True)
class EnergyDensity:
    """E_l = sum_{|I|<=l} p_a^{I.i} u_{Ii}^a - L, in the base context."""

    context: JetContext
    level: int
    expr: Expr


def energy_density(lag: LagrangianDensity, level: Optional[int] = None) -> EnergyDensity:
    ctx = lag.context
    l = lag.level if level is None else level
    if lag.order > l + 1:
        raise VarjetError(f"density order {lag.order} exceeds l+1 = {l + 1}")
    acc = -lag.L
    for alpha in range(ctx.m):
        for I in multiindices_up_to(ctx.n, l):
            for i in range(ctx.n):
                acc = acc + Expr.coord(CoordinateId.momentum(alpha, I, i)) \
                    * Expr.coord(CoordinateId.jet(alpha, I.with_index(i)))
    return EnergyDensity(ctx, l, acc)


def momentum_shift(system: EquationSystem, rho: Sequence[Expr]) -> EquationSystem:
    """Image of a mixed system under the momentum-shift automorphism of d^V rho.

    rho = (rho^1 .. rho^n) is jet-side of order <= l; the shift substitutes
    p_a^{I.i} -> p_a^{I.i} - d_a^I rho^i throughout (comma-derivatives of
    momenta pick up the corresponding total derivative) and renormalizes.
    With this orientation the system of L + sum_i D_i rho^i coincides row by
    row with the shifted system of L.
    """
    dc: DerivedContext = system.derived
    if dc is None:
        raise VarjetError("momentum_shift needs a system generated with a derived context")
    base = dc.base
    if len(rho) != base.n:
        raise VarjetError(f"need one shift component per independent variable ({base.n})")
    l = dc.level
    for r in rho:
        for c in r.coordinates():
            if c.kind == MOMENTUM:
                raise WrongDomainError("shift components are jet-side expressions")
        if r.max_jet_order() > l:
            raise VarjetError(
                f"shift component order {r.max_jet_order()} too high for momentum level {l}")
    work = base if base.auto_extend else base.extended(max(base.max_order, l + 1) + 1)
    mapping: Dict[CoordinateId, Expr] = {}
    for alpha in range(base.m):
        for I in multiindices_up_to(base.n, l):
            for i in range(base.n):
                theta = rho[i].partial(CoordinateId.jet(alpha, I))
                if theta.is_zero():
                    continue
                pm = CoordinateId.momentum(alpha, I, i)
                mapping[dc.dep(pm)] = Expr.coord(dc.dep(pm)) - dc.embed(theta)
                for j in range(base.n):
                    mapping[dc.comma(pm, j)] = Expr.coord(dc.comma(pm, j)) \
                        - dc.embed(total_derivative(theta, j, work))
    rows = tuple((label, res.substitute(mapping)) for label, res in system.equations)
    return EquationSystem(dc.ctx, rows, _with_zero_jets(dc, rows), derived=dc)


@dataclass(frozen=True)
class ReducedSystem:
    """Outcome of the constraint reduction.

    ``substitutions`` eliminates top jets solved from the constraints and the
    dependent momenta from the leftover pure-momentum relations; eliminated
    coordinates appear in no reduced residual and not in the restricted
    energy.  ``system_constraint`` is the equation system on the constraint
    manifold, ``system_hdw`` the same formulas on the projected coordinates;
    ``hamiltonian`` is the restricted energy read as a function there.
    """

    diagnosis: str
    hessian_report: RankReport
    p_coordinates: Tuple[CoordinateId, ...]
    p0_coordinates: Tuple[CoordinateId, ...]
    substitutions: Dict[CoordinateId, Expr]
    energy: Expr
    energy_on_constraint: Optional[Expr]
    hamiltonian: Optional[Expr]
    system_constraint: Optional[EquationSystem]
    system_hdw: Optional[EquationSystem]
    context: JetContext
    offending: Tuple[str, ...] = ()

    def to_json_dict(self) -> dict:
        ctx = self.context
        out = {
            "diagnosis": self.diagnosis,
            "regular": self.diagnosis == "regular",
            "hessian": self.hessian_report.to_json_dict(),
            "p_coords": [ctx.name(c) for c in self.p_coordinates],
            "p0_coords": [ctx.name(c) for c in self.p0_coordinates],
            "substitutions": {ctx.name(c): render(e, ctx, "plain")
                              for c, e in sorted(self.substitutions.items(),
                                                 key=lambda t: t[0].sort_key())},
            "E_on_P": render(self.energy_on_constraint, ctx, "plain")
                      if self.energy_on_constraint is not None else None,
            "H": render(self.hamiltonian, ctx, "plain")
                 if self.hamiltonian is not None else None,
            "equations": self.system_hdw.to_json_dict()["equations"]
                         if self.system_hdw is not None else [],
            "equations_P": self.system_constraint.to_json_dict()["equations"]
                           if self.system_constraint is not None else [],
        }
        if self.offending:
            out["offending"] = list(self.offending)
        return out


def _is_affine_in(res: Expr, tops: set) -> bool:
    for mono, _ in res.terms:
        if sum(e for c, e in mono if c in tops) > 1:
            return False
    return True


def reduce_lagrangian(lag: LagrangianDensity, level: Optional[int] = None,
                      samples: int = 5, seed: int = 0) -> ReducedSystem:
    """Two-stage reduction of the constraint rows.

    Stage 1 solves constraint rows for top jets wherever a top jet carries a
    nonzero rational coefficient (exact elimination, deterministic order);
    rows left over must be free of jet coordinates.  Stage 2 eliminates one
    dependent momentum per leftover row (largest admissible pivot first, so
    the surviving momenta are the canonically smallest).  The restricted
    energy must then be free of top jets; it becomes the Hamiltonian on the
    projected coordinates and both reduced equation systems are emitted.
    """
    ctx = lag.context
    l = lag.level if level is None else level
    _, report = hessian(lag, l, samples=samples, seed=seed)
    energy = energy_density(lag, l).expr
    cons = constraints(lag, l)
    tops = set(ctx.jets_up_to(l + 1)) - set(ctx.jets_up_to(l))
    tops_ordered = [c for c in ctx.jets_up_to(l + 1) if c in tops]

    def partial_result(diagnosis: str, offending=()) -> ReducedSystem:
        return ReducedSystem(diagnosis, report, (), (), dict(subs), energy,
                             None, None, None, None, ctx, tuple(offending))

    subs: Dict[CoordinateId, Expr] = {}
    if not all(_is_affine_in(res, tops) for _, res in cons.equations):
        return partial_result("irreducible: nonlinear constraints")

    # stage 1: solve rows for top jets with rational coefficients
    pending: List[Tuple[str, Expr]] = list(cons.equations)
    progress = True
    while progress:
        progress = False
        for k, (label, res) in enumerate(pending):
            for jet in tops_ordered:
                if jet in subs:
                    continue
                coeff = res.coefficient_of(jet).constant_value()
                if coeff is None or coeff == 0:
                    continue
                solved = res.substitute({jet: Expr.zero()}).scale(Fraction(-1) / coeff)
                subs[jet] = solved
                pending = [(lb, r.substitute({jet: solved}))
                           for lb, r in pending[:k] + pending[k + 1:]]
                for key in list(subs):
                    subs[key] = subs[key].substitute({jet: solved})
                progress = True
                break
            if progress:
                break

    leftovers = [(lb, r) for lb, r in pending if not r.is_zero()]
    offending = [lb for lb, r in leftovers
                 if any(c.kind == JET for c in r.coordinates())]
    if offending:
        return partial_result("Assumption 1 check failed", offending)

    # stage 2: eliminate dependent momenta from the pure-momentum relations
    momentum_rows = 0
    while leftovers:
        label, res = leftovers.pop(0)
        momenta_in = [c for c in res.coordinates() if c.kind == MOMENTUM]
        pivot = None
        for cand in sorted(momenta_in, key=lambda c: c.sort_key(), reverse=True):
            coeff = res.coefficient_of(cand).constant_value()
            if coeff:
                pivot = (cand, coeff)
                break
        if pivot is None:
            if res.constant_value() is not None:
                raise DegenerateLagrangianError(
                    f"inconsistent constraint row {label!r}: "
                    f"{render(res, ctx, 'plain')} = 0")
            return partial_result("Assumption 1 check failed", [label])
        cand, coeff = pivot
        solved = res.substitute({cand: Expr.zero()}).scale(Fraction(-1) / coeff)
        subs[cand] = solved
        leftovers = [(lb, r.substitute({cand: solved})) for lb, r in leftovers]
        leftovers = [(lb, r) for lb, r in leftovers if not r.is_zero()]
        for key in list(subs):
            subs[key] = subs[key].substitute({cand: solved})
        momentum_rows += 1

    energy_p = energy.substitute(subs)
    if any(c in tops for c in energy_p.coordinates()):
        return partial_result("Assumption 1 check failed",
                              ["restricted energy retains top jets"])

    surviving_tops = [c for c in tops_ordered if c not in subs]
    lower_jets = ctx.jets_up_to(l)
    surviving_momenta = [c for c in ctx.momenta_up_to(l) if c not in subs]
    independents = [CoordinateId.independent(i) for i in range(ctx.n)]
    p_fiber = sorted(lower_jets + surviving_tops + surviving_momenta,
                     key=lambda c: c.sort_key())
    p0_fiber = sorted(lower_jets + surviving_momenta, key=lambda c: c.sort_key())

    system_p = _reduced_system(lag, l, subs, energy_p, DerivedContext(ctx, l, p_fiber))
    system_hdw = _reduced_system(lag, l, subs, energy_p, DerivedContext(ctx, l, p0_fiber))
    diagnosis = "regular" if not surviving_tops and momentum_rows == 0 else "reducible"
    return ReducedSystem(
        diagnosis, report,
        tuple(independents + p_fiber), tuple(independents + p0_fiber),
        subs, energy, energy_p,
        energy_p, system_p, system_hdw, ctx)


def _comma_image(dc: DerivedContext, subs: Dict[CoordinateId, Expr],
                 pm: CoordinateId, i: int) -> Expr:
    """Formal i-derivative of a (possibly eliminated) momentum on the reduced space."""
    if dc.contains(pm):
        return Expr.coord(dc.comma(pm, i))
    phi = subs[pm]
    out = dc.embed(phi.partial(CoordinateId.independent(i)))
    for c in phi.coordinates():
        if c.kind == INDEPENDENT:
            continue
        out = out + dc.embed(phi.partial(c)) * Expr.coord(dc.comma(c, i))
    return out


def _reduced_system(lag: LagrangianDensity, l: int, subs: Dict[CoordinateId, Expr],
                    energy_p: Expr, dc: DerivedContext) -> EquationSystem:
    """PD-Hamilton rows of the restricted system on the given fiber coordinates."""
    ctx = lag.context
    rows: List[Tuple[str, Expr]] = []
    for alpha in range(ctx.m):
        for I in multiindices_up_to(ctx.n, l):
            jet = CoordinateId.jet(alpha, I)
            res = -dc.embed(energy_p.partial(jet))
            for i in range(ctx.n):
                res = res - _comma_image(dc, subs, CoordinateId.momentum(alpha, I, i), i)
            if not res.is_zero():
                rows.append((_momentum_label(ctx, alpha, I), res))
    eliminated = [(pm, phi) for pm, phi in subs.items() if pm.kind == MOMENTUM]
    for alpha in range(ctx.m):
        for I in multiindices_up_to(ctx.n, l):
            for j in range(ctx.n):
                pm = CoordinateId.momentum(alpha, I, j)
                if not dc.contains(pm):
                    continue
                res = Expr.coord(dc.comma(CoordinateId.jet(alpha, I), j))
                for other, phi in eliminated:
                    weight = phi.partial(pm)
                    if weight.is_zero():
                        continue
                    res = res + dc.embed(weight) * Expr.coord(
                        dc.comma(CoordinateId.jet(other.alpha, other.index), other.i))
                res = res - dc.embed(energy_p.partial(pm))
                if not res.is_zero():
                    rows.append((_contact_label(ctx, alpha, I, j), res))
    return EquationSystem(dc.ctx, tuple(rows), _with_zero_jets(dc, rows), derived=dc)


# spec-facing alias; the module-level name avoids shadowing the builtin in imports
reduce = reduce_lagrangian
