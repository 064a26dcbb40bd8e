import random
from fractions import Fraction

import pytest

from varjet.multiindex import MultiIndex, multiindices_up_to
from varjet.symcore import CoordinateId, Expr, JetContext, parse
from varjet.variational import LagrangianDensity

KDV_L = "u_x^3 - 1/2*u_x*u_t + 1/2*u_xx^2"
KDV_EL = "u_tx - 6*u_x*u_xx + u_xxxx"


@pytest.fixture
def ctx_tx():
    return JetContext(("t", "x"), ("u",), max_order=4)


@pytest.fixture
def kdv(ctx_tx):
    return LagrangianDensity(ctx_tx, parse(KDV_L, ctx_tx), order=2)


@pytest.fixture
def ctx_1d():
    return JetContext(("x",), ("u",), max_order=4)


def jet_pool(ctx, max_order, include_independents=True):
    pool = [CoordinateId.jet(a, I)
            for a in range(ctx.m) for I in multiindices_up_to(ctx.n, max_order)]
    if include_independents:
        pool += [CoordinateId.independent(i) for i in range(ctx.n)]
    return pool


def random_expr(rng: random.Random, pool, max_monomials=4, max_factors=3,
                max_exp=2, coeff_bound=6):
    """Seeded random polynomial over the given coordinate pool."""
    out = Expr.zero()
    for _ in range(rng.randint(1, max_monomials)):
        num = rng.randint(-coeff_bound, coeff_bound)
        if num == 0:
            num = 1
        term = Expr.number(Fraction(num, rng.randint(1, 4)))
        for _ in range(rng.randint(0, max_factors)):
            term = term * Expr.coord(rng.choice(pool)) ** rng.randint(1, max_exp)
        out = out + term
    return out


def random_lagrangian(rng: random.Random, max_n=2, max_m=2, max_order=3,
                      max_monomials=6, max_degree=4):
    """Random polynomial density in a random small context (jet-side, no x factors)."""
    n = rng.randint(1, max_n)
    m = rng.randint(1, max_m)
    names_i = ("t", "x")[:n] if n > 1 else ("x",)
    names_d = ("u", "v")[:m]
    order = rng.randint(1, max_order)
    ctx = JetContext(names_i, names_d, max_order=2 * order + 2)
    pool = [CoordinateId.jet(a, I)
            for a in range(m) for I in multiindices_up_to(n, order)]
    L = Expr.zero()
    for _ in range(rng.randint(1, max_monomials)):
        num = rng.randint(-5, 5) or 1
        term = Expr.number(Fraction(num, rng.randint(1, 3)))
        degree = rng.randint(1, max_degree)
        for _ in range(degree):
            term = term * Expr.coord(rng.choice(pool))
        L = L + term
    if L.is_zero():
        L = Expr.coord(pool[0])
    return LagrangianDensity(ctx, L, order=max(order, max(1, L.max_jet_order())))
