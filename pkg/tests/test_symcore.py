"""Kernel tests: parsing, normal form, partials, substitution, rendering."""

import random
from fractions import Fraction

import pytest

from conftest import KDV_L, jet_pool, random_expr
from varjet.multiindex import MultiIndex
from varjet.symcore import (
    CoordinateId,
    Expr,
    JetContext,
    OrderOverflowError,
    ParseError,
    UnsupportedExpressionError,
    parse,
    render,
)


def C(ctx, name):
    return ctx.resolve(name)


def E(ctx, text):
    return parse(text, ctx)


def test_parse_kdv_lagrangian(ctx_tx):
    e = E(ctx_tx, KDV_L)
    assert len(e.terms) == 3
    assert e.partial(C(ctx_tx, "u_xx")) == E(ctx_tx, "u_xx")


def test_parse_zero(ctx_tx):
    assert E(ctx_tx, "0") == Expr.zero()
    assert E(ctx_tx, "0").terms == ()


def test_parse_like_term_merge(ctx_tx):
    assert E(ctx_tx, "u + u") == E(ctx_tx, "2*u")
    assert len(E(ctx_tx, "u + u").terms) == 1


def test_parse_momentum_names(ctx_tx):
    p = C(ctx_tx, "p_xx.t")
    assert p.kind == "momentum"
    assert p.index == MultiIndex.of(1, 1)
    assert p.i == 0
    empty = C(ctx_tx, "p_.t")
    assert len(empty.index) == 0
    assert ctx_tx.name(p) == "p_xx.t"


def test_parse_momentum_dependent_tag():
    ctx = JetContext(("t", "x"), ("u", "v"), max_order=3)
    p = parse("p^v_x.t", ctx).coordinates()[0]
    assert p.alpha == 1 and p.i == 0
    assert ctx.name(p) == "p^v_x.t"
    # the tag is mandatory when m > 1
    with pytest.raises(ParseError):
        parse("p_x.t", ctx)


def test_parse_errors(ctx_tx):
    with pytest.raises(ParseError):
        E(ctx_tx, "w + 1")  # unknown identifier
    with pytest.raises(ParseError):
        E(ctx_tx, "u_q")  # malformed subscript
    with pytest.raises(OrderOverflowError):
        E(ctx_tx, "u_xxxxx")  # exceeds max_order 4
    with pytest.raises(UnsupportedExpressionError):
        E(ctx_tx, "1/u")  # division by non-constant
    with pytest.raises(UnsupportedExpressionError):
        E(ctx_tx, "u^-2")
    with pytest.raises(UnsupportedExpressionError):
        E(ctx_tx, "sin(u)")


def test_parse_unary_and_parentheses(ctx_tx):
    assert E(ctx_tx, "-(u - u_x)^2") == -(E(ctx_tx, "u") - E(ctx_tx, "u_x")) ** 2
    assert E(ctx_tx, "u/2") == E(ctx_tx, "1/2*u")


def test_partial_power_rule(ctx_tx):
    assert E(ctx_tx, "u_x^3").partial(C(ctx_tx, "u_x")) == E(ctx_tx, "3*u_x^2")


def test_partial_absent_coordinate(ctx_tx):
    assert E(ctx_tx, "u_x*u_t").partial(C(ctx_tx, "u")) == Expr.zero()


def test_partial_kdv_hessian_entry(ctx_tx):
    # the sole nonzero second derivative in the top jets comes from u_xx^2/2
    L = E(ctx_tx, KDV_L)
    assert L.partial(C(ctx_tx, "u_xx")).partial(C(ctx_tx, "u_xx")) == Expr.number(1)
    assert L.partial(C(ctx_tx, "u_tt")) == Expr.zero()


def test_substitute_constraint_use(ctx_tx):
    # p_x.x * u_xx with u_xx -> p_x.x gives the square
    e = E(ctx_tx, "p_x.x*u_xx")
    got = e.substitute({C(ctx_tx, "u_xx"): E(ctx_tx, "p_x.x")})
    assert got == E(ctx_tx, "p_x.x^2")


def test_substitute_identity(ctx_tx):
    e = E(ctx_tx, KDV_L)
    assert e.substitute({}) == e


def test_substitute_binomial(ctx_tx):
    got = E(ctx_tx, "u^2").substitute({C(ctx_tx, "u"): E(ctx_tx, "u + 1")})
    assert got == E(ctx_tx, "u^2 + 2*u + 1")


def test_render_monomial_order(ctx_tx):
    assert render(E(ctx_tx, "2*u_x*u_xx"), ctx_tx) == "2*u_x*u_xx"
    assert render(Expr.zero(), ctx_tx) == "0"
    assert render(E(ctx_tx, "u^2 + 1 + 2*u"), ctx_tx) == "u^2 + 2*u + 1"


def test_render_latex_golden(ctx_tx):
    # canonical order locked: leading coordinate ascending, then degree descending
    got = render(E(ctx_tx, KDV_L), ctx_tx, "latex")
    assert got == "u_{x}^{3} - \\frac{1}{2} u_{t} u_{x} + \\frac{1}{2} u_{xx}^{2}"


def test_render_json_roundtrip(ctx_tx):
    import json
    e = E(ctx_tx, KDV_L)
    data = json.loads(render(e, ctx_tx, "json"))
    assert len(data["monomials"]) == 3
    rebuilt = Expr.zero()
    for mono in data["monomials"]:
        term = Expr.number(Fraction(mono["coeff"]))
        for name, p in mono["factors"]:
            term = term * Expr.coord(ctx_tx.resolve(name)) ** p
        rebuilt = rebuilt + term
    assert rebuilt == e


def test_parse_render_fixpoint_random(ctx_tx):
    rng = random.Random(7)
    pool = jet_pool(ctx_tx, 3) + ctx_tx.momenta_up_to(1)
    for _ in range(150):
        e = random_expr(rng, pool)
        assert parse(render(e, ctx_tx), ctx_tx) == e


def test_ring_laws_random(ctx_tx):
    rng = random.Random(11)
    pool = jet_pool(ctx_tx, 3)
    for _ in range(120):
        a = random_expr(rng, pool)
        b = random_expr(rng, pool)
        c = random_expr(rng, pool)
        assert a + b == b + a
        assert a * b == b * a
        assert a * (b + c) == a * b + a * c
        assert a + Expr.zero() == a
        assert a - a == Expr.zero()


def test_partial_commutes_random(ctx_tx):
    rng = random.Random(13)
    pool = jet_pool(ctx_tx, 3)
    for _ in range(100):
        e = random_expr(rng, pool)
        c1, c2 = rng.choice(pool), rng.choice(pool)
        assert e.partial(c1).partial(c2) == e.partial(c2).partial(c1)


def test_normalization_idempotent(ctx_tx):
    rng = random.Random(17)
    pool = jet_pool(ctx_tx, 3)
    for _ in range(50):
        e = random_expr(rng, pool)
        assert Expr(e.terms) == e


def test_coordinate_equality_and_order():
    I1 = MultiIndex.of(0, 1)
    I2 = MultiIndex.of(1, 0)
    assert I1 == I2  # multiindices are unordered
    a = CoordinateId.jet(0, I1)
    b = CoordinateId.jet(0, I2)
    assert a == b and hash(a) == hash(b)
    ctx = JetContext(("t", "x"), ("u",), max_order=3)
    names = [ctx.name(c) for c in sorted(
        [CoordinateId.momentum(0, MultiIndex(), 1),
         CoordinateId.jet(0, MultiIndex.of(1)),
         CoordinateId.independent(1),
         CoordinateId.jet(0, MultiIndex())],
        key=lambda c: c.sort_key())]
    assert names == ["x", "u", "u_x", "p_.x"]


def test_context_validation():
    with pytest.raises(ValueError):
        JetContext((), ("u",))
    with pytest.raises(ValueError):
        JetContext(("x",), ("x",))
    with pytest.raises(ValueError):
        JetContext(("x",), ("u v",))
