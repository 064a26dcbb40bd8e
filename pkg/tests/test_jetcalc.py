"""Multiindex combinatorics, total derivatives, prolongation."""

import random

import pytest

from conftest import jet_pool, random_expr
from varjet.jetcalc import (
    EquationSystem,
    iterated_total_derivative,
    prolong,
    total_derivative,
)
from varjet.multiindex import EMPTY, MultiIndex
from varjet.symcore import (
    Expr,
    JetContext,
    OrderOverflowError,
    WrongDomainError,
    parse,
)


def test_remove_one_repeated():
    I = MultiIndex.of(1, 1)  # (x, x) with t=0, x=1
    assert I.removals() == [(MultiIndex.of(1), 1, 2)]


def test_remove_one_distinct():
    I = MultiIndex.of(0, 1)
    assert I.removals() == [(MultiIndex.of(1), 0, 1), (MultiIndex.of(0), 1, 1)]


def test_remove_one_triple():
    I = MultiIndex.of(1, 1, 1)
    assert I.removals() == [(MultiIndex.of(1, 1), 1, 3)]


def test_remove_one_empty():
    assert EMPTY.removals() == []


def test_remove_one_multiplicities_random():
    rng = random.Random(3)
    for _ in range(200):
        I = MultiIndex(tuple(rng.randint(0, 2) for _ in range(rng.randint(1, 6))))
        removals = I.removals()
        assert sum(mult for _, _, mult in removals) == len(I)
        for J, i, _ in removals:
            assert J.with_index(i) == I


def test_total_derivative_definition(ctx_tx):
    assert total_derivative(parse("u", ctx_tx), 1, ctx_tx) == parse("u_x", ctx_tx)


def test_total_derivative_leibniz_forced(ctx_tx):
    got = total_derivative(parse("u_x^2", ctx_tx), 1, ctx_tx)
    assert got == parse("2*u_x*u_xx", ctx_tx)


def test_total_derivative_kdv_dt_term(ctx_tx):
    # hand chain-rule oracle: D_t(3 u_x^2 - u_t/2) = 6 u_x u_tx - u_tt/2
    got = total_derivative(parse("3*u_x^2 - 1/2*u_t", ctx_tx), 0, ctx_tx)
    assert got == parse("6*u_x*u_tx - 1/2*u_tt", ctx_tx)


def test_total_derivative_independent_coordinate(ctx_tx):
    assert total_derivative(parse("t*x^2", ctx_tx), 1, ctx_tx) == parse("2*t*x", ctx_tx)
    assert total_derivative(parse("x*u", ctx_tx), 1, ctx_tx) == parse("u + x*u_x", ctx_tx)


def test_total_derivative_rejects_momenta(ctx_tx):
    with pytest.raises(WrongDomainError):
        total_derivative(parse("p_.t*u", ctx_tx), 0, ctx_tx)


def test_total_derivative_order_overflow():
    ctx = JetContext(("x",), ("u",), max_order=2)
    with pytest.raises(OrderOverflowError):
        total_derivative(parse("u_xx", ctx), 0, ctx)
    relaxed = JetContext(("x",), ("u",), max_order=2, auto_extend=True)
    assert not total_derivative(parse("u_xx", relaxed), 0, relaxed).is_zero()


def test_iterated_total_derivative(ctx_tx):
    assert iterated_total_derivative(parse("u_xx", ctx_tx), MultiIndex.of(1, 1),
                                     ctx_tx.extended(4)) == parse("u_xxxx", ctx_tx)
    e = parse("u_x^2 - u*u_t", ctx_tx)
    assert iterated_total_derivative(e, EMPTY, ctx_tx) == e
    assert iterated_total_derivative(parse("u", ctx_tx), MultiIndex.of(0, 1), ctx_tx) \
        == parse("u_tx", ctx_tx)


def test_commutativity_random(ctx_tx):
    rng = random.Random(5)
    ctx = ctx_tx.extended(6)
    pool = jet_pool(ctx, 3)
    for _ in range(150):
        e = random_expr(rng, pool)
        ij = [(0, 1), (0, 0), (1, 1)][rng.randint(0, 2)]
        a = total_derivative(total_derivative(e, ij[0], ctx), ij[1], ctx)
        b = total_derivative(total_derivative(e, ij[1], ctx), ij[0], ctx)
        assert a == b


def test_leibniz_random(ctx_tx):
    rng = random.Random(9)
    ctx = ctx_tx.extended(6)
    pool = jet_pool(ctx, 3)
    for _ in range(150):
        a = random_expr(rng, pool)
        b = random_expr(rng, pool)
        i = rng.randint(0, 1)
        assert total_derivative(a * b, i, ctx) == \
            total_derivative(a, i, ctx) * b + a * total_derivative(b, i, ctx)


def test_prolong_single_equation():
    ctx = JetContext(("x",), ("u",), max_order=3)
    sys0 = EquationSystem(ctx, (("eq", parse("u_x", ctx)),))
    got = prolong(sys0, 1)
    assert [r for _, r in got.equations] == [parse("u_x", ctx), parse("u_xx", ctx)]
    assert [lab for lab, _ in got.equations] == ["eq", "eq|x"]


def test_prolong_heat():
    ctx = JetContext(("t", "x"), ("u",), max_order=4)
    sys0 = EquationSystem(ctx, (("heat", parse("u_t - u_xx", ctx)),))
    got = prolong(sys0, 1)
    residuals = {lab: r for lab, r in got.equations}
    assert residuals["heat|t"] == parse("u_tt - u_txx", ctx)
    assert residuals["heat|x"] == parse("u_tx - u_xxx", ctx)


def test_prolong_level_zero_identity(ctx_tx):
    from conftest import KDV_EL
    sys0 = EquationSystem(ctx_tx, (("el", parse(KDV_EL, ctx_tx)),))
    assert prolong(sys0, 0) is sys0


def test_equation_system_json_roundtrip(ctx_tx):
    from conftest import KDV_EL
    sys0 = EquationSystem(ctx_tx, (("el", parse(KDV_EL, ctx_tx)),))
    data = sys0.to_json_dict()
    back = EquationSystem.from_json_dict(data, ctx_tx)
    assert back.equations == sys0.equations
    assert back.unknowns == sys0.unknowns


def test_equation_system_label_uniqueness(ctx_tx):
    from varjet.symcore import VarjetError
    with pytest.raises(VarjetError):
        EquationSystem(ctx_tx, (("a", parse("u", ctx_tx)), ("a", parse("u_x", ctx_tx))))
