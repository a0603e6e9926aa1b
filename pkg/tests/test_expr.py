"""Expression algebra: Leibniz rules, variational derivatives, substitution."""

import random
from fractions import Fraction

import pytest

from hamforge.errors import NonInvertibleMode, UnsupportedExpression
from hamforge.symbolic.atoms import Atom
from hamforge.symbolic.expr import (Expression, apply_inverse_laplacian,
                                    density_equivalent)
from hamforge.symbolic.ring import OpPoly

Q = Atom("field", "q")
W = Atom("field", "w")
A1 = Atom("field", "A", comp=1)
PQ = Atom("momentum", "q")


def ex(atom, coef=1):
    return Expression.from_atom(atom, coef)


def rand_atom(rng: random.Random, max_dt: int = 1, allow_lap: bool = False) -> Atom:
    kind, name = rng.choice([("field", "q"), ("field", "w"),
                             ("field", "A"), ("momentum", "q")])
    comp = rng.choice([None, 1, 2]) if name == "A" else None
    mode = rng.choice([None, "0", "n"])
    dx = tuple(sorted(rng.choices((1, 2, 3), k=rng.randint(0, 2))))
    lap = -rng.randint(0, 1) if allow_lap else 0
    return Atom(kind, name, comp=comp, mode=mode,
                dt=rng.randint(0, max_dt), dy=rng.randint(0, 1), dx=dx, lap=lap)


def rand_expr(rng: random.Random, max_terms: int = 3, max_atoms: int = 2,
              max_dt: int = 1, allow_lap: bool = False) -> Expression:
    out = Expression.zero()
    for _ in range(rng.randint(0, max_terms)):
        atoms = [rand_atom(rng, max_dt, allow_lap) for _ in range(rng.randint(0, max_atoms))]
        params = (rng.randint(-1, 2), rng.randint(-1, 1), rng.randint(-1, 1))
        coef = Fraction(rng.randint(-6, 6), rng.randint(1, 4))
        out = out + Expression.term(coef, params, atoms)
    return out


def test_zero_and_constants():
    assert Expression.zero().is_zero()
    assert Expression.const(0).is_zero()
    c = Expression.const(Fraction(3, 2), m=2)
    assert c.constant_part() == c
    assert not c.contains(Q.base)


def test_term_canonical_ordering():
    a = Expression.term(1, (0, 0, 0), [PQ, Q])
    b = Expression.term(1, (0, 0, 0), [Q, PQ])
    assert a == b
    assert hash(a) == hash(b)


def test_product_rule_time_derivative():
    f = ex(Q)
    g = ex(W)
    lhs = (f * g).d_t()
    rhs = f.d_t() * g + f * g.d_t()
    assert lhs == rhs


def test_functional_derivative_simple():
    # quadratic velocity term: delta(q'^2/2)/delta(q) = -q''
    L = ex(Q.d_t()) * ex(Q.d_t()) * Fraction(1, 2)
    got = L.functional_derivative(Q.base)
    assert got == ex(Q.d_t().d_t(), -1)
    # cubic multiplicity: delta(q^3)/delta(q) = 3 q^2
    L3 = ex(Q) * ex(Q) * ex(Q)
    assert L3.functional_derivative(Q.base) == ex(Q) * ex(Q) * 3


def test_functional_derivative_gradient_sign():
    # delta(w * d1 q)/delta(q) = -d1 w
    L = ex(W) * ex(Q.d_x(1))
    assert L.functional_derivative(Q.base) == ex(W.d_x(1), -1)
    # and with two spatial derivatives the sign comes back
    L2 = ex(W) * ex(Q.d_x(1).d_x(2))
    assert L2.functional_derivative(Q.base) == ex(W.d_x(1).d_x(2))


def test_velocity_derivative():
    L = ex(Q.d_t()) * ex(Q.d_t()) * Fraction(1, 2) + ex(W) * ex(Q.d_t())
    assert L.velocity_derivative(Q.base) == ex(Q.d_t()) + ex(W)
    # gradient on the velocity flips sign onto the cofactor
    Lg = ex(W) * ex(Q.d_t().d_x(3))
    assert Lg.velocity_derivative(Q.base) == ex(W.d_x(3), -1)
    with pytest.raises(UnsupportedExpression):
        ex(Q.d_t().d_t()).velocity_derivative(Q.base)


def test_substitute_expansion():
    # q |-> w + q under q^2
    L = ex(Q) * ex(Q)
    got = L.substitute(Q.base, ex(W) + ex(Q))
    want = (ex(W) + ex(Q)) * (ex(W) + ex(Q))
    assert got == want
    # derivative decorations distribute onto the replacement
    Ld = ex(Q.d_x(1))
    assert Ld.substitute(Q.base, ex(W.d_x(2))) == ex(W.d_x(1).d_x(2))


def test_inverse_laplacian_folds_laplacian():
    grad2 = ex(Q.d_x(1).d_x(1)) + ex(Q.d_x(2).d_x(2)) + ex(Q.d_x(3).d_x(3))
    assert apply_inverse_laplacian(grad2) == ex(Q)
    assert apply_inverse_laplacian(ex(Q)) == ex(Q.inv_lap())
    with pytest.raises(NonInvertibleMode):
        apply_inverse_laplacian(Expression.const(2))
    with pytest.raises(UnsupportedExpression):
        apply_inverse_laplacian(ex(Q) * ex(W))


def test_linear_round_trip():
    e = ex(Q.d_x(1), 2) + ex(W.inv_lap(), -1) + Expression.term(
        Fraction(1, 3), (2, 0, -1), [A1.d_x(2).d_x(2)])
    lin = e.to_linear()
    assert Expression.from_linear(lin) == e
    sig = OpPoly.laplacian()
    assert lin[Q.base] == OpPoly.deriv(1) * 2
    with pytest.raises(UnsupportedExpression):
        (ex(Q) * ex(W)).to_linear()
    with pytest.raises(UnsupportedExpression):
        ex(Q.d_t()).to_linear()


def test_density_equivalence():
    L = ex(Q) * ex(W)
    assert density_equivalent(L, L + (ex(Q) * ex(W.d_x(2))).d_x(1) - (ex(Q) * ex(W.d_x(2))).d_x(1))
    assert density_equivalent(L + (ex(Q) * ex(Q)).d_x(3), L)
    assert density_equivalent(L + (ex(Q) * ex(W)).d_y(), L)
    assert not density_equivalent(L + Expression.const(1), L)
    assert not density_equivalent(L + ex(Q), L)


def test_leibniz_randomized():
    # 250 cases: product rule for all three derivative maps, linearity,
    # and commutation of distinct derivative maps
    rng = random.Random(9001)
    for case in range(250):
        f = rand_expr(rng)
        g = rand_expr(rng)
        assert (f * g).d_t() == f.d_t() * g + f * g.d_t()
        assert (f * g).d_y() == f.d_y() * g + f * g.d_y()
        ax = rng.choice((1, 2, 3))
        assert (f * g).d_x(ax) == f.d_x(ax) * g + f * g.d_x(ax)
        assert (f + g).d_t() == f.d_t() + g.d_t()
        assert f.d_x(1).d_x(2) == f.d_x(2).d_x(1)
        assert f.d_t().d_x(ax) == f.d_x(ax).d_t()


def test_functional_derivative_kills_total_derivatives():
    # 250 cases: the variational derivative of a total derivative vanishes
    # for every field present, in all three directions
    rng = random.Random(5150)
    for case in range(250):
        f = rand_expr(rng, max_terms=2, max_atoms=2)
        for total in (f.d_t(), f.d_y(), f.d_x(rng.choice((1, 2, 3)))):
            for base in total.bases():
                assert total.functional_derivative(base).is_zero()


def test_functional_derivative_linearity_randomized():
    # 200 cases
    rng = random.Random(314159)
    for case in range(200):
        f = rand_expr(rng)
        g = rand_expr(rng)
        c = Fraction(rng.randint(-5, 5), rng.randint(1, 3))
        for base in f.bases() | g.bases():
            lhs = (f * c + g).functional_derivative(base)
            rhs = f.functional_derivative(base) * c + g.functional_derivative(base)
            assert lhs == rhs


def test_linear_round_trip_randomized():
    # 200 cases: operator-form coefficients survive the expression round trip
    # exactly, and the expression-level round trip is idempotent (it puts
    # inverse-Laplacian terms over a common canonical denominator)
    rng = random.Random(777)
    for case in range(200):
        e = Expression.zero()
        for _ in range(rng.randint(1, 4)):
            a = rand_atom(rng, max_dt=0, allow_lap=True)
            a = Atom(a.kind, a.name, comp=a.comp, mode=a.mode,
                     dt=0, dy=0, dx=a.dx, lap=a.lap)
            coef = Fraction(rng.randint(-6, 6), rng.randint(1, 4))
            e = e + Expression.term(coef, (rng.randint(-1, 1), 0, rng.randint(-1, 1)), [a])
        lin = e.to_linear()
        back = Expression.from_linear(lin)
        assert back.to_linear() == lin
        assert Expression.from_linear(back.to_linear()) == back
