"""Orbifold reduction: harmonic table, golden 4D density, decoupling."""

import random
import time
from fractions import Fraction

import pytest
import sympy

from hamforge.compactify import (ModeExpansion, expand_on_orbifold,
                                 integrate_extra_dimension, split_levels)
from hamforge.dsl import CompactDim, FieldDecl, TheorySpec, parse_theory
from hamforge.errors import HamforgeError, UnsupportedExpression
from hamforge.symbolic.atoms import Atom
from hamforge.symbolic.expr import Expression

from conftest import fixture_text


SPEC = parse_theory(fixture_text("stueckelberg5d.thy"))


# ---------------------------------------------------------------------------
# the orthogonality table, checked by direct sympy antiderivatives


def test_harmonic_orthogonality_table():
    y, R = sympy.symbols("y R", positive=True)
    n, mm = sympy.symbols("n mm", integer=True, positive=True)
    period = (y, 0, 2 * sympy.pi * R)

    assert sympy.integrate(sympy.sin(n * y / R) ** 2, period) == sympy.pi * R
    assert sympy.integrate(sympy.cos(n * y / R) ** 2, period) == sympy.pi * R
    assert sympy.integrate(
        sympy.sin(n * y / R) * sympy.cos(n * y / R), period) == 0
    assert sympy.integrate(sympy.sin(n * y / R), period) == 0
    assert sympy.integrate(sympy.cos(n * y / R), period) == 0
    assert sympy.integrate(sympy.Integer(1), period) == 2 * sympy.pi * R

    # distinct levels drop out
    for a, b in [(1, 2), (2, 5), (3, 4)]:
        for f in (sympy.sin, sympy.cos):
            for g in (sympy.sin, sympy.cos):
                val = sympy.integrate(f(a * y / R) * g(b * y / R), period)
                assert sympy.simplify(val) == 0
    # and the generic cross integral, with the n != mm branch selected
    cross = sympy.integrate(
        sympy.sin(n * y / R) * sympy.sin(mm * y / R), period)
    assert sympy.simplify(cross.subs({n: 7, mm: 3})) == 0


# ---------------------------------------------------------------------------
# expansion assignments


def test_expansion_assignments():
    exp = expand_on_orbifold(SPEC, 4)
    assert exp.truncation == 4 and exp.radius == "R"

    a5 = exp.component("A", 5)
    assert (a5.parity, a5.basis, a5.has_zero_mode) == ("odd", "sin", False)
    assert a5.zero_norm is None and a5.mode_norm == "1/sqrt(pi*R)"

    th = exp.component("theta", None)
    assert (th.parity, th.basis, th.has_zero_mode) == ("even", "cos", True)
    assert th.zero_norm == "1/sqrt(2*pi*R)"

    for mu in (0, 1, 2, 3):
        amu = exp.component("A", mu)
        assert (amu.basis, amu.has_zero_mode) == ("cos", True)


def test_expansion_preconditions():
    with pytest.raises(HamforgeError):
        expand_on_orbifold(SPEC, 0)
    flat = parse_theory(fixture_text("maxwell4d.thy"))
    with pytest.raises(HamforgeError):
        expand_on_orbifold(flat, 3)


def test_hypothetical_odd_scalar_has_no_zero_mode():
    text = ("theory t {\n  dim 5;\n  metric (+----);\n"
            "  compact y on S1/Z2 radius R;\n"
            "  field w scalar parity(odd);\n"
            "  lagrangian = d[M] w * d[M] w;\n}\n")
    spec = parse_theory(text)
    exp = expand_on_orbifold(spec, 2)
    w = exp.component("w", None)
    assert (w.basis, w.has_zero_mode) == ("sin", False)
    reduced = integrate_extra_dimension(spec, exp)
    assert split_levels(reduced)["0"].is_zero()


# ---------------------------------------------------------------------------
# the golden reduced density


def _field(name, comp=None, mode=None, dt=0, dx=()):
    return Expression.from_atom(Atom("field", name, comp=comp, mode=mode,
                                     dt=dt, dx=tuple(dx)))


def _d(mu, e):
    return e.d_t() if mu == 0 else e.d_x(mu)


_ETA = {0: 1, 1: -1, 2: -1, 3: -1}


def _expected_eq6():
    out = Expression.zero()
    for mode in ("0", "n"):
        A = {mu: _field("A", comp=mu, mode=mode) for mu in range(4)}
        th = _field("theta", mode=mode)
        # -1/4 F F
        for mu in range(4):
            for nu in range(4):
                f = _d(mu, A[nu]) - _d(nu, A[mu])
                out = out + f * f * Fraction(-1, 4) * (_ETA[mu] * _ETA[nu])
        # + m^2 (A + d theta)^2 with indices contracted
        for mu in range(4):
            s = A[mu] + _d(mu, th)
            out = out + (s * s * _ETA[mu]).param_mul(m=2)
    # excited-level extras
    a5 = _field("A", comp=5, mode="n")
    thn = _field("theta", mode="n")
    for mu in range(4):
        v = _d(mu, a5) + _field("A", comp=mu, mode="n").param_mul(R=-1, n=1)
        out = out + (v * v * _ETA[mu]) * Fraction(1, 2)
    w = a5 - thn.param_mul(R=-1, n=1)
    out = out - (w * w).param_mul(m=2)
    return out


def test_reduced_density_matches_hand_expansion():
    t0 = time.monotonic()
    exp = expand_on_orbifold(SPEC, 3)
    reduced = integrate_extra_dimension(SPEC, exp)
    assert reduced == _expected_eq6()
    assert time.monotonic() - t0 < 1.0


def test_zero_level_block_is_flat_massive_vector_with_scalar():
    exp = expand_on_orbifold(SPEC, 3)
    blocks = split_levels(integrate_extra_dimension(SPEC, exp))

    flat_text = ("theory t {\n  dim 4;\n  metric (+---);\n  param m;\n"
                 "  field A vector;\n  field theta scalar;\n"
                 "  lagrangian = -1/4 * F[M,N] * F[M,N]\n"
                 "    + m^2 * (A[M] + d[M] theta) * (A[M] + d[M] theta);\n}\n")
    flat = parse_theory(flat_text).lagrangian
    relabeled = Expression.zero()
    for ((em, eR, en), atoms), coef in flat.terms.items():
        tagged = [Atom(a.kind, a.name, comp=a.comp, mode="0",
                       dt=a.dt, dy=a.dy, dx=a.dx, lap=a.lap) for a in atoms]
        relabeled = relabeled + Expression.term(coef, (em, eR, en), tagged)
    assert blocks["0"] == relabeled


def test_level_blocks_decouple_and_radius_powers_balance():
    exp = expand_on_orbifold(SPEC, 3)
    reduced = integrate_extra_dimension(SPEC, exp)
    for (params, atoms), _ in reduced.terms.items():
        modes = {a.mode for a in atoms}
        assert len(modes) == 1
        _, eR, en = params
        assert eR == -en and en >= 0


def test_quadratic_restriction_and_mode_reuse_rejected():
    cubic = ("theory t {\n  dim 5;\n  metric (+----);\n"
             "  compact y on S1/Z2 radius R;\n"
             "  field w scalar parity(even);\n"
             "  lagrangian = w * w * w;\n}\n")
    spec = parse_theory(cubic)
    with pytest.raises(UnsupportedExpression):
        integrate_extra_dimension(spec, expand_on_orbifold(spec, 2))

    linear = ("theory t {\n  dim 5;\n  metric (+----);\n"
              "  compact y on S1/Z2 radius R;\n"
              "  field w scalar parity(even);\n"
              "  lagrangian = w * w + w;\n}\n")
    spec2 = parse_theory(linear)
    with pytest.raises(UnsupportedExpression):
        integrate_extra_dimension(spec2, expand_on_orbifold(spec2, 2))


# ---------------------------------------------------------------------------
# gauge covariance of the reduced density


def test_reduced_density_gauge_invariant():
    exp = expand_on_orbifold(SPEC, 3)
    reduced = integrate_extra_dimension(SPEC, exp)

    eps0 = Expression.from_atom(Atom("multiplier", "eps", mode="0"))
    epsn = Expression.from_atom(Atom("multiplier", "eps", mode="n"))
    shifted = reduced
    for mode, eps in (("0", eps0), ("n", epsn)):
        for mu in range(4):
            base = ("field", "A", mu, mode)
            shifted = shifted.substitute(
                base, _field("A", comp=mu, mode=mode) - _d(mu, eps))
        shifted = shifted.substitute(
            ("field", "theta", None, mode),
            _field("theta", mode=mode) + eps)
    shifted = shifted.substitute(
        ("field", "A", 5, "n"),
        _field("A", comp=5, mode="n") + epsn.param_mul(R=-1, n=1))
    assert shifted == reduced


# ---------------------------------------------------------------------------
# randomized oracle: engine reduction vs direct sympy integration


def _sym_tag(kind, name, comp, mode, dt, dx):
    tag = f"{kind}_{name}"
    if comp is not None:
        tag += f"_c{comp}"
    tag += f"_m{mode}_t{dt}_x{''.join(map(str, dx))}"
    return sympy.Symbol(tag)


def _engine_to_sympy(e: Expression, n_val: int):
    m, R = sympy.symbols("m R", positive=True)
    total = sympy.Integer(0)
    for ((em, eR, en), atoms), coef in e.terms.items():
        part = sympy.Rational(coef.numerator, coef.denominator)
        part *= m ** em * R ** eR * sympy.Integer(n_val) ** en
        for a in atoms:
            assert a.dy == 0 and a.lap == 0 and a.mode is not None
            part *= _sym_tag(a.kind, a.name, a.comp, a.mode, a.dt, a.dx)
        total += part
    return sympy.expand(total)


def _sympy_field(y, R, name, comp, parity, dt, dy, dx, n_val):
    """Directly expanded harmonic sum for one decorated atom."""
    pieces = []
    if parity == "even":
        zero = _sym_tag("field", name, comp, "0", dt, dx) / sympy.sqrt(2 * sympy.pi * R)
        pieces.append(zero)
        wave = sympy.cos(n_val * y / R)
    else:
        wave = sympy.sin(n_val * y / R)
    coefn = _sym_tag("field", name, comp, "n", dt, dx) / sympy.sqrt(sympy.pi * R)
    pieces.append(coefn * wave)
    total = sum(pieces)
    return sympy.diff(total, y, dy) if dy else total


def test_reduction_matches_sympy_integration_randomized():
    rng = random.Random(95800)
    y, R = sympy.symbols("y R", positive=True)

    comps = [("A", 0), ("A", 1), ("A", 3), ("A", 5), ("theta", None)]
    for case in range(60):
        n_val = rng.choice((1, 2, 3))
        atoms = []
        for _ in range(2):
            name, comp = rng.choice(comps)
            atoms.append(Atom("field", name, comp=comp,
                              dt=rng.randrange(0, 2),
                              dy=rng.randrange(0, 3),
                              dx=tuple(sorted(rng.choice((1, 2, 3))
                                              for _ in range(rng.randrange(0, 2))))))
        coef = Fraction(rng.randrange(-4, 5) or 1, rng.randrange(1, 4))
        em = rng.randrange(0, 3)
        density = Expression.term(coef, (em, 0, 0), atoms)
        spec = TheorySpec(
            name="t", dim=5, metric=(1, -1, -1, -1, -1),
            compact=CompactDim("y", "R"), params=("m",),
            fields=(FieldDecl("A", "vector", {"mu": "even", "5": "odd"}),
                    FieldDecl("theta", "scalar", {"all": "even"})),
            lagrangian=density, gauge_blocks=())
        reduced = integrate_extra_dimension(spec, expand_on_orbifold(spec, 2))
        got = _engine_to_sympy(reduced, n_val)

        m = sympy.Symbol("m", positive=True)
        parities = {("A", 5): "odd"}
        prod = sympy.Rational(coef.numerator, coef.denominator) * m ** em
        for a in atoms:
            parity = parities.get((a.name, a.comp), "even")
            prod *= _sympy_field(y, R, a.name, a.comp, parity,
                                 a.dt, a.dy, a.dx, n_val)
        want = sympy.integrate(sympy.expand(prod), (y, 0, 2 * sympy.pi * R))
        assert sympy.simplify(got - want) == 0, f"case {case}"
