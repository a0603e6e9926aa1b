"""Poisson brackets: canonical kernels, antisymmetry, Jacobi, consistency."""

import random
from fractions import Fraction

import pytest

from hamforge.errors import UnsupportedExpression
from hamforge.poisson import (BracketTable, bracket_matrix, pb_density,
                              pb_kernel, pb_with_hamiltonian)
from hamforge.symbolic.atoms import Atom
from hamforge.symbolic.expr import Expression, density_equivalent
from hamforge.symbolic.ring import OpPoly

Q = Atom("field", "q")
P = Atom("momentum", "q")
W = Atom("field", "w")
PW = Atom("momentum", "w")
LAM = Atom("multiplier", "u")

PAIRS = [(Q.base, P.base), (W.base, PW.base)]

D1 = OpPoly.deriv(1)


def ex(atom, coef=1):
    return Expression.from_atom(atom, coef)


def rand_phase_atom(rng: random.Random) -> Atom:
    kind, name = rng.choice([("field", "q"), ("momentum", "q"),
                             ("field", "w"), ("momentum", "w")])
    dx = tuple(sorted(rng.choices((1, 2, 3), k=rng.randint(0, 1))))
    return Atom(kind, name, dx=dx)


def rand_density(rng: random.Random, max_terms: int = 2, max_atoms: int = 2) -> Expression:
    out = Expression.zero()
    for _ in range(rng.randint(1, max_terms)):
        atoms = [rand_phase_atom(rng) for _ in range(rng.randint(1, max_atoms))]
        coef = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        out = out + Expression.term(coef, (rng.randint(0, 1), 0, 0), atoms)
    return out


def rand_linear(rng: random.Random) -> Expression:
    out = Expression.zero()
    for _ in range(rng.randint(1, 3)):
        a = rand_phase_atom(rng)
        out = out + ex(a, Fraction(rng.randint(-4, 4), rng.randint(1, 3)))
    return out


def test_canonical_kernels():
    assert pb_kernel(ex(Q), ex(P), PAIRS) == OpPoly.one()
    assert pb_kernel(ex(P), ex(Q), PAIRS) == -OpPoly.one()
    assert pb_kernel(ex(Q), ex(Q), PAIRS).is_zero()
    assert pb_kernel(ex(Q), ex(PW), PAIRS).is_zero()
    # derivative on the x side sits plainly; on the y side it adjoints over
    assert pb_kernel(ex(Q.d_x(1)), ex(P), PAIRS) == D1
    assert pb_kernel(ex(Q), ex(P.d_x(1)), PAIRS) == -D1


def test_kernel_rejects_nonlinear():
    with pytest.raises(UnsupportedExpression):
        pb_kernel(ex(Q) * ex(Q), ex(P), PAIRS)


def test_bracket_with_hamiltonian_known():
    # H = p^2/2 gives qdot = p
    H = ex(P) * ex(P) * Fraction(1, 2)
    assert pb_with_hamiltonian(ex(Q), H, PAIRS) == ex(P)
    # H = (d1 q)^2/2 gives pdot = d1 d1 q
    Hq = ex(Q.d_x(1)) * ex(Q.d_x(1)) * Fraction(1, 2)
    assert pb_with_hamiltonian(ex(P), Hq, PAIRS) == ex(Q.d_x(1).d_x(1))
    # multipliers ride along and pick up derivatives by parts
    Hl = ex(LAM) * ex(Q.d_x(1))
    assert pb_with_hamiltonian(ex(P), Hl, PAIRS) == ex(LAM.d_x(1))


def test_bracket_matrix_shape():
    m = bracket_matrix([ex(Q), ex(P)], [ex(Q), ex(P)], PAIRS)
    assert m.shape == (2, 2)
    assert m.entry(0, 1) == OpPoly.one()
    assert m.entry(1, 0) == -OpPoly.one()
    assert m.is_kernel_antisymmetric()


def test_bracket_table_swap_rule():
    t = BracketTable()
    t.set(Q, P.d_x(1), D1 * 2)
    assert t.get(Q, P.d_x(1)) == D1 * 2
    assert t.get(P.d_x(1), Q) == -(D1 * 2).adjoint()
    assert t.get(Q, PW).is_zero()
    assert len(t) == 1
    # storing a zero removes the entry
    t.set(Q, P.d_x(1), OpPoly.zero())
    assert len(t) == 0


def test_bracket_table_set_in_swapped_order():
    t1 = BracketTable()
    t2 = BracketTable()
    t1.set(Q, P, OpPoly.one())
    t2.set(P, Q, -OpPoly.one())
    assert t1 == t2


def test_kernel_antisymmetry_randomized():
    # 250 cases of the exchange rule for linear densities
    rng = random.Random(1871)
    for case in range(250):
        f = rand_linear(rng)
        g = rand_linear(rng)
        k_fg = pb_kernel(f, g, PAIRS)
        k_gf = pb_kernel(g, f, PAIRS)
        assert k_fg == -(k_gf.adjoint())


def test_density_antisymmetry_and_jacobi_randomized():
    # 200 cases: antisymmetry is exact; the Jacobi identity holds up to
    # total derivatives, detected by vanishing variational derivatives
    rng = random.Random(6174)
    for case in range(200):
        f = rand_density(rng)
        g = rand_density(rng)
        h = rand_density(rng)
        assert pb_density(f, g, PAIRS) == -pb_density(g, f, PAIRS)
        j = pb_density(f, pb_density(g, h, PAIRS), PAIRS) \
            + pb_density(g, pb_density(h, f, PAIRS), PAIRS) \
            + pb_density(h, pb_density(f, g, PAIRS), PAIRS)
        assert density_equivalent(j, Expression.zero())


def test_two_bracket_faces_agree_randomized():
    # 200 cases: the unintegrated bracket and the density bracket integrate
    # to the same functional
    rng = random.Random(2001)
    for case in range(200):
        f = rand_density(rng)
        h = rand_density(rng)
        a = pb_with_hamiltonian(f, h, PAIRS)
        b = pb_density(f, h, PAIRS)
        assert density_equivalent(a, b)


def test_kernel_constant_part_matches_integrated_bracket_randomized():
    # 200 cases: for linear densities the integrated kernel (its
    # derivative-free part) equals the unintegrated bracket, which is then
    # spatially constant
    rng = random.Random(4096)
    for case in range(200):
        f = rand_linear(rng)
        g = rand_linear(rng)
        kern = pb_kernel(f, g, PAIRS)
        const = Expression.zero()
        for mono, coef in kern.sorted_terms():
            if mono[0] == 0 and mono[1] == 0 and mono[2] == 0 and kern.k == 0:
                const = const + Expression.const(coef, m=mono[3], R=mono[4], n=mono[5])
        assert pb_with_hamiltonian(f, g, PAIRS) == const
