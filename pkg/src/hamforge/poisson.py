"""Poisson brackets over the exact symbolic layer.

Three faces of the same bracket, used in different places:

* pb_kernel      -- the two-point kernel {f(x), g(y)} as an operator acting
                    on the delta function, for linear densities; this is
                    what constraint algebra matrices are made of.
* pb_with_hamiltonian -- the unintegrated bracket {f(x), integral of H},
                    the time-evolution workhorse of consistency closure.
* pb_density     -- the bracket density built from variational derivatives,
                    equal to the previous one up to total derivatives; kept
                    separate because its algebraic identities (antisymmetry,
                    Jacobi) are easy to state and test.

Canonical pairs are passed explicitly as (field base, momentum base) tuples.
"""

from __future__ import annotations

from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .errors import UnsupportedExpression
from .symbolic.atoms import Atom, Base
from .symbolic.expr import Expression
from .symbolic.matrix import KernelMatrix
from .symbolic.ring import OpPoly

Pair = Tuple[Base, Base]


def _occurrences(expr: Expression, base: Base) -> Iterator[Tuple[Atom, Expression]]:
    """Yield (atom, cofactor) for every occurrence of the base in expr."""
    for (params, atoms), coef in expr.terms.items():
        for idx, a in enumerate(atoms):
            if a.base == base:
                yield a, Expression.term(coef, params, atoms[:idx] + atoms[idx + 1:])


def pb_kernel(f: Expression, g: Expression, pairs: Sequence[Pair]) -> OpPoly:
    """The kernel K with {f(x), g(y)} = K_x delta(x - y).

    Both densities must be linear in the phase-space fields; the kernel of
    a nonlinear pair would carry field dependence, which the operator ring
    cannot represent.
    """
    fl = f.to_linear()
    gl = g.to_linear()
    out = OpPoly.zero()
    for qb, pb in pairs:
        fq, gp = fl.get(qb), gl.get(pb)
        if fq is not None and gp is not None:
            out = out + fq * gp.adjoint()
        fp, gq = fl.get(pb), gl.get(qb)
        if fp is not None and gq is not None:
            out = out - fp * gq.adjoint()
    return out


def pb_with_hamiltonian(f: Expression, ham: Expression,
                        pairs: Sequence[Pair]) -> Expression:
    """The bracket {f(x), integral of ham}, unintegrated in x.

    Derivative decorations on f's atoms land on the variational derivatives
    of the Hamiltonian density; multipliers inside ham ride along as inert
    coefficient functions and pick up derivatives through integration by
    parts, which is exactly how consistency conditions want them.
    """
    out = Expression.zero()
    for qb, pb in pairs:
        el_p: Optional[Expression] = None
        el_q: Optional[Expression] = None
        for a, cof in _occurrences(f, qb):
            if a.dt or a.dy:
                raise UnsupportedExpression(
                    f"bracket of a non-phase-space atom {a.render()}")
            if el_p is None:
                el_p = ham.functional_derivative(pb)
            out = out + cof * el_p.apply_signature(dx=a.dx, lap=a.lap)
        for a, cof in _occurrences(f, pb):
            if a.dt or a.dy:
                raise UnsupportedExpression(
                    f"bracket of a non-phase-space atom {a.render()}")
            if el_q is None:
                el_q = ham.functional_derivative(qb)
            out = out - cof * el_q.apply_signature(dx=a.dx, lap=a.lap)
    return out


def pb_density(f: Expression, g: Expression, pairs: Sequence[Pair]) -> Expression:
    """Bracket density from variational derivatives.

    Integrates to the same functional as pb_with_hamiltonian; exactly
    antisymmetric term by term.
    """
    out = Expression.zero()
    for qb, pb in pairs:
        out = out + f.functional_derivative(qb) * g.functional_derivative(pb)
        out = out - f.functional_derivative(pb) * g.functional_derivative(qb)
    return out


def bracket_matrix(rows: Sequence[Expression], cols: Sequence[Expression],
                   pairs: Sequence[Pair]) -> KernelMatrix:
    """Matrix of mutual bracket kernels between two lists of densities."""
    return KernelMatrix([[pb_kernel(a, b, pairs) for b in cols] for a in rows])


class BracketTable:
    """Bracket kernels between atoms, stored once per unordered pair.

    The kernel of a swapped query picks up the exchange rule
    {b(x), a(y)} = -adjoint of {a(x), b(y)}.
    """

    def __init__(self):
        self._entries: Dict[Tuple[Atom, Atom], OpPoly] = {}

    def set(self, a: Atom, b: Atom, kernel: OpPoly) -> None:
        if (b.sort_key(), a.sort_key()) < (a.sort_key(), b.sort_key()):
            a, b = b, a
            kernel = -kernel.adjoint()
        if kernel.is_zero():
            self._entries.pop((a, b), None)
        else:
            self._entries[(a, b)] = kernel

    def get(self, a: Atom, b: Atom) -> OpPoly:
        if (b.sort_key(), a.sort_key()) < (a.sort_key(), b.sort_key()):
            swapped = self._entries.get((b, a))
            return -swapped.adjoint() if swapped is not None else OpPoly.zero()
        return self._entries.get((a, b), OpPoly.zero())

    def items(self) -> List[Tuple[Tuple[Atom, Atom], OpPoly]]:
        return sorted(self._entries.items(),
                      key=lambda kv: (kv[0][0].sort_key(), kv[0][1].sort_key()))

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, BracketTable) and self._entries == other._entries

    def text(self) -> str:
        lines = [f"{{{a.render()}, {b.render()}}} = ({kern.text()}) * delta"
                 for (a, b), kern in self.items()]
        return "\n".join(lines)
