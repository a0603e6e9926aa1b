"""Polynomial expressions in field atoms with exact rational coefficients.

A term is coef * m**em * R**eR * n**en * (product of atoms); an expression
is a canonical sparse sum of terms.  The module supplies the variational
calculus the constraint algorithms run on: Leibniz derivatives, functional
(Euler-Lagrange) derivatives with integration-by-parts signs, velocity
derivatives, substitution, inverse-Laplacian application on linear
expressions, and conversion to and from per-field operator coefficients.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Set, Tuple

from ..errors import NonInvertibleMode, UnsupportedExpression
from .atoms import Atom, Base, atom_from_base
from .ring import OpPoly

Params = Tuple[int, int, int]  # exponents of m, R, n
TermKey = Tuple[Params, Tuple[Atom, ...]]

_NO_PARAMS: Params = (0, 0, 0)


def _merge(terms: Dict[TermKey, Fraction], key: TermKey, coef: Fraction) -> None:
    s = terms.get(key, Fraction(0)) + coef
    if s:
        terms[key] = s
    else:
        terms.pop(key, None)


def _term_sort_key(key: TermKey):
    params, atoms = key
    return (tuple(a.sort_key() for a in atoms), params)


class Expression:
    """Canonical sum of atom-product terms."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Optional[Dict[TermKey, Fraction]] = None):
        self._terms = {k: Fraction(c) for k, c in (terms or {}).items() if c}

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls) -> "Expression":
        return cls()

    @classmethod
    def const(cls, coef, m: int = 0, R: int = 0, n: int = 0) -> "Expression":
        return cls({((m, R, n), ()): Fraction(coef)})

    @classmethod
    def from_atom(cls, atom: Atom, coef=1) -> "Expression":
        return cls({(_NO_PARAMS, (atom,)): Fraction(coef)})

    @classmethod
    def term(cls, coef, params: Params, atoms: Iterable[Atom]) -> "Expression":
        return cls({(params, tuple(sorted(atoms, key=Atom.sort_key))): Fraction(coef)})

    # -- structure ---------------------------------------------------------

    @property
    def terms(self) -> Dict[TermKey, Fraction]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def bases(self) -> Set[Base]:
        out: Set[Base] = set()
        for _, atoms in self._terms:
            for a in atoms:
                out.add(a.base)
        return out

    def atoms_present(self) -> Set[Atom]:
        out: Set[Atom] = set()
        for _, atoms in self._terms:
            out.update(atoms)
        return out

    def constant_part(self) -> "Expression":
        return Expression({k: c for k, c in self._terms.items() if not k[1]})

    def max_dt(self) -> int:
        best = 0
        for _, atoms in self._terms:
            for a in atoms:
                best = max(best, a.dt)
        return best

    def contains(self, base: Base) -> bool:
        return any(a.base == base for _, atoms in self._terms for a in atoms)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "Expression") -> "Expression":
        if not isinstance(other, Expression):
            return NotImplemented
        out = dict(self._terms)
        for k, c in other._terms.items():
            _merge(out, k, c)
        return Expression(out)

    def __sub__(self, other: "Expression") -> "Expression":
        return self.__add__(-other)

    def __neg__(self) -> "Expression":
        return Expression({k: -c for k, c in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            return Expression({k: v * c for k, v in self._terms.items()})
        if not isinstance(other, Expression):
            return NotImplemented
        out: Dict[TermKey, Fraction] = {}
        for (pa, aa), ca in self._terms.items():
            for (pb, ab), cb in other._terms.items():
                params = (pa[0] + pb[0], pa[1] + pb[1], pa[2] + pb[2])
                atoms = tuple(sorted(aa + ab, key=Atom.sort_key))
                _merge(out, (params, atoms), ca * cb)
        return Expression(out)

    __rmul__ = __mul__

    def param_mul(self, m: int = 0, R: int = 0, n: int = 0) -> "Expression":
        return Expression({((p[0] + m, p[1] + R, p[2] + n), atoms): c
                           for (p, atoms), c in self._terms.items()})

    # -- Leibniz derivatives -------------------------------------------------

    def _leibniz(self, bump) -> "Expression":
        out: Dict[TermKey, Fraction] = {}
        for (params, atoms), coef in self._terms.items():
            for idx in range(len(atoms)):
                new = tuple(sorted(atoms[:idx] + (bump(atoms[idx]),) + atoms[idx + 1:],
                                   key=Atom.sort_key))
                _merge(out, (params, new), coef)
        return Expression(out)

    def d_t(self) -> "Expression":
        return self._leibniz(Atom.d_t)

    def d_y(self) -> "Expression":
        return self._leibniz(Atom.d_y)

    def d_x(self, axis: int) -> "Expression":
        return self._leibniz(lambda a: a.d_x(axis))

    def apply_signature(self, dt: int = 0, dy: int = 0,
                        dx: Tuple[int, ...] = (), lap: int = 0) -> "Expression":
        out = self
        for _ in range(dt):
            out = out.d_t()
        for _ in range(dy):
            out = out.d_y()
        for axis in dx:
            out = out.d_x(axis)
        for _ in range(-lap):
            out = apply_inverse_laplacian(out)
        return out

    # -- variational calculus ------------------------------------------------

    def functional_derivative(self, base: Base) -> "Expression":
        """Euler-Lagrange derivative with respect to the field named by base.

        Every derivative decoration on a matched atom moves onto the
        cofactor with the integration-by-parts sign; inverse Laplacians are
        self-adjoint and land on the cofactor unsigned.
        """
        out = Expression.zero()
        for (params, atoms), coef in self._terms.items():
            for idx, a in enumerate(atoms):
                if a.base != base:
                    continue
                cof = Expression.term(coef, params, atoms[:idx] + atoms[idx + 1:])
                sign = -1 if (a.dt + a.dy + len(a.dx)) % 2 else 1
                out = out + cof.apply_signature(a.dt, a.dy, a.dx, a.lap) * sign
        return out

    def velocity_derivative(self, base: Base) -> "Expression":
        """Derivative with respect to the first time derivative of a field."""
        out = Expression.zero()
        for (params, atoms), coef in self._terms.items():
            for idx, a in enumerate(atoms):
                if a.base != base:
                    continue
                if a.dt >= 2:
                    raise UnsupportedExpression(
                        f"second time derivative on {a.render()}")
                if a.dt != 1:
                    continue
                cof = Expression.term(coef, params, atoms[:idx] + atoms[idx + 1:])
                sign = -1 if (a.dy + len(a.dx)) % 2 else 1
                out = out + cof.apply_signature(0, a.dy, a.dx, a.lap) * sign
        return out

    def substitute(self, base: Base, replacement: "Expression") -> "Expression":
        """Replace a field by an expression, derivatives distributing onto it."""
        out = Expression.zero()
        for (params, atoms), coef in self._terms.items():
            matched = [a for a in atoms if a.base == base]
            rest = tuple(a for a in atoms if a.base != base)
            piece = Expression.term(coef, params, rest)
            for a in matched:
                piece = piece * replacement.apply_signature(a.dt, a.dy, a.dx, a.lap)
            out = out + piece
        return out

    # -- linear-form conversions ----------------------------------------------

    def _to_linear_ext(self) -> Dict[Tuple[Base, int, int], OpPoly]:
        out: Dict[Tuple[Base, int, int], OpPoly] = {}
        for (params, atoms), coef in self._terms.items():
            if len(atoms) != 1:
                raise UnsupportedExpression(
                    f"expression is not linear in fields: {self.text()}")
            a = atoms[0]
            e = [0, 0, 0]
            for axis in a.dx:
                e[axis - 1] += 1
            op = OpPoly({(e[0], e[1], e[2], params[0], params[1], params[2]): coef},
                        k=-a.lap)
            key = (a.base, a.dt, a.dy)
            out[key] = out.get(key, OpPoly.zero()) + op
        return {k: v for k, v in out.items() if not v.is_zero()}

    @classmethod
    def _from_linear_ext(cls, mapping: Dict[Tuple[Base, int, int], OpPoly]) -> "Expression":
        out: Dict[TermKey, Fraction] = {}
        for (base, dt, dy), op in mapping.items():
            for mono, coef in op.sorted_terms():
                dx = (1,) * mono[0] + (2,) * mono[1] + (3,) * mono[2]
                atom = atom_from_base(base, dt=dt, dy=dy, dx=dx, lap=-op.k)
                _merge(out, ((mono[3], mono[4], mono[5]), (atom,)), coef)
        return cls(out)

    def to_linear(self) -> Dict[Base, OpPoly]:
        """Coefficient operator per field base; requires a spatial expression."""
        ext = self._to_linear_ext()
        out: Dict[Base, OpPoly] = {}
        for (base, dt, dy), op in ext.items():
            if dt or dy:
                raise UnsupportedExpression(
                    "expression carries time or compact-coordinate derivatives")
            out[base] = op
        return out

    @classmethod
    def from_linear(cls, mapping: Dict[Base, OpPoly]) -> "Expression":
        return cls._from_linear_ext({(base, 0, 0): op for base, op in mapping.items()})

    # -- equality and text -----------------------------------------------------

    def __eq__(self, other) -> bool:
        return isinstance(other, Expression) and self._terms == other._terms

    def __hash__(self) -> int:
        return hash(tuple(sorted(self._terms.items(), key=lambda kv: _term_sort_key(kv[0]))))

    def __bool__(self) -> bool:
        return bool(self._terms)

    def text(self) -> str:
        if not self._terms:
            return "0"
        pieces: List[str] = []
        for key in sorted(self._terms, key=_term_sort_key):
            (em, eR, en), atoms = key
            coef = self._terms[key]
            factors: List[str] = []
            for sym, e in (("m", em), ("R", eR), ("n", en)):
                if e == 1:
                    factors.append(sym)
                elif e:
                    factors.append(f"{sym}^{e}")
            factors.extend(a.render() for a in atoms)
            mag = abs(coef)
            if mag != 1 or not factors:
                factors.insert(0, str(mag))
            body = "*".join(factors)
            if not pieces:
                pieces.append(body if coef > 0 else "-" + body)
            else:
                pieces.append(("+ " if coef > 0 else "- ") + body)
        return " ".join(pieces)

    def __str__(self) -> str:
        return self.text()

    def __repr__(self) -> str:
        return f"Expression({self.text()!r})"


def apply_inverse_laplacian(expr: Expression) -> Expression:
    """Apply the inverse spatial Laplacian to a linear expression.

    Constant terms have no inverse image; nonlinear expressions are out of
    scope for the exact operator layer.
    """
    if expr.is_zero():
        return expr
    for (_, atoms) in expr.terms:
        if not atoms:
            raise NonInvertibleMode(
                "inverse Laplacian of a spatially constant term")
    ext = expr._to_linear_ext()
    inv = OpPoly.laplacian(-1)
    return Expression._from_linear_ext({k: op * inv for k, op in ext.items()})


def density_equivalent(a: Expression, b: Expression) -> bool:
    """True when two densities differ by total derivatives only."""
    diff = a - b
    if not diff.constant_part().is_zero():
        return False
    return all(diff.functional_derivative(base).is_zero() for base in diff.bases())
