"""Operator kernels and their field of fractions.

A two-point kernel K(x, y) = Op_x delta(x - y) is stored as the operator
polynomial alone; composition of kernels is then plain ring multiplication,
and exchanging the two points maps the operator to minus-adjoint-free form
via its formal adjoint.  OpFrac adjoins exact quotients for the elimination
steps whose intermediate pivots leave the ring; anything that survives to a
published result must normalize back into the ring.
"""

from __future__ import annotations

from typing import Optional

from .ring import OpPoly


def kernel_compose(a: OpPoly, b: OpPoly) -> OpPoly:
    """Compose two kernels: integrate out the shared middle point."""
    return a * b


def kernel_swap(a: OpPoly) -> OpPoly:
    """Exchange the two points of a kernel: K(y, x) from K(x, y)."""
    return a.adjoint()


def normalize(a: OpPoly) -> OpPoly:
    """Return the canonical form (idempotent; construction already is)."""
    return OpPoly(a.terms, a.k)


class OpFrac:
    """Exact quotient of two operator polynomials."""

    __slots__ = ("num", "den")

    def __init__(self, num: OpPoly, den: Optional[OpPoly] = None):
        if den is None:
            den = OpPoly.one()
        if den.is_zero():
            raise ZeroDivisionError("operator fraction with zero denominator")
        if num.is_zero():
            den = OpPoly.one()
        elif den.is_unit():
            num = num * den.unit_inverse()
            den = OpPoly.one()
        else:
            q = num.exact_div(den)
            if q is not None:
                num, den = q, OpPoly.one()
            else:
                q = den.exact_div(num)
                if q is not None and q.is_unit():
                    num, den = q.unit_inverse(), OpPoly.one()
        self.num = num
        self.den = den

    @classmethod
    def zero(cls) -> "OpFrac":
        return cls(OpPoly.zero())

    @classmethod
    def one(cls) -> "OpFrac":
        return cls(OpPoly.one())

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def as_ring(self) -> Optional[OpPoly]:
        """The fraction as a ring element, or None if it genuinely is not one."""
        if self.den == OpPoly.one():
            return self.num
        return None

    def __add__(self, other: "OpFrac") -> "OpFrac":
        return OpFrac(self.num * other.den + other.num * self.den,
                      self.den * other.den)

    def __sub__(self, other: "OpFrac") -> "OpFrac":
        return OpFrac(self.num * other.den - other.num * self.den,
                      self.den * other.den)

    def __neg__(self) -> "OpFrac":
        return OpFrac(-self.num, self.den)

    def __mul__(self, other):
        if isinstance(other, OpFrac):
            return OpFrac(self.num * other.num, self.den * other.den)
        if isinstance(other, OpPoly):
            return OpFrac(self.num * other, self.den)
        return NotImplemented

    def __truediv__(self, other: "OpFrac") -> "OpFrac":
        if other.is_zero():
            raise ZeroDivisionError("division by zero operator fraction")
        return OpFrac(self.num * other.den, self.den * other.num)

    def __eq__(self, other) -> bool:
        if not isinstance(other, OpFrac):
            return NotImplemented
        return self.num * other.den == other.num * self.den

    def __hash__(self) -> int:
        r = self.as_ring()
        if r is not None:
            return hash(r)
        return hash((self.num, self.den))

    def text(self) -> str:
        if self.den == OpPoly.one():
            return self.num.text()
        return f"({self.num.text()}) / ({self.den.text()})"

    def __repr__(self) -> str:
        return f"OpFrac({self.text()!r})"
