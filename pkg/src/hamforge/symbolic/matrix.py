"""Matrices of operator kernels with exact, fraction-aware linear algebra.

Determinants use fraction-free elimination so every intermediate value
stays in the operator ring; inversion, rank, kernels, and linear solves run
over exact operator fractions and must land back in the ring wherever a
result is published.  Singular matrices raise carrying a null-space basis,
and inverting a matrix whose determinant is not a ring unit fails loudly
rather than returning fractional operators.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Callable, List, Optional, Sequence, Tuple

from ..errors import NonUnitDeterminant, SingularKernelMatrix
from .kernel import OpFrac
from .ring import OpPoly

class KernelMatrix:
    """Rectangular matrix of operator-ring entries."""

    __slots__ = ("_rows",)

    def __init__(self, rows: Sequence[Sequence[OpPoly]]):
        rows = [list(r) for r in rows]
        if rows:
            width = len(rows[0])
            if any(len(r) != width for r in rows):
                raise ValueError("ragged kernel matrix")
            for r in rows:
                for e in r:
                    if not isinstance(e, OpPoly):
                        raise TypeError("kernel matrix entries must be OpPoly")
        self._rows = rows

    # -- constructors ------------------------------------------------------

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "KernelMatrix":
        z = OpPoly.zero()
        return cls([[z for _ in range(ncols)] for _ in range(nrows)])

    @classmethod
    def identity(cls, n: int) -> "KernelMatrix":
        z, o = OpPoly.zero(), OpPoly.one()
        return cls([[o if i == j else z for j in range(n)] for i in range(n)])

    # -- structure ---------------------------------------------------------

    @property
    def nrows(self) -> int:
        return len(self._rows)

    @property
    def ncols(self) -> int:
        return len(self._rows[0]) if self._rows else 0

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.nrows, self.ncols)

    def entry(self, i: int, j: int) -> OpPoly:
        return self._rows[i][j]

    def row(self, i: int) -> List[OpPoly]:
        return list(self._rows[i])

    def rows(self) -> List[List[OpPoly]]:
        return [list(r) for r in self._rows]

    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def submatrix(self, keep_rows: Sequence[int], keep_cols: Sequence[int]) -> "KernelMatrix":
        return KernelMatrix([[self._rows[i][j] for j in keep_cols] for i in keep_rows])

    def with_rows_below(self, extra: "KernelMatrix") -> "KernelMatrix":
        if extra.ncols != self.ncols:
            raise ValueError("column count mismatch")
        return KernelMatrix(self.rows() + extra.rows())

    # -- arithmetic --------------------------------------------------------

    def __eq__(self, other) -> bool:
        return isinstance(other, KernelMatrix) and self._rows == other._rows

    def __add__(self, other: "KernelMatrix") -> "KernelMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return KernelMatrix([[a + b for a, b in zip(ra, rb)]
                             for ra, rb in zip(self._rows, other._rows)])

    def __sub__(self, other: "KernelMatrix") -> "KernelMatrix":
        return self + (-other)

    def __neg__(self) -> "KernelMatrix":
        return KernelMatrix([[-e for e in r] for r in self._rows])

    def __mul__(self, other):
        if isinstance(other, KernelMatrix):
            if self.ncols != other.nrows:
                raise ValueError("shape mismatch in matrix product")
            out = []
            for i in range(self.nrows):
                row = []
                for j in range(other.ncols):
                    acc = OpPoly.zero()
                    for t in range(self.ncols):
                        acc = acc + self._rows[i][t] * other._rows[t][j]
                    row.append(acc)
                out.append(row)
            return KernelMatrix(out)
        if isinstance(other, (OpPoly, int, Fraction)):
            return KernelMatrix([[e * other for e in r] for r in self._rows])
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (OpPoly, int, Fraction)):
            return KernelMatrix([[other * e for e in r] for r in self._rows])
        return NotImplemented

    def map_entries(self, fn: Callable[[OpPoly], OpPoly]) -> "KernelMatrix":
        return KernelMatrix([[fn(e) for e in r] for r in self._rows])

    def transpose(self) -> "KernelMatrix":
        return KernelMatrix([[self._rows[i][j] for i in range(self.nrows)]
                             for j in range(self.ncols)])

    def adjoint_transpose(self) -> "KernelMatrix":
        """Transpose with formally adjoint entries: the kernel M(y, x)."""
        return self.transpose().map_entries(OpPoly.adjoint)

    # -- antisymmetry checks -------------------------------------------------

    def is_plain_antisymmetric(self) -> bool:
        if not self.is_square():
            return False
        return all(self._rows[i][j] == -self._rows[j][i]
                   for i in range(self.nrows) for j in range(self.nrows))

    def is_kernel_antisymmetric(self) -> bool:
        """Antisymmetry under exchanging the two kernel points."""
        if not self.is_square():
            return False
        return all(self._rows[i][j] == -(self._rows[j][i].adjoint())
                   for i in range(self.nrows) for j in range(self.nrows))

    # -- fraction-free determinant -------------------------------------------

    def det(self) -> OpPoly:
        if not self.is_square():
            raise ValueError("determinant of a nonsquare matrix")
        n = self.nrows
        if n == 0:
            return OpPoly.one()
        m = self.rows()
        sign = 1
        prev = OpPoly.one()
        for k in range(n - 1):
            pivot = None
            for r in range(k, n):
                if not m[r][k].is_zero():
                    if pivot is None:
                        pivot = r
                    if m[r][k].is_unit():
                        pivot = r
                        break
            if pivot is None:
                return OpPoly.zero()
            if pivot != k:
                m[k], m[pivot] = m[pivot], m[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    num = m[k][k] * m[i][j] - m[i][k] * m[k][j]
                    q = num.exact_div(prev)
                    if q is None:
                        raise ArithmeticError("fraction-free elimination failed")
                    m[i][j] = q
                m[i][k] = OpPoly.zero()
            prev = m[k][k]
        result = m[n - 1][n - 1]
        return result if sign > 0 else -result

    # -- exact elimination over fractions --------------------------------------

    def _frac_rows(self) -> List[List[OpFrac]]:
        return [[OpFrac(e) for e in r] for r in self._rows]

    @staticmethod
    def _rref(rows: List[List[OpFrac]], ncols: int) -> Tuple[List[List[OpFrac]], List[int]]:
        pivots: List[int] = []
        r = 0
        for c in range(ncols):
            if r >= len(rows):
                break
            choice = None
            for i in range(r, len(rows)):
                if not rows[i][c].is_zero():
                    if choice is None:
                        choice = i
                    ring = rows[i][c].as_ring()
                    if ring is not None and ring.is_unit():
                        choice = i
                        break
            if choice is None:
                continue
            rows[r], rows[choice] = rows[choice], rows[r]
            piv = rows[r][c]
            rows[r] = [e / piv for e in rows[r]]
            for i in range(len(rows)):
                if i != r and not rows[i][c].is_zero():
                    f = rows[i][c]
                    rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
            pivots.append(c)
            r += 1
        return rows, pivots

    def rank(self) -> int:
        rows, pivots = self._rref(self._frac_rows(), self.ncols)
        return len(pivots)

    def right_nullspace(self) -> List[List[OpPoly]]:
        """Basis of right null vectors; free slots get +1, denominators clear."""
        ncols = self.ncols
        rows, pivots = self._rref(self._frac_rows(), ncols)
        free = [c for c in range(ncols) if c not in pivots]
        basis: List[List[OpPoly]] = []
        for f in free:
            vec = [OpFrac.zero() for _ in range(ncols)]
            vec[f] = OpFrac.one()
            for r, p in enumerate(pivots):
                vec[p] = -rows[r][f]
            basis.append(_clear_and_normalize(vec))
        return basis

    def inverse(self) -> "KernelMatrix":
        """Exact inverse over the operator ring.

        Raises SingularKernelMatrix (carrying a null-space basis) when the
        rank falls short, NonUnitDeterminant when the inverse exists only
        over operator fractions.
        """
        if not self.is_square():
            raise ValueError("inverse of a nonsquare matrix")
        n = self.nrows
        aug = [[OpFrac(self._rows[i][j]) for j in range(n)]
               + [OpFrac.one() if i == j else OpFrac.zero() for j in range(n)]
               for i in range(n)]
        rows, pivots = self._rref(aug, n)
        if len(pivots) < n:
            raise SingularKernelMatrix(
                f"matrix of rank {len(pivots)} < {n} has no inverse",
                null_space=self.right_nullspace())
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                ring = rows[i][n + j].as_ring()
                if ring is None:
                    raise NonUnitDeterminant(
                        "inverse leaves the operator ring; "
                        "the determinant is not a unit")
                row.append(ring)
            out.append(row)
        inv = KernelMatrix(out)
        ident = KernelMatrix.identity(n)
        if self * inv != ident or inv * self != ident:
            raise ArithmeticError("inverse postcondition failed")
        return inv

    # -- text ----------------------------------------------------------------

    def text(self) -> str:
        return "[" + "; ".join("[" + ", ".join(e.text() for e in r) + "]"
                               for r in self._rows) + "]"

    def __repr__(self) -> str:
        return f"KernelMatrix({self.text()!r})"


def invert_kernel_matrix(matrix: KernelMatrix) -> KernelMatrix:
    """Invert a square kernel matrix over the operator ring."""
    return matrix.inverse()


def solve_linear(matrix: KernelMatrix, rhs: Sequence[OpPoly]) -> Optional[List[OpFrac]]:
    """One exact solution of matrix * x = rhs, free variables set to zero.

    Returns None when the system is inconsistent.
    """
    if len(rhs) != matrix.nrows:
        raise ValueError("right-hand side length mismatch")
    ncols = matrix.ncols
    aug = [[OpFrac(e) for e in row] + [OpFrac(b)]
           for row, b in zip(matrix.rows(), rhs)]
    rows, pivots = KernelMatrix._rref(aug, ncols)
    for r in range(len(rows)):
        if r >= len(pivots) and not rows[r][ncols].is_zero():
            return None
    x = [OpFrac.zero() for _ in range(ncols)]
    for r, p in enumerate(pivots):
        x[p] = rows[r][ncols]
    return x


def _clear_and_normalize(vec: List[OpFrac]) -> List[OpPoly]:
    """Clear denominators and strip common unit content, keeping signs."""
    denom = OpPoly.one()
    for e in vec:
        if e.den != OpPoly.one():
            denom = denom * e.den
    cleared: List[OpPoly] = []
    for e in vec:
        r = (e * denom).as_ring()
        if r is None:
            raise ArithmeticError("denominator clearing failed")
        cleared.append(r)
    nonzero = [e for e in cleared if not e.is_zero()]
    if not nonzero:
        return cleared
    # rational content
    nums, dens = [], []
    for e in nonzero:
        for _, c in e.sorted_terms():
            nums.append(abs(c.numerator))
            dens.append(c.denominator)
    content = Fraction(gcd(*nums), lcm(*dens))
    if content != 1:
        inv = 1 / content
        cleared = [e * inv for e in cleared]
        nonzero = [e for e in cleared if not e.is_zero()]
    # common parameter monomial
    shifts = []
    for idx in range(3):
        lo = min(mono[3 + idx] for e in nonzero for mono, _ in e.sorted_terms())
        shifts.append(-lo)
    if any(shifts):
        cleared = [e.scale_params(m=shifts[0], R=shifts[1], n=shifts[2])
                   if not e.is_zero() else e for e in cleared]
        nonzero = [e for e in cleared if not e.is_zero()]
    # common Laplacian power, in either direction (lap is a unit, so this
    # must go by structural valuation, not divisibility)
    t = min(e.sigma_valuation() for e in nonzero)
    if t:
        shift = OpPoly.laplacian(-t)
        cleared = [e if e.is_zero() else e * shift for e in cleared]
    return cleared


def normalize_kernel_vector(vec: List[OpFrac]) -> List[OpPoly]:
    """Public face of the denominator-clearing normalization."""
    return _clear_and_normalize(vec)
