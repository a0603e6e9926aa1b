"""Exact commutative ring of spatial differential operators.

An OpPoly is a Laurent-style rational operator

    P(d1, d2, d3, m, R, n) / lap**k,

where lap = d1**2 + d2**2 + d3**2 is the spatial Laplacian, P is a sparse
polynomial with Fraction coefficients, the derivative symbols d1..d3 carry
nonnegative exponents, and the parameters m, R, n may carry exponents of
either sign.  The pair (P, k) is kept canonical: k >= 0, and lap is divided
out of P while possible.  Since lap is irreducible over the rationals the
canonical pair is unique, so equality is dictionary equality.

Units of the ring are c * m**a * R**b * n**c * lap**j with j any integer;
everything the constraint algorithms need to invert is of that shape.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Optional, Tuple

Mono = Tuple[int, int, int, int, int, int]  # exponents of d1,d2,d3,m,R,n

_ZERO_MONO: Mono = (0, 0, 0, 0, 0, 0)
_SIGMA_TERMS: Dict[Mono, Fraction] = {
    (2, 0, 0, 0, 0, 0): Fraction(1),
    (0, 2, 0, 0, 0, 0): Fraction(1),
    (0, 0, 2, 0, 0, 0): Fraction(1),
}
_SYMBOLS = ("d1", "d2", "d3", "m", "R", "n")


def _mono_mul(a: Mono, b: Mono) -> Mono:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2],
            a[3] + b[3], a[4] + b[4], a[5] + b[5])


def _mono_div(a: Mono, b: Mono) -> Mono:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2],
            a[3] - b[3], a[4] - b[4], a[5] - b[5])


def _poly_add(a: Dict[Mono, Fraction], b: Dict[Mono, Fraction]) -> Dict[Mono, Fraction]:
    out = dict(a)
    for mono, c in b.items():
        s = out.get(mono, Fraction(0)) + c
        if s:
            out[mono] = s
        else:
            out.pop(mono, None)
    return out


def _poly_scale(a: Dict[Mono, Fraction], c: Fraction) -> Dict[Mono, Fraction]:
    if not c:
        return {}
    return {mono: coef * c for mono, coef in a.items()}


def _poly_mul(a: Dict[Mono, Fraction], b: Dict[Mono, Fraction]) -> Dict[Mono, Fraction]:
    out: Dict[Mono, Fraction] = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            mono = _mono_mul(ma, mb)
            s = out.get(mono, Fraction(0)) + ca * cb
            if s:
                out[mono] = s
            else:
                out.pop(mono, None)
    return out


def _param_shift(poly: Dict[Mono, Fraction]) -> Tuple[Dict[Mono, Fraction], Mono]:
    """Factor out the minimal parameter monomial so all exponents are >= 0."""
    if not poly:
        return poly, _ZERO_MONO
    mins = [min(mono[3 + j] for mono in poly) for j in range(3)]
    shift: Mono = (0, 0, 0, -mins[0], -mins[1], -mins[2])
    if shift == _ZERO_MONO:
        return poly, _ZERO_MONO
    return {_mono_mul(m, shift): c for m, c in poly.items()}, shift


def _poly_exact_div(num: Dict[Mono, Fraction], den: Dict[Mono, Fraction],
                    param_laurent: bool = False) -> Optional[Dict[Mono, Fraction]]:
    """Exact division by cancelling lexicographic leading terms.

    Returns None when den does not divide num.  With param_laurent the
    quotient may pick up negative parameter exponents; that mode is only
    safe when den carries no parameters (the Laplacian), which keeps the
    division terminating.
    """
    if not den:
        raise ZeroDivisionError("operator division by zero")
    if not num:
        return {}
    lead_d = max(den)
    cd = den[lead_d]
    rem = dict(num)
    quo: Dict[Mono, Fraction] = {}
    while rem:
        lead_r = max(rem)
        diff = _mono_div(lead_r, lead_d)
        if diff[0] < 0 or diff[1] < 0 or diff[2] < 0:
            return None
        if not param_laurent and (diff[3] < 0 or diff[4] < 0 or diff[5] < 0):
            return None
        c = rem[lead_r] / cd
        quo[diff] = quo.get(diff, Fraction(0)) + c
        for mono, cden in den.items():
            target = _mono_mul(diff, mono)
            s = rem.get(target, Fraction(0)) - c * cden
            if s:
                rem[target] = s
            else:
                rem.pop(target, None)
    return quo


def _sigma_power_terms(j: int) -> Dict[Mono, Fraction]:
    out: Dict[Mono, Fraction] = {_ZERO_MONO: Fraction(1)}
    for _ in range(j):
        out = _poly_mul(out, _SIGMA_TERMS)
    return out


class OpPoly:
    """Canonical element of the operator ring."""

    __slots__ = ("_terms", "_k", "_key")

    def __init__(self, terms: Optional[Dict[Mono, Fraction]] = None, k: int = 0):
        if k < 0:
            raise ValueError("denominator power must be nonnegative")
        poly = {m: Fraction(c) for m, c in (terms or {}).items() if c}
        for mono in poly:
            if mono[0] < 0 or mono[1] < 0 or mono[2] < 0:
                raise ValueError("derivative exponents must be nonnegative")
        if not poly:
            k = 0
        while k > 0:
            q = _poly_exact_div(poly, _SIGMA_TERMS, param_laurent=True)
            if q is None:
                break
            poly = q
            k -= 1
        self._terms = poly
        self._k = k
        self._key = (tuple(sorted(poly.items())), k)

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls) -> "OpPoly":
        return cls()

    @classmethod
    def one(cls) -> "OpPoly":
        return cls({_ZERO_MONO: Fraction(1)})

    @classmethod
    def const(cls, c) -> "OpPoly":
        return cls({_ZERO_MONO: Fraction(c)})

    @classmethod
    def monomial(cls, coef, d: Tuple[int, int, int] = (0, 0, 0),
                 m: int = 0, R: int = 0, n: int = 0) -> "OpPoly":
        return cls({(d[0], d[1], d[2], m, R, n): Fraction(coef)})

    @classmethod
    def deriv(cls, axis: int) -> "OpPoly":
        """The operator d<axis> for axis in {1, 2, 3}."""
        if axis not in (1, 2, 3):
            raise ValueError("axis must be 1, 2, or 3")
        d = [0, 0, 0]
        d[axis - 1] = 1
        return cls.monomial(1, d=(d[0], d[1], d[2]))

    @classmethod
    def laplacian(cls, power: int = 1) -> "OpPoly":
        """lap**power for any integer power."""
        if power >= 0:
            return cls(_sigma_power_terms(power))
        return cls({_ZERO_MONO: Fraction(1)}, k=-power)

    # -- structure ---------------------------------------------------------

    @property
    def terms(self) -> Dict[Mono, Fraction]:
        return dict(self._terms)

    @property
    def k(self) -> int:
        """Power of the Laplacian in the denominator."""
        return self._k

    def is_zero(self) -> bool:
        return not self._terms

    def sorted_terms(self) -> Tuple[Tuple[Mono, Fraction], ...]:
        return self._key[0]

    def max_derivative_order(self) -> int:
        if not self._terms:
            return 0
        return max(m[0] + m[1] + m[2] for m in self._terms)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "OpPoly") -> "OpPoly":
        if not isinstance(other, OpPoly):
            return NotImplemented
        ka, kb = self._k, other._k
        k = max(ka, kb)
        a = self._terms if ka == k else _poly_mul(self._terms, _sigma_power_terms(k - ka))
        b = other._terms if kb == k else _poly_mul(other._terms, _sigma_power_terms(k - kb))
        return OpPoly(_poly_add(a, b), k)

    def __sub__(self, other: "OpPoly") -> "OpPoly":
        return self.__add__(-other)

    def __neg__(self) -> "OpPoly":
        return OpPoly(_poly_scale(self._terms, Fraction(-1)), self._k)

    def __mul__(self, other):
        if isinstance(other, OpPoly):
            return OpPoly(_poly_mul(self._terms, other._terms), self._k + other._k)
        if isinstance(other, (int, Fraction)):
            return OpPoly(_poly_scale(self._terms, Fraction(other)), self._k)
        return NotImplemented

    __rmul__ = __mul__

    def scale_params(self, m: int = 0, R: int = 0, n: int = 0) -> "OpPoly":
        """Multiply by the parameter monomial m**a * R**b * n**c."""
        shift: Mono = (0, 0, 0, m, R, n)
        if shift == _ZERO_MONO:
            return self
        return OpPoly({_mono_mul(mo, shift): c for mo, c in self._terms.items()}, self._k)

    def adjoint(self) -> "OpPoly":
        """Formal adjoint: flips the sign of odd-derivative-order terms."""
        out = {}
        for mono, c in self._terms.items():
            out[mono] = -c if (mono[0] + mono[1] + mono[2]) % 2 else c
        return OpPoly(out, self._k)

    # -- divisibility and units --------------------------------------------

    def exact_div(self, other: "OpPoly") -> Optional["OpPoly"]:
        """self / other when the quotient lies in the ring, else None."""
        if other.is_zero():
            raise ZeroDivisionError("operator division by zero")
        if self.is_zero():
            return OpPoly.zero()
        num_s, sh_n = _param_shift(self._terms)
        den_s, sh_d = _param_shift(other._terms)
        # strip Laplacian factors from the divisor; they are units
        a = 0
        while True:
            d = _poly_exact_div(den_s, _SIGMA_TERMS, param_laurent=True)
            if d is None:
                break
            den_s = d
            a += 1
        quo = _poly_exact_div(num_s, den_s)
        if quo is None:
            return None
        back = _mono_div(sh_d, sh_n)
        if back != _ZERO_MONO:
            quo = {_mono_mul(mo, back): c for mo, c in quo.items()}
        j = other._k - self._k - a
        if j >= 0:
            return OpPoly(_poly_mul(quo, _sigma_power_terms(j)), 0)
        return OpPoly(quo, -j)

    def sigma_valuation(self) -> int:
        """Largest t with self = lap**t * (element with no Laplacian factor)."""
        if not self._terms:
            raise ValueError("zero has no Laplacian valuation")
        if self._k:
            return -self._k  # canonical form keeps the numerator coprime to lap
        poly = self._terms
        t = 0
        while True:
            q = _poly_exact_div(poly, _SIGMA_TERMS, param_laurent=True)
            if q is None:
                return t
            poly = q
            t += 1

    def unit_parts(self) -> Optional[Tuple[Fraction, Mono, int]]:
        """Decompose a unit as coef * param-monomial * lap**j, else None."""
        if not self._terms:
            return None
        poly = self._terms
        j = 0
        while True:
            q = _poly_exact_div(poly, _SIGMA_TERMS, param_laurent=True)
            if q is None:
                break
            poly = q
            j += 1
        if len(poly) != 1:
            return None
        (mono, coef), = poly.items()
        if mono[0] or mono[1] or mono[2]:
            return None
        return coef, mono, j - self._k

    def is_unit(self) -> bool:
        return self.unit_parts() is not None

    def unit_inverse(self) -> "OpPoly":
        parts = self.unit_parts()
        if parts is None:
            raise ValueError(f"not a unit in the operator ring: {self}")
        coef, mono, j = parts
        inv_mono: Mono = (0, 0, 0, -mono[3], -mono[4], -mono[5])
        base = OpPoly({inv_mono: Fraction(1) / coef})
        return base * OpPoly.laplacian(-j)

    # -- equality ----------------------------------------------------------

    def __eq__(self, other) -> bool:
        return isinstance(other, OpPoly) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __bool__(self) -> bool:
        return bool(self._terms)

    # -- text --------------------------------------------------------------

    def text(self) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for mono, coef in self._key[0]:
            factors = []
            for idx, sym in enumerate(_SYMBOLS):
                e = mono[idx]
                if e == 1:
                    factors.append(sym)
                elif e:
                    factors.append(f"{sym}^{e}")
            if self._k:
                factors.append(f"lap^{-self._k}")
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
        return f"OpPoly({self.text()!r})"


def parse_op(text: str) -> OpPoly:
    """Parse the operator text format produced by OpPoly.text()."""
    s = text.strip()
    if s == "0":
        return OpPoly.zero()
    tokens = _tokenize_op(s)
    pos = 0
    total = OpPoly.zero()
    sign = 1
    if tokens and tokens[pos] in ("+", "-"):
        sign = -1 if tokens[pos] == "-" else 1
        pos += 1
    while True:
        term, pos = _parse_op_term(tokens, pos)
        total = total + (term * -1 if sign < 0 else term)
        if pos >= len(tokens):
            return total
        if tokens[pos] not in ("+", "-"):
            raise ValueError(f"unexpected token {tokens[pos]!r} in operator text")
        sign = -1 if tokens[pos] == "-" else 1
        pos += 1


def _tokenize_op(s: str):
    tokens = []
    i = 0
    while i < len(s):
        ch = s[i]
        if ch.isspace():
            i += 1
        elif ch in "+-*^":
            tokens.append(ch)
            i += 1
        elif ch.isdigit():
            j = i
            while j < len(s) and (s[j].isdigit() or s[j] == "/"):
                j += 1
            tokens.append(s[i:j])
            i = j
        elif ch.isalpha():
            j = i
            while j < len(s) and s[j].isalnum():
                j += 1
            tokens.append(s[i:j])
            i = j
        else:
            raise ValueError(f"bad character {ch!r} in operator text")
    return tokens


def _parse_op_term(tokens, pos):
    coef = Fraction(1)
    mono = [0, 0, 0, 0, 0, 0]
    k = 0
    expect_factor = True
    while pos < len(tokens) and (expect_factor or tokens[pos] == "*"):
        if tokens[pos] == "*":
            pos += 1
        if pos >= len(tokens):
            raise ValueError("dangling '*' in operator text")
        tok = tokens[pos]
        pos += 1
        if tok[0].isdigit():
            coef *= Fraction(tok)
        else:
            exp = 1
            if pos < len(tokens) and tokens[pos] == "^":
                pos += 1
                neg = False
                if pos < len(tokens) and tokens[pos] == "-":
                    neg = True
                    pos += 1
                exp = int(tokens[pos])
                pos += 1
                if neg:
                    exp = -exp
            if tok == "lap":
                k -= exp
            elif tok in _SYMBOLS:
                mono[_SYMBOLS.index(tok)] += exp
            else:
                raise ValueError(f"unknown operator symbol {tok!r}")
        expect_factor = False
    key: Mono = (mono[0], mono[1], mono[2], mono[3], mono[4], mono[5])
    term = OpPoly({key: coef})
    if k > 0:
        term = OpPoly({key: coef}, k)
    elif k < 0:
        term = term * OpPoly.laplacian(-k)
    return term, pos
