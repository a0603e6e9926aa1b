"""Theory definition language: parser and canonical renderer.

A theory file declares the dimension, the metric signature, an optional
compact coordinate, parameters, fields with their reflection parities, a
Lagrangian density, and named gauge-fixing blocks.  The expression grammar
supports numbers, parameters, field atoms with bracketed components,
momentum atoms mom(X)[c], derivative prefixes d[c], the field strength
shorthand F[M,N] of the unique vector field, powers, and parenthesized
groups.  A repeated index variable inside one additive term contracts over
the spacetime components with metric signs (Lagrangian context) or over the
three spatial axes with plus signs (gauge context).

Parsing expands all contractions, so a rendered theory contains only
explicit components; parse(render(parse(text))) is parse(text).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .errors import ParseError
from .symbolic.atoms import Atom
from .symbolic.expr import Expression

_RESERVED = {"m", "R", "n", "d", "mom", "F", "dim", "metric", "compact",
             "param", "field", "parity", "lagrangian", "gauge_fixing",
             "theory", "vector", "scalar", "even", "odd", "on", "radius"}

_PARAMS = ("m", "R", "n")


# --------------------------------------------------------------------------
# declarations


@dataclass(frozen=True)
class CompactDim:
    coord: str
    radius: str


@dataclass(frozen=True)
class FieldDecl:
    name: str
    rank: str                                  # "vector" or "scalar"
    parity: Optional[Dict[str, str]] = None    # {"mu": .., "5": ..} / {"all": ..}

    def __post_init__(self):
        if self.rank not in ("vector", "scalar"):
            raise ValueError(f"bad field rank {self.rank!r}")


@dataclass(frozen=True)
class GaugeBlock:
    name: str
    conditions: Tuple[Expression, ...]


@dataclass(frozen=True)
class TheorySpec:
    name: str
    dim: int
    metric: Tuple[int, ...]
    compact: Optional[CompactDim]
    params: Tuple[str, ...]
    fields: Tuple[FieldDecl, ...]
    lagrangian: Expression
    gauge_blocks: Tuple[GaugeBlock, ...]

    def field(self, name: str) -> FieldDecl:
        for f in self.fields:
            if f.name == name:
                return f
        raise KeyError(name)

    def vector_field(self) -> Optional[FieldDecl]:
        vecs = [f for f in self.fields if f.rank == "vector"]
        return vecs[0] if len(vecs) == 1 else None

    def gauge_block(self, name: str) -> GaugeBlock:
        for g in self.gauge_blocks:
            if g.name == name:
                return g
        raise KeyError(name)


# --------------------------------------------------------------------------
# tokenizer


@dataclass(frozen=True)
class _Tok:
    kind: str    # "ident", "int", "sym", "eof"
    value: str
    line: int
    col: int


_SYMS = set("{}()[],;:=+-*/^")


def _tokenize(text: str) -> List[_Tok]:
    toks: List[_Tok] = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch.isspace():
            col += 1
            i += 1
        elif ch == "#":
            while i < len(text) and text[i] != "\n":
                i += 1
        elif ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            toks.append(_Tok("int", text[i:j], line, col))
            col += j - i
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(_Tok("ident", text[i:j], line, col))
            col += j - i
            i = j
        elif ch in _SYMS:
            toks.append(_Tok("sym", ch, line, col))
            col += 1
            i += 1
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    toks.append(_Tok("eof", "", line, col))
    return toks


# --------------------------------------------------------------------------
# expression AST (pre-contraction)


class _Node:
    def occ(self, var: str) -> int:
        raise NotImplementedError

    def index_vars(self) -> set:
        raise NotImplementedError

    def eval(self, ctx: "_EvalCtx", env: Dict[str, int]) -> Expression:
        raise NotImplementedError


@dataclass(frozen=True)
class _Num(_Node):
    value: Fraction

    def occ(self, var):
        return 0

    def index_vars(self):
        return set()

    def eval(self, ctx, env):
        return Expression.const(self.value)


@dataclass(frozen=True)
class _Param(_Node):
    name: str
    exp: int

    def occ(self, var):
        return 0

    def index_vars(self):
        return set()

    def eval(self, ctx, env):
        kw = {self.name: self.exp}
        return Expression.const(1).param_mul(**kw)


@dataclass(frozen=True)
class _FieldAtom(_Node):
    kind: str              # "field" or "momentum"
    name: str
    comp: Optional[object]  # None, int, or index-variable string
    power: int
    line: int
    col: int

    def occ(self, var):
        return self.power if self.comp == var else 0

    def index_vars(self):
        return {self.comp} if isinstance(self.comp, str) else set()

    def eval(self, ctx, env):
        rank = ctx.field_ranks.get(self.name)
        if rank is None:
            raise ParseError(f"unknown field {self.name!r}", self.line, self.col)
        if self.kind == "momentum" and ctx.lagrangian:
            raise ParseError("momentum atoms are only allowed in "
                             "gauge_fixing blocks", self.line, self.col)
        comp = self.comp
        if isinstance(comp, str):
            comp = env[comp]
        if rank == "scalar" and comp is not None:
            raise ParseError(f"scalar field {self.name!r} has no components",
                             self.line, self.col)
        if rank == "vector" and comp is None:
            raise ParseError(f"vector field {self.name!r} needs a component",
                             self.line, self.col)
        if comp is not None:
            ctx.check_component(comp, self.line, self.col)
        base = Expression.from_atom(Atom(self.kind, self.name, comp=comp))
        out = base
        for _ in range(self.power - 1):
            out = out * base
        return out


@dataclass(frozen=True)
class _Deriv(_Node):
    idx: object            # int or index-variable string
    inner: _Node
    line: int
    col: int

    def occ(self, var):
        return (1 if self.idx == var else 0) + self.inner.occ(var)

    def index_vars(self):
        own = {self.idx} if isinstance(self.idx, str) else set()
        return own | self.inner.index_vars()

    def eval(self, ctx, env):
        c = self.idx
        if isinstance(c, str):
            c = env[c]
        ctx.check_component(c, self.line, self.col)
        val = self.inner.eval(ctx, env)
        if c == 0:
            return val.d_t()
        if c == 5:
            return val.d_y()
        return val.d_x(c)


@dataclass(frozen=True)
class _FStrength(_Node):
    idx1: object
    idx2: object
    line: int
    col: int

    def occ(self, var):
        return (1 if self.idx1 == var else 0) + (1 if self.idx2 == var else 0)

    def index_vars(self):
        return {i for i in (self.idx1, self.idx2) if isinstance(i, str)}

    def eval(self, ctx, env):
        name = ctx.vector_name
        if name is None:
            raise ParseError("field strength needs a unique vector field",
                             self.line, self.col)
        c1 = env[self.idx1] if isinstance(self.idx1, str) else self.idx1
        c2 = env[self.idx2] if isinstance(self.idx2, str) else self.idx2
        ctx.check_component(c1, self.line, self.col)
        ctx.check_component(c2, self.line, self.col)
        a1 = _Deriv(c1, _FieldAtom("field", name, c2, 1, self.line, self.col),
                    self.line, self.col)
        a2 = _Deriv(c2, _FieldAtom("field", name, c1, 1, self.line, self.col),
                    self.line, self.col)
        return a1.eval(ctx, env) - a2.eval(ctx, env)


@dataclass(frozen=True)
class _Group(_Node):
    expr: "_Expr"
    power: int
    line: int
    col: int

    def occ(self, var):
        counts = {t.occ(var) for t in self.expr.terms}
        if len(counts) > 1:
            raise ParseError(
                f"index {var!r} appears unevenly across the branches of a "
                "group; split the term instead", self.line, self.col)
        return (counts.pop() if counts else 0) * self.power

    def index_vars(self):
        out = set()
        for t in self.expr.terms:
            out |= t.index_vars()
        return out

    def eval(self, ctx, env):
        inner = self.expr.eval_with_env(ctx, env)
        out = inner
        for _ in range(self.power - 1):
            out = out * inner
        return out


@dataclass(frozen=True)
class _TermNode(_Node):
    sign: int
    numers: Tuple[_Node, ...]
    invers: Tuple[_Node, ...]   # divided factors; must evaluate to constants
    line: int
    col: int

    def occ(self, var):
        return sum(f.occ(var) for f in self.numers + self.invers)

    def index_vars(self):
        out = set()
        for f in self.numers + self.invers:
            out |= f.index_vars()
        return out

    def eval(self, ctx, env):
        out = Expression.const(self.sign)
        for f in self.numers:
            out = out * f.eval(ctx, env)
        for f in self.invers:
            out = out * _invert_const(f.eval(ctx, env), self.line, self.col)
        return out


@dataclass(frozen=True)
class _Expr(_Node):
    terms: Tuple[_TermNode, ...]

    def occ(self, var):
        raise NotImplementedError("occ is per-term for expressions")

    def index_vars(self):
        out = set()
        for t in self.terms:
            out |= t.index_vars()
        return out

    def eval_with_env(self, ctx: "_EvalCtx", env: Dict[str, int]) -> Expression:
        """Evaluate, contracting any index variable not already assigned."""
        out = Expression.zero()
        for t in self.terms:
            free = sorted(v for v in t.index_vars() if v not in env)
            for v in free:
                c = t.occ(v)
                if c != 2:
                    raise ParseError(
                        f"index {v!r} appears {c} time(s) in a term; "
                        "contraction needs exactly two", t.line, t.col)
            out = out + _contract(t, ctx, env, free)
        return out


def _contract(term: _TermNode, ctx: "_EvalCtx", env: Dict[str, int],
              free: List[str]) -> Expression:
    if not free:
        return term.eval(ctx, env)
    v, rest = free[0], free[1:]
    out = Expression.zero()
    for comp in ctx.index_range:
        sub = dict(env)
        sub[v] = comp
        out = out + _contract(term, ctx, sub, rest) * ctx.metric_sign(comp)
    return out


def _invert_const(e: Expression, line: int, col: int) -> Expression:
    terms = e.terms
    if len(terms) != 1:
        raise ParseError("can only divide by a single constant factor", line, col)
    ((params, atoms), coef), = terms.items()
    if atoms:
        raise ParseError("can only divide by numbers and parameters", line, col)
    return Expression.const(1 / coef, m=-params[0], R=-params[1], n=-params[2])


class _EvalCtx:
    """Expression evaluation context: index range, metric signs, field table."""

    def __init__(self, dim: int, metric: Tuple[int, ...],
                 vector_name: Optional[str], lagrangian: bool,
                 field_ranks: Dict[str, str]):
        self.dim = dim
        self.metric = metric
        self.vector_name = vector_name
        self.lagrangian = lagrangian
        self.field_ranks = field_ranks
        if lagrangian:
            self.index_range: Tuple[int, ...] = (0, 1, 2, 3) + ((5,) if dim == 5 else ())
        else:
            self.index_range = (1, 2, 3)

    def metric_sign(self, comp: int) -> int:
        if not self.lagrangian:
            return 1
        return self.metric[4 if comp == 5 else comp]

    def check_component(self, comp: int, line: int, col: int) -> None:
        allowed = (0, 1, 2, 3, 5) if self.dim == 5 else (0, 1, 2, 3)
        if comp not in allowed:
            raise ParseError(f"component {comp} out of range for dim {self.dim}",
                             line, col)


# --------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, toks: List[_Tok]):
        self.toks = toks
        self.pos = 0

    # token plumbing

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def next(self) -> _Tok:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, kind: str, value: Optional[str] = None) -> _Tok:
        t = self.peek()
        if t.kind != kind or (value is not None and t.value != value):
            want = value if value is not None else kind
            raise ParseError(f"expected {want!r}, found {t.value or t.kind!r}",
                             t.line, t.col)
        return self.next()

    def at(self, kind: str, value: Optional[str] = None) -> bool:
        t = self.peek()
        return t.kind == kind and (value is None or t.value == value)

    # top level

    def parse(self) -> TheorySpec:
        self.expect("ident", "theory")
        name = self.expect("ident").value
        self.expect("sym", "{")
        dim: Optional[int] = None
        metric: Optional[Tuple[int, ...]] = None
        compact: Optional[CompactDim] = None
        params: List[str] = []
        fields: List[FieldDecl] = []
        lagrangian_ast: Optional[_Expr] = None
        gauge_blocks: List[GaugeBlock] = []
        gauge_asts: List[Tuple[str, List[_Expr], _Tok]] = []
        while not self.at("sym", "}"):
            t = self.peek()
            if t.kind != "ident":
                raise ParseError(f"expected a declaration, found {t.value!r}",
                                 t.line, t.col)
            if t.value == "dim":
                self.next()
                dim = int(self.expect("int").value)
                if dim not in (4, 5):
                    raise ParseError(f"dim must be 4 or 5, got {dim}", t.line, t.col)
                self.expect("sym", ";")
            elif t.value == "metric":
                self.next()
                metric = self._parse_metric()
                self.expect("sym", ";")
            elif t.value == "compact":
                self.next()
                compact = self._parse_compact()
                self.expect("sym", ";")
            elif t.value == "param":
                self.next()
                p = self.expect("ident")
                if p.value != "m":
                    raise ParseError(f"unsupported parameter {p.value!r}; "
                                     "the mass parameter is named m", p.line, p.col)
                params.append(p.value)
                self.expect("sym", ";")
            elif t.value == "field":
                self.next()
                fields.append(self._parse_field())
                self.expect("sym", ";")
            elif t.value == "lagrangian":
                self.next()
                self.expect("sym", "=")
                lagrangian_ast = self._parse_expr()
                self.expect("sym", ";")
            elif t.value == "gauge_fixing":
                self.next()
                gname = self.expect("ident").value
                self.expect("sym", "{")
                conds: List[_Expr] = []
                while not self.at("sym", "}"):
                    ast = self._parse_expr()
                    self.expect("sym", "=")
                    z = self.expect("int")
                    if z.value != "0":
                        raise ParseError("gauge conditions must equal 0",
                                         z.line, z.col)
                    self.expect("sym", ";")
                    conds.append(ast)
                self.expect("sym", "}")
                gauge_asts.append((gname, conds, t))
            else:
                raise ParseError(f"unknown declaration {t.value!r}", t.line, t.col)
        self.expect("sym", "}")
        self.expect("eof")

        # semantic assembly
        if dim is None:
            raise ParseError("missing dim declaration", 1, 1)
        if metric is None:
            raise ParseError("missing metric declaration", 1, 1)
        if len(metric) != dim:
            raise ParseError(f"metric has {len(metric)} signs for dim {dim}", 1, 1)
        if compact is not None and dim != 5:
            raise ParseError("compact coordinate requires dim 5", 1, 1)
        if dim == 5 and compact is None:
            raise ParseError("dim 5 requires a compact declaration", 1, 1)
        if lagrangian_ast is None:
            raise ParseError("missing lagrangian", 1, 1)
        names = [f.name for f in fields]
        if len(set(names)) != len(names):
            raise ParseError("duplicate field names", 1, 1)
        if compact is not None:
            for f in fields:
                if f.parity is None:
                    raise ParseError(
                        f"field {f.name!r} needs a parity in a compact theory",
                        1, 1)
        vectors = [f for f in fields if f.rank == "vector"]
        vector_name = vectors[0].name if len(vectors) == 1 else None
        ranks = {f.name: f.rank for f in fields}

        lag_ctx = _EvalCtx(dim, metric, vector_name, True, ranks)
        lagrangian = lagrangian_ast.eval_with_env(lag_ctx, {})

        gauge_ctx = _EvalCtx(dim, metric, vector_name, False, ranks)
        for gname, conds, _gtok in gauge_asts:
            done = [ast.eval_with_env(gauge_ctx, {}) for ast in conds]
            gauge_blocks.append(GaugeBlock(gname, tuple(done)))
        gnames = [g.name for g in gauge_blocks]
        if len(set(gnames)) != len(gnames):
            raise ParseError("duplicate gauge_fixing names", 1, 1)

        return TheorySpec(name=name, dim=dim, metric=metric, compact=compact,
                          params=tuple(params), fields=tuple(fields),
                          lagrangian=lagrangian, gauge_blocks=tuple(gauge_blocks))

    # declarations

    def _parse_metric(self) -> Tuple[int, ...]:
        self.expect("sym", "(")
        signs: List[int] = []
        while not self.at("sym", ")"):
            t = self.next()
            if t.kind == "sym" and t.value == "+":
                signs.append(1)
            elif t.kind == "sym" and t.value == "-":
                signs.append(-1)
            else:
                raise ParseError("metric signature is a string of + and -",
                                 t.line, t.col)
        self.expect("sym", ")")
        return tuple(signs)

    def _parse_compact(self) -> CompactDim:
        coord = self.expect("ident").value
        self.expect("ident", "on")
        t = self.expect("ident")
        self.expect("sym", "/")
        t2 = self.expect("ident")
        if t.value != "S1" or t2.value != "Z2":
            raise ParseError("the only supported compactification is S1/Z2",
                             t.line, t.col)
        self.expect("ident", "radius")
        rad = self.expect("ident")
        if rad.value != "R":
            raise ParseError("the compactification radius is named R",
                             rad.line, rad.col)
        return CompactDim(coord=coord, radius=rad.value)

    def _parse_field(self) -> FieldDecl:
        nt = self.expect("ident")
        if nt.value in _RESERVED:
            raise ParseError(f"{nt.value!r} is reserved", nt.line, nt.col)
        rt = self.expect("ident")
        if rt.value not in ("vector", "scalar"):
            raise ParseError("field rank must be vector or scalar", rt.line, rt.col)
        parity: Optional[Dict[str, str]] = None
        if self.at("ident", "parity"):
            self.next()
            self.expect("sym", "(")
            parity = {}
            if rt.value == "scalar":
                p = self.expect("ident")
                if p.value not in ("even", "odd"):
                    raise ParseError("parity is even or odd", p.line, p.col)
                parity["all"] = p.value
            else:
                while True:
                    key = self.next()
                    if key.kind == "ident" and key.value == "mu":
                        k = "mu"
                    elif key.kind == "int" and key.value == "5":
                        k = "5"
                    else:
                        raise ParseError("vector parity keys are mu and 5",
                                         key.line, key.col)
                    self.expect("sym", ":")
                    p = self.expect("ident")
                    if p.value not in ("even", "odd"):
                        raise ParseError("parity is even or odd", p.line, p.col)
                    parity[k] = p.value
                    if self.at("sym", ","):
                        self.next()
                        continue
                    break
                if set(parity) != {"mu", "5"}:
                    raise ParseError("vector parity needs both mu and 5 entries",
                                     nt.line, nt.col)
            self.expect("sym", ")")
        return FieldDecl(name=nt.value, rank=rt.value, parity=parity)

    # expressions

    def _parse_expr(self) -> _Expr:
        terms: List[_TermNode] = []
        sign = 1
        if self.at("sym", "+") or self.at("sym", "-"):
            sign = -1 if self.next().value == "-" else 1
        terms.append(self._parse_term(sign))
        while self.at("sym", "+") or self.at("sym", "-"):
            sign = -1 if self.next().value == "-" else 1
            terms.append(self._parse_term(sign))
        return _Expr(tuple(terms))

    def _parse_term(self, sign: int) -> _TermNode:
        t0 = self.peek()
        numers = [self._parse_factor()]
        invers: List[_Node] = []
        while self.at("sym", "*") or self.at("sym", "/"):
            op = self.next().value
            f = self._parse_factor()
            (numers if op == "*" else invers).append(f)
        return _TermNode(sign=sign, numers=tuple(numers), invers=tuple(invers),
                         line=t0.line, col=t0.col)

    def _parse_factor(self) -> _Node:
        t = self.peek()
        if t.kind == "int":
            self.next()
            val = Fraction(int(t.value))
            if self.at("sym", "/") and self.toks[self.pos + 1].kind == "int":
                self.next()
                val = val / int(self.expect("int").value)
            exp = self._parse_power(t)
            return _Num(val ** exp)
        if t.kind == "sym" and t.value == "(":
            self.next()
            inner = self._parse_expr()
            self.expect("sym", ")")
            exp = self._parse_power(t)
            return _Group(inner, exp, t.line, t.col)
        if t.kind != "ident":
            raise ParseError(f"expected a factor, found {t.value or t.kind!r}",
                             t.line, t.col)
        if t.value == "d":
            self.next()
            self.expect("sym", "[")
            idx = self._parse_index()
            self.expect("sym", "]")
            inner = self._parse_factor()
            return _Deriv(idx, inner, t.line, t.col)
        if t.value == "F":
            self.next()
            self.expect("sym", "[")
            i1 = self._parse_index()
            self.expect("sym", ",")
            i2 = self._parse_index()
            self.expect("sym", "]")
            return _FStrength(i1, i2, t.line, t.col)
        if t.value == "mom":
            self.next()
            self.expect("sym", "(")
            fname = self.expect("ident").value
            self.expect("sym", ")")
            comp = None
            if self.at("sym", "["):
                self.next()
                comp = self._parse_index()
                self.expect("sym", "]")
            exp = self._parse_power(t)
            return _FieldAtom("momentum", fname, comp, exp, t.line, t.col)
        if t.value in _PARAMS:
            self.next()
            exp = self._parse_power(t, allow_neg=True)
            return _Param(t.value, exp)
        # a field atom
        self.next()
        comp = None
        if self.at("sym", "["):
            self.next()
            comp = self._parse_index()
            self.expect("sym", "]")
        exp = self._parse_power(t)
        return _FieldAtom("field", t.value, comp, exp, t.line, t.col)

    def _parse_power(self, t0: _Tok, allow_neg: bool = False) -> int:
        if not self.at("sym", "^"):
            return 1
        self.next()
        neg = False
        if self.at("sym", "-"):
            self.next()
            neg = True
        e = int(self.expect("int").value)
        exp = -e if neg else e
        if exp < 0 and not allow_neg:
            raise ParseError("negative powers are only allowed on parameters",
                             t0.line, t0.col)
        if exp == 0:
            raise ParseError("zero powers are not allowed", t0.line, t0.col)
        return exp

    def _parse_index(self):
        t = self.next()
        if t.kind == "int":
            return int(t.value)
        if t.kind == "ident":
            if t.value in _RESERVED:
                raise ParseError(f"{t.value!r} cannot be an index", t.line, t.col)
            return t.value
        raise ParseError("expected a component or index variable", t.line, t.col)


def parse_theory(text: str) -> TheorySpec:
    """Parse a theory definition into its structured, fully expanded form."""
    return _Parser(_tokenize(text)).parse()


# --------------------------------------------------------------------------
# renderer


def render_theory(spec: TheorySpec) -> str:
    """Canonical text form; parsing it back reproduces the same structure."""
    lines: List[str] = [f"theory {spec.name} {{"]
    lines.append(f"  dim {spec.dim};")
    signs = "".join("+" if s > 0 else "-" for s in spec.metric)
    lines.append(f"  metric ({signs});")
    if spec.compact is not None:
        lines.append(f"  compact {spec.compact.coord} on S1/Z2 "
                     f"radius {spec.compact.radius};")
    for p in spec.params:
        lines.append(f"  param {p};")
    for f in spec.fields:
        decl = f"  field {f.name} {f.rank}"
        if f.parity is not None:
            if f.rank == "scalar":
                decl += f" parity({f.parity['all']})"
            else:
                decl += f" parity(mu: {f.parity['mu']}, 5: {f.parity['5']})"
        lines.append(decl + ";")
    lines.append(f"  lagrangian = {render_expression(spec.lagrangian)};")
    for g in spec.gauge_blocks:
        conds = " ".join(f"{render_expression(c)} = 0;" for c in g.conditions)
        lines.append(f"  gauge_fixing {g.name} {{ {conds} }}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def render_expression(e: Expression) -> str:
    """Render an expression in the theory grammar (no index contraction)."""
    if e.is_zero():
        return "0"
    from .symbolic.expr import _term_sort_key
    pieces: List[str] = []
    for key in sorted(e.terms, key=_term_sort_key):
        (em, eR, en), atoms = key
        coef = e.terms[key]
        factors: List[str] = []
        for sym, exp in (("m", em), ("R", eR), ("n", en)):
            if exp == 1:
                factors.append(sym)
            elif exp:
                factors.append(f"{sym}^{exp}")
        for a in atoms:
            factors.append(_render_atom(a))
        mag = abs(coef)
        if mag != 1 or not factors:
            factors.insert(0, str(mag))
        body = " * ".join(factors)
        if not pieces:
            pieces.append(body if coef > 0 else f"-{body}")
        else:
            pieces.append(("+ " if coef > 0 else "- ") + body)
    return " ".join(pieces)


def _render_atom(a: Atom) -> str:
    if a.mode is not None or a.lap:
        raise ValueError(f"atom {a.render()} has no theory-grammar form")
    if a.kind == "multiplier":
        raise ValueError("multipliers have no theory-grammar form")
    core = f"mom({a.name})" if a.kind == "momentum" else a.name
    if a.comp is not None:
        core += f"[{a.comp}]"
    prefix = "d[0] " * a.dt + "d[5] " * a.dy \
        + "".join(f"d[{c}] " for c in a.dx)
    return prefix + core
