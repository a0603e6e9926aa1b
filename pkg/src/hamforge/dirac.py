"""Constraint analysis of a quadratic first-order density.

The pipeline: conjugate momenta, velocity-space kernel Hessian, primary
constraints from its null vectors, canonical and total Hamiltonians, the
consistency closure with multiplier triage, first/second classification
from the mutual bracket matrix, degree-of-freedom counting, the gauge
generator with its field transformations, gauge fixing with kernel-matrix
inversion, and the resulting reduced bracket table.

Everything runs inside one decoupled level block (one mode label), so all
expressions are linear in the phase-space atoms and every bracket is an
operator kernel multiplying a spatial delta.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field, replace
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import (ConsistencyError, HamforgeError, IncompleteGaugeError,
                     UnsupportedExpression)
from .poisson import BracketTable, bracket_matrix, pb_kernel, pb_with_hamiltonian
from .symbolic.atoms import Atom, Base, atom_from_base, base_text
from .symbolic.expr import Expression
from .symbolic.kernel import OpFrac
from .symbolic.matrix import (KernelMatrix, invert_kernel_matrix,
                              normalize_kernel_vector, solve_linear)
from .symbolic.ring import OpPoly

Pair = Tuple[Base, Base]


# ---------------------------------------------------------------------------
# phase space


def momentum_base(field_base: Base) -> Base:
    kind, name, comp, mode = field_base
    if kind != "field":
        raise HamforgeError(f"no momentum for a {kind} atom")
    return ("momentum", name, comp, mode)


@dataclass(frozen=True)
class PhaseSpace:
    """Ordered canonical pairs of one decoupled level block."""

    mode: Optional[str]
    pairs: Tuple[Pair, ...]

    @property
    def dim(self) -> int:
        return 2 * len(self.pairs)

    def field_bases(self) -> Tuple[Base, ...]:
        return tuple(q for q, _ in self.pairs)

    def momentum_bases(self) -> Tuple[Base, ...]:
        return tuple(p for _, p in self.pairs)

    def atoms(self) -> Tuple[Base, ...]:
        out: List[Base] = []
        for q, p in self.pairs:
            out.extend((q, p))
        return tuple(out)

    def fundamental_table(self) -> BracketTable:
        table = BracketTable()
        for q, p in self.pairs:
            table.set(atom_from_base(q), atom_from_base(p), OpPoly.one())
        return table


def phase_space(density: Expression, mode: Optional[str] = None) -> PhaseSpace:
    """Canonical pairs of the density's fields, sorted deterministically."""
    bases = set()
    for kind, name, comp, bmode in density.bases():
        if kind == "multiplier":
            continue
        if kind == "momentum":
            raise HamforgeError("a density cannot contain momentum atoms")
        if bmode != mode:
            raise HamforgeError(
                f"density mixes level labels: expected {mode!r}, found {bmode!r}")
        bases.add(("field", name, comp, bmode))
    for (params, atoms) in density.terms:
        for a in atoms:
            if a.dy:
                raise HamforgeError(
                    "density still depends on the compact coordinate")
    ordered = sorted(bases, key=lambda b: atom_from_base(b).sort_key())
    return PhaseSpace(mode=mode,
                      pairs=tuple((q, momentum_base(q)) for q in ordered))


def tag_mode(e: Expression, mode: Optional[str]) -> Expression:
    """Attach a level label to every unlabelled atom."""
    out = Expression.zero()
    for (params, atoms), coef in e.terms.items():
        tagged = []
        for a in atoms:
            if a.mode is None:
                a = Atom(a.kind, a.name, comp=a.comp, mode=mode,
                         dt=a.dt, dy=a.dy, dx=a.dx, lap=a.lap)
            tagged.append(a)
        out = out + Expression.term(coef, params, tagged)
    return out


# ---------------------------------------------------------------------------
# small helpers shared across the stages


def op_apply(op: OpPoly, e: Expression) -> Expression:
    """Apply an operator to a linear expression."""
    if e.is_zero():
        return Expression.zero()
    lin = e._to_linear_ext()
    return Expression._from_linear_ext({k: op * v for k, v in lin.items()})


def _velocity_free(e: Expression) -> Expression:
    return Expression({key: c for key, c in e.terms.items()
                       if all(a.dt == 0 for a in key[1])})


def _substitute_velocity(e: Expression, base: Base,
                         sol: Expression) -> Expression:
    """Replace the first time derivative of one field by an expression."""
    out = Expression.zero()
    for (params, atoms), coef in e.terms.items():
        matched = [a for a in atoms if a.base == base and a.dt >= 1]
        rest = tuple(a for a in atoms if not (a.base == base and a.dt >= 1))
        piece = Expression.term(coef, params, rest)
        for a in matched:
            if a.dt != 1:
                raise UnsupportedExpression(
                    f"second time derivative on {a.render()}")
            piece = piece * sol.apply_signature(0, a.dy, a.dx, a.lap)
        out = out + piece
    return out


def _normalize_constraint(e: Expression) -> Expression:
    """Clear denominators and content; make the leading kernel positive."""
    lin = e.to_linear()
    bases = sorted(lin, key=lambda b: atom_from_base(b).sort_key())
    vec = normalize_kernel_vector([OpFrac(lin[b]) for b in bases])
    lead = next(op for op in vec if not op.is_zero())
    if lead.sorted_terms()[0][1] < 0:
        vec = [-op for op in vec]
    return Expression.from_linear(dict(zip(bases, vec)))


def _split_multiplier_part(e: Expression):
    """Return (multiplier-free part, {multiplier base: kernel})."""
    plain = Expression.zero()
    fixes: Dict[Base, OpPoly] = {}
    for (params, atoms), coef in e.terms.items():
        mults = [a for a in atoms if a.kind == "multiplier"]
        if not mults:
            plain = plain + Expression({((params), atoms): coef})
            continue
        if len(mults) > 1 or len(atoms) > 1:
            raise UnsupportedExpression(
                "consistency condition is nonlinear in the multipliers")
        term = Expression.term(coef, params, atoms)
        for base, op in term._to_linear_ext().items():
            b, dt, dy = base[0], base[1], base[2]
            if dt or dy:
                raise UnsupportedExpression(
                    "multiplier appears with a time derivative")
            fixes[b] = fixes.get(b, OpPoly.zero()) + op
    return plain, {b: op for b, op in fixes.items() if not op.is_zero()}


# ---------------------------------------------------------------------------
# constraints


@dataclass(frozen=True)
class Constraint:
    name: str
    expr: Expression
    stage: str                      # "primary" | "secondary" | "gauge"
    klass: str = "undetermined"     # "first" | "second" | "undetermined"
    provenance: str = ""

    def renamed_class(self, klass: str) -> "Constraint":
        return replace(self, klass=klass)


@dataclass(frozen=True)
class ConstraintSet:
    items: Tuple[Constraint, ...]

    def __iter__(self):
        return iter(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def exprs(self) -> List[Expression]:
        return [c.expr for c in self.items]

    def by_stage(self, stage: str) -> List[Constraint]:
        return [c for c in self.items if c.stage == stage]

    def by_class(self, klass: str) -> List[Constraint]:
        return [c for c in self.items if c.klass == klass]

    def get(self, name: str) -> Constraint:
        for c in self.items:
            if c.name == name:
                return c
        raise KeyError(name)


# ---------------------------------------------------------------------------
# momenta and the velocity Hessian


@dataclass(frozen=True)
class MomentumDef:
    field: Base
    momentum: Base
    expr: Expression        # right-hand side in fields and velocities


def conjugate_momenta(density: Expression,
                      space: Optional[PhaseSpace] = None) -> List[MomentumDef]:
    space = space or phase_space(density, _density_mode(density))
    out = []
    for q, p in space.pairs:
        out.append(MomentumDef(field=q, momentum=p,
                               expr=density.velocity_derivative(q)))
    return out


def _density_mode(density: Expression) -> Optional[str]:
    modes = {b[3] for b in density.bases() if b[0] != "multiplier"}
    if len(modes) != 1:
        raise HamforgeError("density does not belong to a single level block")
    return modes.pop()


def velocity_hessian(momenta: Sequence[MomentumDef],
                     space: PhaseSpace) -> KernelMatrix:
    """Kernel of the second velocity derivative, one row per canonical pair."""
    cols = {q: j for j, (q, _) in enumerate(space.pairs)}
    rows = []
    for mdef in momenta:
        row = [OpPoly.zero()] * len(space.pairs)
        for (base, dt, dy), op in mdef.expr._to_linear_ext().items():
            if dt == 0:
                continue
            if dt > 1 or dy:
                raise UnsupportedExpression(
                    "density is not first order in time derivatives")
            row[cols[base]] = op
        rows.append(row)
    return KernelMatrix(rows)


@dataclass(frozen=True)
class HessianReport:
    matrix: KernelMatrix
    rank: int
    null_vectors: Tuple[Tuple[OpPoly, ...], ...]
    primaries: ConstraintSet
    momenta: Tuple[MomentumDef, ...]


def hessian_primaries(density: Expression,
                      space: Optional[PhaseSpace] = None) -> HessianReport:
    """Primary constraints: one per left null vector of the velocity kernel."""
    space = space or phase_space(density, _density_mode(density))
    momenta = conjugate_momenta(density, space)
    hessian = velocity_hessian(momenta, space)
    null = hessian.transpose().right_nullspace()
    primaries = []
    for i, vec in enumerate(null):
        e = Expression.zero()
        for u_a, mdef in zip(vec, momenta):
            if u_a.is_zero():
                continue
            gap = Expression.from_atom(atom_from_base(mdef.momentum)) \
                - _velocity_free(mdef.expr)
            e = e + op_apply(u_a, gap)
        primaries.append(Constraint(
            name=f"primary-{i + 1}",
            expr=_normalize_constraint(e),
            stage="primary",
            provenance="null vector of the velocity kernel"))
    return HessianReport(matrix=hessian, rank=hessian.rank(),
                         null_vectors=tuple(tuple(v) for v in null),
                         primaries=ConstraintSet(tuple(primaries)),
                         momenta=tuple(momenta))


# ---------------------------------------------------------------------------
# Hamiltonians


def canonical_hamiltonian(density: Expression,
                          report: Optional[HessianReport] = None,
                          space: Optional[PhaseSpace] = None) -> Expression:
    """Legendre transform with all solvable velocities eliminated."""
    space = space or phase_space(density, _density_mode(density))
    report = report or hessian_primaries(density, space)
    momenta = report.momenta
    hessian = report.matrix

    total = Expression.zero()
    for q, p in space.pairs:
        vel = Expression.from_atom(atom_from_base(q, dt=1))
        total = total + Expression.from_atom(atom_from_base(p)) * vel
    total = total - density

    # velocities along the kernel's regular directions are solvable
    frac_rows = [[OpFrac(hessian.entry(i, j)) for j in range(hessian.ncols)]
                 for i in range(hessian.nrows)]
    _, pivots = KernelMatrix._rref(frac_rows, hessian.ncols)
    solved = list(pivots)
    sub = hessian.submatrix(solved, solved)
    try:
        sub_inv = invert_kernel_matrix(sub)
    except HamforgeError as exc:
        raise ConsistencyError(
            "velocity block is not invertible over the ring") from exc

    gaps = []
    for j in solved:
        mdef = momenta[j]
        gaps.append(Expression.from_atom(atom_from_base(mdef.momentum))
                    - _velocity_free(mdef.expr))
    for row, j in enumerate(solved):
        sol = Expression.zero()
        for col in range(len(solved)):
            op = sub_inv.entry(row, col)
            if not op.is_zero():
                sol = sol + op_apply(op, gaps[col])
        total = _substitute_velocity(total, space.pairs[j][0], sol)

    # what remains must multiply primary constraints only; drop it weakly
    leftover = [j for j in range(len(space.pairs)) if j not in solved]
    for j in leftover:
        q = space.pairs[j][0]
        coef = total.velocity_derivative(q)
        if coef.is_zero():
            continue
        if reduce_weakly(coef, report.primaries.exprs()) is None:
            raise ConsistencyError(
                "unsolved velocity survives outside the primary span")
        total = _velocity_free_in(total, q)
    return total


def _velocity_free_in(e: Expression, base: Base) -> Expression:
    return Expression({key: c for key, c in e.terms.items()
                       if all(not (a.base == base and a.dt) for a in key[1])})


def primary_hamiltonian(h_c: Expression, primaries: ConstraintSet,
                        mode: Optional[str]) -> Tuple[Expression, List[Base]]:
    """Total Hamiltonian density: one fresh multiplier per primary."""
    out = h_c
    mults: List[Base] = []
    for i, c in enumerate(primaries):
        base: Base = ("multiplier", f"u{i + 1}", None, mode)
        mults.append(base)
        out = out + Expression.from_atom(atom_from_base(base)) * c.expr
    return out, mults


# ---------------------------------------------------------------------------
# weak equality


def reduce_weakly(e: Expression,
                  constraints: Sequence[Expression]) -> Optional[List[OpFrac]]:
    """Coefficients expressing e as an operator combination of constraints.

    Returns None when no combination exists.  A nonzero constant part can
    never be matched (constraints are field-linear), so it fails fast.
    """
    if e.is_zero():
        return [OpFrac.zero()] * len(constraints)
    if not e.constant_part().is_zero():
        return None
    lin_e = e.to_linear()
    lin_cs = [c.to_linear() for c in constraints]
    bases = set(lin_e)
    for lc in lin_cs:
        bases |= set(lc)
    ordered = sorted(bases, key=lambda b: atom_from_base(b).sort_key())
    rows = [[lc.get(b, OpPoly.zero()) for lc in lin_cs] for b in ordered]
    rhs = [lin_e.get(b, OpPoly.zero()) for b in ordered]
    if not rows:
        return None
    return solve_linear(KernelMatrix(rows), rhs)


# ---------------------------------------------------------------------------
# consistency closure


@dataclass(frozen=True)
class MultiplierFix:
    multiplier: Base
    kernel: OpPoly          # coefficient of the multiplier
    rest: Expression        # multiplier-free part; kernel(u) + rest = 0
    solved: Optional[Expression]   # u = solved, when the kernel is a unit


@dataclass(frozen=True)
class ClosureStep:
    constraint: str
    outcome: str            # "weakly-zero" | "fixes-multiplier" | "new-constraint"
    detail: str


@dataclass(frozen=True)
class Closure:
    constraints: ConstraintSet
    steps: Tuple[ClosureStep, ...]
    fixes: Tuple[MultiplierFix, ...]
    hamiltonian: Expression          # with multiplier terms
    multipliers: Tuple[Base, ...]


def consistency_closure(h_c: Expression, primaries: ConstraintSet,
                        space: PhaseSpace, cap: int = 10) -> Closure:
    """Iterate time consistency of every constraint until nothing new appears."""
    h_p, mults = primary_hamiltonian(h_c, primaries, space.mode)
    items: List[Constraint] = list(primaries)
    steps: List[ClosureStep] = []
    fixes: List[MultiplierFix] = []
    checked = 0
    rounds = 0
    n_secondary = 0
    while checked < len(items):
        if rounds > cap:
            raise ConsistencyError(
                f"consistency closure exceeded {cap} iterations")
        rounds += 1
        current = list(items)
        for c in current[checked:]:
            checked += 1
            dot = pb_with_hamiltonian(c.expr, h_p, space.pairs)
            plain, mult_part = _split_multiplier_part(dot)
            if mult_part:
                fix = _solve_multiplier(plain, mult_part)
                fixes.append(fix)
                steps.append(ClosureStep(
                    constraint=c.name, outcome="fixes-multiplier",
                    detail=base_text(fix.multiplier)))
                continue
            if reduce_weakly(plain, [x.expr for x in items]) is not None:
                steps.append(ClosureStep(
                    constraint=c.name, outcome="weakly-zero", detail=""))
                continue
            if plain.constant_part() == plain and not plain.is_zero():
                raise ConsistencyError(
                    "consistency produced a nonzero constant")
            n_secondary += 1
            new = Constraint(
                name=f"secondary-{n_secondary}",
                expr=_normalize_constraint(plain),
                stage="secondary",
                provenance=f"consistency of {c.name}")
            items.append(new)
            steps.append(ClosureStep(
                constraint=c.name, outcome="new-constraint", detail=new.name))
    return Closure(constraints=ConstraintSet(tuple(items)),
                   steps=tuple(steps), fixes=tuple(fixes),
                   hamiltonian=h_p, multipliers=tuple(mults))


def _solve_multiplier(plain: Expression,
                      mult_part: Dict[Base, OpPoly]) -> MultiplierFix:
    if len(mult_part) != 1:
        raise UnsupportedExpression(
            "consistency couples several multipliers at once")
    (base, op), = mult_part.items()
    solved = None
    if op.is_unit:
        solved = op_apply(-op.unit_inverse(), plain) if not plain.is_zero() \
            else Expression.zero()
    return MultiplierFix(multiplier=base, kernel=op, rest=plain, solved=solved)


# ---------------------------------------------------------------------------
# classification and counting


@dataclass(frozen=True)
class Classification:
    constraints: ConstraintSet
    matrix: KernelMatrix
    n_first: int
    n_second: int
    first_class_combinations: Tuple[Tuple[OpPoly, ...], ...]


def classify_constraints(cset: ConstraintSet,
                         space: PhaseSpace) -> Classification:
    """Split by the mutual bracket kernel matrix.

    A constraint whose entire row vanishes is first class.  The counts come
    from the matrix rank, which also covers sets where only combinations
    decouple; the combination generators are returned alongside.
    """
    exprs = cset.exprs()
    mat = bracket_matrix(exprs, exprs, space.pairs)
    rank = mat.rank()
    tagged = []
    for i, c in enumerate(cset):
        row_zero = all(mat.entry(i, j).is_zero() for j in range(len(exprs)))
        tagged.append(c.renamed_class("first" if row_zero else "second"))
    combos = tuple(tuple(op.adjoint() for op in vec)
                   for vec in mat.right_nullspace())
    return Classification(constraints=ConstraintSet(tuple(tagged)),
                          matrix=mat,
                          n_first=len(exprs) - rank,
                          n_second=rank,
                          first_class_combinations=combos)


@dataclass(frozen=True)
class KCount:
    """An integer affine in the number of retained levels: slope*k + const."""

    const: int
    slope: int = 0

    def __add__(self, other):
        o = _as_kcount(other)
        return KCount(self.const + o.const, self.slope + o.slope)

    __radd__ = __add__

    def __sub__(self, other):
        o = _as_kcount(other)
        return KCount(self.const - o.const, self.slope - o.slope)

    def __rsub__(self, other):
        return _as_kcount(other) - self

    def __mul__(self, factor: int):
        return KCount(self.const * factor, self.slope * factor)

    __rmul__ = __mul__

    def halved(self) -> "KCount":
        if self.const % 2 or self.slope % 2:
            raise HamforgeError(f"{self.render()} is not even")
        return KCount(self.const // 2, self.slope // 2)

    def at(self, k: int) -> int:
        return self.slope * k + self.const

    def render(self) -> str:
        if self.slope == 0:
            return str(self.const)
        head = "k" if self.slope == 1 else f"{self.slope}k"
        if self.const == 0:
            return head
        return f"{head} + {self.const}" if self.const > 0 \
            else f"{head} - {-self.const}"


def _as_kcount(v) -> KCount:
    if isinstance(v, KCount):
        return v
    if isinstance(v, int):
        return KCount(v, 0)
    raise TypeError(f"cannot count with {v!r}")


def count_dof(phase_dim, n_first, n_second):
    """(phase dimension - 2*first class - second class) / 2, checked."""
    ints = all(isinstance(v, int) for v in (phase_dim, n_first, n_second))
    total = _as_kcount(phase_dim) - 2 * _as_kcount(n_first) \
        - _as_kcount(n_second)
    if total.slope < 0 or total.at(1) < 0:
        raise HamforgeError("counting went negative: "
                            f"{total.render()} phase directions remain")
    half = total.halved()
    return half.at(0) if ints else half


# ---------------------------------------------------------------------------
# gauge generator


@dataclass(frozen=True)
class GaugeReport:
    generator: Expression
    parameters: Tuple[Base, ...]
    transformations: Dict[Base, Expression]
    extended_hamiltonian: Expression


def gauge_generator(classification: Classification, h_c: Expression,
                    space: PhaseSpace) -> GaugeReport:
    """Generator built from each primary first-class chain.

    Each primary constraint gamma contributes eps*{gamma, H_c} - epsdot*gamma
    with one fresh parameter eps; the field transformations are the brackets
    with the generator.
    """
    cset = classification.constraints
    if any(c.klass != "first" for c in cset):
        raise HamforgeError("gauge generator needs a purely first-class set")
    primaries = cset.by_stage("primary")
    gen = Expression.zero()
    params: List[Base] = []
    h_ext = h_c
    for i, gamma in enumerate(primaries):
        eps: Base = ("multiplier", f"eps{i + 1}", None, space.mode)
        params.append(eps)
        descend = pb_with_hamiltonian(gamma.expr, h_c, space.pairs)
        eps_atom = Expression.from_atom(atom_from_base(eps))
        epsdot = Expression.from_atom(atom_from_base(eps, dt=1))
        gen = gen + eps_atom * descend - epsdot * gamma.expr
        lam: Base = ("multiplier", f"v{2 * i + 1}", None, space.mode)
        beta: Base = ("multiplier", f"v{2 * i + 2}", None, space.mode)
        h_ext = h_ext + Expression.from_atom(atom_from_base(lam)) * gamma.expr
        if not descend.is_zero():
            h_ext = h_ext \
                + Expression.from_atom(atom_from_base(beta)) * descend
    transformations = {}
    for q in space.field_bases():
        delta = pb_with_hamiltonian(
            Expression.from_atom(atom_from_base(q)), gen, space.pairs)
        transformations[q] = delta
    return GaugeReport(generator=gen, parameters=tuple(params),
                       transformations=transformations,
                       extended_hamiltonian=h_ext)


# ---------------------------------------------------------------------------
# gauge fixing and reduced brackets


@dataclass(frozen=True)
class GaugeFixedSet:
    constraints: ConstraintSet
    matrix: KernelMatrix
    inverse: KernelMatrix


def impose_gauge(cset: ConstraintSet, conditions: Sequence[Expression],
                 space: PhaseSpace) -> GaugeFixedSet:
    """Adjoin gauge conditions; the full set must become second class.

    The combined list keeps the first condition in front, then secondary
    constraints, then primaries, then the remaining conditions, matching
    the usual pairing of each gauge with the constraint it fixes.
    """
    allowed = set(space.atoms())
    for cond in conditions:
        for b in cond.bases():
            if b[0] == "multiplier":
                raise HamforgeError("gauge conditions cannot carry multipliers")
            if b not in allowed:
                raise HamforgeError(
                    f"gauge condition references {base_text(b)}, which is "
                    "not in this level block")
    gauges = [Constraint(name=f"gauge-{i + 1}",
                         expr=_normalize_constraint(cond),
                         stage="gauge", provenance="imposed condition")
              for i, cond in enumerate(conditions)]
    ordered: List[Constraint] = []
    if gauges:
        ordered.append(gauges[0])
    ordered.extend(cset.by_stage("secondary"))
    ordered.extend(cset.by_stage("primary"))
    ordered.extend(gauges[1:])

    exprs = [c.expr for c in ordered]
    mat = bracket_matrix(exprs, exprs, space.pairs)
    try:
        inv = invert_kernel_matrix(mat)
    except HamforgeError as exc:
        null = getattr(exc, "null_space", None)
        raise IncompleteGaugeError(
            "gauge conditions leave the constraint matrix singular",
            null_space=null) from exc
    final = ConstraintSet(tuple(c.renamed_class("second") for c in ordered))
    return GaugeFixedSet(constraints=final, matrix=mat, inverse=inv)


def dirac_bracket(a: Expression, b: Expression, fixed: GaugeFixedSet,
                  space: PhaseSpace) -> OpPoly:
    """Reduced bracket kernel: {a,b} - {a,chi} C^{-1} {chi,b}."""
    exprs = fixed.constraints.exprs()
    out = pb_kernel(a, b, space.pairs)
    left = [pb_kernel(a, chi, space.pairs) for chi in exprs]
    right = [pb_kernel(chi, b, space.pairs) for chi in exprs]
    for al in range(len(exprs)):
        if left[al].is_zero():
            continue
        for be in range(len(exprs)):
            inv = fixed.inverse.entry(al, be)
            if inv.is_zero() or right[be].is_zero():
                continue
            out = out - left[al] * inv * right[be]
    return out


def dirac_bracket_table(fixed: GaugeFixedSet,
                        space: PhaseSpace) -> BracketTable:
    table = BracketTable()
    atoms = [atom_from_base(b) for b in space.atoms()]
    for i, x in enumerate(atoms):
        for y in atoms[i + 1:]:
            kern = dirac_bracket(Expression.from_atom(x),
                                 Expression.from_atom(y), fixed, space)
            if not kern.is_zero():
                table.set(x, y, kern)
    return table


# ---------------------------------------------------------------------------
# unitary-gauge spectrum


@dataclass(frozen=True)
class SpectrumLine:
    name: str
    mode: Optional[str]
    comp: Optional[int]
    coefficient: Expression     # parameter polynomial


@dataclass(frozen=True)
class SpectrumReport:
    lines: Tuple[SpectrumLine, ...]

    def coefficient(self, name: str, mode: Optional[str]) -> Expression:
        for line in self.lines:
            if line.name == name and line.mode == mode:
                return line.coefficient
        raise KeyError((name, mode))


def unitary_gauge_reduce(l4: Expression) -> Tuple[Expression, SpectrumReport]:
    """Absorb the odd excited component into the vector and read masses.

    The finite transformation with parameter fixed to cancel the fifth
    component shifts the even vector components and the scalar; the fifth
    component must drop out identically.
    """
    fifth = [b for b in l4.bases() if b[2] == 5]
    reduced = l4
    for b in fifth:
        kind, name, _, mode = b
        a5 = Expression.from_atom(atom_from_base(b))
        for mu in range(4):
            target = (kind, name, mu, mode)
            if target not in l4.bases():
                continue
            repl = Expression.from_atom(atom_from_base(target)) \
                - _dmu(mu, a5).param_mul(R=1, n=-1)
            reduced = reduced.substitute(target, repl)
        for other in list(l4.bases()):
            if other[0] == "field" and other[2] is None and other[3] == mode:
                repl = Expression.from_atom(atom_from_base(other)) \
                    + a5.param_mul(R=1, n=-1)
                reduced = reduced.substitute(other, repl)
    for b in fifth:
        if reduced.contains(b):
            raise ConsistencyError(
                "fifth component failed to cancel in the unitary gauge")

    lines = []
    seen = set()
    for kind, name, comp, mode in sorted(reduced.bases(),
                                         key=lambda b: atom_from_base(b).sort_key()):
        rep = (name, mode)
        if rep in seen:
            continue
        seen.add(rep)
        probe_comp = 0 if comp is not None else None
        target_atom = atom_from_base(("field", name, probe_comp, mode))
        coefficient = Expression.zero()
        for (params, atoms), coef in reduced.terms.items():
            if atoms == (target_atom, target_atom):
                coefficient = coefficient + Expression.const(coef, *params)
        lines.append(SpectrumLine(name=name, mode=mode, comp=probe_comp,
                                  coefficient=coefficient))
    return reduced, SpectrumReport(lines=tuple(lines))


def _dmu(mu: int, e: Expression) -> Expression:
    return e.d_t() if mu == 0 else e.d_x(mu)
