"""Circle-orbifold reduction of a five-dimensional quadratic density.

Each field component, according to its declared reflection parity, expands
over y in (0, 2piR) as

    even:  f(x, y) = f0(x)/sqrt(2piR) + sum_n fn(x) cos(ny/R)/sqrt(piR)
    odd:   f(x, y) = sum_n fn(x) sin(ny/R)/sqrt(piR)

Substituting into a density quadratic in the fields and integrating over y
leaves one decoupled block per level.  Distinct levels never mix, so the
engine keeps the zero modes plus a single representative excited level
labelled by the symbol n; counts that depend on the truncation are reported
as affine functions of it elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

from .dsl import TheorySpec
from .errors import HamforgeError, UnsupportedExpression
from .symbolic.atoms import Atom, atom_from_base
from .symbolic.expr import Expression

ComponentKey = Tuple[str, Optional[int]]   # (field name, component)


@dataclass(frozen=True)
class ComponentExpansion:
    parity: str          # "even" or "odd"
    basis: str           # "cos" or "sin"
    has_zero_mode: bool
    zero_norm: Optional[str]
    mode_norm: str


@dataclass(frozen=True)
class ModeExpansion:
    components: Dict[ComponentKey, ComponentExpansion]
    truncation: int
    radius: str

    def component(self, name: str, comp: Optional[int]) -> ComponentExpansion:
        return self.components[(name, comp)]


def _component_parity(spec: TheorySpec, name: str, comp: Optional[int]) -> str:
    decl = spec.field(name)
    if decl.parity is None:
        raise HamforgeError(f"field {name!r} has no declared parity")
    if decl.rank == "scalar":
        return decl.parity["all"]
    return decl.parity["5"] if comp == 5 else decl.parity["mu"]


def expand_on_orbifold(spec: TheorySpec, k: int) -> ModeExpansion:
    """Assign every field component its harmonic basis and normalization."""
    if spec.compact is None:
        raise HamforgeError("theory declares no compact coordinate")
    if k < 1:
        raise HamforgeError(f"truncation must be positive, got {k}")
    comps: Dict[ComponentKey, ComponentExpansion] = {}
    for decl in spec.fields:
        targets: Iterable[Optional[int]]
        targets = (None,) if decl.rank == "scalar" else (0, 1, 2, 3, 5)
        for c in targets:
            parity = _component_parity(spec, decl.name, c)
            even = parity == "even"
            comps[(decl.name, c)] = ComponentExpansion(
                parity=parity,
                basis="cos" if even else "sin",
                has_zero_mode=even,
                zero_norm="1/sqrt(2*pi*R)" if even else None,
                mode_norm="1/sqrt(pi*R)",
            )
    return ModeExpansion(components=comps, truncation=k,
                         radius=spec.compact.radius)


# one y-derivative acting on a harmonic of level n
_DY_STEP = {"cos": (-1, "sin"), "sin": (1, "cos")}

# integral over (0, 2piR) of the product of two normalized harmonics of the
# same level; every mixed product integrates to zero
_PAIR_INTEGRAL = {
    ("one", "one"): 1,
    ("cos", "cos"): 1,
    ("sin", "sin"): 1,
    ("one", "cos"): 0,
    ("cos", "one"): 0,
    ("one", "sin"): 0,
    ("sin", "one"): 0,
    ("sin", "cos"): 0,
    ("cos", "sin"): 0,
}


def _atom_contributions(a: Atom, exp: ModeExpansion):
    """Level contributions of one atom: (sign, n-power, harmonic, mode atom)."""
    if a.mode is not None:
        raise UnsupportedExpression(f"{a.render()} already carries a mode label")
    if a.lap != 0:
        raise UnsupportedExpression("inverse Laplacians cannot be reduced")
    info = exp.component(a.name, a.comp)
    out = []
    if info.has_zero_mode and a.dy == 0:
        zero = atom_from_base((a.kind, a.name, a.comp, "0"),
                              dt=a.dt, dy=0, dx=a.dx, lap=0)
        out.append((1, 0, "one", zero))
    sign, trig = 1, info.basis
    for _ in range(a.dy):
        step, trig = _DY_STEP[trig]
        sign *= step
    excited = atom_from_base((a.kind, a.name, a.comp, "n"),
                             dt=a.dt, dy=0, dx=a.dx, lap=0)
    out.append((sign, a.dy, trig, excited))
    return out


def integrate_extra_dimension(spec: TheorySpec, exp: ModeExpansion) -> Expression:
    """Reduce the declared density to its four-dimensional form.

    The density must be quadratic: every term carries exactly two atoms.
    """
    if spec.compact is None:
        raise HamforgeError("theory declares no compact coordinate")
    out = Expression.zero()
    for ((em, eR, en), atoms), coef in spec.lagrangian.terms.items():
        if len(atoms) != 2:
            raise UnsupportedExpression(
                "reduction needs a density quadratic in the fields; found a "
                f"term with {len(atoms)} atom(s)")
        if en != 0:
            raise UnsupportedExpression(
                "the level symbol n cannot appear before reduction")
        a1, a2 = atoms
        for s1, p1, t1, b1 in _atom_contributions(a1, exp):
            for s2, p2, t2, b2 in _atom_contributions(a2, exp):
                weight = _PAIR_INTEGRAL[(t1, t2)]
                if weight == 0:
                    continue
                out = out + Expression.term(
                    coef * s1 * s2 * weight,
                    (em, eR - p1 - p2, en + p1 + p2),
                    [b1, b2])
    _assert_levels_separated(out)
    return out


def _assert_levels_separated(density: Expression) -> None:
    for (_, atoms) in density.terms:
        modes = {a.mode for a in atoms}
        if len(modes) > 1:
            raise HamforgeError(
                "internal error: reduction left a cross-level term")


def split_levels(density: Expression) -> Dict[str, Expression]:
    """Split a reduced density into its zero-mode and excited-level blocks."""
    blocks = {"0": Expression.zero(), "n": Expression.zero()}
    for key, coef in density.terms.items():
        _, atoms = key
        modes = {a.mode for a in atoms}
        if len(modes) != 1 or None in modes:
            raise HamforgeError("density is not split by level")
        mode = modes.pop()
        blocks[mode] = blocks[mode] + Expression({key: coef})
    return blocks
