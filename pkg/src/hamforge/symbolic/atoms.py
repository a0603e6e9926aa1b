"""Field atoms: one field symbol carrying its derivative decorations.

An atom is a field, a conjugate momentum, or a Lagrange multiplier,
identified by (kind, name, component, mode) and decorated with counts of
time derivatives, compact-coordinate derivatives, spatial derivatives (a
sorted multiset of axes), and nonpositive powers of the spatial Laplacian
(inverse Laplacians; positive powers expand into spatial derivatives and
never live on an atom).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Tuple

KINDS = ("field", "momentum", "multiplier")
_KIND_RANK = {k: i for i, k in enumerate(KINDS)}
_MODE_RANK = {None: 0, "0": 1, "n": 2}

Base = Tuple[str, str, Optional[int], Optional[str]]


@dataclass(frozen=True)
class Atom:
    kind: str
    name: str
    comp: Optional[int] = None   # component index: 0..3 spacetime, 5 compact
    mode: Optional[str] = None   # tower label: "0" zero mode, "n" generic mode
    dt: int = 0
    dy: int = 0
    dx: Tuple[int, ...] = ()
    lap: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown atom kind {self.kind!r}")
        if self.comp not in (None, 0, 1, 2, 3, 5):
            raise ValueError(f"bad component {self.comp!r}")
        if self.mode not in (None, "0", "n"):
            raise ValueError(f"bad mode {self.mode!r}")
        if self.dt < 0 or self.dy < 0:
            raise ValueError("derivative counts must be nonnegative")
        if self.lap > 0:
            raise ValueError("atoms carry only inverse Laplacian powers")
        if tuple(sorted(self.dx)) != self.dx or any(a not in (1, 2, 3) for a in self.dx):
            raise ValueError(f"bad spatial derivative tuple {self.dx!r}")

    @property
    def base(self) -> Base:
        return (self.kind, self.name, self.comp, self.mode)

    def sort_key(self):
        return (_KIND_RANK[self.kind], self.name,
                -1 if self.comp is None else self.comp,
                _MODE_RANK[self.mode], self.dt, self.dy, self.dx, -self.lap)

    def __lt__(self, other: "Atom") -> bool:
        return self.sort_key() < other.sort_key()

    # -- derivative decorations --------------------------------------------

    def d_t(self) -> "Atom":
        return replace(self, dt=self.dt + 1)

    def d_y(self) -> "Atom":
        return replace(self, dy=self.dy + 1)

    def d_x(self, axis: int) -> "Atom":
        return replace(self, dx=tuple(sorted(self.dx + (axis,))))

    def inv_lap(self) -> "Atom":
        return replace(self, lap=self.lap - 1)

    def strip_derivs(self) -> "Atom":
        return replace(self, dt=0, dy=0, dx=(), lap=0)

    # -- text ----------------------------------------------------------------

    def base_text(self) -> str:
        s = self.name
        if self.kind == "momentum":
            s = f"mom({self.name})"
        if self.mode is not None:
            s += f"_{self.mode}"
        if self.comp is not None:
            s += f"[{self.comp}]"
        return s

    def render(self) -> str:
        ops = ["dt"] * self.dt + ["dy"] * self.dy \
            + [f"d{a}" for a in self.dx] + ["ilap"] * (-self.lap)
        if not ops:
            return self.base_text()
        return f"{'.'.join(ops)}({self.base_text()})"

    def __str__(self) -> str:
        return self.render()


def atom_from_base(base: Base, dt: int = 0, dy: int = 0,
                   dx: Tuple[int, ...] = (), lap: int = 0) -> Atom:
    kind, name, comp, mode = base
    return Atom(kind, name, comp, mode, dt=dt, dy=dy, dx=tuple(sorted(dx)), lap=lap)


def base_text(base: Base) -> str:
    return atom_from_base(base).base_text()
