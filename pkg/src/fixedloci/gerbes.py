"""Classes of mu_r-gerbes in the Kummer image Pic(Y) / r Pic(Y).

A base is described only by its Picard group, presented on explicit
generators: a free generator has modulus 0, a torsion generator modulus a.
A class records one coordinate per generator, reduced mod r on free
generators and mod gcd(r, a) on torsion ones.  The Brauer part of
H^2(Y, mu_r) is not modelled, so every class here is a root-gerbe class.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Sequence

from .lattice import FinAbGroup, IntMatrix, LatticeError, coker_structure, smith_normal_form


class GerbeError(ValueError):
    pass


@dataclass(frozen=True)
class PicModel:
    """Picard group of a base, with generators ordered free ones first, then torsion."""

    pic: FinAbGroup
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if not isinstance(self.pic, FinAbGroup):
            raise GerbeError("pic must be a FinAbGroup")
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != len(self.generators):
                raise GerbeError(f"need {len(self.generators)} generator labels, got {len(labels)}")
            object.__setattr__(self, "labels", labels)

    @classmethod
    def parse(cls, text: str, labels: Sequence[str] | None = None) -> PicModel:
        """``"Z"``, ``"Z^2 x Z/2"`` and so on."""
        try:
            pic = FinAbGroup.parse(text)
        except LatticeError as exc:
            raise GerbeError(str(exc)) from None
        return cls(pic, tuple(labels) if labels else None)

    @property
    def generators(self) -> tuple[int, ...]:
        """Order of each generator, 0 for a free one."""
        return (0,) * self.pic.free_rank + tuple(self.pic.torsion.moduli)

    def generator_labels(self) -> tuple[str, ...]:
        if self.labels is not None:
            return self.labels
        return tuple(f"e{i}" for i in range(len(self.generators)))

    def relation_matrix(self, r: int) -> IntMatrix:
        """Columns: the torsion relations followed by r times each generator."""
        k = len(self.generators)
        rows = [
            [self.generators[i] if j == i else 0 for j in range(k)] + [r if j == i else 0 for j in range(k)]
            for i in range(k)
        ]
        return IntMatrix.from_rows(rows) if k else IntMatrix(0, 0, ())


@dataclass(frozen=True)
class GerbeClass:
    base: PicModel
    r: int
    value: tuple[int, ...]

    def __post_init__(self):
        if self.r < 1:
            raise GerbeError("r must be positive")
        if len(self.value) != len(self.base.generators):
            raise GerbeError("class needs one coordinate per Pic generator")
        object.__setattr__(self, "value", _reduce(self.base, self.r, self.value))

    def __str__(self) -> str:
        labels = self.base.generator_labels()
        body = ", ".join(f"{lab}: {v}" for lab, v in zip(labels, self.value))
        return f"({body}) mod {self.r}"

    def moduli(self) -> tuple[int, ...]:
        return tuple(self.r if a == 0 else gcd(self.r, a) for a in self.base.generators)

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "pic": str(self.base.pic),
            "generators": list(self.base.generator_labels()),
            "value": list(self.value),
            "moduli": list(self.moduli()),
            "trivial": is_trivial(self),
        }


def _reduce(base: PicModel, r: int, coords: Sequence[int]) -> tuple[int, ...]:
    return tuple(int(c) % (r if a == 0 else gcd(r, a)) for c, a in zip(coords, base.generators))


def kummer_class(base: PicModel, L: Sequence[int] | int, r: int) -> GerbeClass:
    """Boundary of the line bundle L (coordinates on the Pic generators) in H^2(-, mu_r)."""
    if isinstance(L, int):
        L = (L,)
    if r < 1:
        raise GerbeError("r must be positive")
    if len(L) != len(base.generators):
        raise GerbeError(f"line bundle needs {len(base.generators)} coordinates, got {len(L)}")
    return GerbeClass(base, r, tuple(L))


def add_classes(c1: GerbeClass, c2: GerbeClass) -> GerbeClass:
    """Class of the contracted product of the two gerbes."""
    if c1.base != c2.base:
        raise GerbeError("classes live over different bases")
    if c1.r != c2.r:
        raise GerbeError(f"classes have different r ({c1.r} vs {c2.r})")
    return GerbeClass(c1.base, c1.r, tuple(a + b for a, b in zip(c1.value, c2.value)))


def negate(c: GerbeClass) -> GerbeClass:
    return GerbeClass(c.base, c.r, tuple(-a for a in c.value))


def zero_class(base: PicModel, r: int) -> GerbeClass:
    return GerbeClass(base, r, (0,) * len(base.generators))


def is_trivial(c: GerbeClass) -> bool:
    return all(v == 0 for v in c.value)


def equivariant_twist(c: GerbeClass, w: int, label: str = "[1]") -> GerbeClass:
    """The class over base x BGm obtained by adjoining the weight-w character."""
    k = c.base.pic.free_rank
    old = c.base.generator_labels()
    # the new free generator sits after the existing free ones
    labels = old[:k] + (label,) + old[k:]
    pic = FinAbGroup(k + 1, c.base.pic.torsion)
    return GerbeClass(PicModel(pic, labels), c.r, c.value[:k] + (w,) + c.value[k:])


def class_group(base: PicModel, r: int) -> FinAbGroup:
    """Pic / r Pic computed from its relation matrix."""
    return coker_structure(base.relation_matrix(r))


def in_r_multiples(base: PicModel, L: Sequence[int], r: int) -> bool:
    """Whether L lies in r Pic, by solvability of r x = L in the presented group."""
    # L in r Pic  iff  L is in the column span of [torsion relations | r I]
    A = base.relation_matrix(r)
    snf = smith_normal_form(A)
    y = [sum(snf.U[i, j] * L[j] for j in range(A.rows)) for i in range(A.rows)]
    for i, yi in enumerate(y):
        d = snf.factors[i] if i < len(snf.factors) else 0
        if d == 0:
            if yi != 0:
                return False
        elif yi % d:
            return False
    return True
