"""Finite groups as closed multiplication tables.

Elements are the indices ``0..order-1``. The named groups used throughout
(cyclic groups and their products, S3, Q8, D4) ship as constructors, and
every structural question (center, quotients, isomorphism) is answered by
exhaustive search over the table.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .lattice import DivisorChain, invariants_from_orders

ISOMORPHISM_SEARCH_BOUND = 64


class GroupError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    table: tuple[tuple[int, ...], ...]
    identity: int = 0
    name: str | None = None

    def __post_init__(self):
        table = tuple(tuple(int(x) for x in row) for row in self.table)
        n = len(table)
        if n == 0:
            raise GroupError("a group has at least one element")
        if any(len(row) != n for row in table):
            raise GroupError("multiplication table must be square")
        if any(not 0 <= x < n for row in table for x in row):
            raise GroupError("table entries out of range")
        if not 0 <= self.identity < n:
            raise GroupError("identity index out of range")
        object.__setattr__(self, "table", table)

    def __eq__(self, other):
        if not isinstance(other, FiniteGroup):
            return NotImplemented
        return self.identity == other.identity and self.table == other.table

    def __hash__(self):
        return hash((self.identity, self.table))

    def __repr__(self):
        return f"FiniteGroup({self.name or label(self)}, order={self.order})"

    @property
    def order(self) -> int:
        return len(self.table)

    def elements(self) -> range:
        return range(len(self.table))

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    @cached_property
    def inverses(self) -> tuple[int, ...]:
        e = self.identity
        return tuple(row.index(e) for row in self.table)

    def inv(self, a: int) -> int:
        return self.inverses[a]

    def power(self, a: int, k: int) -> int:
        if k < 0:
            a, k = self.inv(a), -k
        out = self.identity
        for _ in range(k):
            out = self.table[out][a]
        return out

    @cached_property
    def element_orders(self) -> tuple[int, ...]:
        out = []
        for a in self.elements():
            k, x = 1, a
            while x != self.identity:
                x = self.table[x][a]
                k += 1
            out.append(k)
        return tuple(out)

    @cached_property
    def is_abelian(self) -> bool:
        t = self.table
        return all(t[a][b] == t[b][a] for a in self.elements() for b in range(a))

    def conjugate(self, g: int, x: int) -> int:
        """g x g^-1."""
        return self.table[self.table[g][x]][self.inv(g)]

    def validate(self) -> None:
        """Exhaustively check identity, inverses and associativity."""
        t, e, n = self.table, self.identity, self.order
        for a in range(n):
            if t[a][e] != a or t[e][a] != a:
                raise GroupError(f"{e} is not a two-sided identity (fails at {a})")
            if sorted(t[a]) != list(range(n)):
                raise GroupError(f"row {a} is not a permutation: no inverses")
        for a in range(n):
            ra = t[a]
            for b in range(n):
                rab = t[ra[b]]
                tb = t[b]
                for c in range(n):
                    if rab[c] != ra[tb[c]]:
                        raise GroupError(f"associativity fails at ({a},{b},{c})")

    def to_json(self) -> dict:
        return {"order": self.order, "identity": self.identity, "table": [list(r) for r in self.table]}


@dataclass(frozen=True)
class Subgroup:
    parent: FiniteGroup
    elements: tuple[int, ...]

    def __post_init__(self):
        elems = tuple(sorted(set(int(x) for x in self.elements)))
        object.__setattr__(self, "elements", elems)

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, x: int) -> bool:
        return x in self.element_set

    @cached_property
    def element_set(self) -> frozenset[int]:
        return frozenset(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def is_closed(self) -> bool:
        G, S = self.parent, self.element_set
        if G.identity not in S:
            return False
        return all(G.mul(a, G.inv(b)) in S for a in S for b in S)

    def is_normal(self) -> bool:
        G = self.parent
        return all(G.conjugate(g, x) in self.element_set for g in G.elements() for x in self.elements)

    def is_central(self) -> bool:
        G = self.parent
        return all(G.mul(g, x) == G.mul(x, g) for g in G.elements() for x in self.elements)

    def as_group(self) -> tuple[FiniteGroup, GroupHom]:
        """The subgroup as a standalone group with its inclusion into the parent."""
        elems = self.elements
        index = {x: i for i, x in enumerate(elems)}
        G = self.parent
        table = tuple(tuple(index[G.mul(a, b)] for b in elems) for a in elems)
        sub = FiniteGroup(table, index[G.identity])
        return sub, GroupHom(sub, G, elems)

    def intersection(self, other: Subgroup) -> Subgroup:
        return Subgroup(self.parent, tuple(self.element_set & other.element_set))


@dataclass(frozen=True)
class GroupHom:
    source: FiniteGroup
    target: FiniteGroup
    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(x) for x in self.images)
        if len(images) != self.source.order:
            raise GroupError(f"hom needs {self.source.order} images, got {len(images)}")
        if any(not 0 <= x < self.target.order for x in images):
            raise GroupError("hom image index out of range")
        object.__setattr__(self, "images", images)

    def __call__(self, x: int) -> int:
        return self.images[x]

    def is_homomorphism(self) -> bool:
        S, T, f = self.source, self.target, self.images
        return all(f[S.mul(a, b)] == T.mul(f[a], f[b]) for a in S.elements() for b in S.elements())

    def kernel(self) -> Subgroup:
        e = self.target.identity
        return Subgroup(self.source, tuple(x for x in self.source.elements() if self.images[x] == e))

    def image(self) -> Subgroup:
        return Subgroup(self.target, tuple(set(self.images)))

    def is_injective(self) -> bool:
        return len(set(self.images)) == len(self.images)

    def is_surjective(self) -> bool:
        return len(set(self.images)) == self.target.order

    def compose(self, first: GroupHom) -> GroupHom:
        """self o first."""
        return GroupHom(first.source, self.target, tuple(self.images[x] for x in first.images))

    def restrict(self, sub: Subgroup) -> GroupHom:
        """Restriction to a subgroup of the source, viewed as a standalone group."""
        H, inc = sub.as_group()
        return self.compose(inc)


# ---------------------------------------------------------------- constructors


def cyclic(n: int) -> FiniteGroup:
    if n < 1:
        raise GroupError("cyclic group order must be positive")
    return FiniteGroup(tuple(tuple((a + b) % n for b in range(n)) for a in range(n)), 0, f"C{n}")


def abelian(moduli: Sequence[int]) -> FiniteGroup:
    """Z/m_1 x ... x Z/m_k with elements indexed in lexicographic tuple order."""
    moduli = tuple(int(m) for m in moduli)
    if any(m < 1 for m in moduli):
        raise GroupError(f"moduli must be positive: {moduli}")
    elems = list(itertools.product(*(range(m) for m in moduli)))
    index = {x: i for i, x in enumerate(elems)}
    table = tuple(
        tuple(index[tuple((a + b) % m for a, b, m in zip(x, y, moduli))] for y in elems)
        for x in elems
    )
    name = "x".join(f"C{m}" for m in moduli) or "C1"
    return FiniteGroup(table, 0, name)


def abelian_coords(moduli: Sequence[int], index: int) -> tuple[int, ...]:
    """Coordinates of element ``index`` of ``abelian(moduli)``."""
    out = []
    for m in reversed(moduli):
        index, c = divmod(index, m)
        out.append(c)
    return tuple(reversed(out))


def abelian_index(moduli: Sequence[int], coords: Sequence[int]) -> int:
    i = 0
    for m, c in zip(moduli, coords):
        i = i * m + c % m
    return i


def trivial_group() -> FiniteGroup:
    return FiniteGroup(((0,),), 0, "C1")


def symmetric3() -> FiniteGroup:
    perms = sorted(itertools.permutations(range(3)))
    index = {p: i for i, p in enumerate(perms)}
    # (p*q)(i) = p(q(i))
    table = tuple(tuple(index[tuple(p[q[i]] for i in range(3))] for q in perms) for p in perms)
    return FiniteGroup(table, index[(0, 1, 2)], "S3")


def quaternion8() -> FiniteGroup:
    """Q8 with elements 1, -1, i, -i, j, -j, k, -k (indices 0..7)."""
    units = {("1", "1"): (1, "1"), ("i", "i"): (-1, "1"), ("j", "j"): (-1, "1"), ("k", "k"): (-1, "1"),
             ("i", "j"): (1, "k"), ("j", "k"): (1, "i"), ("k", "i"): (1, "j"),
             ("j", "i"): (-1, "k"), ("k", "j"): (-1, "i"), ("i", "k"): (-1, "j")}
    for u in "ijk":
        units[("1", u)] = (1, u)
        units[(u, "1")] = (1, u)
    elems = [(s, u) for u in "1ijk" for s in (1, -1)]
    index = {x: i for i, x in enumerate(elems)}

    def mul(x, y):
        s, u = units[(x[1], y[1])]
        return (x[0] * y[0] * s, u)

    table = tuple(tuple(index[mul(x, y)] for y in elems) for x in elems)
    return FiniteGroup(table, 0, "Q8")


def dihedral(n: int) -> FiniteGroup:
    """Symmetries of the n-gon, order 2n; element r^a s^b has index b*n + a."""
    elems = [(a, b) for b in range(2) for a in range(n)]
    index = {x: i for i, x in enumerate(elems)}

    def mul(x, y):
        a, b = x
        c, d = y
        return ((a + (c if b == 0 else -c)) % n, (b + d) % 2)

    table = tuple(tuple(index[mul(x, y)] for y in elems) for x in elems)
    return FiniteGroup(table, 0, f"D{n}")


def direct_product(G: FiniteGroup, H: FiniteGroup) -> FiniteGroup:
    """Componentwise law on G x H; the pair (a, b) has index a*|H| + b."""
    h = H.order
    table = tuple(
        tuple(G.mul(a, c) * h + H.mul(b, d) for c in G.elements() for d in H.elements())
        for a in G.elements() for b in H.elements()
    )
    name = None
    if G.name and H.name:
        name = f"{G.name}x{H.name}"
    return FiniteGroup(table, G.identity * h + H.identity, name)


_NAMED = {"S3": symmetric3, "Q8": quaternion8, "D4": lambda: dihedral(4)}


def named_group(name: str) -> FiniteGroup:
    """Build ``C4``, ``C2xC2``, ``C2xC4``, ``Q8``, ``S3``, ``D4`` (products via 'x')."""
    parts = [p.strip() for p in name.strip().split("x")]
    if not parts or any(not p for p in parts):
        raise GroupError(f"unknown group name {name!r}")
    out = None
    for p in parts:
        m = re.fullmatch(r"C(\d+)", p)
        if m:
            g = cyclic(int(m.group(1)))
        elif p in _NAMED:
            g = _NAMED[p]()
        elif p in ("1", "trivial"):
            g = trivial_group()
        else:
            raise GroupError(f"unknown group name {p!r} in {name!r}")
        out = g if out is None else direct_product(out, g)
    return FiniteGroup(out.table, out.identity, name.strip())


def group_from_json(data) -> FiniteGroup:
    """A group name string or ``{"order", "table"[, "identity"]}``; the table is validated."""
    if isinstance(data, str):
        return named_group(data)
    if not isinstance(data, dict) or "table" not in data:
        raise GroupError("group must be a name or an object with a 'table' field")
    G = FiniteGroup(tuple(tuple(r) for r in data["table"]), int(data.get("identity", 0)))
    if "order" in data and int(data["order"]) != G.order:
        raise GroupError(f"declared order {data['order']} does not match table size {G.order}")
    G.validate()
    return G


# ---------------------------------------------------------------- structure


def generated_subgroup(G: FiniteGroup, gens: Iterable[int]) -> Subgroup:
    gens = list(gens)
    seen = {G.identity}
    frontier = [G.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = G.mul(x, g)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return Subgroup(G, tuple(seen))


def center(G: FiniteGroup) -> Subgroup:
    t = G.table
    return Subgroup(G, tuple(z for z in G.elements() if all(t[z][g] == t[g][z] for g in G.elements())))


def whole(G: FiniteGroup) -> Subgroup:
    return Subgroup(G, tuple(G.elements()))


def trivial_subgroup(G: FiniteGroup) -> Subgroup:
    return Subgroup(G, (G.identity,))


def quotient(G: FiniteGroup, N: Subgroup) -> tuple[FiniteGroup, GroupHom]:
    """G/N with the projection; cosets are numbered by their smallest element."""
    if N.parent != G:
        raise GroupError("subgroup belongs to a different group")
    if not N.is_closed():
        raise GroupError("not a subgroup")
    if not N.is_normal():
        raise GroupError("subgroup is not normal")
    coset_of = [-1] * G.order
    reps = []
    for g in G.elements():
        if coset_of[g] < 0:
            for n in N.elements:
                coset_of[G.mul(g, n)] = len(reps)
            reps.append(g)
    table = tuple(tuple(coset_of[G.mul(a, b)] for b in reps) for a in reps)
    Q = FiniteGroup(table, coset_of[G.identity])
    return Q, GroupHom(G, Q, tuple(coset_of))


def subgroups(G: FiniteGroup) -> list[Subgroup]:
    """All subgroups, as joins of cyclic subgroups; sorted by (order, elements)."""
    cyclics = {generated_subgroup(G, [g]).elements for g in G.elements()}
    found = set(cyclics)
    frontier = set(cyclics)
    while frontier:
        nxt = set()
        for S in frontier:
            for C in cyclics:
                if not set(C) <= set(S):
                    J = generated_subgroup(G, S + C).elements
                    if J not in found:
                        found.add(J)
                        nxt.add(J)
        frontier = nxt
    return [Subgroup(G, s) for s in sorted(found, key=lambda s: (len(s), s))]


def invariant_factors_of_abelian(G: FiniteGroup) -> DivisorChain:
    """The divisor chain r with G = Z/r_1 x ... x Z/r_k, trivial factors dropped."""
    if not G.is_abelian:
        raise GroupError("group is not abelian")
    return DivisorChain(invariants_from_orders(G.element_orders).canonical())


def _generators(G: FiniteGroup) -> list[int]:
    gens: list[int] = []
    current = {G.identity}
    by_order = sorted(G.elements(), key=lambda g: (-G.element_orders[g], g))
    for g in by_order:
        if g not in current:
            gens.append(g)
            current = set(generated_subgroup(G, gens).elements)
            if len(current) == G.order:
                break
    return gens


def _invariants(G: FiniteGroup):
    return (G.order, tuple(sorted(G.element_orders)), len(center(G)), G.is_abelian)


def find_isomorphism(G: FiniteGroup, H: FiniteGroup) -> GroupHom | None:
    """An isomorphism G -> H, or None.  Orders above 64 raise ``GroupError``."""
    if max(G.order, H.order) > ISOMORPHISM_SEARCH_BOUND:
        raise GroupError(
            f"search bound exceeded: orders {G.order}, {H.order} > {ISOMORPHISM_SEARCH_BOUND}"
        )
    if _invariants(G) != _invariants(H):
        return None
    gens = _generators(G)
    candidates = [[h for h in H.elements() if H.element_orders[h] == G.element_orders[g]] for g in gens]

    def extend(images: list[int]) -> dict[int, int] | None:
        # BFS over words in the assigned generators
        phi = {G.identity: H.identity}
        frontier = [G.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for g, h in zip(gens, images):
                    y, hy = G.mul(x, g), H.mul(phi[x], h)
                    if y in phi:
                        if phi[y] != hy:
                            return None
                    else:
                        phi[y] = hy
                        nxt.append(y)
            frontier = nxt
        return phi

    def search(images: list[int]) -> dict[int, int] | None:
        phi = extend(images)
        if phi is None:
            return None
        if len(images) == len(gens):
            if len(set(phi.values())) == G.order:
                # closure under the generators of a consistent map is a hom
                return phi
            return None
        for h in candidates[len(images)]:
            out = search(images + [h])
            if out is not None:
                return out
        return None

    phi = search([])
    if phi is None:
        return None
    return GroupHom(G, H, tuple(phi[g] for g in G.elements()))


def is_isomorphic(G: FiniteGroup, H: FiniteGroup) -> bool:
    return find_isomorphism(G, H) is not None


def label(G: FiniteGroup) -> str:
    """Human-readable isomorphism-class name: ``C2xC4`` for abelian groups, else a small named group."""
    if G.is_abelian:
        chain = invariant_factors_of_abelian(G).moduli
        return "x".join(f"C{m}" for m in chain) or "C1"
    if G.order <= ISOMORPHISM_SEARCH_BOUND:
        for name, make in _NAMED.items():
            ref = make()
            if ref.order == G.order and is_isomorphic(G, ref):
                return name
    return f"nonabelian-{G.order}"
