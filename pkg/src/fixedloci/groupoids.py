"""Finite groupoid models of quotient stacks.

A finite groupoid stands in for a stack [U/H] with U a finite set.  Its
isomorphism classes are the coarse space, its automorphism groups are the
inertia, and rigidification divides every morphism set by a central
subgroup of automorphisms.  Two finite groupoids are equivalent exactly when
their components match up with isomorphic automorphism groups.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

from .groups import (
    FiniteGroup,
    GroupHom,
    Subgroup,
    abelian,
    direct_product,
    find_isomorphism,
    label,
)


class GroupoidError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FiniteGroupoid:
    """Objects ``0..n_objects-1``; ``composition[(g, f)]`` is g o f (f first)."""

    n_objects: int
    source: tuple[int, ...]
    target: tuple[int, ...]
    identities: tuple[int, ...]
    inverses: tuple[int, ...]
    composition: Mapping[tuple[int, int], int] = field(repr=False)

    @property
    def n_morphisms(self) -> int:
        return len(self.source)

    def compose(self, g: int, f: int) -> int:
        try:
            return self.composition[(g, f)]
        except KeyError:
            raise GroupoidError(f"morphisms {g} o {f} are not composable") from None

    def conjugate(self, f: int, a: int) -> int:
        """f a f^-1 for a in Aut(source f)."""
        return self.compose(f, self.compose(a, self.inverses[f]))

    @cached_property
    def hom_sets(self) -> dict[tuple[int, int], tuple[int, ...]]:
        out = defaultdict(list)
        for m in range(self.n_morphisms):
            out[(self.source[m], self.target[m])].append(m)
        return {k: tuple(v) for k, v in out.items()}

    def hom(self, x: int, y: int) -> tuple[int, ...]:
        return self.hom_sets.get((x, y), ())

    def automorphisms(self, x: int) -> tuple[int, ...]:
        return self.hom(x, x)

    def automorphism_group(self, x: int) -> tuple[FiniteGroup, tuple[int, ...]]:
        """Aut(x) as a table group, with the morphism id of each group element."""
        elems = self.automorphisms(x)
        index = {m: i for i, m in enumerate(elems)}
        table = tuple(tuple(index[self.compose(a, b)] for b in elems) for a in elems)
        return FiniteGroup(table, index[self.identities[x]]), elems

    @cached_property
    def components(self) -> tuple[tuple[int, ...], ...]:
        """Isomorphism classes of objects, each sorted, ordered by smallest object."""
        parent = list(range(self.n_objects))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for s, t in zip(self.source, self.target):
            a, b = find(s), find(t)
            if a != b:
                parent[max(a, b)] = min(a, b)
        classes = defaultdict(list)
        for x in range(self.n_objects):
            classes[find(x)].append(x)
        return tuple(sorted(tuple(c) for c in classes.values()))

    def component_of(self, x: int) -> tuple[int, ...]:
        return next(c for c in self.components if x in c)

    def validate(self) -> None:
        """Exhaustively check the category axioms and invertibility."""
        n = self.n_morphisms
        if not (len(self.target) == len(self.inverses) == n and len(self.identities) == self.n_objects):
            raise GroupoidError("inconsistent groupoid array lengths")
        for x, e in enumerate(self.identities):
            if self.source[e] != x or self.target[e] != x:
                raise GroupoidError(f"identity of {x} is not an endomorphism of {x}")
        expected = {(g, f) for f in range(n) for g in range(n) if self.source[g] == self.target[f]}
        if set(self.composition) != expected:
            raise GroupoidError("composition is not defined on exactly the composable pairs")
        for (g, f), h in self.composition.items():
            if self.source[h] != self.source[f] or self.target[h] != self.target[g]:
                raise GroupoidError(f"composite {g} o {f} has wrong endpoints")
        for f in range(n):
            if self.compose(f, self.identities[self.source[f]]) != f:
                raise GroupoidError(f"right identity law fails at {f}")
            if self.compose(self.identities[self.target[f]], f) != f:
                raise GroupoidError(f"left identity law fails at {f}")
            fi = self.inverses[f]
            if self.compose(fi, f) != self.identities[self.source[f]] or \
                    self.compose(f, fi) != self.identities[self.target[f]]:
                raise GroupoidError(f"inverse law fails at {f}")
        out_of = defaultdict(list)
        for m in range(n):
            out_of[self.source[m]].append(m)
        for f in range(n):
            for g in out_of[self.target[f]]:
                gf = self.compose(g, f)
                for h in out_of[self.target[g]]:
                    if self.compose(h, gf) != self.compose(self.compose(h, g), f):
                        raise GroupoidError(f"associativity fails at ({h},{g},{f})")


def _check_action(H: FiniteGroup, n: int, act: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    act = tuple(tuple(int(x) for x in p) for p in act)
    if len(act) != H.order:
        raise GroupoidError(f"action needs one permutation per group element ({H.order}), got {len(act)}")
    for h, p in enumerate(act):
        if sorted(p) != list(range(n)):
            raise GroupoidError(f"action of element {h} is not a permutation of {n} points")
    if act[H.identity] != tuple(range(n)):
        raise GroupoidError("identity element does not act trivially")
    for a in H.elements():
        for b in H.elements():
            ab = act[H.mul(a, b)]
            if any(ab[u] != act[a][act[b][u]] for u in range(n)):
                raise GroupoidError(f"action is not compatible with the group law at ({a},{b})")
    return act


def action_groupoid(H: FiniteGroup, U: int | Sequence, act: Sequence[Sequence[int]] | None = None) -> FiniteGroupoid:
    """[U/H]: objects U, morphisms (u, h): u -> h.u with index u*|H| + h.

    ``act[h][u]`` is the image of u under h; ``None`` means the trivial action.
    """
    n = U if isinstance(U, int) else len(U)
    if act is None:
        act = [tuple(range(n))] * H.order
    act = _check_action(H, n, act)
    k = H.order
    source = tuple(u for u in range(n) for _ in range(k))
    target = tuple(act[h][u] for u in range(n) for h in range(k))
    identities = tuple(u * k + H.identity for u in range(n))
    inverses = tuple(act[h][u] * k + H.inv(h) for u in range(n) for h in range(k))
    composition = {}
    for u in range(n):
        for h in range(k):
            v = act[h][u]
            row = H.table
            for h2 in range(k):
                composition[(v * k + h2, u * k + h)] = u * k + row[h2][h]
    return FiniteGroupoid(n, source, target, identities, inverses, composition)


def classifying_groupoid(H: FiniteGroup) -> FiniteGroupoid:
    """BH: one object with automorphism group H."""
    return action_groupoid(H, 1)


def discrete_groupoid(n: int) -> FiniteGroupoid:
    return action_groupoid(abelian(()), n)


def product_groupoid(A: FiniteGroupoid, B: FiniteGroupoid) -> FiniteGroupoid:
    """A x B with object (a, b) at a*|B| + b and morphism (f, g) at f*|mor B| + g."""
    nb, mb = B.n_objects, B.n_morphisms
    source = tuple(A.source[f] * nb + B.source[g] for f in range(A.n_morphisms) for g in range(mb))
    target = tuple(A.target[f] * nb + B.target[g] for f in range(A.n_morphisms) for g in range(mb))
    identities = tuple(A.identities[a] * mb + B.identities[b] for a in range(A.n_objects) for b in range(nb))
    inverses = tuple(A.inverses[f] * mb + B.inverses[g] for f in range(A.n_morphisms) for g in range(mb))
    composition = {
        (f2 * mb + g2, f1 * mb + g1): fa * mb + gb
        for (f2, f1), fa in A.composition.items()
        for (g2, g1), gb in B.composition.items()
    }
    return FiniteGroupoid(A.n_objects * nb, source, target, identities, inverses, composition)


# ---------------------------------------------------------------- invariants


@dataclass(frozen=True)
class InertiaClass:
    orbit: tuple[int, ...]
    group: FiniteGroup

    @property
    def label(self) -> str:
        return label(self.group)


def inertia_orders(gpd: FiniteGroupoid) -> list[InertiaClass]:
    """One entry per isomorphism class with the automorphism group of its smallest object."""
    return [InertiaClass(c, gpd.automorphism_group(c[0])[0]) for c in gpd.components]


def coarse_space(gpd: FiniteGroupoid) -> tuple[tuple[int, ...], ...]:
    return gpd.components


def equivalent(g1: FiniteGroupoid, g2: FiniteGroupoid) -> bool:
    """Components biject with isomorphic automorphism groups."""
    a = [gpd_class.group for gpd_class in inertia_orders(g1)]
    b = [gpd_class.group for gpd_class in inertia_orders(g2)]
    if len(a) != len(b):
        return False
    unmatched = list(b)
    for G in a:
        hit = next((i for i, H in enumerate(unmatched)
                    if H.order == G.order and find_isomorphism(G, H) is not None), None)
        if hit is None:
            return False
        unmatched.pop(hit)
    return True


# ---------------------------------------------------------------- gerbes


@dataclass(frozen=True)
class CentralAssignment:
    """Per-object subgroups H_x of Aut(x), optionally with a band and identifications.

    ``identifications[x][b]`` is the morphism in H_x matching band element b.
    """

    subgroups: tuple[frozenset[int], ...]
    band: FiniteGroup | None = None
    identifications: tuple[tuple[int, ...], ...] | None = None


def assignment_from_group(gpd: FiniteGroupoid, H: FiniteGroup, K: Sequence[int],
                          band: FiniteGroup | None = None, band_map: Sequence[int] | None = None) -> CentralAssignment:
    """Assignment on an action groupoid [U/H] given by elements K of H acting trivially.

    ``band_map[b]`` is the element of H matching band element b; defaults to
    K itself as a standalone group.
    """
    k = H.order
    if band is None:
        band, inc = Subgroup(H, tuple(K)).as_group()
        band_map = inc.images
    subgroups = tuple(frozenset(u * k + h for h in K) for u in range(gpd.n_objects))
    idents = tuple(tuple(u * k + band_map[b] for b in band.elements()) for u in range(gpd.n_objects))
    return CentralAssignment(subgroups, band, idents)


@dataclass(frozen=True)
class GerbeWitness:
    """A functor with band data: ``identifications[x][b]`` lies in Aut(x) of the source."""

    source: FiniteGroupoid
    target: FiniteGroupoid
    object_map: tuple[int, ...]
    morphism_map: tuple[int, ...]
    band: FiniteGroup
    identifications: tuple[tuple[int, ...], ...]


def _check_assignment(gpd: FiniteGroupoid, H: CentralAssignment) -> None:
    if len(H.subgroups) != gpd.n_objects:
        raise GroupoidError("assignment needs one subgroup per object")
    for x, Hx in enumerate(H.subgroups):
        aut = set(gpd.automorphisms(x))
        if not Hx <= aut:
            raise GroupoidError(f"subgroup at object {x} is not made of automorphisms of {x}")
        if gpd.identities[x] not in Hx or any(gpd.compose(a, gpd.inverses[b]) not in Hx for a in Hx for b in Hx):
            raise GroupoidError(f"subgroup at object {x} is not closed")
        if any(gpd.compose(a, h) != gpd.compose(h, a) for a in aut for h in Hx):
            raise GroupoidError(f"subgroup at object {x} is not central")
    for f in range(gpd.n_morphisms):
        x, y = gpd.source[f], gpd.target[f]
        if {gpd.conjugate(f, h) for h in H.subgroups[x]} != H.subgroups[y]:
            raise GroupoidError(f"assignment is not stable under conjugation by morphism {f}")


def _derive_band(gpd: FiniteGroupoid, H: CentralAssignment):
    band = None
    idents: list[tuple[int, ...] | None] = [None] * gpd.n_objects
    for comp in gpd.components:
        x0 = comp[0]
        sub = sorted(H.subgroups[x0])
        index = {m: i for i, m in enumerate(sub)}
        table = tuple(tuple(index[gpd.compose(a, b)] for b in sub) for a in sub)
        Hx0 = FiniteGroup(table, index[gpd.identities[x0]])
        if band is None:
            band, base = Hx0, tuple(sub)
        else:
            iso = find_isomorphism(band, Hx0)
            if iso is None:
                raise GroupoidError("central subgroups on different components are not isomorphic")
            base = tuple(sub[iso(b)] for b in band.elements())
        for x in comp:
            f = gpd.hom(x0, x)[0]
            idents[x] = tuple(gpd.conjugate(f, m) for m in base)
    if band is None:
        band = abelian(())
    return band, tuple(idents)


def rigidify(gpd: FiniteGroupoid, H: CentralAssignment) -> tuple[FiniteGroupoid, GerbeWitness]:
    """Divide each Mor(x, y) by H_x; return the quotient and the quotient functor with its band."""
    _check_assignment(gpd, H)
    cls = [-1] * gpd.n_morphisms
    reps: list[int] = []
    for f in range(gpd.n_morphisms):
        if cls[f] < 0:
            for h in H.subgroups[gpd.source[f]]:
                cls[gpd.compose(f, h)] = len(reps)
            reps.append(f)
    source = tuple(gpd.source[f] for f in reps)
    target = tuple(gpd.target[f] for f in reps)
    identities = tuple(cls[e] for e in gpd.identities)
    inverses = tuple(cls[gpd.inverses[f]] for f in reps)
    out_of = defaultdict(list)
    for c, f in enumerate(reps):
        out_of[gpd.source[f]].append(c)
    composition = {}
    for c1, f in enumerate(reps):
        for c2 in out_of[gpd.target[f]]:
            composition[(c2, c1)] = cls[gpd.compose(reps[c2], f)]
    quotient_gpd = FiniteGroupoid(gpd.n_objects, source, target, identities, inverses, composition)

    if H.band is not None and H.identifications is not None:
        band, idents = H.band, H.identifications
    else:
        band, idents = _derive_band(gpd, H)
    witness = GerbeWitness(gpd, quotient_gpd, tuple(range(gpd.n_objects)), tuple(cls), band, idents)
    return quotient_gpd, witness


def induced_functor(src: FiniteGroupoid, H: FiniteGroup, tgt: FiniteGroupoid, K: FiniteGroup,
                    phi: GroupHom) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Object and morphism maps [U/H] -> [U/K] induced by phi: H -> K (same U)."""
    if src.n_objects != tgt.n_objects:
        raise GroupoidError("induced functor needs the same object set")
    h, k = H.order, K.order
    mor = tuple(u * k + phi(g) for u in range(src.n_objects) for g in range(h))
    for f, m in enumerate(mor):
        if src.target[f] != tgt.target[m]:
            raise GroupoidError("group hom is not compatible with the two actions")
    return tuple(range(src.n_objects)), mor


def compose_witness(first: GerbeWitness, second_map: GerbeWitness, band: FiniteGroup,
                    identifications) -> GerbeWitness:
    """second o first as a functor, with caller-supplied band data for the composite."""
    if first.target is not second_map.source:
        raise GroupoidError("functors are not composable")
    obj = tuple(second_map.object_map[x] for x in first.object_map)
    mor = tuple(second_map.morphism_map[m] for m in first.morphism_map)
    return GerbeWitness(first.source, second_map.target, obj, mor, band, identifications)


def is_functor(w: GerbeWitness) -> bool:
    S, T, F, Fo = w.source, w.target, w.morphism_map, w.object_map
    if len(Fo) != S.n_objects or len(F) != S.n_morphisms:
        return False
    for f in range(S.n_morphisms):
        if T.source[F[f]] != Fo[S.source[f]] or T.target[F[f]] != Fo[S.target[f]]:
            return False
    if any(F[S.identities[x]] != T.identities[Fo[x]] for x in range(S.n_objects)):
        return False
    return all(F[h] == T.compose(F[g], F[f]) for (g, f), h in S.composition.items())


def is_banded_gerbe(w: GerbeWitness) -> bool:
    """Functor, essentially surjective, full, kernels identified with the band, compatible with conjugation."""
    S, T = w.source, w.target
    if not is_functor(w):
        return False
    hit = {T.component_of(y) for y in w.object_map}
    if set(T.components) != hit:
        return False
    for x in range(S.n_objects):
        for y in range(S.n_objects):
            images = {w.morphism_map[f] for f in S.hom(x, y)}
            if images != set(T.hom(w.object_map[x], w.object_map[y])):
                return False
    B = w.band
    if len(w.identifications) != S.n_objects:
        return False
    for x in range(S.n_objects):
        psi = w.identifications[x]
        if len(psi) != B.order:
            return False
        e = T.identities[w.object_map[x]]
        kernel = {a for a in S.automorphisms(x) if w.morphism_map[a] == e}
        if set(psi) != kernel or len(set(psi)) != B.order:
            return False
        if any(S.source[m] != x or S.target[m] != x for m in psi):
            return False
        if any(psi[B.mul(a, b)] != S.compose(psi[a], psi[b]) for a in B.elements() for b in B.elements()):
            return False
    for f in range(S.n_morphisms):
        px, py = w.identifications[S.source[f]], w.identifications[S.target[f]]
        if any(S.conjugate(f, px[b]) != py[b] for b in B.elements()):
            return False
    return True


# ---------------------------------------------------------------- contracted products


@dataclass(frozen=True)
class CentralExtension:
    """1 -> mu -> E -> Q -> 1 with mu central."""

    E: FiniteGroup
    incl: GroupHom
    proj: GroupHom

    @property
    def mu(self) -> FiniteGroup:
        return self.incl.source

    @property
    def Q(self) -> FiniteGroup:
        return self.proj.target

    def validate(self) -> None:
        if self.incl.target != self.E or self.proj.source != self.E:
            raise GroupoidError("extension maps do not match E")
        if not (self.incl.is_homomorphism() and self.proj.is_homomorphism()):
            raise GroupoidError("extension maps are not homomorphisms")
        if not self.incl.is_injective() or not self.proj.is_surjective():
            raise GroupoidError("extension sequence is not exact at the ends")
        if set(self.incl.images) != set(self.proj.kernel().elements):
            raise GroupoidError("extension sequence is not exact in the middle")
        if not Subgroup(self.E, self.incl.images).is_central():
            raise GroupoidError("mu is not central in E")


def trivial_extension(Q: FiniteGroup, mu: FiniteGroup) -> CentralExtension:
    E = direct_product(mu, Q)
    q = Q.order
    incl = GroupHom(mu, E, tuple(m * q + Q.identity for m in mu.elements()))
    proj = GroupHom(E, Q, tuple(x % q for x in E.elements()))
    return CentralExtension(E, incl, proj)


def contracted_product_over_point(E1: CentralExtension, E2: CentralExtension) -> CentralExtension:
    """(E1 x_Q E2) / {(m, m^-1)}: the Baer sum of two central extensions of Q by mu."""
    if E1.Q != E2.Q:
        raise GroupoidError("extensions have different quotients Q")
    if E1.mu != E2.mu:
        raise GroupoidError("extensions have different bands mu")
    E1.validate()
    E2.validate()
    A, B = E1.E, E2.E
    pairs = [(a, b) for a in A.elements() for b in B.elements() if E1.proj(a) == E2.proj(b)]
    mu = E1.mu
    anti = [(E1.incl(m), B.inv(E2.incl(m))) for m in mu.elements()]
    cls: dict[tuple[int, int], int] = {}
    reps = []
    for a, b in pairs:
        if (a, b) not in cls:
            for x, y in anti:
                cls[(A.mul(a, x), B.mul(b, y))] = len(reps)
            reps.append((a, b))
    table = tuple(tuple(cls[(A.mul(a1, a2), B.mul(b1, b2))] for a2, b2 in reps) for a1, b1 in reps)
    E = FiniteGroup(table, cls[(A.identity, B.identity)])
    incl = GroupHom(mu, E, tuple(cls[(E1.incl(m), B.identity)] for m in mu.elements()))
    proj = GroupHom(E, E1.Q, tuple(E1.proj(a) for a, _ in reps))
    out = CentralExtension(E, incl, proj)
    out.validate()
    return out


def extensions_isomorphic(E1: CentralExtension, E2: CentralExtension) -> bool:
    """Isomorphic as extensions: some iso E1 -> E2 commutes with incl and proj.

    Searches over sections of E2 above a fixed section of E1, so the cost is
    |mu|^|Q|.
    """
    if E1.Q != E2.Q or E1.mu != E2.mu or E1.E.order != E2.E.order:
        return False
    if find_isomorphism(E1.E, E2.E) is None:
        return False
    A, B = E1.E, E2.E
    # an extension iso is fixed on incl(mu) and must respect fibres of proj;
    # pick a section s: Q -> E1 and try images of s(q) in the matching fibre of E2
    Q = E1.Q
    section = [next(a for a in A.elements() if E1.proj(a) == q) for q in Q.elements()]
    fibres = [[b for b in B.elements() if E2.proj(b) == q] for q in Q.elements()]

    def build(choice):
        phi = {}
        for q, s in enumerate(section):
            for m in E1.mu.elements():
                phi[A.mul(s, E1.incl(m))] = B.mul(choice[q], E2.incl(m))
        return phi

    for choice in itertools.product(*fibres):
        phi = build(choice)
        if len(phi) == A.order and all(phi[A.mul(a, b)] == B.mul(phi[a], phi[b])
                                       for a in A.elements() for b in A.elements()):
            return True
    return False
