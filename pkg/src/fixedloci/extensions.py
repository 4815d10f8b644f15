"""Finite models of extensions 1 -> G -> Gamma -> Gm^n -> 1.

The torus Gm^n is replaced by (Z/M)^n and the identity component T by the
distinguished subgroup T_M = prod Z/(r_i M), into which mu_r embeds as the
M-multiples.  Gamma_M is the pushout (G x T_M) / antidiagonal mu_r, so every
structural claim about Gamma (splitting mod mu_r, centrality of T, exactness
of the pushout sequence) becomes an exhaustive check on small tables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

from .groups import (
    FiniteGroup,
    GroupError,
    GroupHom,
    Subgroup,
    abelian,
    abelian_coords,
    abelian_index,
    center,
    direct_product,
    find_isomorphism,
    group_from_json,
    invariant_factors_of_abelian,
    label,
    quotient,
)
from .lattice import DivisorChain


class ExtensionError(ValueError):
    pass


@dataclass(frozen=True)
class ExtensionSpec:
    """Pushout data (G, r, iota: mu_r -> Z(G), M)."""

    G: FiniteGroup
    r: DivisorChain
    iota: GroupHom
    M: int

    @property
    def n(self) -> int:
        return len(self.r)

    @cached_property
    def mu(self) -> FiniteGroup:
        return abelian(self.r.moduli)

    def validate(self) -> None:
        if not isinstance(self.r, DivisorChain) or any(m < 1 for m in self.r):
            raise ExtensionError("field 'r': must be a divisor chain of positive integers")
        if self.M < 2:
            raise ExtensionError(f"field 'M': torus approximation modulus must be >= 2, got {self.M}")
        if self.iota.target != self.G:
            raise ExtensionError("field 'iota': must map into G")
        if self.iota.source != self.mu:
            raise ExtensionError(f"field 'iota': must be defined on mu_r = {self.mu.name}")
        if not self.iota.is_homomorphism():
            raise ExtensionError("field 'iota': not a homomorphism")
        if not self.iota.is_injective():
            raise ExtensionError("field 'iota': not injective")
        Z = center(self.G)
        if any(x not in Z for x in self.iota.images):
            raise ExtensionError("field 'iota': image is not central in G")

    @classmethod
    def from_json(cls, data: dict) -> ExtensionSpec:
        for key in ("group", "r", "M"):
            if key not in data:
                raise ExtensionError(f"extension spec is missing field {key!r}")
        try:
            G = group_from_json(data["group"])
        except GroupError as exc:
            raise ExtensionError(f"field 'group': {exc}") from None
        try:
            r = DivisorChain(tuple(int(x) for x in data["r"]))
        except (ValueError, TypeError) as exc:
            raise ExtensionError(f"field 'r': {exc}") from None
        if not r.moduli or any(m < 1 for m in r):
            raise ExtensionError("field 'r': need at least one positive modulus")
        mu = abelian(r.moduli)
        images = data.get("iota")
        if images is None:
            if mu.order != 1:
                raise ExtensionError("field 'iota' is required when mu_r is nontrivial")
            images = [G.identity]
        try:
            iota = GroupHom(mu, G, tuple(int(x) for x in images))
        except (GroupError, ValueError, TypeError) as exc:
            raise ExtensionError(f"field 'iota': {exc}") from None
        try:
            M = int(data["M"])
        except (ValueError, TypeError):
            raise ExtensionError("field 'M' must be an integer") from None
        return cls(G, r, iota, M)


def iota_from_generators(G: FiniteGroup, r: Sequence[int], gen_images: Sequence[int]) -> GroupHom:
    """Hom prod Z/r_i -> G sending the i-th standard generator to ``gen_images[i]``."""
    r = tuple(r)
    if len(gen_images) != len(r):
        raise ExtensionError("need one generator image per modulus")
    mu = abelian(r)
    images = []
    for a in mu.elements():
        x = G.identity
        for g, k in zip(gen_images, abelian_coords(r, a)):
            x = G.mul(x, G.power(g, k))
        images.append(x)
    return GroupHom(mu, G, tuple(images))


@dataclass(frozen=True)
class ExtensionModel:
    spec: ExtensionSpec
    Gamma: FiniteGroup
    T: FiniteGroup
    torus: FiniteGroup
    embed_G: GroupHom
    embed_T: GroupHom
    proj: GroupHom
    # class of (g, t) stored at index g * |T| + t
    cover_images: tuple[int, ...] = field(repr=False)

    @property
    def T_moduli(self) -> tuple[int, ...]:
        return tuple(m * self.spec.M for m in self.spec.r)

    def mu_in_T(self, a: int) -> int:
        """Index in T_M of the M-multiple representing a in mu_r."""
        coords = abelian_coords(self.spec.r.moduli, a)
        return abelian_index(self.T_moduli, [c * self.spec.M for c in coords])

    def antidiagonal(self) -> set[tuple[int, int]]:
        """{(iota(a), -a) : a in mu_r} inside G x T_M, as (g, t) pairs."""
        spec, T = self.spec, self.T
        return {(spec.iota(a), T.inv(self.mu_in_T(a))) for a in spec.mu.elements()}

    def cover(self, g: int, t: int) -> int:
        return self.cover_images[g * self.T.order + t]

    def cover_hom(self) -> GroupHom:
        """G x T_M -> Gamma_M on the explicit product group (builds its table)."""
        return GroupHom(direct_product(self.spec.G, self.T), self.Gamma, self.cover_images)

    @cached_property
    def T_image(self) -> Subgroup:
        return self.embed_T.image()

    @cached_property
    def G_image(self) -> Subgroup:
        return self.embed_G.image()

    @cached_property
    def mu_image(self) -> Subgroup:
        """The finite-model T cap G, i.e. image(embed_T) cap kernel(proj)."""
        return self.T_image.intersection(self.proj.kernel())

    @cached_property
    def mu_in_G(self) -> Subgroup:
        mu = self.mu_image
        return Subgroup(self.spec.G, tuple(g for g in self.spec.G.elements() if self.embed_G(g) in mu))

    @cached_property
    def Gbar(self) -> tuple[FiniteGroup, GroupHom]:
        return quotient(self.spec.G, self.mu_in_G)


def build_extension(spec: ExtensionSpec) -> ExtensionModel:
    """Construct Gamma_M = (G x T_M) / {(iota(a), -a)}."""
    spec.validate()
    G, M = spec.G, spec.M
    T_moduli = tuple(m * M for m in spec.r)
    T = abelian(T_moduli)
    nT = T.order
    mu_T = [abelian_index(T_moduli, [c * M for c in abelian_coords(spec.r.moduli, a)])
            for a in spec.mu.elements()]
    anti = [(spec.iota(a), T.inv(mu_T[a])) for a in spec.mu.elements()]

    cls = [-1] * (G.order * nT)
    reps: list[tuple[int, int]] = []
    for g in G.elements():
        for t in T.elements():
            if cls[g * nT + t] < 0:
                for ga, ta in anti:
                    cls[G.mul(g, ga) * nT + T.mul(t, ta)] = len(reps)
                reps.append((g, t))
    table = tuple(
        tuple(cls[G.mul(g1, g2) * nT + T.mul(t1, t2)] for g2, t2 in reps) for g1, t1 in reps
    )
    Gamma = FiniteGroup(table, cls[G.identity * nT + T.identity])
    torus = abelian((M,) * spec.n)

    embed_G = GroupHom(G, Gamma, tuple(cls[g * nT + T.identity] for g in G.elements()))
    embed_T = GroupHom(T, Gamma, tuple(cls[G.identity * nT + t] for t in T.elements()))
    proj = GroupHom(
        Gamma,
        torus,
        tuple(abelian_index((M,) * spec.n, abelian_coords(T_moduli, t)) for _, t in reps),
    )
    return ExtensionModel(spec, Gamma, T, torus, embed_G, embed_T, proj, tuple(cls))


@dataclass(frozen=True)
class ExtensionReport:
    r: DivisorChain
    Gbar: FiniteGroup
    split_ok: bool
    central_ok: bool
    pushout_ok: bool
    details: str

    @property
    def passed(self) -> bool:
        return self.split_ok and self.central_ok and self.pushout_ok

    def to_json(self) -> dict:
        return {
            "r": list(self.r.canonical()) or [1],
            "Gbar": label(self.Gbar),
            "Gbar_order": self.Gbar.order,
            "split_ok": self.split_ok,
            "central_ok": self.central_ok,
            "pushout_ok": self.pushout_ok,
            "details": self.details,
        }


def recovered_r(model: ExtensionModel) -> DivisorChain:
    """Invariant factors of image(embed_T) cap kernel(proj)."""
    mu, _ = model.mu_image.as_group()
    return invariant_factors_of_abelian(mu)


def verify_split(model: ExtensionModel) -> bool:
    """Gamma_M / mu_r is isomorphic to Gbar x (Z/M)^n."""
    Gamma_mod_mu, _ = quotient(model.Gamma, model.mu_image)
    Gbar, _ = model.Gbar
    return find_isomorphism(Gamma_mod_mu, direct_product(Gbar, model.torus)) is not None


def verify_central(model: ExtensionModel) -> bool:
    """T_M lands in the center of Gamma_M and Gamma_M / T_M is isomorphic to Gbar."""
    Z = center(model.Gamma)
    if any(x not in Z for x in model.T_image):
        return False
    Gamma_mod_T, _ = quotient(model.Gamma, model.T_image)
    return find_isomorphism(Gamma_mod_T, model.Gbar[0]) is not None


def verify_pushout_exactness(model: ExtensionModel) -> bool:
    """G x T_M -> Gamma_M, (g, t) -> g t, is a surjective hom with kernel the antidiagonal mu_r."""
    G, T, Gamma = model.spec.G, model.T, model.Gamma
    eG, eT = model.embed_G, model.embed_T
    if not (eG.is_homomorphism() and eT.is_homomorphism()):
        return False
    # the product map is a hom iff the two images commute elementwise
    if any(Gamma.mul(eG(g), eT(t)) != Gamma.mul(eT(t), eG(g)) for g in G.elements() for t in T.elements()):
        return False
    image, kernel = set(), set()
    for g in G.elements():
        for t in T.elements():
            x = Gamma.mul(eG(g), eT(t))
            image.add(x)
            if x == Gamma.identity:
                kernel.add((g, t))
    return len(image) == Gamma.order and kernel == model.antidiagonal()


def analyze_extension(model: ExtensionModel) -> ExtensionReport:
    r = recovered_r(model)
    Gbar, _ = model.Gbar
    split_ok = verify_split(model)
    central_ok = verify_central(model)
    pushout_ok = verify_pushout_exactness(model)
    spec = model.spec
    details = (
        f"G={spec.G.name or label(spec.G)} r_in={list(spec.r.moduli)} M={spec.M}: "
        f"|Gamma_M|={model.Gamma.order}, Gamma_M={label(model.Gamma) if model.Gamma.order <= 64 else '?'}, "
        f"T cap G={label(model.mu_image.as_group()[0])}, Gbar={label(Gbar)}"
    )
    return ExtensionReport(r, Gbar, split_ok, central_ok, pushout_ok, details)
