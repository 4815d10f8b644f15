"""Decorated graphs indexing components of the torus-fixed locus of stable maps to P^N.

A graph has vertices decorated by a fixed point label i(v) and a genus g(v),
edges decorated by a covering degree d_e (parallel edges allowed, no loops),
and numbered legs attached to vertices.  For weights lambda_0..lambda_N the
r-invariant of a component is lcm_e d_e / gcd(d_e, lambda_{e,1} - lambda_{e,2}).
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from math import factorial, gcd, lcm, prod
from typing import Iterator, Sequence

from .lattice import IntMatrix, coker_structure, smith_normal_form

DEFAULT_CAP = 2_000_000


class GraphError(ValueError):
    pass


class ResourceBoundExceeded(RuntimeError):
    pass


def enumeration_cap(cap: int | None = None) -> int:
    if cap is not None:
        return cap
    env = os.environ.get("FIXEDLOCI_CAP")
    if env:
        value = int(env)
        if value <= 0:
            raise GraphError("FIXEDLOCI_CAP must be positive")
        return value
    return DEFAULT_CAP


@dataclass(frozen=True)
class WeightVector:
    weights: tuple[int, ...]

    def __post_init__(self):
        w = tuple(int(x) for x in self.weights)
        if len(set(w)) != len(w):
            raise GraphError(f"weights must be pairwise distinct: {w}")
        object.__setattr__(self, "weights", w)

    @classmethod
    def parse(cls, text: str) -> WeightVector:
        try:
            return cls(tuple(int(x) for x in text.split(",")))
        except ValueError:
            raise GraphError(f"malformed weights {text!r}") from None

    def __getitem__(self, i: int) -> int:
        return self.weights[i]

    def __len__(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class DecoratedGraph:
    """``vertices[v] = (label, genus)``; ``edges`` are sorted ``(u, v, d)`` with u < v; ``legs[i]`` carries leg i+1."""

    vertices: tuple[tuple[int, int], ...]
    edges: tuple[tuple[int, int, int], ...]
    legs: tuple[int, ...] = ()

    def __post_init__(self):
        edges = []
        for u, v, d in self.edges:
            if u == v:
                raise GraphError("self-loops are not allowed")
            edges.append((min(u, v), max(u, v), int(d)))
        object.__setattr__(self, "edges", tuple(sorted(edges)))
        object.__setattr__(self, "vertices", tuple((int(a), int(b)) for a, b in self.vertices))
        object.__setattr__(self, "legs", tuple(int(x) for x in self.legs))

    @property
    def degree(self) -> int:
        return sum(d for _, _, d in self.edges)

    @property
    def betti(self) -> int:
        return len(self.edges) - len(self.vertices) + 1

    @property
    def genus(self) -> int:
        return sum(g for _, g in self.vertices) + self.betti

    def valence(self, v: int) -> int:
        return sum((a == v) + (b == v) for a, b, _ in self.edges)

    def leg_count(self, v: int) -> int:
        return sum(1 for x in self.legs if x == v)

    def is_connected(self) -> bool:
        n = len(self.vertices)
        seen, stack = {0}, [0]
        while stack:
            x = stack.pop()
            for a, b, _ in self.edges:
                for p, q in ((a, b), (b, a)):
                    if p == x and q not in seen:
                        seen.add(q)
                        stack.append(q)
        return len(seen) == n

    def validate(self, N: int | None = None) -> None:
        n = len(self.vertices)
        if n == 0:
            raise GraphError("graph has no vertices")
        if any(g < 0 for _, g in self.vertices):
            raise GraphError("vertex genera must be nonnegative")
        if N is not None and any(not 0 <= lab <= N for lab, _ in self.vertices):
            raise GraphError(f"vertex labels must lie in 0..{N}")
        for u, v, d in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError("edge endpoint out of range")
            if d < 1:
                raise GraphError("edge degrees must be positive")
            if self.vertices[u][0] == self.vertices[v][0]:
                raise GraphError("adjacent vertices must carry distinct labels")
        if any(not 0 <= x < n for x in self.legs):
            raise GraphError("leg attached to a missing vertex")
        if not self.is_connected():
            raise GraphError("graph is not connected")

    def to_json(self) -> dict:
        return {
            "vertices": [{"label": a, "genus": g} for a, g in self.vertices],
            "edges": [{"ends": [u, v], "degree": d} for u, v, d in self.edges],
            "legs": list(self.legs),
        }

    def describe(self) -> str:
        verts = " ".join(f"v{i}[{a};g{g}]" for i, (a, g) in enumerate(self.vertices))
        edges = " ".join(f"{u}-{v}:{d}" for u, v, d in self.edges)
        legs = " ".join(f"L{i + 1}@{v}" for i, v in enumerate(self.legs))
        return "; ".join(p for p in (verts, edges, legs) if p)


# ---------------------------------------------------------------- canonical form


def _vertex_keys(graph: DecoratedGraph) -> list[tuple]:
    keys = []
    for v, (lab, g) in enumerate(graph.vertices):
        degs = tuple(sorted(d for a, b, d in graph.edges if v in (a, b)))
        legs = tuple(i for i, x in enumerate(graph.legs) if x == v)
        keys.append((lab, g, degs, legs))
    return keys


def _block_orderings(keys: list[tuple]) -> Iterator[list[int]]:
    """Vertex orderings sorted by key, permuting freely inside blocks of equal keys."""
    order = sorted(range(len(keys)), key=lambda v: keys[v])
    blocks = [list(grp) for _, grp in itertools.groupby(order, key=lambda v: keys[v])]
    for choice in itertools.product(*(itertools.permutations(b) for b in blocks)):
        yield [v for block in choice for v in block]


def _relabel(graph: DecoratedGraph, order: Sequence[int]) -> tuple:
    pos = {v: i for i, v in enumerate(order)}
    verts = tuple(graph.vertices[v] for v in order)
    edges = tuple(sorted((min(pos[a], pos[b]), max(pos[a], pos[b]), d) for a, b, d in graph.edges))
    legs = tuple(pos[x] for x in graph.legs)
    return len(verts), len(edges), verts, edges, legs


def canonical_form(graph: DecoratedGraph) -> tuple:
    """Lexicographically least (#vertices, #edges, vertices, edges, legs) over key-sorted vertex orderings.

    Vertices are first sorted by (label, genus, incident degree multiset, legs);
    only orderings compatible with that sort are tried, so the form is an
    isomorphism invariant and deterministic.
    """
    return min(_relabel(graph, order) for order in _block_orderings(_vertex_keys(graph)))


def canonical_graph(graph: DecoratedGraph) -> DecoratedGraph:
    _, _, verts, edges, legs = canonical_form(graph)
    return DecoratedGraph(verts, edges, legs)


def _connected_multigraphs(V: int, E: int) -> Iterator[tuple[tuple[int, int], ...]]:
    pairs = list(itertools.combinations(range(V), 2))
    for multiset in itertools.combinations_with_replacement(pairs, E):
        seen, stack = {0}, [0]
        while stack:
            x = stack.pop()
            for a, b in multiset:
                for p, q in ((a, b), (b, a)):
                    if p == x and q not in seen:
                        seen.add(q)
                        stack.append(q)
        if len(seen) == V:
            yield multiset


def _compositions(total: int, parts: int, minimum: int) -> Iterator[tuple[int, ...]]:
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(minimum, total - minimum * (parts - 1) + 1):
        for rest in _compositions(total - first, parts - 1, minimum):
            yield (first,) + rest


def _proper_labelings(V: int, edges, N: int) -> Iterator[tuple[int, ...]]:
    neighbours = [set() for _ in range(V)]
    for a, b in edges:
        neighbours[a].add(b)
        neighbours[b].add(a)

    def extend(prefix):
        v = len(prefix)
        if v == V:
            yield tuple(prefix)
            return
        for lab in range(N + 1):
            if all(prefix[w] != lab for w in neighbours[v] if w < v):
                yield from extend(prefix + [lab])

    yield from extend([])


def enumerate_graphs(g: int, n: int, N: int, d: int, cap: int | None = None) -> list[DecoratedGraph]:
    """One canonical representative per isomorphism class, sorted by canonical form."""
    if g < 0 or n < 0 or N < 1 or d < 1:
        raise GraphError("need g, n >= 0, N >= 1 and d >= 1")
    cap = enumeration_cap(cap)
    found: dict[tuple, DecoratedGraph] = {}
    work = 0
    for V in range(2, d + 2):
        for E in range(V - 1, min(d, V - 1 + g) + 1):
            b1 = E - V + 1
            for shape in _connected_multigraphs(V, E):
                labelings = list(_proper_labelings(V, shape, N))
                if not labelings:
                    continue
                for degrees in _compositions(d, E, 1):
                    edges = tuple((a, b, k) for (a, b), k in zip(shape, degrees))
                    for genera in _compositions(g - b1, V, 0):
                        for labels in labelings:
                            verts = tuple(zip(labels, genera))
                            for legs in itertools.product(range(V), repeat=n):
                                work += 1
                                if work > cap:
                                    raise ResourceBoundExceeded(
                                        f"enumeration exceeded the cap of {cap} candidates"
                                    )
                                graph = DecoratedGraph(verts, edges, legs)
                                key = canonical_form(graph)
                                if key not in found:
                                    found[key] = DecoratedGraph(*key[2:])
    return [found[k] for k in sorted(found)]


# ---------------------------------------------------------------- automorphisms


def automorphism_count(graph: DecoratedGraph) -> int:
    """|Aut| of the decorated graph, counting permutations of parallel edges of equal degree."""
    keys = _vertex_keys(graph)
    target = sorted(graph.edges)
    vertex_autos = 0
    identity_order = sorted(range(len(keys)), key=lambda v: keys[v])
    for order in _block_orderings(keys):
        # sigma sends identity_order[i] to order[i]
        sigma = dict(zip(identity_order, order))
        moved = sorted((min(sigma[a], sigma[b]), max(sigma[a], sigma[b]), k) for a, b, k in graph.edges)
        if moved == target:
            vertex_autos += 1
    multiplicity = 1
    for _, grp in itertools.groupby(target):
        multiplicity *= factorial(len(list(grp)))
    return vertex_autos * multiplicity


def deck_order(graph: DecoratedGraph) -> int:
    return prod(d for _, _, d in graph.edges)


def component_group_order(graph: DecoratedGraph) -> int:
    """|A| for the split extension of Aut(graph) by prod Z/d_e."""
    return automorphism_count(graph) * deck_order(graph)


# ---------------------------------------------------------------- r-invariant


def edge_r(d: int, delta: int) -> int:
    if delta == 0:
        raise GraphError("weights not distinct: edge weight difference is 0")
    if d < 1:
        raise GraphError("edge degree must be positive")
    return d // gcd(d, abs(delta))


def edge_deltas(graph: DecoratedGraph, weights: WeightVector) -> list[tuple[int, int]]:
    out = []
    for u, v, d in graph.edges:
        lu, lv = graph.vertices[u][0], graph.vertices[v][0]
        if max(lu, lv) >= len(weights):
            raise GraphError(f"no weight for label {max(lu, lv)}")
        out.append((d, weights[lu] - weights[lv]))
    return out


def graph_r(graph: DecoratedGraph, weights: WeightVector) -> int:
    return lcm(*(edge_r(d, delta) for d, delta in edge_deltas(graph, weights)))


def edge_stabilizer(d: int, delta: int) -> tuple[int, int]:
    """(components of St = {s^d = t^delta}, degree of its identity component over the t-line).

    St has character lattice Z^2 / <(d, -delta)>: its torsion counts the
    components, and the image of the t-character in the free quotient gives
    the degree of St^0 -> Gm.
    """
    if delta == 0:
        raise GraphError("weights not distinct: edge weight difference is 0")
    if d < 1:
        raise GraphError("edge degree must be positive")
    relation = IntMatrix.from_rows([[d], [-delta]])
    characters = coker_structure(relation)
    components = characters.torsion.order()
    snf = smith_normal_form(relation)
    # U maps Z^2 onto Z/h + Z; the second coordinate is the free quotient
    degree = abs(snf.U[1, 1])
    return components, degree


def oracle_graph_r(graph: DecoratedGraph, weights: WeightVector, M: int) -> int:
    """Least k >= 1 such that every t in Z/M lifts along each edge: d_e s = k delta_e t (mod M).

    Brute force over t and s in the cyclic group of order M.
    """
    pairs = edge_deltas(graph, weights)
    multiples = [{(d * s) % M for s in range(M)} for d, _ in pairs]
    for k in range(1, M + 1):
        if all((k * delta * t) % M in reach for (d, delta), reach in zip(pairs, multiples) for t in range(M)):
            return k
    raise GraphError("no reparameterization exponent found up to M")


# ---------------------------------------------------------------- reports


@dataclass(frozen=True)
class FixedLocusReport:
    graph: DecoratedGraph
    r: int | None
    aut_order: int
    deck_order: int
    A_order: int
    moduli_factors: tuple[tuple[int, int], ...]
    unstable_vertices: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "graph": self.graph.to_json(),
            "r": self.r,
            "aut_order": self.aut_order,
            "deck_order": self.deck_order,
            "A_order": self.A_order,
            "moduli_factors": [list(f) for f in self.moduli_factors],
            "unstable_vertices": list(self.unstable_vertices),
        }


def component_descriptor(graph: DecoratedGraph, weights: WeightVector | None = None) -> FixedLocusReport:
    """Orders, r-invariant and the factors Mbar_{g(v), val(v)+legs(v)} of a fixed component."""
    factors, unstable = [], []
    for v, (_, g) in enumerate(graph.vertices):
        points = graph.valence(v) + graph.leg_count(v)
        if 2 * g - 2 + points > 0:
            factors.append((g, points))
        else:
            unstable.append(v)
    aut = automorphism_count(graph)
    deck = deck_order(graph)
    r = graph_r(graph, weights) if weights is not None else None
    return FixedLocusReport(graph, r, aut, deck, aut * deck, tuple(factors), tuple(unstable))
