"""Seeded generation and loading of quotient-case corpora."""

from __future__ import annotations

import json
import random
from importlib import resources
from pathlib import Path
from typing import Iterable

from .extensions import ExtensionError, iota_from_generators
from .groups import FiniteGroup, Subgroup, generated_subgroup, named_group, subgroups

DEFAULT_SEED = 0
MAX_GAMMA = 64
MAX_U = 6

# (group name, r, images of the standard generators of mu_r)
# D4 is indexed b*4 + a for b^a-rotations, so index 2 is the central rotation.
# Q8 lists 1, -1, i, -i, ..., so index 1 is -1.
TEMPLATES: tuple[tuple[str, tuple[int, ...], tuple[int, ...]], ...] = (
    ("C2", (1,), (0,)),
    ("C2", (2,), (1,)),
    ("C4", (2,), (2,)),
    ("C4", (4,), (1,)),
    ("C6", (2,), (3,)),
    ("C6", (3,), (2,)),
    ("C2xC2", (2,), (1,)),
    ("C2xC2", (2, 2), (2, 1)),
    ("C2xC4", (2,), (2,)),
    ("C2xC4", (4,), (1,)),
    ("C2xC4", (2, 2), (4, 2)),
    ("C2xC4", (2, 4), (4, 1)),
    ("Q8", (2,), (1,)),
    ("D4", (2,), (2,)),
)


def _coset_action(G: FiniteGroup, K: Subgroup) -> list[list[int]]:
    """Left multiplication on G/K, cosets numbered by their smallest element."""
    cosets: list[frozenset[int]] = []
    seen: set[int] = set()
    for g in G.elements():
        if g not in seen:
            c = frozenset(G.mul(g, k) for k in K.elements)
            seen |= c
            cosets.append(c)
    where = {x: i for i, c in enumerate(cosets) for x in c}
    return [[where[G.mul(g, min(c))] for c in cosets] for g in G.elements()]


def random_action(G: FiniteGroup, kernel_part: Subgroup, rng: random.Random,
                  max_points: int = MAX_U) -> tuple[int, list[list[int]]]:
    """A G-set of at most ``max_points`` points on which ``kernel_part`` acts trivially.

    Built as a disjoint union of coset spaces G/K with K containing
    ``kernel_part`` (which is central, hence contained in every conjugate of K),
    plus fixed points, then shuffled by a random relabelling.
    """
    stabilizers = [K for K in subgroups(G) if set(kernel_part.elements) <= set(K.elements)]
    stabilizers.sort(key=lambda K: (-K.order, K.elements))
    proper = [K for K in stabilizers if G.order // K.order <= max_points and K.order < G.order]
    orbits: list[list[list[int]]] = []
    size = 0
    if proper:
        K = rng.choice(proper)
        orbits.append(_coset_action(G, K))
        size += G.order // K.order
    while size < max_points and rng.random() < 0.6:
        fits = [K for K in stabilizers if G.order // K.order <= max_points - size]
        K = rng.choice(fits)
        orbits.append(_coset_action(G, K))
        size += G.order // K.order
    if size == 0:
        orbits.append([[0] for _ in G.elements()])
        size = 1
    action = [[] for _ in G.elements()]
    offset = 0
    for orb in orbits:
        for g in G.elements():
            action[g].extend(offset + x for x in orb[g])
        offset += len(orb[0])
    relabel = list(range(size))
    rng.shuffle(relabel)
    inverse = {relabel[i]: i for i in range(size)}
    shuffled = [[relabel[p[inverse[u]]] for u in range(size)] for p in action]
    return size, shuffled


def generate_corpus(seed: int = DEFAULT_SEED, Ms: Iterable[int] = (2, 3, 4)) -> list[dict]:
    rng = random.Random(seed)
    cases = []
    for name, r, gens in TEMPLATES:
        G = named_group(name)
        iota = iota_from_generators(G, r, gens)
        mu_image = generated_subgroup(G, iota.images)
        n = len(r)
        for M in Ms:
            if G.order * M ** n > MAX_GAMMA:
                continue
            size, action = random_action(G, mu_image, rng)
            r_tag = "x".join(map(str, r))
            cases.append({
                "name": f"{name}-r{r_tag}-M{M}",
                "group": name,
                "r": list(r),
                "iota": list(iota.images),
                "M": M,
                "U_size": size,
                "action": action,
            })
    return cases


def negative_control() -> dict:
    """D4 with iota landing on a reflection: a non-central image, so a precondition fails."""
    return {
        "name": "D4-noncentral-iota",
        "group": "D4",
        "r": [2],
        "iota": [0, 4],
        "M": 2,
        "U_size": 1,
        "action": [[0]] * 8,
    }


def load_corpus(path: str | Path) -> list[dict]:
    """Read a corpus file: a JSON list of cases or an object with a ``cases`` list."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ExtensionError(f"corpus {str(path)!r} is unreadable: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ExtensionError(f"corpus {str(path)!r} is not valid JSON: {exc.msg} at line {exc.lineno}") from None
    if isinstance(data, dict):
        data = data.get("cases")
    if not isinstance(data, list) or not all(isinstance(c, dict) for c in data):
        raise ExtensionError("field 'cases': corpus must be a list of case objects")
    return data


def bundled_corpus() -> list[dict]:
    with resources.files("fixedloci").joinpath("data/default_corpus.json").open() as fh:
        return json.load(fh)["cases"]


def dump_corpus(cases: list[dict], seed: int | None = None) -> str:
    """One case per line, so corpus diffs stay readable."""
    rows = ",\n".join("  " + json.dumps(c, sort_keys=True) for c in cases)
    head = "" if seed is None else f'"seed": {seed}, '
    return "{" + head + '"cases": [\n' + rows + ("\n" if rows else "") + "]}\n"
