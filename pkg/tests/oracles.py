"""Brute-force reference implementations, independent of the library code paths."""

from __future__ import annotations

import itertools
from collections import Counter, defaultdict
from math import gcd

import networkx as nx


def det(rows):
    """Leibniz expansion; fine for the tiny matrices used here."""
    n = len(rows)
    total = 0
    for perm in itertools.permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        prod = sign
        for i in range(n):
            prod *= rows[i][perm[i]]
        total += prod
    return total


def determinantal_factors(rows):
    """Invariant factors as ratios of gcds of k x k minors (trailing zeros for rank deficiency)."""
    m, n = len(rows), len(rows[0]) if rows else 0
    ds = [1]
    for k in range(1, min(m, n) + 1):
        g = 0
        for I in itertools.combinations(range(m), k):
            for J in itertools.combinations(range(n), k):
                g = gcd(g, det([[rows[i][j] for j in J] for i in I]))
        ds.append(g)
    out = []
    for k in range(1, len(ds)):
        out.append(0 if ds[k] == 0 else ds[k] // ds[k - 1])
    return tuple(out)


def element_order(x, moduli):
    o = 1
    for xi, m in zip(x, moduli):
        o = o * (m // gcd(m, xi)) // gcd(o, m // gcd(m, xi))
    return o


def _exact_log(x, p):
    k = 0
    while x % p == 0:
        x //= p
        k += 1
    assert x == 1
    return k


def chain_from_census(orders):
    """Invariant factors of a finite abelian group from its multiset of element orders.

    With c_k = #{x : p^k x = 0}, the number of cyclic factors whose p-part is at
    least p^k equals log_p(c_k / c_(k-1)).
    """
    n = len(orders)
    primes = [p for p in range(2, n + 1) if n % p == 0 and all(p % q for q in range(2, p))]
    at_least = {}
    for p in primes:
        e = _exact_log(n // _prime_free(n, p), p)
        c = [sum(1 for o in orders if (p ** k) % o == 0) for k in range(e + 1)]
        at_least[p] = [_exact_log(c[k] // c[k - 1], p) for k in range(1, e + 1)]
    length = max((v[0] for v in at_least.values() if v), default=0)
    chain = []
    for j in range(length):  # j = 0 is the largest factor
        f = 1
        for p, v in at_least.items():
            f *= p ** sum(1 for cnt in v if cnt > j)
        chain.append(f)
    return tuple(reversed(chain))


def _prime_free(n, p):
    while n % p == 0:
        n //= p
    return n


def torus_kernel_bruteforce(rows, M):
    """Invariant factors of {x in (Z/M)^n : A x = 0 mod M} by pure-Python enumeration."""
    n = len(rows)
    orders = []
    for x in itertools.product(range(M), repeat=n):
        if all(sum(a * b for a, b in zip(row, x)) % M == 0 for row in rows):
            orders.append(element_order(x, (M,) * n))
    return chain_from_census(orders)


def edge_stabilizer_bruteforce(d, delta):
    """(component count, degree) from the subgroup {d s = delta t} of (Z/M)^2 with M = 2 d |delta|."""
    M = 2 * d * abs(delta)
    St = {(s, t) for s in range(M) for t in range(M) if (d * s - delta * t) % M == 0}
    count = len(St) // M
    identity_part = {((count * s) % M, (count * t) % M) for s, t in St}
    degree = sum(1 for s, t in identity_part if t == 0)
    return count, degree


# ---------------------------------------------------------------- graphs


def naive_graphs(g, n, N, d):
    """All decorated graphs by generate-filter-dedupe, deduplicated with networkx isomorphism."""
    found = []
    buckets = defaultdict(list)
    for V in range(2, d + 2):
        slots = [(u, v, k) for u in range(V) for v in range(u + 1, V) for k in range(1, d + 1)]
        edge_sets = [
            es for E in range(1, d + 1)
            for es in itertools.combinations_with_replacement(slots, E)
            if sum(k for _, _, k in es) == d
        ]
        for es in edge_sets:
            G0 = nx.MultiGraph()
            G0.add_nodes_from(range(V))
            G0.add_edges_from((u, v) for u, v, _ in es)
            if not nx.is_connected(G0):
                continue
            b1 = len(es) - V + 1
            if b1 > g:
                continue
            for labels in itertools.product(range(N + 1), repeat=V):
                if any(labels[u] == labels[v] for u, v, _ in es):
                    continue
                for genera in itertools.product(range(g + 1), repeat=V):
                    if sum(genera) + b1 != g:
                        continue
                    for legs in itertools.product(range(V), repeat=n):
                        graph = _nx_graph(V, es, labels, genera, legs)
                        key = _invariant(graph)
                        if any(_iso(graph, other) for other in buckets[key]):
                            continue
                        buckets[key].append(graph)
                        found.append((tuple(zip(labels, genera)), tuple(sorted(es)), legs))
    return found


def _nx_graph(V, es, labels, genera, legs):
    G = nx.MultiGraph()
    for v in range(V):
        G.add_node(v, label=labels[v], genus=genera[v], legs=tuple(i for i, w in enumerate(legs) if w == v))
    for u, v, k in es:
        G.add_edge(u, v, degree=k)
    return G


def _invariant(G):
    nodes = Counter((a["label"], a["genus"], a["legs"]) for _, a in G.nodes(data=True))
    edges = Counter(a["degree"] for _, _, a in G.edges(data=True))
    return (G.number_of_nodes(), tuple(sorted(nodes.items())), tuple(sorted(edges.items())))


def _iso(G, H):
    node_match = nx.algorithms.isomorphism.categorical_node_match(["label", "genus", "legs"], [None] * 3)
    edge_match = nx.algorithms.isomorphism.categorical_multiedge_match("degree", None)
    return nx.is_isomorphic(G, H, node_match=node_match, edge_match=edge_match)


def graphs_isomorphic(a, b):
    """Decoration-preserving isomorphism of two DecoratedGraph-like triples via networkx."""
    return _iso(_from_decorated(a), _from_decorated(b))


def _from_decorated(graph):
    labels = [lab for lab, _ in graph.vertices]
    genera = [gen for _, gen in graph.vertices]
    return _nx_graph(len(graph.vertices), graph.edges, labels, genera, graph.legs)
