"""Seeded graph builders shared by the test modules."""

import random

from schedge.graphio import Graph, _symmetrize


def random_directed(num_vertices, num_edges, seed, weighted=False, max_weight=100):
    rng = random.Random(seed)
    edges = set()
    while len(edges) < num_edges:
        u = rng.randrange(num_vertices)
        v = rng.randrange(num_vertices)
        if u != v:
            edges.add((u, v))
    src, dst = map(list, zip(*sorted(edges)))
    weights = [rng.randint(1, max_weight) for _ in src] if weighted else None
    return Graph.from_coo(num_vertices, src, dst, weights)


def random_symmetric(num_vertices, num_edges, seed):
    g = random_directed(num_vertices, num_edges, seed)
    src, dst, _, _ = _symmetrize(g.coo_src, g.coo_dst, None)
    return Graph.from_coo(num_vertices, src, dst, symmetric=True)


def preferential_attachment(num_vertices, m, seed):
    """Symmetric graph grown by preferential attachment (power-law degrees)."""
    rng = random.Random(seed)
    src, dst = [], []
    repeated = list(range(m))
    targets = list(range(m))
    for v in range(m, num_vertices):
        for t in targets:
            src.append(v)
            dst.append(t)
        repeated.extend(targets)
        repeated.extend([v] * m)
        chosen = set()
        while len(chosen) < m:
            chosen.add(rng.choice(repeated))
        targets = list(chosen)
    s, d, _, _ = _symmetrize(src, dst, None)
    return Graph.from_coo(num_vertices, s, d, symmetric=True)


def path_graph(num_vertices):
    src, dst = [], []
    for v in range(num_vertices - 1):
        src += [v, v + 1]
        dst += [v + 1, v]
    return Graph.from_coo(num_vertices, src, dst, symmetric=True)


def clique(num_vertices):
    src, dst = [], []
    for u in range(num_vertices):
        for v in range(num_vertices):
            if u != v:
                src.append(u)
                dst.append(v)
    return Graph.from_coo(num_vertices, src, dst, symmetric=True)
