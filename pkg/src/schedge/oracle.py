"""Independent serial reference implementations.

These are the ground truth for tests and the ``verify`` command. They read
the graph arrays directly and share no traversal helpers with the engine;
clarity beats speed, so keep inputs small.
"""

from __future__ import annotations

import heapq
from collections import deque

import numpy as np

ORACLE_MAX_VERTICES = 10_000


def _guard(g):
    if g.num_vertices > ORACLE_MAX_VERTICES:
        raise ValueError("oracle size guard exceeded: %d vertices (max %d)"
                         % (g.num_vertices, ORACLE_MAX_VERTICES))


def bfs_oracle(g, source):
    """Hop distances from ``source``; -1 for unreachable vertices."""
    _guard(g)
    level = [-1] * g.num_vertices
    level[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for ei in range(g.out_offsets[u], g.out_offsets[u + 1]):
            v = g.out_neighbors[ei]
            if level[v] == -1:
                level[v] = level[u] + 1
                queue.append(v)
    return level


def dijkstra_oracle(g, source):
    """Exact shortest-path distances; float('inf') for unreachable."""
    _guard(g)
    if g.out_weights is None:
        raise ValueError("dijkstra oracle needs a weighted graph")
    dist = [float("inf")] * g.num_vertices
    dist[source] = 0
    heap = [(0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for ei in range(g.out_offsets[u], g.out_offsets[u + 1]):
            v = g.out_neighbors[ei]
            nd = d + g.out_weights[ei]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def pagerank_dense_oracle(g, max_iters=100, tolerance=1e-9, damping=0.85):
    """Power iteration on the dense transition operator.

    Uses the same conventions as the engine implementation: uniform teleport,
    dangling mass spread uniformly, stop on L1 delta below tolerance.
    """
    _guard(g)
    n = g.num_vertices
    A = np.zeros((n, n))
    out_deg = np.zeros(n)
    for i in range(g.num_edges):
        out_deg[g.coo_src[i]] += 1
    for i in range(g.num_edges):
        u, v = g.coo_src[i], g.coo_dst[i]
        A[v, u] += 1.0 / out_deg[u]
    dangling = out_deg == 0
    rank = np.full(n, 1.0 / n)
    for _ in range(max_iters):
        dangling_mass = rank[dangling].sum()
        new = (1.0 - damping) / n + damping * (A @ rank + dangling_mass / n)
        l1 = np.abs(new - rank).sum()
        rank = new
        if l1 < tolerance:
            break
    return rank.tolist()


def cc_unionfind_oracle(g):
    """Component labels via union-find; label is the component's min id.

    Edges are treated as undirected regardless of the graph's symmetry flag.
    """
    _guard(g)
    parent = list(range(g.num_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(g.num_edges):
        a, b = find(g.coo_src[i]), find(g.coo_dst[i])
        if a != b:
            if a < b:
                parent[b] = a
            else:
                parent[a] = b

    best = {}
    for v in range(g.num_vertices):
        r = find(v)
        if r not in best or v < best[r]:
            best[r] = v
    return [best[find(v)] for v in range(g.num_vertices)]


def brandes_oracle(g, sources):
    """Betweenness restricted to the given sources, unnormalized.

    Undirected convention: the accumulated score is halved so each unordered
    pair counts once.
    """
    _guard(g)
    n = g.num_vertices
    centrality = [0.0] * n
    for s in sources:
        if not 0 <= s < n:
            raise ValueError("invalid source id %d" % s)
        dist = [-1] * n
        sigma = [0] * n
        preds = [[] for _ in range(n)]
        dist[s] = 0
        sigma[s] = 1
        order = []
        queue = deque([s])
        while queue:
            u = queue.popleft()
            order.append(u)
            for ei in range(g.out_offsets[u], g.out_offsets[u + 1]):
                v = g.out_neighbors[ei]
                if dist[v] == -1:
                    dist[v] = dist[u] + 1
                    queue.append(v)
                if dist[v] == dist[u] + 1:
                    sigma[v] += sigma[u]
                    preds[v].append(u)
        delta = [0.0] * n
        for w in reversed(order):
            for u in preds[w]:
                delta[u] += sigma[u] / sigma[w] * (1.0 + delta[w])
            if w != s:
                centrality[w] += delta[w]
    return [c / 2.0 for c in centrality]
