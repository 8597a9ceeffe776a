"""Graph containers and loaders.

A :class:`Graph` keeps three views of one edge multiset: CSR over out-edges,
CSR over in-edges (the transpose), and the raw COO arrays in load order.
Vertex ids are dense 0-based integers; no relabeling happens at load time.
"""

from __future__ import annotations

import random

import numpy as np


class GraphLoadError(ValueError):
    """Unreadable or malformed graph input."""


class Graph:
    """Immutable directed multigraph.

    All arrays are plain Python lists (fast scalar indexing in the traversal
    loops). Weights, when present, are non-negative integers and are kept
    aligned with each view's edge order. Instances are never mutated after
    construction and are safe to share across workers.
    """

    __slots__ = (
        "num_vertices",
        "num_edges",
        "out_offsets",
        "out_neighbors",
        "out_weights",
        "in_offsets",
        "in_neighbors",
        "in_weights",
        "coo_src",
        "coo_dst",
        "coo_weights",
        "symmetric",
        "weighted",
        "diagnostics",
        "_blocked_cache",
    )

    def __init__(self, num_vertices, out_csr, in_csr, coo, symmetric=False,
                 diagnostics=None):
        self.num_vertices = num_vertices
        self.out_offsets, self.out_neighbors, self.out_weights = out_csr
        self.in_offsets, self.in_neighbors, self.in_weights = in_csr
        self.coo_src, self.coo_dst, self.coo_weights = coo
        self.num_edges = len(self.coo_src)
        self.symmetric = symmetric
        self.weighted = self.coo_weights is not None
        self.diagnostics = diagnostics or {}
        self._blocked_cache = {}  # vertices-per-segment -> BlockedGraph

    @classmethod
    def from_coo(cls, num_vertices, src, dst, weights=None, symmetric=False,
                 diagnostics=None):
        """Build all three views from COO arrays (load order preserved)."""
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if src.shape != dst.shape:
            raise GraphLoadError("src/dst length mismatch")
        if len(src) and (src.min() < 0 or dst.min() < 0
                         or src.max() >= num_vertices
                         or dst.max() >= num_vertices):
            raise GraphLoadError("vertex id out of range [0, %d)" % num_vertices)
        w = None
        if weights is not None:
            w = np.asarray(weights, dtype=np.int64)
            if w.shape != src.shape:
                raise GraphLoadError("weights length mismatch")
            if len(w) and w.min() < 0:
                raise GraphLoadError("negative edge weight")
        out_csr = _build_csr(num_vertices, src, dst, w)
        in_csr = _build_csr(num_vertices, dst, src, w)
        coo = (src.tolist(), dst.tolist(), None if w is None else w.tolist())
        return cls(num_vertices, out_csr, in_csr, coo, symmetric=symmetric,
                   diagnostics=diagnostics)

    def edges(self):
        """Iterate (src, dst, weight-or-None) in COO order."""
        w = self.coo_weights
        for i in range(self.num_edges):
            yield self.coo_src[i], self.coo_dst[i], None if w is None else w[i]

    def edge_multiset(self):
        """Sorted (src, dst, weight) triples; order-insensitive comparisons."""
        w = self.coo_weights or [0] * self.num_edges
        return sorted(zip(self.coo_src, self.coo_dst, w))


def _build_csr(num_vertices, keys, values, weights):
    """Stable counting sort of (keys -> values) into offsets/neighbors lists."""
    order = np.argsort(keys, kind="stable")
    counts = np.bincount(keys, minlength=num_vertices)
    offsets = np.concatenate(([0], np.cumsum(counts)))
    neighbors = values[order]
    w = None if weights is None else weights[order].tolist()
    return offsets.tolist(), neighbors.tolist(), w


def out_degree(g, v):
    """Number of out-edges of ``v``."""
    if not 0 <= v < g.num_vertices:
        raise ValueError("vertex id %d out of range [0, %d)" % (v, g.num_vertices))
    return g.out_offsets[v + 1] - g.out_offsets[v]


def in_degree(g, v):
    if not 0 <= v < g.num_vertices:
        raise ValueError("vertex id %d out of range [0, %d)" % (v, g.num_vertices))
    return g.in_offsets[v + 1] - g.in_offsets[v]


def _symmetrize(src, dst, weights):
    """Each arc plus its mirror exactly once; later duplicates dropped.

    The first occurrence of an arc fixes its weight; the mirror arc inherits
    the same weight. Returns new arrays plus the number of dropped arcs.
    """
    seen = set()
    s2, d2 = [], []
    w2 = None if weights is None else []
    dropped = 0
    for i in range(len(src)):
        u, v = src[i], dst[i]
        wt = None if weights is None else weights[i]
        for a, b in ((u, v), (v, u)):
            if (a, b) in seen:
                dropped += 1
                continue
            seen.add((a, b))
            s2.append(a)
            d2.append(b)
            if w2 is not None:
                w2.append(wt)
    return s2, d2, w2, dropped


def load_edge_list(path, weighted=False, symmetrize=False):
    """Load a whitespace-separated edge list ("src dst" or "src dst weight").

    Lines starting with '#' or '%' are comments. With ``weighted=False`` a
    trailing weight token is ignored; with ``weighted=True`` a missing weight
    is an error. ``symmetrize=True`` adds the mirror of every arc and
    collapses duplicates (counts reported in ``Graph.diagnostics``).
    """
    src, dst = [], []
    weights = [] if weighted else None
    comments = 0
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            if line[0] in "#%":
                comments += 1
                continue
            parts = line.split()
            if len(parts) < 2:
                raise GraphLoadError("%s:%d: malformed edge line %r" % (path, lineno, line))
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise GraphLoadError("%s:%d: non-integer vertex id in %r" % (path, lineno, line)) from None
            if u < 0 or v < 0:
                raise GraphLoadError("%s:%d: negative vertex id" % (path, lineno))
            if weighted:
                if len(parts) < 3:
                    raise GraphLoadError("%s:%d: missing weight token" % (path, lineno))
                try:
                    wt = int(parts[2])
                except ValueError:
                    raise GraphLoadError("%s:%d: non-integer weight %r" % (path, lineno, parts[2])) from None
                if wt < 0:
                    raise GraphLoadError("%s:%d: negative weight" % (path, lineno))
                weights.append(wt)
            src.append(u)
            dst.append(v)
    if not src:
        raise GraphLoadError("%s: no edges" % path)
    diagnostics = {"comment_lines": comments, "input_edges": len(src)}
    if symmetrize:
        src, dst, weights, dropped = _symmetrize(src, dst, weights)
        diagnostics["duplicates_collapsed"] = dropped
    num_vertices = max(max(src), max(dst)) + 1
    return Graph.from_coo(num_vertices, src, dst, weights,
                          symmetric=symmetrize, diagnostics=diagnostics)


def load_matrix_market(path, weighted=False):
    """Load a Matrix Market coordinate file (1-based ids -> 0-based).

    A 'symmetric' qualifier in the banner mirrors every off-diagonal entry.
    """
    with open(path) as fh:
        banner = fh.readline()
        if not banner.startswith("%%MatrixMarket matrix coordinate"):
            raise GraphLoadError("%s: not a MatrixMarket coordinate file" % path)
        tokens = banner.strip().lower().split()
        field = tokens[3] if len(tokens) > 3 else "pattern"
        symmetric = len(tokens) > 4 and tokens[4] == "symmetric"
        if weighted and field == "pattern":
            raise GraphLoadError("%s: pattern matrix has no weights" % path)
        size_line = None
        lineno = 1
        for raw in fh:
            lineno += 1
            line = raw.strip()
            if not line or line.startswith("%"):
                continue
            size_line = line
            break
        if size_line is None:
            raise GraphLoadError("%s: missing size line" % path)
        parts = size_line.split()
        if len(parts) != 3:
            raise GraphLoadError("%s:%d: bad size line %r" % (path, lineno, size_line))
        rows, cols, nnz = (int(p) for p in parts)
        if rows != cols:
            raise GraphLoadError("%s: adjacency matrix must be square" % path)
        src, dst = [], []
        weights = [] if weighted else None
        for raw in fh:
            lineno += 1
            line = raw.strip()
            if not line or line.startswith("%"):
                continue
            parts = line.split()
            if len(parts) < 2:
                raise GraphLoadError("%s:%d: malformed entry %r" % (path, lineno, line))
            i, j = int(parts[0]) - 1, int(parts[1]) - 1
            if i < 0 or j < 0:
                raise GraphLoadError("%s:%d: ids are 1-based" % (path, lineno))
            wt = None
            if weighted:
                if len(parts) < 3:
                    raise GraphLoadError("%s:%d: missing value token" % (path, lineno))
                val = float(parts[2])
                if val != int(val) or val < 0:
                    raise GraphLoadError("%s:%d: weights must be non-negative integers" % (path, lineno))
                wt = int(val)
            src.append(i)
            dst.append(j)
            if weighted:
                weights.append(wt)
            if symmetric and i != j:
                src.append(j)
                dst.append(i)
                if weighted:
                    weights.append(wt)
    if not src:
        raise GraphLoadError("%s: no edges" % path)
    num_vertices = rows
    if max(max(src), max(dst)) >= num_vertices:
        raise GraphLoadError("%s: entry outside declared dimensions" % path)
    return Graph.from_coo(num_vertices, src, dst, weights, symmetric=symmetric,
                          diagnostics={"declared_nnz": nnz})


def load_graph(path, weighted=False, symmetrize=False):
    """Dispatch on file content: MatrixMarket banner or plain edge list."""
    with open(path) as fh:
        first = fh.readline()
    if first.startswith("%%MatrixMarket"):
        g = load_matrix_market(path, weighted=weighted)
        if symmetrize and not g.symmetric:
            s, d, w, dropped = _symmetrize(g.coo_src, g.coo_dst, g.coo_weights)
            diag = dict(g.diagnostics, duplicates_collapsed=dropped)
            g = Graph.from_coo(g.num_vertices, s, d, w, symmetric=True,
                               diagnostics=diag)
        return g
    return load_edge_list(path, weighted=weighted, symmetrize=symmetrize)


def with_random_weights(g, low=1, high=1000, seed=0):
    """Copy of ``g`` with uniform random integer weights in [low, high]."""
    rng = random.Random(seed)
    weights = [rng.randint(low, high) for _ in range(g.num_edges)]
    return Graph.from_coo(g.num_vertices, g.coo_src, g.coo_dst, weights,
                          symmetric=g.symmetric, diagnostics=dict(g.diagnostics))
