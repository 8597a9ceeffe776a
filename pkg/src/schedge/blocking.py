"""Edge blocking: reorder COO edges into destination-range segments.

Segment ``s`` holds exactly the edges whose destination lies in
``[s*N, (s+1)*N)``, in their original relative order. Processing one segment
at a time keeps random destination accesses inside a cache-sized window.
"""

from __future__ import annotations

import struct
import threading

import numpy as np

from .runtime import EdgeContext, EngineError, coerce_runtime

DEFAULT_CACHE_BUDGET = 2 * 1024 * 1024  # bytes of vertex data per segment
BYTES_PER_VERTEX_DATUM = 8

_SIDECAR_MAGIC = b"SCHEDGEB"
_SIDECAR_VERSION = 1


class BlockedGraph:
    """COO edges grouped into destination segments.

    ``segment_start`` stores inclusive segment end offsets: segment ``s``
    spans edge indices ``[segment_start[s-1], segment_start[s])`` with an
    implicit 0 for ``s == 0``, and the last entry equals the edge count.
    """

    __slots__ = (
        "num_vertices",
        "num_edges",
        "vertices_per_segment",
        "num_segments",
        "segment_start",
        "edges_src",
        "edges_dst",
        "edges_weight",
    )

    def __init__(self, num_vertices, vertices_per_segment, segment_start,
                 edges_src, edges_dst, edges_weight=None):
        self.num_vertices = num_vertices
        self.num_edges = len(edges_src)
        self.vertices_per_segment = vertices_per_segment
        self.num_segments = len(segment_start)
        self.segment_start = segment_start
        self.edges_src = edges_src
        self.edges_dst = edges_dst
        self.edges_weight = edges_weight

    def segment_range(self, s):
        lo = self.segment_start[s - 1] if s else 0
        return lo, self.segment_start[s]

    def edge_multiset(self):
        w = self.edges_weight or [0] * self.num_edges
        return sorted(zip(self.edges_src, self.edges_dst, w))


def default_blocking_size(num_vertices, cache_budget=DEFAULT_CACHE_BUDGET):
    """Vertices per segment so one segment's data fits the cache budget."""
    n = max(1, cache_budget // BYTES_PER_VERTEX_DATUM)
    return min(n, max(1, num_vertices))


def blocked_for(g, n):
    """Blocked view of ``g`` with segment width ``n``, cached on the graph."""
    bg = g._blocked_cache.get(n)
    if bg is None:
        bg = block_edges(g, n)
        g._blocked_cache[n] = bg
    return bg


def block_edges(g, n):
    """Group ``g``'s COO edges into destination segments of width ``n``.

    Two passes: count edges per segment, exclusive prefix sum, then a stable
    second pass placing each edge at its segment cursor. The returned
    ``segment_start`` is the fully incremented cursor array, i.e. inclusive
    segment ends.
    """
    if n < 1:
        raise ValueError("vertices per segment must be >= 1")
    if g.num_vertices == 0:
        raise ValueError("empty graph")
    num_segments = -(-g.num_vertices // n)  # ceil
    src, dst = g.coo_src, g.coo_dst
    weights = g.coo_weights
    counts = [0] * num_segments
    for d in dst:
        counts[d // n] += 1
    cursor = [0] * num_segments
    total = 0
    for s in range(num_segments):
        cursor[s] = total
        total += counts[s]
    out_src = [0] * g.num_edges
    out_dst = [0] * g.num_edges
    out_w = None if weights is None else [0] * g.num_edges
    for i in range(g.num_edges):
        d = dst[i]
        seg = d // n
        idx = cursor[seg]
        out_src[idx] = src[i]
        out_dst[idx] = d
        if out_w is not None:
            out_w[idx] = weights[i]
        cursor[seg] = idx + 1
    return BlockedGraph(g.num_vertices, n, cursor, out_src, out_dst, out_w)


def apply_blocked(bg, process_edge, runtime=None, make_context=None):
    """Invoke ``process_edge(ctx)`` once per edge, one segment at a time.

    Within a segment the edges are split across the workers; a barrier
    separates segments so vertex-data accesses of different segments never
    overlap in time. The whole call is a single pool dispatch.

    ``make_context`` lets the caller supply worker contexts (for frontier
    emission); by default each worker gets a bare :class:`EdgeContext`.
    """
    rt = coerce_runtime(runtime)
    nw = rt.cfg.num_workers
    if make_context is None:
        make_context = lambda w: EdgeContext(rt.locks)

    seg_bounds = [bg.segment_range(s) for s in range(bg.num_segments)]
    src, dst, w = bg.edges_src, bg.edges_dst, bg.edges_weight

    def run_chunk(ctx, lo, hi):
        fn = process_edge
        if w is None:
            for i in range(lo, hi):
                ctx.src = src[i]
                ctx.dst = dst[i]
                fn(ctx)
        else:
            for i in range(lo, hi):
                ctx.src = src[i]
                ctx.dst = dst[i]
                ctx.weight = w[i]
                fn(ctx)
        return hi - lo

    if rt.parallel and nw > 1:
        barrier = threading.Barrier(nw)

        def make_worker(wid):
            def worker():
                ctx = make_context(wid)
                done = 0
                for lo, hi in seg_bounds:
                    span = hi - lo
                    base = span // nw
                    extra = span % nw
                    start = lo + base * wid + min(wid, extra)
                    stop = start + base + (1 if wid < extra else 0)
                    done += run_chunk(ctx, start, stop)
                    barrier.wait()
                return done
            return worker

        results = rt.parallel_for([make_worker(wid) for wid in range(nw)])
        total = sum(results)
    else:
        def serial_body():
            done = 0
            # Same chunk order a parallel run would use, one worker at a time.
            ctxs = [make_context(wid) for wid in range(nw)]
            for lo, hi in seg_bounds:
                span = hi - lo
                base = span // nw
                extra = span % nw
                pos = lo
                for wid in range(nw):
                    stop = pos + base + (1 if wid < extra else 0)
                    done += run_chunk(ctxs[wid], pos, stop)
                    pos = stop
            return done

        total = rt.parallel_for([serial_body])[0]
    return total


def save_blocked(bg, path):
    """Persist a blocked graph as a little-endian 64-bit binary sidecar."""
    with open(path, "wb") as fh:
        fh.write(_SIDECAR_MAGIC)
        has_w = 1 if bg.edges_weight is not None else 0
        fh.write(struct.pack("<qqqqqq", _SIDECAR_VERSION, bg.num_vertices,
                             bg.num_edges, bg.vertices_per_segment,
                             bg.num_segments, has_w))
        np.asarray(bg.segment_start, dtype="<i8").tofile(fh)
        np.asarray(bg.edges_src, dtype="<i8").tofile(fh)
        np.asarray(bg.edges_dst, dtype="<i8").tofile(fh)
        if has_w:
            np.asarray(bg.edges_weight, dtype="<i8").tofile(fh)


def load_blocked(path):
    with open(path, "rb") as fh:
        magic = fh.read(len(_SIDECAR_MAGIC))
        if magic != _SIDECAR_MAGIC:
            raise EngineError("%s: not a blocked-graph sidecar" % path)
        header = struct.unpack("<qqqqqq", fh.read(48))
        version, num_vertices, num_edges, n, num_segments, has_w = header
        if version != _SIDECAR_VERSION:
            raise EngineError("%s: unsupported sidecar version %d" % (path, version))
        segment_start = np.fromfile(fh, dtype="<i8", count=num_segments).tolist()
        src = np.fromfile(fh, dtype="<i8", count=num_edges).tolist()
        dst = np.fromfile(fh, dtype="<i8", count=num_edges).tolist()
        weights = np.fromfile(fh, dtype="<i8", count=num_edges).tolist() if has_w else None
    return BlockedGraph(num_vertices, n, segment_start, src, dst, weights)
