"""Traversal core: push/pull edge apply under seven load-balancing schemes.

Work is described as (vertex, edge_lo, edge_hi) chunks per worker; the
strategies differ only in how those chunks are formed, never in which edges
get visited. A CTA maps to one worker task, warp and thread lanes are inner
sequential loops inside it.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right

from . import blocking as bk
from . import frontier as fr
from .runtime import (EdgeContext, EngineError, ExecConfig, RunStats, Runtime,
                      coerce_runtime)
from .sched import (PULL, PUSH, Schedule, ScheduleError, validate,
                    validate_hybrid)

__all__ = [
    "ExecConfig", "RunStats", "Runtime", "EdgeContext", "EngineError",
    "edgeset_apply", "hybrid_apply", "fused_loop", "pick_udf",
    "lb_partition_etwc", "lb_partition_strict", "lb_partition_twc",
    "partition_even_chunks", "push_work",
]


# ---------------------------------------------------------------------------
# Partitioners
# ---------------------------------------------------------------------------

def partition_even_chunks(n_items, n_parts):
    """Contiguous (lo, hi) chunks with sizes differing by at most one.

    Earlier chunks take the extra items.
    """
    base, extra = divmod(n_items, n_parts)
    bounds = []
    lo = 0
    for p in range(n_parts):
        hi = lo + base + (1 if p < extra else 0)
        bounds.append((lo, hi))
        lo = hi
    return bounds


def _whole_ranges(vertices, offsets):
    return [(u, offsets[u], offsets[u + 1]) for u in vertices]


def lb_partition_etwc(active, g, cfg):
    """Per-CTA three-stage chunk queues over the active vertices' out-edges.

    Active vertices are pre-assigned to CTAs in equal contiguous chunks;
    each vertex's edge range is split greedily into a cta_size multiple
    (stage 2), then a warp_size multiple (stage 1), then the remainder
    (stage 0). Chunks carry (edge_lo, edge_hi, src_id).
    """
    return _etwc_queues(active, g.out_offsets, cfg)


def _etwc_queues(active, offsets, cfg):
    cta, warp = cfg.cta_size, cfg.warp_size
    queues = []
    for lo, hi in partition_even_chunks(len(active), cfg.num_workers):
        q0, q1, q2 = [], [], []
        for i in range(lo, hi):
            u = active[i]
            start = offsets[u]
            end = offsets[u + 1]
            size = end - start
            elt = (size // cta) * cta
            if elt > 0:
                q2.append((start, start + elt, u))
                start += elt
                size -= elt
            elt = (size // warp) * warp
            if elt > 0:
                q1.append((start, start + elt, u))
                start += elt
                size -= elt
            if size > 0:
                q0.append((start, end, u))
        queues.append((q0, q1, q2))
    return queues


def lb_partition_strict(active, g, cfg):
    """Exact edge-balanced ranges: per-worker (edge_lo, edge_hi) over the
    concatenated active edge ranges, plus the exclusive degree prefix array.

    Workers locate their owning vertices by binary search over the prefix.
    """
    return _strict_ranges(active, g.out_offsets, cfg)


def _strict_chunks(active, offsets, cfg):
    ranges, prefix = _strict_ranges(active, offsets, cfg)
    per_worker = []
    for elo, ehi in ranges:
        chunks = []
        if elo < ehi:
            i = bisect_right(prefix, elo) - 1
            while i < len(active) and prefix[i] < ehi:
                u = active[i]
                lo = max(elo, prefix[i])
                hi = min(ehi, prefix[i + 1])
                if lo < hi:
                    base = offsets[u]
                    chunks.append((u, base + lo - prefix[i], base + hi - prefix[i]))
                i += 1
        per_worker.append(chunks)
    return per_worker


def _strict_ranges(active, offsets, cfg):
    prefix = [0] * (len(active) + 1)
    total = 0
    for i, u in enumerate(active):
        total += offsets[u + 1] - offsets[u]
        prefix[i + 1] = total
    return partition_even_chunks(total, cfg.num_workers), prefix


def lb_partition_twc(active, g, cfg):
    """Three global degree buckets: CTA (> cta_size), warp (> warp_size),
    thread (the rest). Promotion is strictly-greater."""
    return _twc_queues(active, g.out_offsets, cfg)


def _twc_queues(active, offsets, cfg):
    cta_q, warp_q, thread_q = [], [], []
    cta, warp = cfg.cta_size, cfg.warp_size
    for u in active:
        degree = offsets[u + 1] - offsets[u]
        if degree > cta:
            cta_q.append(u)
        elif degree > warp:
            warp_q.append(u)
        else:
            thread_q.append(u)
    return cta_q, warp_q, thread_q


def _twc_chunks(active, offsets, cfg):
    cta_q, warp_q, thread_q = _twc_queues(active, offsets, cfg)
    nw = cfg.num_workers
    wpc = cfg.warps_per_cta
    warps_total = nw * wpc
    per_worker = [[] for _ in range(nw)]
    for w in range(nw):
        per_worker[w] += _whole_ranges(cta_q[w::nw], offsets)
    for j, u in enumerate(warp_q):
        per_worker[(j % warps_total) // wpc].append((u, offsets[u], offsets[u + 1]))
    for w in range(nw):
        per_worker[w] += _whole_ranges(thread_q[w::nw], offsets)
    return per_worker


def _cm_chunks(active, offsets, cfg):
    return [
        _whole_ranges(active[lo:hi], offsets)
        for lo, hi in partition_even_chunks(len(active), cfg.num_workers)
    ]


def _wm_chunks(active, offsets, cfg):
    wpc = cfg.warps_per_cta
    warp_bounds = partition_even_chunks(len(active), cfg.num_workers * wpc)
    per_worker = []
    for w in range(cfg.num_workers):
        chunks = []
        for lo, hi in warp_bounds[w * wpc:(w + 1) * wpc]:
            chunks += _whole_ranges(active[lo:hi], offsets)
        per_worker.append(chunks)
    return per_worker


def _vertex_based_chunks(active, offsets, cfg):
    # Grid-stride lane mapping: logical thread t owns active[t], active[t+T]...
    # collapsed per worker into a cyclic slice.
    nw = cfg.num_workers
    return [_whole_ranges(active[w::nw], offsets) for w in range(nw)]


def _etwc_chunks(active, offsets, cfg):
    # Stage order 0, 1, 2 within each CTA; lanes collapse to sequential
    # loops. Queue entries are (edge_lo, edge_hi, vertex); work units are
    # (vertex, edge_lo, edge_hi).
    return [
        [(u, lo, hi) for lo, hi, u in q0 + q1 + q2]
        for q0, q1, q2 in _etwc_queues(active, offsets, cfg)
    ]


_CHUNKERS = {
    "VERTEX_BASED": _vertex_based_chunks,
    "CM": _cm_chunks,
    "WM": _wm_chunks,
    "STRICT": _strict_chunks,
    "TWC": _twc_chunks,
    "ETWC": _etwc_chunks,
}


def push_work(active, offsets, load_balance, cfg):
    """Per-worker (vertex, edge_lo, edge_hi) chunks for a frontier-driven
    traversal. Every strategy tiles each active vertex's range exactly."""
    try:
        chunker = _CHUNKERS[load_balance]
    except KeyError:
        raise EngineError("no chunker for load balance %r" % load_balance) from None
    return chunker(active, offsets, cfg)


def _strict_pull_spans(offsets, num_vertices, cfg):
    """Edge-balanced vertex spans for pull: boundaries snap to vertices so
    each destination keeps a single owner."""
    total = offsets[num_vertices]
    spans = []
    for w, (elo, ehi) in enumerate(partition_even_chunks(total, cfg.num_workers)):
        vlo = bisect_left(offsets, elo, 0, num_vertices)
        vhi = num_vertices if w == cfg.num_workers - 1 else bisect_left(offsets, ehi, 0, num_vertices)
        spans.append(range(vlo, max(vlo, vhi)))
    return spans


def _pull_vertex_sets(g, s, cfg):
    """Per-worker destination-vertex iterables for a pull traversal."""
    offsets = g.in_offsets
    V = g.num_vertices
    lb = s.load_balance
    if lb == "VERTEX_BASED":
        return [range(w, V, cfg.num_workers) for w in range(cfg.num_workers)]
    if lb == "CM":
        return [range(lo, hi) for lo, hi in partition_even_chunks(V, cfg.num_workers)]
    if lb == "WM":
        wpc = cfg.warps_per_cta
        bounds = partition_even_chunks(V, cfg.num_workers * wpc)
        out = []
        for w in range(cfg.num_workers):
            ids = []
            for lo, hi in bounds[w * wpc:(w + 1) * wpc]:
                ids.extend(range(lo, hi))
            out.append(ids)
        return out
    if lb == "STRICT":
        return _strict_pull_spans(offsets, V, cfg)
    if lb == "TWC":
        per_worker = _twc_chunks(range(V), offsets, cfg)
        return [[u for u, _, _ in chunks] for chunks in per_worker]
    if lb == "ETWC":
        # Chunked in-ranges stay inside one CTA, so ownership is preserved;
        # return the triples directly.
        return _etwc_chunks(range(V), offsets, cfg)
    raise EngineError("no pull partitioner for %r" % lb)


# ---------------------------------------------------------------------------
# Frontier emission
# ---------------------------------------------------------------------------

def _membership_fn(view):
    if view is None:
        return None
    if view.repr == fr.BOOLMAP:
        return view.data.__getitem__
    if view.repr == fr.BITMAP:
        buf = view.data

        def test(u):
            return buf[u >> 3] & (1 << (u & 7))

        return test
    ids = set(view.data)
    return ids.__contains__


class _OutputBuilder:
    """Builds the round's output frontier per creation mode and dedup policy.

    FUSED writes accepted ids into per-worker buffers merged in worker order.
    UNFUSED_* marks the dense output during traversal; with a dense dedup
    strategy the output slot itself is the tested slot, so no sidecar is
    needed there.
    """

    def __init__(self, rt, universe, schedule):
        self.rt = rt
        self.universe = universe
        self.creation = schedule.frontier_creation
        self.fused = self.creation == "FUSED"
        repr_ = (fr.SPARSE if self.fused else
                 fr.BOOLMAP if self.creation == "UNFUSED_BOOLMAP" else fr.BITMAP)
        self.out = rt.frontiers.acquire(universe, repr_)
        self.locals = [[] for _ in range(rt.cfg.num_workers)] if self.fused else None
        self.marks = None
        self.counters = None
        self.slot_dedup = False
        if schedule.dedup:
            if schedule.dedup_strategy == "MONOTONIC_COUNTERS":
                counters = rt.counters(universe)
                counters.next_round()
                self.counters = counters
            elif self.fused:
                # Dense test-and-set sidecar, cleared from the merged ids.
                self.marks = rt.dense_marks(universe, schedule.dedup_strategy)
            else:
                self.slot_dedup = True

    def emitter(self, worker):
        policy = self.counters or self.marks
        accept = None if policy is None else policy.accept
        if self.fused:
            append = self.locals[worker].append
            if accept is None:
                def emit(v):
                    append(v)
                    return True
                return emit

            def emit(v):
                if accept(v):
                    append(v)
                    return True
                return False
            return emit

        buf = self.out.data
        locks = self.rt.locks
        if self.creation == "UNFUSED_BOOLMAP":
            if accept is not None:
                def emit(v):
                    if accept(v):
                        buf[v] = 1
                        return True
                    return False
            elif self.slot_dedup:
                def emit(v):
                    if locks is None:
                        if buf[v]:
                            return False
                        buf[v] = 1
                        return True
                    with locks[v & 63]:
                        if buf[v]:
                            return False
                        buf[v] = 1
                        return True
            else:
                def emit(v):
                    buf[v] = 1  # single byte store; atomic under the GIL
                    return True
            return emit

        # UNFUSED_BITMAP: the byte read-modify-write needs the lock stripe.
        if accept is not None:
            def emit(v):
                if not accept(v):
                    return False
                i, mask = v >> 3, 1 << (v & 7)
                if locks is None:
                    buf[i] |= mask
                else:
                    with locks[i & 63]:
                        buf[i] |= mask
                return True
        else:
            slot_dedup = self.slot_dedup

            def emit(v):
                i, mask = v >> 3, 1 << (v & 7)
                if locks is None:
                    old = buf[i]
                    buf[i] = old | mask
                    return not (slot_dedup and old & mask)
                with locks[i & 63]:
                    old = buf[i]
                    buf[i] = old | mask
                    return not (slot_dedup and old & mask)
        return emit

    def finalize(self):
        out = self.out
        if self.fused:
            data = out.data
            for local in self.locals:
                data.extend(local)
            if self.marks is not None:
                self.marks.clear_ids(data)
        else:
            # The separate materialization pass of the unfused modes: size the
            # dense frontier now; sparsification happens lazily on first
            # sparse access.
            out.set_size(out._popcount())
            self.rt.stats.creation_passes += 1
        return out


# ---------------------------------------------------------------------------
# The edge apply
# ---------------------------------------------------------------------------

def _sparse_view(input_frontier, rt):
    if input_frontier.repr == fr.SPARSE:
        return input_frontier.data
    rt.stats.frontier_conversions += 1
    return input_frontier.convert(fr.SPARSE).data


def _dense_view(input_frontier, rt, repr_):
    if input_frontier.repr == repr_:
        return input_frontier
    rt.stats.frontier_conversions += 1
    return input_frontier.convert(repr_)


def edgeset_apply(g, input_frontier, udf, *, to_filter=None, schedule=None,
                  runtime=None, reuse=False, collect_output=True):
    """One traversal round: apply ``udf`` over the active edges.

    PUSH: for every active source u and out-edge (u, v) passing the filter,
    the udf runs with atomic write helpers. PULL: for every vertex v passing
    the filter and in-edge (u, v) with u in the input (membership per the
    schedule's pull frontier representation), the udf runs with owner-write
    rights to v. EDGE_ONLY iterates the flat (optionally blocked) COO array
    with source-membership tests and always provides the atomic interface.

    ``input_frontier=None`` means every vertex is active (topology-driven
    rounds). With ``reuse=True`` the input's storage is recycled into the
    frontier pool once the round completes.
    """
    s = schedule or Schedule()
    problems = validate(s)
    if problems:
        raise ScheduleError("invalid schedule: " + "; ".join(problems))
    rt = coerce_runtime(runtime)
    V = g.num_vertices
    if input_frontier is not None and input_frontier.universe != V:
        raise EngineError("frontier universe %d does not match graph (%d vertices)"
                          % (input_frontier.universe, V))
    rt.stats.direction_log.append(s.direction)

    builder = _OutputBuilder(rt, V, s) if collect_output else None
    emitters = ((lambda w: builder.emitter(w)) if builder is not None
                else (lambda w: None))

    if s.load_balance == "EDGE_ONLY":
        scanned = _apply_edge_only(g, input_frontier, udf, to_filter, s, rt, emitters)
    elif s.direction == PUSH:
        scanned = _apply_push(g, input_frontier, udf, to_filter, s, rt, emitters)
    else:
        scanned = _apply_pull(g, input_frontier, udf, to_filter, s, rt, emitters)
    rt.stats.edges_traversed += scanned

    out = builder.finalize() if builder is not None else None
    if reuse and input_frontier is not None:
        rt.frontiers.release(input_frontier)
        rt.stats.reused_frontiers += 1
    return out


def _apply_push(g, input_frontier, udf, to_filter, s, rt, emitters):
    offsets = g.out_offsets
    neighbors = g.out_neighbors
    weights = g.out_weights
    if input_frontier is None:
        active = range(g.num_vertices)
    else:
        active = _sparse_view(input_frontier, rt)
    per_worker = push_work(active, offsets, s.load_balance, rt.cfg)

    def make_task(worker, chunks):
        def task():
            ctx = EdgeContext(rt.locks, emitters(worker), exclusive_dst=False)
            filt = to_filter
            fn = udf
            nbrs = neighbors
            wts = weights
            scanned = 0
            for u, lo, hi in chunks:
                ctx.src = u
                scanned += hi - lo
                if wts is None:
                    for ei in range(lo, hi):
                        v = nbrs[ei]
                        if filt is not None and not filt(v):
                            continue
                        ctx.dst = v
                        fn(ctx)
                else:
                    for ei in range(lo, hi):
                        v = nbrs[ei]
                        if filt is not None and not filt(v):
                            continue
                        ctx.dst = v
                        ctx.weight = wts[ei]
                        fn(ctx)
            return scanned
        return task

    tasks = [make_task(w, chunks) for w, chunks in enumerate(per_worker)]
    return sum(rt.parallel_for(tasks))


def _apply_pull(g, input_frontier, udf, to_filter, s, rt, emitters):
    offsets = g.in_offsets
    neighbors = g.in_neighbors
    weights = g.in_weights
    member = None
    if input_frontier is not None:
        member = _membership_fn(_dense_view(input_frontier, rt, s.pull_frontier_repr))
    vertex_sets = _pull_vertex_sets(g, s, rt.cfg)

    def make_task(worker, work):
        def task():
            ctx = EdgeContext(rt.locks, emitters(worker), exclusive_dst=True)
            filt = to_filter
            fn = udf
            nbrs = neighbors
            wts = weights
            test = member
            scanned = 0
            # Work is either vertex ids (whole in-range) or explicit chunks.
            chunked = bool(work) and isinstance(work[0], tuple)
            items = work if chunked else ((v, offsets[v], offsets[v + 1]) for v in work)
            for v, lo, hi in items:
                if filt is not None and not filt(v):
                    continue
                ctx.dst = v
                scanned += hi - lo
                if wts is None:
                    for ei in range(lo, hi):
                        u = nbrs[ei]
                        if test is not None and not test(u):
                            continue
                        ctx.src = u
                        fn(ctx)
                else:
                    for ei in range(lo, hi):
                        u = nbrs[ei]
                        if test is not None and not test(u):
                            continue
                        ctx.src = u
                        ctx.weight = wts[ei]
                        fn(ctx)
            return scanned
        return task

    tasks = []
    for w, work in enumerate(vertex_sets):
        if not isinstance(work, (list, range)):
            work = list(work)
        tasks.append(make_task(w, work))
    return sum(rt.parallel_for(tasks))


def _apply_edge_only(g, input_frontier, udf, to_filter, s, rt, emitters):
    member = None
    if input_frontier is not None:
        view = input_frontier
        if view.repr == fr.SPARSE:
            rt.stats.frontier_conversions += 1
            view = view.convert(fr.BOOLMAP)
        member = _membership_fn(view)

    if s.blocking:
        n = s.blocking_size or bk.default_blocking_size(g.num_vertices)
        bg = rt.blocked_graph(g, n)

        def wrapped(ctx):
            if member is not None and not member(ctx.src):
                return
            if to_filter is not None and not to_filter(ctx.dst):
                return
            udf(ctx)

        def make_context(worker):
            return EdgeContext(rt.locks, emitters(worker), exclusive_dst=False)

        return bk.apply_blocked(bg, wrapped, rt, make_context=make_context)

    src_arr, dst_arr, w_arr = g.coo_src, g.coo_dst, g.coo_weights
    bounds = partition_even_chunks(g.num_edges, rt.cfg.num_workers)

    def make_task(worker, lo, hi):
        def task():
            ctx = EdgeContext(rt.locks, emitters(worker), exclusive_dst=False)
            filt = to_filter
            fn = udf
            test = member
            for i in range(lo, hi):
                u = src_arr[i]
                if test is not None and not test(u):
                    continue
                v = dst_arr[i]
                if filt is not None and not filt(v):
                    continue
                ctx.src = u
                ctx.dst = v
                if w_arr is not None:
                    ctx.weight = w_arr[i]
                fn(ctx)
            return hi - lo
        return task

    tasks = [make_task(w, lo, hi) for w, (lo, hi) in enumerate(bounds)]
    return sum(rt.parallel_for(tasks))


# ---------------------------------------------------------------------------
# Hybrid and fused execution
# ---------------------------------------------------------------------------

def pick_udf(s, udf_push, udf_pull):
    """Owner-write udf only where the engine grants destination ownership."""
    if s.direction == PULL and s.load_balance != "EDGE_ONLY":
        return udf_pull
    return udf_push


def hybrid_apply(g, input_frontier, udf_push, udf_pull, hybrid, *,
                 to_filter=None, runtime=None, reuse=False, collect_output=True):
    """Chooses s2 when ``|input| > threshold * |V|``, else s1, then applies."""
    if isinstance(hybrid.threshold, str):
        raise ScheduleError("unresolved threshold %r; supply --sched-arg"
                            % hybrid.threshold)
    problems = validate_hybrid(hybrid)
    if problems:
        raise ScheduleError("invalid hybrid schedule: " + "; ".join(problems))
    size = 0 if input_frontier is None else input_frontier.size
    chosen = hybrid.s2 if size > hybrid.threshold * g.num_vertices else hybrid.s1
    udf = pick_udf(chosen, udf_push, udf_pull)
    return edgeset_apply(g, input_frontier, udf, to_filter=to_filter,
                         schedule=chosen, runtime=runtime, reuse=reuse,
                         collect_output=collect_output)


def fused_loop(body, until, *, fusion=False, runtime=None,
               body_reuses_frontiers=True):
    """Run ``body`` until ``until()`` is true.

    With fusion off, each round's traversal is its own pool dispatch. With
    fusion on, the whole loop runs inside a single dispatch with an internal
    barrier per round; the body must recycle frontier storage (no fresh
    allocations per round), which the caller asserts via
    ``body_reuses_frontiers``.
    """
    rt = coerce_runtime(runtime)
    if fusion and not body_reuses_frontiers:
        raise ScheduleError(
            "kernel fusion requires a loop body that reuses frontier storage")
    if fusion:
        with rt.fused_dispatch():
            while not until():
                body()
                rt.stats.rounds += 1
    else:
        while not until():
            body()
            rt.stats.rounds += 1
    return rt.stats
