"""The built-in algorithms, written against the engine's labeled call sites.

Every algorithm exposes two schedule attachment labels: ``"s0"`` for its
iteration loop (kernel fusion lives here) and ``"s0:s1"`` for the edge apply
inside it. Unbound labels fall back to algorithm defaults.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from . import engine
from .graphio import Graph
from .priority import UNREACHED, BucketQueue
from .runtime import ExecConfig, Runtime
from .sched import (PUSH, HybridSchedule, Schedule, ScheduleProgram,
                    ScheduleError, validate, validate_hybrid)

ALGO_NAMES = ("bfs", "pagerank", "sssp", "cc", "bc")

# label -> what the binding controls
ALGO_LABELS = {
    "bfs": {"s0": "iteration loop (kernel fusion)", "s0:s1": "edge apply"},
    "pagerank": {"s0": "iteration loop (kernel fusion)", "s0:s1": "edge apply"},
    "sssp": {"s0": "iteration loop (kernel fusion)", "s0:s1": "relax apply (delta)"},
    "cc": {"s0": "iteration loop (kernel fusion)", "s0:s1": "hook apply"},
    "bc": {"s0": "per-source loop (fusion rejected)", "s0:s1": "forward apply"},
}

# Algorithms where per-round direction switching makes sense.
HYBRID_CAPABLE = ("bfs", "bc")


@dataclass
class AlgoResult:
    values: list
    stats: engine.RunStats


@dataclass
class _Plan:
    apply_schedule: object  # Schedule | HybridSchedule
    fusion: bool


def default_schedule(algo):
    if algo == "pagerank":
        return Schedule(load_balance="EDGE_ONLY")
    return Schedule()


def _plan(program, algo):
    program = program or ScheduleProgram()
    program.validate_bound_labels(set(ALGO_LABELS[algo]))
    loop = program.binding("s0")
    if isinstance(loop, HybridSchedule):
        raise ScheduleError("loop label 's0' takes a SimpleGPUSchedule")
    bound = program.binding("s0:s1")
    if bound is None:
        bound = default_schedule(algo)
    if isinstance(bound, HybridSchedule):
        if algo not in HYBRID_CAPABLE:
            raise ScheduleError("label 's0:s1' of %s takes a SimpleGPUSchedule "
                                "(hybrid direction switching applies to %s)"
                                % (algo, "/".join(HYBRID_CAPABLE)))
        if not bound.resolved():
            raise ScheduleError("unresolved threshold %r; supply --sched-arg"
                                % bound.threshold)
        problems = validate_hybrid(bound)
    else:
        problems = validate(bound)
    if problems:
        raise ScheduleError("invalid schedule for %s: %s" % (algo, "; ".join(problems)))
    fusion = bool(loop.kernel_fusion) if loop is not None else False
    return _Plan(bound, fusion)


def _apply_round(g, frontier, udf_push, udf_pull, bound, *, to_filter, rt,
                 reuse, collect_output=True):
    if isinstance(bound, HybridSchedule):
        return engine.hybrid_apply(g, frontier, udf_push, udf_pull, bound,
                                   to_filter=to_filter, runtime=rt, reuse=reuse,
                                   collect_output=collect_output)
    udf = engine.pick_udf(bound, udf_push, udf_pull)
    return engine.edgeset_apply(g, frontier, udf, to_filter=to_filter,
                                schedule=bound, runtime=rt, reuse=reuse,
                                collect_output=collect_output)


def _check_source(g, source):
    if not 0 <= source < g.num_vertices:
        raise ValueError("invalid source %d for graph with %d vertices"
                         % (source, g.num_vertices))


# ---------------------------------------------------------------------------
# BFS
# ---------------------------------------------------------------------------

def bfs(g, source, program=None, exec_cfg=None):
    """Parent array of a breadth-first traversal; -1 marks unreached.

    Parents depend on the schedule (any shortest-hop parent is valid); the
    level function derived from them does not.
    """
    _check_source(g, source)
    plan = _plan(program, "bfs")
    with Runtime(exec_cfg or ExecConfig()) as rt:
        parent = [-1] * g.num_vertices
        parent[source] = source
        frontier = rt.frontiers.new_frontier(g.num_vertices, [source])

        def to_filter(v):
            return parent[v] == -1

        def udf_push(ctx):
            if ctx.cas(parent, ctx.dst, -1, ctx.src):
                ctx.enqueue(ctx.dst)

        def udf_pull(ctx):
            v = ctx.dst
            if parent[v] == -1:
                ctx.store(parent, v, ctx.src)
                ctx.enqueue(v)

        def body():
            nonlocal frontier
            frontier = _apply_round(g, frontier, udf_push, udf_pull,
                                    plan.apply_schedule, to_filter=to_filter,
                                    rt=rt, reuse=True)

        engine.fused_loop(body, lambda: frontier.size == 0,
                          fusion=plan.fusion, runtime=rt)
        return AlgoResult(parent, rt.stats)


def bfs_levels(parents):
    """Hop distance per vertex implied by a BFS parent forest (-1 unreached)."""
    n = len(parents)
    level = [-1] * n
    for v in range(n):
        if parents[v] == -1 or level[v] != -1:
            continue
        chain = []
        u = v
        while level[u] == -1 and parents[u] != u:
            chain.append(u)
            u = parents[u]
        if level[u] == -1:
            level[u] = 0  # the root parents itself
        d = level[u]
        for w in reversed(chain):
            d += 1
            level[w] = d
    return level


# ---------------------------------------------------------------------------
# PageRank
# ---------------------------------------------------------------------------

def pagerank(g, program=None, exec_cfg=None, max_iters=100, tolerance=1e-9,
             damping=0.85, on_iteration=None):
    """Power iteration with uniform teleport and uniform dangling-mass
    redistribution; stops at ``max_iters`` or an L1 step below tolerance."""
    if g.num_vertices == 0:
        raise ValueError("empty graph")
    plan = _plan(program, "pagerank")
    with Runtime(exec_cfg or ExecConfig()) as rt:
        n = g.num_vertices
        offsets = g.out_offsets
        out_deg = [offsets[v + 1] - offsets[v] for v in range(n)]
        dangling = [v for v in range(n) if out_deg[v] == 0]
        rank = [1.0 / n] * n
        acc = [0.0] * n
        contrib = [0.0] * n
        state = {"iters": 0, "l1": float("inf")}

        def udf(ctx):
            ctx.atomic_add(acc, ctx.dst, contrib[ctx.src])

        def body():
            dangling_mass = 0.0
            for v in dangling:
                dangling_mass += rank[v]
            for v in range(n):
                d = out_deg[v]
                contrib[v] = rank[v] / d if d else 0.0
            _apply_round(g, None, udf, udf, plan.apply_schedule, to_filter=None,
                         rt=rt, reuse=False, collect_output=False)
            base = (1.0 - damping) / n + damping * dangling_mass / n
            l1 = 0.0
            for v in range(n):
                nv = base + damping * acc[v]
                l1 += abs(nv - rank[v])
                rank[v] = nv
                acc[v] = 0.0
            state["iters"] += 1
            state["l1"] = l1
            if on_iteration is not None:
                on_iteration(rank)

        def done():
            return state["iters"] >= max_iters or state["l1"] < tolerance

        engine.fused_loop(body, done, fusion=plan.fusion, runtime=rt)
        return AlgoResult(rank, rt.stats)


# ---------------------------------------------------------------------------
# SSSP (delta-stepping)
# ---------------------------------------------------------------------------

def sssp_delta(g, source, program=None, exec_cfg=None):
    """Exact shortest-path distances via delta-stepping; inf for unreachable.

    The bucket width comes from the apply schedule's delta. Relaxation runs
    source-driven, so PULL direction requests are executed as PUSH.
    """
    _check_source(g, source)
    if g.out_weights is None:
        raise ValueError("sssp needs edge weights (load weighted or inject "
                         "random weights)")
    plan = _plan(program, "sssp")
    s = plan.apply_schedule.copy()
    s.direction = PUSH
    with Runtime(exec_cfg or ExecConfig()) as rt:
        q = BucketQueue(g.num_vertices, s.delta, rt.locks)
        q.seed(source, 0)
        prios = q.priorities

        def udf(ctx):
            q.update_priority_min(ctx.dst, prios[ctx.src] + ctx.weight)

        def body():
            if q.current.size == 0:
                q.advance()
                return
            cur = q.take_current()
            engine.edgeset_apply(g, cur, udf, schedule=s, runtime=rt,
                                 collect_output=False)
            q.recycle(cur)

        engine.fused_loop(body, q.done, fusion=plan.fusion, runtime=rt)
        dist = [p if p != UNREACHED else float("inf") for p in prios]
        return AlgoResult(dist, rt.stats)


# ---------------------------------------------------------------------------
# Connected components (hooking + pointer jumping)
# ---------------------------------------------------------------------------

def _pointer_jump(label):
    while True:
        moved = False
        for v in range(len(label)):
            l = label[v]
            ll = label[l]
            if ll != l:
                label[v] = ll
                moved = True
        if not moved:
            return


def cc_soman(g, program=None, exec_cfg=None):
    """Component labels: iterated edge hooking (larger root under smaller,
    atomically) plus full pointer jumping until stable. The output is
    canonicalized so every label is its component's minimum vertex id."""
    if not g.symmetric:
        warnings.warn("cc expects a symmetric graph; symmetrizing a copy")
        from .graphio import _symmetrize

        src, dst, w, _ = _symmetrize(g.coo_src, g.coo_dst, g.coo_weights)
        g = Graph.from_coo(g.num_vertices, src, dst, w, symmetric=True)
    plan = _plan(program, "cc")
    with Runtime(exec_cfg or ExecConfig()) as rt:
        n = g.num_vertices
        label = list(range(n))
        changed = [True]

        def udf(ctx):
            la = label[ctx.src]
            lb = label[ctx.dst]
            if la == lb:
                return
            if la < lb:
                lo, hi = la, lb
            else:
                lo, hi = lb, la
            if ctx.atomic_min(label, hi, lo):
                changed[0] = True

        def body():
            changed[0] = False
            engine.edgeset_apply(g, None, udf, schedule=plan.apply_schedule,
                                 runtime=rt, collect_output=False)
            _pointer_jump(label)

        engine.fused_loop(body, lambda: not changed[0], fusion=plan.fusion,
                          runtime=rt)

        first_member = {}
        for v in range(n):
            first_member.setdefault(label[v], v)
        return AlgoResult([first_member[label[v]] for v in range(n)], rt.stats)


# ---------------------------------------------------------------------------
# Betweenness centrality (forward sigma + backward dependency rounds)
# ---------------------------------------------------------------------------

def bc(g, sources, program=None, exec_cfg=None):
    """Brandes scores restricted to ``sources``, unnormalized; each unordered
    pair counts once (the undirected accumulation is halved).

    The forward phase records one frontier snapshot per round for the
    backward phase, so the loop body cannot reuse frontier storage and
    kernel fusion is rejected at schedule application.
    """
    if not sources:
        raise ValueError("sources must be a non-empty list")
    for s0 in sources:
        _check_source(g, s0)
    if not g.symmetric:
        raise ValueError("bc assumes a symmetric graph; load with symmetrize")
    plan = _plan(program, "bc")
    if plan.fusion:
        raise ScheduleError("kernel fusion rejected for bc: the loop body "
                            "retains per-round frontiers (not reusable)")
    bound = plan.apply_schedule
    backward_s = (bound.s1 if isinstance(bound, HybridSchedule) else bound).copy()
    backward_s.direction = PUSH

    with Runtime(exec_cfg or ExecConfig()) as rt:
        n = g.num_vertices
        centrality = [0.0] * n
        for s0 in sources:
            depth = [-1] * n
            sigma = [0] * n
            depth[s0] = 0
            sigma[s0] = 1
            level = [0]
            rounds = []

            def to_filter(v):
                # Undiscovered vertices, plus next-level ones so every
                # shortest-path edge contributes to the path counts.
                d = depth[v]
                return d == -1 or d == level[0] + 1

            def fwd_push(ctx):
                nl = level[0] + 1
                if ctx.cas(depth, ctx.dst, -1, nl):
                    ctx.enqueue(ctx.dst)
                if depth[ctx.dst] == nl:
                    ctx.atomic_add(sigma, ctx.dst, sigma[ctx.src])

            def fwd_pull(ctx):
                v = ctx.dst
                if depth[v] == -1:
                    ctx.store(depth, v, level[0] + 1)
                    ctx.enqueue(v)
                ctx.store(sigma, v, sigma[v] + sigma[ctx.src])

            frontier = rt.frontiers.new_frontier(n, [s0])
            while frontier.size:
                rounds.append(frontier.members())
                frontier = _apply_round(g, frontier, fwd_push, fwd_pull, bound,
                                        to_filter=to_filter, rt=rt, reuse=True)
                level[0] += 1
                rt.stats.rounds += 1
            rt.frontiers.release(frontier)

            delta = [0.0] * n

            def bwd_udf(ctx):
                u, v = ctx.src, ctx.dst
                if depth[v] == depth[u] + 1:
                    ctx.atomic_add(delta, u,
                                   sigma[u] / sigma[v] * (1.0 + delta[v]))

            for r in range(len(rounds) - 2, -1, -1):
                wave = rt.frontiers.new_frontier(n, rounds[r])
                engine.edgeset_apply(g, wave, bwd_udf, schedule=backward_s,
                                     runtime=rt, reuse=True,
                                     collect_output=False)
                rt.stats.rounds += 1

            for v in range(n):
                if v != s0:
                    centrality[v] += delta[v]

        return AlgoResult([c / 2.0 for c in centrality], rt.stats)
