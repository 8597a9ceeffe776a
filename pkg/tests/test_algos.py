import math

import pytest

from schedge import oracle
from schedge.algos import (bc, bfs, bfs_levels, cc_soman, default_schedule,
                           pagerank, sssp_delta)
from schedge.graphio import Graph, with_random_weights
from schedge.runtime import ExecConfig
from schedge.sched import (Schedule, ScheduleError, ScheduleProgram,
                           parse_schedule)
from util import (path_graph, preferential_attachment, random_directed,
                  random_symmetric)


def program_with(schedule, fusion=False):
    program = ScheduleProgram({"s0:s1": schedule})
    if fusion:
        loop = Schedule(kernel_fusion=True)
        program.bindings["s0"] = loop
    return program


# ---------------------------------------------------------------------------
# BFS
# ---------------------------------------------------------------------------

def test_bfs_path_parents():
    g = path_graph(4)
    res = bfs(g, 0)
    assert res.values == [0, 0, 1, 2]
    assert bfs_levels(res.values) == [0, 1, 2, 3]


def test_bfs_isolated_source():
    g = Graph.from_coo(3, [1], [2])
    res = bfs(g, 0)
    assert res.values == [0, -1, -1]


def test_bfs_invalid_source():
    with pytest.raises(ValueError, match="invalid source"):
        bfs(path_graph(3), 7)


@pytest.mark.parametrize("workers", [1, 4])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_bfs_levels_match_oracle(workers, seed):
    g = random_symmetric(70, 220, seed)
    expect = oracle.bfs_oracle(g, 0)
    res = bfs(g, 0, exec_cfg=ExecConfig(num_workers=workers))
    assert bfs_levels(res.values) == expect


def test_bfs_parent_edges_exist():
    g = random_symmetric(50, 150, seed=5)
    res = bfs(g, 0)
    arcs = set(zip(g.coo_src, g.coo_dst))
    for v, p in enumerate(res.values):
        if p in (-1, v):
            continue
        assert (p, v) in arcs


def test_bfs_dispatches_equal_rounds_without_fusion():
    g = path_graph(5)
    res = bfs(g, 0)
    assert res.stats.dispatch_count == res.stats.rounds == 5


def test_bfs_kernel_fusion_single_dispatch():
    g = path_graph(5)
    plain = bfs(g, 0)
    fused = bfs(g, 0, program_with(Schedule(), fusion=True))
    assert plain.stats.dispatch_count == plain.stats.rounds
    assert fused.stats.dispatch_count == 1
    assert fused.stats.rounds == plain.stats.rounds
    assert fused.values == plain.values


def test_bfs_frontier_reuse_bounded_allocations():
    for n in (10, 200):
        res = bfs(g := path_graph(n), 0)
        assert res.stats.frontier_allocations == 2
        assert res.stats.reused_frontiers == res.stats.rounds


def test_bfs_hybrid_switches_and_matches_push_only():
    g = preferential_attachment(2000, 4, seed=1)
    hub = max(range(g.num_vertices),
              key=lambda v: g.out_offsets[v + 1] - g.out_offsets[v])
    text = """
    SimpleGPUSchedule s1;
    s1.configDirection(PUSH);
    SimpleGPUSchedule s2;
    s2.configDirection(PULL, BITMAP);
    s2.configFrontierCreation(UNFUSED_BITMAP);
    HybridGPUSchedule h1(INPUT_VERTEXSET_SIZE, 0.05, s1, s2);
    apply("s0:s1", h1);
    """
    res = bfs(g, hub, parse_schedule(text))
    log = res.stats.direction_log
    assert any(a == "PUSH" and b == "PULL" for a, b in zip(log, log[1:]))
    push_only = bfs(g, hub)
    assert bfs_levels(res.values) == bfs_levels(push_only.values)


def test_bfs_hybrid_never_switches_on_path():
    g = path_graph(300)
    text = """
    SimpleGPUSchedule s1;
    SimpleGPUSchedule s2;
    s2.configDirection(PULL);
    HybridGPUSchedule h1(INPUT_VERTEXSET_SIZE, 0.05, s1, s2);
    apply("s0:s1", h1);
    """
    res = bfs(g, 0, parse_schedule(text))
    assert set(res.stats.direction_log) == {"PUSH"}


# ---------------------------------------------------------------------------
# PageRank
# ---------------------------------------------------------------------------

def test_pagerank_two_cycle():
    g = Graph.from_coo(2, [0, 1], [1, 0])
    res = pagerank(g)
    assert res.values == pytest.approx([0.5, 0.5])


def test_pagerank_mass_conserved_every_iteration():
    g = random_directed(40, 120, seed=3)  # has dangling vertices
    sums = []
    pagerank(g, max_iters=25, tolerance=0.0,
             on_iteration=lambda ranks: sums.append(sum(ranks)))
    assert len(sums) == 25
    for s in sums:
        assert abs(s - 1.0) <= 1e-12


def test_pagerank_matches_dense_oracle():
    g = random_directed(60, 200, seed=4)
    expect = oracle.pagerank_dense_oracle(g, max_iters=100, tolerance=1e-12)
    got = pagerank(g, max_iters=100, tolerance=1e-12).values
    assert max(abs(a - b) for a, b in zip(got, expect)) < 1e-8


def test_pagerank_blocked_equals_unblocked_deterministic():
    # stable blocking keeps each destination's accumulation order intact, so
    # deterministic mode agrees to well under 1e-15
    g = random_directed(80, 400, seed=5)
    cfg = ExecConfig(num_workers=4, deterministic=True)
    blocked = program_with(Schedule(load_balance="EDGE_ONLY", blocking=True,
                                    blocking_size=16))
    unblocked = program_with(Schedule(load_balance="EDGE_ONLY"))
    rb = pagerank(g, blocked, cfg, max_iters=60, tolerance=0.0).values
    ru = pagerank(g, unblocked, cfg, max_iters=60, tolerance=0.0).values
    assert max(abs(a - b) for a, b in zip(rb, ru)) <= 1e-15


def test_pagerank_direction_variants_agree():
    g = random_directed(50, 170, seed=6)
    base = pagerank(g, max_iters=40, tolerance=0.0).values
    for s in (Schedule(direction="PULL"), Schedule(load_balance="STRICT"),
              Schedule(direction="PULL", load_balance="TWC")):
        got = pagerank(g, program_with(s), max_iters=40, tolerance=0.0).values
        assert max(abs(a - b) for a, b in zip(got, base)) < 1e-12


# ---------------------------------------------------------------------------
# SSSP
# ---------------------------------------------------------------------------

def test_sssp_hand_example():
    g = Graph.from_coo(3, [0, 0, 1], [1, 2, 2], [2, 10, 3])
    res = sssp_delta(g, 0, program_with(Schedule(delta=10)))
    assert res.values == [0, 2, 5]


def test_sssp_source_only():
    g = Graph.from_coo(3, [1], [2], [4])
    assert sssp_delta(g, 0).values == [0, math.inf, math.inf]


def test_sssp_requires_weights():
    with pytest.raises(ValueError, match="weights"):
        sssp_delta(path_graph(3), 0)


@pytest.mark.parametrize("delta", [1, 16, 10**9])
@pytest.mark.parametrize("seed", [0, 1])
def test_sssp_matches_dijkstra(delta, seed):
    g = random_directed(60, 240, seed, weighted=True, max_weight=50)
    expect = oracle.dijkstra_oracle(g, 0)
    got = sssp_delta(g, 0, program_with(Schedule(delta=delta))).values
    assert got == expect


def test_sssp_injected_weights_path():
    g = with_random_weights(path_graph(6), 1, 1000, seed=1)
    got = sssp_delta(g, 0, program_with(Schedule(delta=64))).values
    assert got == oracle.dijkstra_oracle(g, 0)


def test_sssp_rejects_hybrid_binding():
    g = Graph.from_coo(2, [0], [1], [3])
    from schedge.sched import HybridSchedule
    program = ScheduleProgram({"s0:s1": HybridSchedule()})
    with pytest.raises(ScheduleError, match="hybrid"):
        sssp_delta(g, 0, program)


# ---------------------------------------------------------------------------
# Connected components
# ---------------------------------------------------------------------------

def test_cc_two_triangles():
    g = Graph.from_coo(6, [0, 1, 2, 3, 4, 5], [1, 2, 0, 4, 5, 3])
    with pytest.warns(UserWarning, match="symmetrizing"):
        res = cc_soman(g)
    assert res.values == [0, 0, 0, 3, 3, 3]


def test_cc_edgeless():
    g = Graph.from_coo(5, [], [], symmetric=True)
    assert cc_soman(g).values == [0, 1, 2, 3, 4]


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_cc_matches_union_find(seed):
    g = random_symmetric(80, 140, seed)
    assert cc_soman(g).values == oracle.cc_unionfind_oracle(g)


def test_cc_load_balance_variants():
    g = random_symmetric(50, 100, seed=7)
    expect = oracle.cc_unionfind_oracle(g)
    for lb in ("EDGE_ONLY", "ETWC", "CM"):
        got = cc_soman(g, program_with(Schedule(load_balance=lb))).values
        assert got == expect


# ---------------------------------------------------------------------------
# Betweenness centrality
# ---------------------------------------------------------------------------

def test_bc_path():
    res = bc(path_graph(3), [0, 1, 2])
    assert res.values == pytest.approx([0.0, 1.0, 0.0])


def test_bc_star():
    g = Graph.from_coo(4, [0, 1, 0, 2, 0, 3], [1, 0, 2, 0, 3, 0],
                       symmetric=True)
    res = bc(g, [0, 1, 2, 3])
    assert res.values == pytest.approx([3.0, 0.0, 0.0, 0.0])


def test_bc_single_isolated_vertex():
    g = Graph.from_coo(1, [], [], symmetric=True)
    assert bc(g, [0]).values == [0.0]


def test_bc_requires_symmetric_and_sources():
    g = Graph.from_coo(3, [0], [1])
    with pytest.raises(ValueError, match="symmetric"):
        bc(g, [0])
    with pytest.raises(ValueError, match="non-empty"):
        bc(path_graph(3), [])
    with pytest.raises(ValueError, match="invalid source"):
        bc(path_graph(3), [9])


@pytest.mark.parametrize("workers", [1, 4])
def test_bc_matches_brandes(workers):
    g = random_symmetric(45, 130, seed=8)
    sources = [0, 7, 21]
    expect = oracle.brandes_oracle(g, sources)
    got = bc(g, sources, exec_cfg=ExecConfig(num_workers=workers)).values
    assert max(abs(a - b) for a, b in zip(got, expect)) < 1e-9


def test_bc_rejects_kernel_fusion():
    g = path_graph(4)
    with pytest.raises(ScheduleError, match="fusion"):
        bc(g, [0], program_with(Schedule(), fusion=True))


# ---------------------------------------------------------------------------
# Cross-cutting
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("workers", [1, 4, 8])
def test_worker_count_invariance(workers):
    gs = random_symmetric(60, 180, seed=9)
    gw = random_directed(60, 180, seed=9, weighted=True)
    cfg = ExecConfig(num_workers=workers,
                     deterministic=True)  # deterministic for the float algos
    assert bfs_levels(bfs(gs, 0, exec_cfg=cfg).values) == oracle.bfs_oracle(gs, 0)
    assert sssp_delta(gw, 0, exec_cfg=cfg).values == oracle.dijkstra_oracle(gw, 0)
    assert cc_soman(gs, exec_cfg=cfg).values == oracle.cc_unionfind_oracle(gs)
    pr = pagerank(gw, exec_cfg=cfg, max_iters=30, tolerance=0.0).values
    expect = oracle.pagerank_dense_oracle(gw, max_iters=30, tolerance=0.0)
    assert max(abs(a - b) for a, b in zip(pr, expect)) < 1e-8
    bcv = bc(gs, [0, 5], exec_cfg=cfg).values
    bce = oracle.brandes_oracle(gs, [0, 5])
    assert max(abs(a - b) for a, b in zip(bcv, bce)) < 1e-9


def test_fused_sssp_and_cc_single_dispatch():
    gw = random_directed(40, 150, seed=10, weighted=True)
    fused = sssp_delta(gw, 0, program_with(Schedule(delta=16), fusion=True))
    plain = sssp_delta(gw, 0, program_with(Schedule(delta=16)))
    assert fused.stats.dispatch_count == 1
    assert fused.values == plain.values

    gs = random_symmetric(40, 100, seed=11)
    fused_cc = cc_soman(gs, program_with(default_schedule("cc"), fusion=True))
    assert fused_cc.stats.dispatch_count == 1
    assert fused_cc.values == oracle.cc_unionfind_oracle(gs)


def test_unknown_label_rejected():
    g = path_graph(3)
    program = ScheduleProgram({"nope": Schedule()})
    with pytest.raises(ScheduleError, match="not exposed"):
        bfs(g, 0, program)


def test_self_loops_and_parallel_edges_preserved():
    g = Graph.from_coo(4, [0, 0, 0, 1, 2, 2], [0, 1, 1, 2, 2, 3],
                       [5, 1, 1, 2, 9, 4])
    assert g.num_edges == 6  # loader keeps loops and multi-edges
    assert bfs_levels(bfs(g, 0).values) == oracle.bfs_oracle(g, 0)
    assert sssp_delta(g, 0).values == oracle.dijkstra_oracle(g, 0)
    pr = pagerank(g, max_iters=50, tolerance=0.0).values
    pre = oracle.pagerank_dense_oracle(g, max_iters=50, tolerance=0.0)
    assert max(abs(a - b) for a, b in zip(pr, pre)) < 1e-12


def test_bfs_fused_hybrid_single_dispatch():
    g = preferential_attachment(800, 3, seed=4)
    hub = max(range(800), key=lambda v: g.out_offsets[v + 1] - g.out_offsets[v])
    text = """
    SimpleGPUSchedule s1;
    SimpleGPUSchedule s2;
    s2.configDirection(PULL, BITMAP);
    s2.configFrontierCreation(UNFUSED_BITMAP);
    HybridGPUSchedule h(INPUT_VERTEXSET_SIZE, 0.05, s1, s2);
    apply("s0:s1", h);
    SimpleGPUSchedule f;
    f.configKernelFusion(ENABLED);
    apply("s0", f);
    """
    for workers in (1, 4):
        res = bfs(g, hub, parse_schedule(text), ExecConfig(num_workers=workers))
        assert res.stats.dispatch_count == 1
        assert "PULL" in res.stats.direction_log
        assert bfs_levels(res.values) == oracle.bfs_oracle(g, hub)


def test_independent_queries_share_one_graph():
    import threading

    g = random_symmetric(80, 260, seed=12)
    expect = oracle.bfs_oracle(g, 0)
    results = []

    def query():
        res = bfs(g, 0, exec_cfg=ExecConfig(num_workers=2))
        results.append(bfs_levels(res.values))

    threads = [threading.Thread(target=query) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(results) == 4
    assert all(levels == expect for levels in results)
