"""schedge: a graph-analytics engine driven by a textual scheduling language.

Traversal direction, load balancing (including chunked three-stage
partitioning and edge blocking), frontier representation and creation,
deduplication, bucketed priorities, and fused-loop dispatch are orthogonal
schedule dimensions executed over a simulated CTA/warp/thread hierarchy on a
CPU worker pool.
"""

from .algos import (ALGO_LABELS, ALGO_NAMES, AlgoResult, bc, bfs, bfs_levels,
                    cc_soman, pagerank, sssp_delta)
from .blocking import BlockedGraph, apply_blocked, block_edges
from .frontier import BITMAP, BOOLMAP, SPARSE, VertexSubset
from .graphio import (Graph, GraphLoadError, load_edge_list, load_graph,
                      load_matrix_market, out_degree, with_random_weights)
from .priority import UNREACHED, BucketQueue
from .runtime import EdgeContext, EngineError, ExecConfig, RunStats, Runtime
from .sched import (HybridSchedule, ParseError, Schedule, ScheduleError,
                    ScheduleProgram, enumerate_space, parse_schedule,
                    pretty_print, validate)
from .engine import edgeset_apply, fused_loop, hybrid_apply

__version__ = "0.1.0"

__all__ = [
    "ALGO_LABELS", "ALGO_NAMES", "AlgoResult", "bc", "bfs", "bfs_levels",
    "cc_soman", "pagerank", "sssp_delta",
    "BlockedGraph", "apply_blocked", "block_edges",
    "BITMAP", "BOOLMAP", "SPARSE", "VertexSubset",
    "Graph", "GraphLoadError", "load_edge_list", "load_graph",
    "load_matrix_market", "out_degree", "with_random_weights",
    "UNREACHED", "BucketQueue",
    "EdgeContext", "EngineError", "ExecConfig", "RunStats", "Runtime",
    "HybridSchedule", "ParseError", "Schedule", "ScheduleError",
    "ScheduleProgram", "enumerate_space", "parse_schedule", "pretty_print",
    "validate",
    "edgeset_apply", "fused_loop", "hybrid_apply",
    "__version__",
]
