"""Command-line harness: run, bench, tune, verify, convert, list-labels."""

from __future__ import annotations

import argparse
import csv
import json
import math
import random
import statistics
import sys
import time

from . import algos, blocking, graphio, oracle, sched
from .runtime import ExecConfig

ALGO_ALIASES = {"pr": "pagerank", "sssp_delta": "sssp"}

# Schedule dimensions each algorithm actually reacts to; used by tune/verify
# sampling so trials differ observably.
ALGO_DIMENSIONS = {
    "bfs": ["direction", "pull_frontier_repr", "load_balance", "blocking",
            "frontier_creation", "dedup", "dedup_strategy", "kernel_fusion"],
    "pagerank": ["direction", "load_balance", "blocking", "kernel_fusion"],
    "sssp": ["load_balance", "blocking", "kernel_fusion"],
    "cc": ["direction", "load_balance", "blocking", "kernel_fusion"],
    "bc": ["direction", "pull_frontier_repr", "load_balance",
           "frontier_creation", "dedup", "dedup_strategy"],
}

SSSP_DELTA_CANDIDATES = (1, 4, 16, 64, 256)

PR_TOLERANCE = 1e-8
BC_TOLERANCE = 1e-6


def _canonical_algo(name):
    algo = ALGO_ALIASES.get(name, name)
    if algo not in algos.ALGO_NAMES:
        raise SystemExit("unknown algorithm %r (choose from %s)"
                         % (name, ", ".join(algos.ALGO_NAMES)))
    return algo


def _exec_config(args):
    return ExecConfig(num_workers=args.workers, cta_size=args.cta_size,
                      warp_size=args.warp_size, deterministic=args.deterministic)


def _load_graph_for(algo, args):
    symmetrize = args.symmetrize
    if algo in ("cc", "bc") and not symmetrize:
        print("note: %s assumes a symmetric graph; loading with symmetrize" % algo)
        symmetrize = True
    g = graphio.load_graph(args.graph, weighted=args.weighted,
                           symmetrize=symmetrize)
    if algo == "sssp" and not g.weighted:
        print("note: unweighted graph; injecting uniform random weights "
              "1..1000 (seed %d)" % args.seed)
        g = graphio.with_random_weights(g, 1, 1000, seed=args.seed)
    return g


def _sched_args(pairs):
    values = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise SystemExit("--sched-arg expects k=value, got %r" % pair)
        k, v = pair.split("=", 1)
        try:
            values[int(k)] = v
        except ValueError:
            raise SystemExit("--sched-arg index must be an integer: %r" % pair) from None
    return values


def _load_program(args):
    if args.schedule:
        program = sched.load_schedule_file(args.schedule)
    else:
        program = sched.ScheduleProgram()
    program.resolve_args(_sched_args(args.sched_arg))
    if getattr(args, "delta", None):
        bound = program.binding("s0:s1")
        if bound is None:
            s = sched.Schedule(delta=args.delta)
            program.bindings["s0:s1"] = s
        elif isinstance(bound, sched.Schedule):
            bound.delta = args.delta
        else:
            print("warning: --delta ignored for a hybrid schedule")
    if getattr(args, "block", None):
        bound = program.bindings.setdefault("s0:s1",
                                            sched.Schedule(load_balance="EDGE_ONLY"))
        if isinstance(bound, sched.Schedule):
            bound.blocking = True
            bound.blocking_size = args.block
            bound.load_balance = "EDGE_ONLY"
    return program


def _sources_for(algo, args, g):
    if algo != "bc":
        return None
    if args.sources:
        return [int(tok) for tok in args.sources.split(",")]
    return [args.source]


def _run_algorithm(algo, g, program, cfg, args):
    if algo == "bfs":
        return algos.bfs(g, args.source, program, cfg)
    if algo == "pagerank":
        return algos.pagerank(g, program, cfg, max_iters=args.max_iters,
                              tolerance=args.tolerance)
    if algo == "sssp":
        return algos.sssp_delta(g, args.source, program, cfg)
    if algo == "cc":
        return algos.cc_soman(g, program, cfg)
    return algos.bc(g, _sources_for(algo, args, g), program, cfg)


def _format_value(x):
    if isinstance(x, float):
        if math.isinf(x):
            return "inf"
        return repr(x)
    return str(x)


def _write_outputs(prefix, algo, graph_path, result, wall_ms):
    values_path = prefix + ".values.txt"
    with open(values_path, "w") as fh:
        for x in result.values:
            fh.write(_format_value(x) + "\n")
    stats = dict(result.stats.to_dict(), algorithm=algo, graph=graph_path,
                 wall_ms=wall_ms)
    stats_path = prefix + ".stats.json"
    with open(stats_path, "w") as fh:
        json.dump(stats, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return values_path, stats_path


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_run(args):
    algo = _canonical_algo(args.algorithm)
    g = _load_graph_for(algo, args)
    program = _load_program(args)
    cfg = _exec_config(args)
    t0 = time.perf_counter()
    result = _run_algorithm(algo, g, program, cfg, args)
    wall_ms = (time.perf_counter() - t0) * 1000.0
    values_path, stats_path = _write_outputs(args.out, algo, args.graph,
                                             result, wall_ms)
    print("%s on %s: %.2f ms (%d rounds, %d dispatches)"
          % (algo, args.graph, wall_ms, result.stats.rounds,
             result.stats.dispatch_count))
    print("wrote %s and %s" % (values_path, stats_path))
    return 0


def _timed_runs(algo, g, program, cfg, args, warmup=1, repeats=3):
    for _ in range(warmup):
        _run_algorithm(algo, g, program, cfg, args)
    times = []
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = _run_algorithm(algo, g, program, cfg, args)
        times.append((time.perf_counter() - t0) * 1000.0)
    return statistics.median(times), result


def _preprocess_blocking(g, program):
    """Build any blocked view the program needs; returns (ms, segments)."""
    bound = program.binding("s0:s1")
    schedules = []
    if isinstance(bound, sched.HybridSchedule):
        schedules = [bound.s1, bound.s2]
    elif bound is not None:
        schedules = [bound]
    for s in schedules:
        if s.blocking:
            n = s.blocking_size or blocking.default_blocking_size(g.num_vertices)
            t0 = time.perf_counter()
            bg = blocking.blocked_for(g, n)
            return (time.perf_counter() - t0) * 1000.0, bg.num_segments
    return None, None


def cmd_bench(args):
    algo = _canonical_algo(args.algorithm)
    g = _load_graph_for(algo, args)
    program = _load_program(args)
    cfg = _exec_config(args)
    prep_ms, segments = _preprocess_blocking(g, program)
    if prep_ms is not None:
        print("preprocessing (blocking, %d segments): %.2f ms" % (segments, prep_ms))
    median_ms, result = _timed_runs(algo, g, program, cfg, args,
                                    warmup=args.warmup, repeats=args.repeats)
    print("%s on %s: median %.2f ms over %d runs (1+%d protocol)"
          % (algo, args.graph, median_ms, args.repeats, args.repeats))
    return 0


def candidate_schedules(algo, seed=0, strategy="exhaustive", limit=None):
    """Tuning candidates: the algorithm's default first, then the valid
    cross-product of its observable dimensions (delta variants for sssp)."""
    space = sched.enumerate_space(ALGO_DIMENSIONS[algo])
    candidates = list(space.schedules)
    if algo == "sssp":
        extended = []
        for s in candidates:
            for delta in SSSP_DELTA_CANDIDATES:
                c = s.copy()
                c.delta = delta
                extended.append(c)
        candidates = extended
    if strategy == "random":
        rng = random.Random(seed)
        rng.shuffle(candidates)
    if limit is not None:
        candidates = candidates[:limit]
    default = algos.default_schedule(algo)
    return [default] + candidates


def _program_for(candidate):
    program = sched.ScheduleProgram()
    program.bindings["s0:s1"] = candidate.copy()
    if candidate.kernel_fusion:
        loop = sched.Schedule()
        loop.kernel_fusion = True
        program.bindings["s0"] = loop
    return program


def _serialize_program(program):
    return sched.pretty_print(program).replace("\n", " ").strip()


def cmd_tune(args):
    algo = _canonical_algo(args.algorithm)
    if args.budget <= 0:
        raise SystemExit("--budget must be positive (seconds)")
    g = _load_graph_for(algo, args)
    cfg = _exec_config(args)
    candidates = candidate_schedules(algo, seed=args.seed, strategy=args.strategy)
    small_enough = g.num_vertices <= oracle.ORACLE_MAX_VERTICES
    rows = []
    best = None
    started = time.perf_counter()
    for idx, candidate in enumerate(candidates):
        if idx > 0 and time.perf_counter() - started > args.budget:
            break
        program = _program_for(candidate)
        try:
            median_ms, result = _timed_runs(algo, g, program, cfg, args)
        except (sched.ScheduleError, ValueError) as exc:
            rows.append((idx, _serialize_program(program), "", "error: %s" % exc))
            continue
        ok = ""
        if small_enough and args.check:
            ok = "true" if _oracle_ok(algo, g, result.values, args) else "false"
        rows.append((idx, _serialize_program(program), "%.4f" % median_ms, ok))
        if best is None or median_ms < best[0]:
            best = (median_ms, program)
    with open(args.trials, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["schedule_id", "serialized_schedule", "median_ms", "pass"])
        writer.writerows(rows)
    if best is None:
        raise SystemExit("no schedule completed within the budget")
    with open(args.out, "w") as fh:
        fh.write(sched.pretty_print(best[1]))
    print("tried %d/%d schedules in %.1f s; best median %.2f ms"
          % (len(rows), len(candidates), time.perf_counter() - started, best[0]))
    print("wrote %s and %s" % (args.out, args.trials))
    return 0


def _oracle_values(algo, g, args):
    if algo == "bfs":
        return oracle.bfs_oracle(g, args.source)
    if algo == "pagerank":
        return oracle.pagerank_dense_oracle(g, max_iters=args.max_iters,
                                            tolerance=args.tolerance)
    if algo == "sssp":
        return oracle.dijkstra_oracle(g, args.source)
    if algo == "cc":
        return oracle.cc_unionfind_oracle(g)
    return oracle.brandes_oracle(g, _sources_for(algo, args, g))


def compare_with_oracle(algo, got, expected):
    """(ok, detail) per the algorithm's equivalence notion."""
    if algo == "bfs":
        levels = algos.bfs_levels(got)
        return levels == expected, "levels mismatch"
    if algo in ("sssp", "cc"):
        return got == expected, "exact mismatch"
    tol = PR_TOLERANCE if algo == "pagerank" else BC_TOLERANCE
    worst = max((abs(a - b) for a, b in zip(got, expected)), default=0.0)
    return worst <= tol, "max abs error %.3g (tolerance %g)" % (worst, tol)


def _oracle_ok(algo, g, values, args):
    return compare_with_oracle(algo, values, _oracle_values(algo, g, args))[0]


def cmd_verify(args):
    algo = _canonical_algo(args.algorithm)
    g = _load_graph_for(algo, args)
    if g.num_vertices > oracle.ORACLE_MAX_VERTICES:
        raise SystemExit("oracle size guard exceeded: %d vertices (max %d)"
                         % (g.num_vertices, oracle.ORACLE_MAX_VERTICES))
    cfg = _exec_config(args)
    expected = _oracle_values(algo, g, args)
    programs = [("given", _load_program(args))]
    if args.samples:
        pool = candidate_schedules(algo, seed=args.seed, strategy="random",
                                   limit=args.samples)
        programs += [("sample-%d" % i, _program_for(c))
                     for i, c in enumerate(pool[1:], 1)]
    failures = 0
    for name, program in programs:
        result = _run_algorithm(algo, g, program, cfg, args)
        ok, detail = compare_with_oracle(algo, result.values, expected)
        print("%s %s: %s" % ("PASS" if ok else "FAIL", name,
                             "ok" if ok else detail))
        if not ok:
            failures += 1
    print("verify %s: %d/%d schedules match the oracle"
          % (algo, len(programs) - failures, len(programs)))
    return 1 if failures else 0


def cmd_convert(args):
    g = graphio.load_graph(args.graph, weighted=args.weighted,
                           symmetrize=args.symmetrize)
    n = args.block or blocking.default_blocking_size(g.num_vertices)
    t0 = time.perf_counter()
    bg = blocking.block_edges(g, n)
    prep_ms = (time.perf_counter() - t0) * 1000.0
    blocking.save_blocked(bg, args.out)
    print("blocked %d edges into %d segments (width %d) in %.2f ms; wrote %s"
          % (bg.num_edges, bg.num_segments, n, prep_ms, args.out))
    return 0


def cmd_list_labels(args):
    names = [_canonical_algo(args.algorithm)] if args.algorithm else list(algos.ALGO_NAMES)
    for algo in names:
        print("%s:" % algo)
        for label, meaning in algos.ALGO_LABELS[algo].items():
            print("  %-6s %s" % (label, meaning))
    if args.space:
        space = sched.enumerate_space()
        print("schedule space:")
        for name, values in space.dimensions.items():
            print("  %-20s %d  (%s)" % (name, len(values),
                                        ", ".join(str(v) for v in values)))
        print("  raw combinations:   %d" % space.raw_count)
        print("  valid combinations: %d" % space.valid_count)
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _add_exec_flags(p):
    p.add_argument("--workers", type=int, default=1,
                   help="worker count standing in for CTAs (default 1)")
    p.add_argument("--cta-size", type=int, default=256)
    p.add_argument("--warp-size", type=int, default=32)
    p.add_argument("--deterministic", action="store_true",
                   help="serialize dispatches for reproducible float sums")
    p.add_argument("--seed", type=int, default=0)


def _add_graph_flags(p):
    p.add_argument("graph", help="edge list or MatrixMarket file")
    p.add_argument("--weighted", action="store_true")
    p.add_argument("--symmetrize", action="store_true")


def _add_algo_flags(p):
    p.add_argument("--schedule", help="schedule file to apply")
    p.add_argument("--sched-arg", action="append", metavar="K=V",
                   help="positional value for \"argv[k]\" thresholds")
    p.add_argument("--source", type=int, default=0)
    p.add_argument("--sources", help="comma-separated source list (bc)")
    p.add_argument("--delta", type=int, help="priority bucket width (sssp)")
    p.add_argument("--block", type=int,
                   help="enable edge blocking with this segment width")
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--tolerance", type=float, default=1e-9)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="schedge",
        description="Graph analytics driven by a textual scheduling language")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an algorithm and write results")
    p.add_argument("algorithm")
    _add_graph_flags(p)
    _add_algo_flags(p)
    _add_exec_flags(p)
    p.add_argument("--out", default="run", help="output file prefix")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("bench", help="median-of-3 timing with one warmup")
    p.add_argument("algorithm")
    _add_graph_flags(p)
    _add_algo_flags(p)
    _add_exec_flags(p)
    p.add_argument("--warmup", type=int, default=1)
    p.add_argument("--repeats", type=int, default=3)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("tune", help="search the schedule space")
    p.add_argument("algorithm")
    _add_graph_flags(p)
    _add_algo_flags(p)
    _add_exec_flags(p)
    p.add_argument("--budget", type=float, required=True, help="seconds")
    p.add_argument("--strategy", choices=("exhaustive", "random"),
                   default="exhaustive")
    p.add_argument("--out", default="best.sched")
    p.add_argument("--trials", default="trials.csv")
    p.add_argument("--check", action="store_true",
                   help="record oracle pass/fail per trial (small graphs)")
    p.set_defaults(fn=cmd_tune)

    p = sub.add_parser("verify", help="compare against the serial oracles")
    p.add_argument("algorithm")
    _add_graph_flags(p)
    _add_algo_flags(p)
    _add_exec_flags(p)
    p.add_argument("--samples", type=int, default=0,
                   help="additionally verify this many sampled schedules")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("convert", help="write a blocked-graph sidecar")
    _add_graph_flags(p)
    p.add_argument("--block", type=int, help="segment width (default: cache budget)")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_convert)

    p = sub.add_parser("list-labels", help="schedule attachment points")
    p.add_argument("algorithm", nargs="?")
    p.add_argument("--space", action="store_true",
                   help="also print the schedule dimension table")
    p.set_defaults(fn=cmd_list_labels)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (graphio.GraphLoadError, sched.ScheduleError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
