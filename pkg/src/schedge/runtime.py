"""Execution substrate: worker pool, fused dispatch regions, and atomics.

The hierarchy is simulated: a CTA is a worker-pool task, and warp/thread
lanes are inner sequential loops inside that task. A normal parallel-for is
one pool dispatch; a fused region runs an entire loop inside a single
dispatch using persistent workers with a barrier per inner parallel-for.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field, asdict

from . import frontier as fr


class EngineError(RuntimeError):
    pass


_N_LOCK_STRIPES = 64


@dataclass
class ExecConfig:
    """Shape of the simulated CTA/warp/thread hierarchy.

    ``num_workers`` plays the role of the CTA count. ``deterministic`` runs
    every dispatch inline in worker order, which fixes atomic-update ordering
    and makes floating-point reductions reproducible.
    """

    num_workers: int = 1
    cta_size: int = 256
    warp_size: int = 32
    deterministic: bool = False

    def validate(self):
        if self.num_workers < 1:
            raise EngineError("num_workers must be >= 1")
        if self.warp_size < 1 or self.cta_size < 1:
            raise EngineError("warp_size and cta_size must be >= 1")
        if self.cta_size % self.warp_size:
            raise EngineError("warp_size must divide cta_size")

    @property
    def warps_per_cta(self):
        return self.cta_size // self.warp_size


@dataclass
class RunStats:
    """Counters collected over one algorithm run; serialized as JSON."""

    dispatch_count: int = 0
    rounds: int = 0
    edges_traversed: int = 0
    direction_log: list = field(default_factory=list)
    frontier_conversions: int = 0
    frontier_allocations: int = 0
    reused_frontiers: int = 0
    creation_passes: int = 0

    def to_dict(self):
        return asdict(self)


class _Crew:
    """Persistent workers for a fused region.

    The coordinating thread publishes a task list, releases the workers
    through a barrier, and joins them through a second barrier. Worker ``w``
    executes tasks ``w, w+n, w+2n, ...``.
    """

    def __init__(self, n):
        self.n = n
        self._barrier = threading.Barrier(n + 1)
        self._tasks = None
        self._results = None
        self._errors = []
        self._stop = False
        self._threads = [
            threading.Thread(target=self._worker, args=(w,), daemon=True)
            for w in range(n)
        ]
        for t in self._threads:
            t.start()

    def _worker(self, w):
        while True:
            self._barrier.wait()
            if self._stop:
                return
            try:
                tasks = self._tasks
                for i in range(w, len(tasks), self.n):
                    self._results[i] = tasks[i]()
            except BaseException as exc:  # surfaced after the join
                self._errors.append(exc)
            self._barrier.wait()

    def run(self, tasks):
        self._tasks = tasks
        self._results = [None] * len(tasks)
        self._barrier.wait()
        self._barrier.wait()
        self._tasks = None
        if self._errors:
            exc = self._errors[0]
            self._errors.clear()
            raise exc
        return self._results

    def shutdown(self):
        self._stop = True
        self._barrier.wait()
        for t in self._threads:
            t.join()


class FrontierPool:
    """Recycles frontier storage so iterative runs stay at O(1) allocations.

    One spare buffer is kept per (representation, universe). ``acquire``
    reuses the spare when it matches and counts a fresh allocation otherwise;
    ``release`` clears a retired frontier's storage back into the pool.
    """

    def __init__(self, stats):
        self._stats = stats
        self._spare = {}

    def acquire(self, universe, repr_):
        key = (repr_, universe)
        data = self._spare.pop(key, None)
        if data is None:
            self._stats.frontier_allocations += 1
            data = fr.new_storage(universe, repr_)
        return fr.VertexSubset(universe, repr_, data)

    def release(self, vs):
        key = (vs.repr, vs.universe)
        data = vs.data
        vs.retire()
        fr.clear_storage(data, vs.repr)
        self._spare.setdefault(key, data)

    def new_frontier(self, universe, ids):
        vs = self.acquire(universe, fr.SPARSE)
        for v in ids:
            if not 0 <= v < universe:
                raise EngineError("vertex id %d out of range" % v)
            vs.data.append(v)
        return vs


class Runtime:
    """Per-run execution state: pool, stats, locks, and reusable buffers."""

    def __init__(self, cfg=None):
        self.cfg = cfg or ExecConfig()
        self.cfg.validate()
        self.stats = RunStats()
        self.parallel = self.cfg.num_workers > 1 and not self.cfg.deterministic
        self.locks = (
            [threading.Lock() for _ in range(_N_LOCK_STRIPES)] if self.parallel else None
        )
        self.frontiers = FrontierPool(self.stats)
        self._executor = None
        self._crew = None
        self._fused_depth = 0
        self._counters = {}
        self._marks = {}

    # -- dispatch -------------------------------------------------------

    def parallel_for(self, tasks):
        """Run tasks across the workers; one dispatch unless inside a fused
        region. Returns the per-task results in task order."""
        if self._fused_depth == 0:
            self.stats.dispatch_count += 1
        if not self.parallel or len(tasks) <= 1:
            return [t() for t in tasks]
        if self._fused_depth and self._crew is not None:
            return self._crew.run(tasks)
        if self._executor is None:
            self._executor = ThreadPoolExecutor(max_workers=self.cfg.num_workers)
        futures = [self._executor.submit(t) for t in tasks]
        return [f.result() for f in futures]

    @contextmanager
    def fused_dispatch(self):
        """Everything inside runs as one dispatch with internal barriers."""
        self.stats.dispatch_count += 1
        self._fused_depth += 1
        started = False
        if self.parallel and self._crew is None:
            self._crew = _Crew(self.cfg.num_workers)
            started = True
        try:
            yield
        finally:
            self._fused_depth -= 1
            if started:
                self._crew.shutdown()
                self._crew = None

    @property
    def in_fused_region(self):
        return self._fused_depth > 0

    def close(self):
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False

    # -- shared per-run structures ---------------------------------------

    def counters(self, universe):
        """Round-stamp dedup state, allocated once per run per universe."""
        c = self._counters.get(universe)
        if c is None:
            c = fr.MonotonicCounters(universe, self.locks)
            self._counters[universe] = c
        return c

    def dense_marks(self, universe, kind):
        key = (universe, kind)
        m = self._marks.get(key)
        if m is None:
            m = fr.DenseMarks(universe, kind, self.locks)
            self._marks[key] = m
        return m

    def blocked_graph(self, g, n):
        from . import blocking  # local import; blocking builds on this module

        return blocking.blocked_for(g, n)


def coerce_runtime(runtime):
    """Accept a Runtime or an ExecConfig (or None) where either makes sense."""
    if runtime is None:
        return Runtime(ExecConfig())
    if isinstance(runtime, ExecConfig):
        return Runtime(runtime)
    return runtime


class EdgeContext:
    """Per-worker view of the edge being processed plus its write interface.

    ``src``/``dst``/``weight`` are rebound for every edge. In PUSH direction
    plain stores to destination data are unavailable (``exclusive_dst`` is
    False) and updates must go through the atomic helpers; destination-grouped
    PULL traversals set ``exclusive_dst`` and permit plain stores.
    """

    __slots__ = ("src", "dst", "weight", "exclusive_dst", "_locks", "_emit")

    def __init__(self, locks=None, emit=None, exclusive_dst=False):
        self.src = -1
        self.dst = -1
        self.weight = None
        self.exclusive_dst = exclusive_dst
        self._locks = locks
        self._emit = emit

    def cas(self, arr, idx, expected, new):
        locks = self._locks
        if locks is None:
            if arr[idx] == expected:
                arr[idx] = new
                return True
            return False
        with locks[idx & 63]:
            if arr[idx] == expected:
                arr[idx] = new
                return True
            return False

    def atomic_min(self, arr, idx, value):
        locks = self._locks
        if locks is None:
            if value < arr[idx]:
                arr[idx] = value
                return True
            return False
        with locks[idx & 63]:
            if value < arr[idx]:
                arr[idx] = value
                return True
            return False

    def atomic_add(self, arr, idx, value):
        locks = self._locks
        if locks is None:
            arr[idx] += value
            return
        with locks[idx & 63]:
            arr[idx] += value

    def store(self, arr, idx, value):
        if not self.exclusive_dst:
            raise EngineError(
                "plain stores require destination ownership (PULL direction)")
        arr[idx] = value

    def enqueue(self, v):
        emit = self._emit
        if emit is None:
            raise EngineError("no output frontier in this traversal")
        return emit(v)
