"""Two-bucket priority queue for ordered traversals (delta-stepping).

``current`` holds vertices whose priority falls inside the active bucket
``[index*delta, (index+1)*delta)``; everything farther out parks in ``far``
and is re-bucketed lazily when the queue advances. Priorities only decrease
over a run.
"""

from __future__ import annotations

from . import frontier as fr
from .runtime import EngineError

UNREACHED = 2**64 - 1  # reserved infinity sentinel for 64-bit priorities


class BucketQueue:
    """Delta-bucketed work queue over per-vertex priorities."""

    def __init__(self, universe, delta, locks=None):
        if delta < 1:
            raise ValueError("delta must be >= 1")
        self.universe = universe
        self.delta = delta
        self.priorities = [UNREACHED] * universe
        self.current_bucket_index = 0
        self.current = fr.VertexSubset(universe, fr.SPARSE)
        self.far = fr.VertexSubset(universe, fr.SPARSE)
        self._spare = None
        self._locks = locks
        # Per-round dedup for current; persistent membership marks for far.
        self._current_marks = fr.DenseMarks(universe, fr.BOOLMAP, locks)
        self._far_marks = fr.DenseMarks(universe, fr.BOOLMAP, locks)

    def seed(self, v, priority=0):
        """Place a starting vertex; bucket index snaps to its bucket."""
        self.priorities[v] = priority
        self.current_bucket_index = priority // self.delta
        self.current.enqueue(v, self._current_marks)

    def take_current(self):
        """Hand the pending current bucket to the caller and start a fresh
        one; the caller relaxes the returned subset and hands its storage
        back through :meth:`recycle`."""
        taken = self.current
        self._current_marks.clear_ids(taken.data)
        spare = self._spare
        self._spare = None
        self.current = spare if spare is not None else fr.VertexSubset(self.universe, fr.SPARSE)
        return taken

    def recycle(self, taken):
        """Return a drained bucket's storage for the next round."""
        taken.data.clear()
        taken._size = None
        if self._spare is None:
            self._spare = taken

    def update_priority_min(self, v, candidate):
        """Atomically lower ``priorities[v]`` to ``candidate`` if smaller.

        On improvement the vertex is enqueued (deduplicated) into current
        when its new bucket equals the active index, else into far. Returns
        whether the priority improved.
        """
        if candidate < 0:
            raise ValueError("priorities are non-negative")
        prios = self.priorities
        locks = self._locks
        if locks is None:
            if candidate >= prios[v]:
                return False
            prios[v] = candidate
        else:
            with locks[v & 63]:
                if candidate >= prios[v]:
                    return False
                prios[v] = candidate
        if candidate // self.delta == self.current_bucket_index:
            self.current.enqueue(v, self._current_marks)
        else:
            self.far.enqueue(v, self._far_marks)
        return True

    def advance(self):
        """Move the nearest far bucket into current; None when drained.

        Entries whose priority has since improved into an already-processed
        range are dropped here (membership is re-derived from the priorities
        array, not trusted from enqueue time).
        """
        if self.current.size:
            raise EngineError("advance with a non-empty current bucket")
        delta = self.delta
        prios = self.priorities
        self._far_marks.clear_ids(self.far.data)
        candidates = []
        best = None
        for v in self.far.data:
            b = prios[v] // delta
            if b <= self.current_bucket_index:
                continue  # stale: already handled in an earlier bucket
            candidates.append((v, b))
            if best is None or b < best:
                best = b
        self.far = fr.VertexSubset(self.universe, fr.SPARSE)
        if best is None:
            return None
        self.current_bucket_index = best
        for v, b in candidates:
            if b == best:
                self.current.enqueue(v, self._current_marks)
            else:
                self.far.enqueue(v, self._far_marks)
        return self.current

    def done(self):
        return self.current.size == 0 and self.far.size == 0
