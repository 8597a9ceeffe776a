"""Active-vertexset representations, conversions, and deduplication.

A :class:`VertexSubset` stores its members in one of three representations:

* ``SPARSE``  -- a list of vertex ids (may contain duplicates with dedup off)
* ``BITMAP``  -- one bit per vertex
* ``BOOLMAP`` -- one byte per vertex

Dense representations never contain duplicates by construction. Output
frontiers accept concurrent enqueues; dedup policies make the accept decision
thread-safe (lock-striped test-and-set where a read-modify-write is needed).
"""

from __future__ import annotations

SPARSE = "SPARSE"
BITMAP = "BITMAP"
BOOLMAP = "BOOLMAP"

_REPRS = (SPARSE, BITMAP, BOOLMAP)

# Dedup strategy tokens (the dense ones reuse the representation names).
MONOTONIC_COUNTERS = "MONOTONIC_COUNTERS"


class FrontierError(ValueError):
    pass


def _bitmap_bytes(universe):
    return bytearray((universe + 7) // 8)


class MonotonicCounters:
    """Per-vertex round stamps: a vertex is accepted once per round.

    The stamp array lives for a whole algorithm run; advancing the round
    counter makes every vertex acceptable again without clearing anything.
    """

    def __init__(self, universe, locks=None):
        self.stamps = [-1] * universe
        self.round = 0
        self._locks = locks

    def next_round(self):
        self.round += 1

    def accept(self, v):
        stamps = self.stamps
        r = self.round
        locks = self._locks
        if locks is None:
            if stamps[v] == r:
                return False
            stamps[v] = r
            return True
        with locks[v & 63]:
            if stamps[v] == r:
                return False
            stamps[v] = r
            return True


class DenseMarks:
    """Test-and-set dedup over a bitmap or boolmap scratch buffer."""

    def __init__(self, universe, kind, locks=None):
        if kind not in (BITMAP, BOOLMAP):
            raise FrontierError("bad dedup mark kind %r" % kind)
        self.kind = kind
        self.universe = universe
        self.buf = _bitmap_bytes(universe) if kind == BITMAP else bytearray(universe)
        self._locks = locks

    def accept(self, v):
        buf = self.buf
        if self.kind == BOOLMAP:
            # Single bytearray store; no read-modify-write for the boolmap
            # case, so the GIL already makes the transition atomic enough,
            # but the accept decision itself needs the lock.
            locks = self._locks
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
        i, mask = v >> 3, 1 << (v & 7)
        locks = self._locks
        if locks is None:
            old = buf[i]
            if old & mask:
                return False
            buf[i] = old | mask
            return True
        with locks[i & 63]:
            old = buf[i]
            if old & mask:
                return False
            buf[i] = old | mask
            return True

    def clear_ids(self, ids):
        buf = self.buf
        if self.kind == BOOLMAP:
            for v in ids:
                buf[v] = 0
        else:
            for v in ids:
                buf[v >> 3] &= ~(1 << (v & 7))

    def clear_all(self):
        self.buf[:] = bytes(len(self.buf))


class NoDedup:
    def accept(self, v):
        return True


NO_DEDUP = NoDedup()


class VertexSubset:
    """A set (or, with dedup off, multiset) of active vertices."""

    __slots__ = ("universe", "repr", "data", "_size", "_retired")

    def __init__(self, universe, repr_=SPARSE, data=None):
        if repr_ not in _REPRS:
            raise FrontierError("unknown representation %r" % repr_)
        self.universe = universe
        self.repr = repr_
        if data is None:
            data = new_storage(universe, repr_)
        self.data = data
        self._size = None
        self._retired = False

    @classmethod
    def from_vertices(cls, universe, ids):
        """SPARSE subset of the given ids (validated against the universe)."""
        out = []
        for v in ids:
            if not 0 <= v < universe:
                raise FrontierError("vertex id %d out of range [0, %d)" % (v, universe))
            out.append(v)
        return cls(universe, SPARSE, out)

    # -- size ---------------------------------------------------------------

    @property
    def size(self):
        """Active entry count (distinct members for dense representations)."""
        if self.repr == SPARSE:
            return len(self.data)
        if self._size is None:
            self._size = self._popcount()
        return self._size

    def _popcount(self):
        if self.repr == BOOLMAP:
            return sum(self.data)
        return int.from_bytes(bytes(self.data), "little").bit_count()

    def invalidate_size(self):
        self._size = None

    def set_size(self, n):
        self._size = n

    # -- membership ---------------------------------------------------------

    def contains(self, v):
        if self.repr == SPARSE:
            return v in self.data
        if self.repr == BOOLMAP:
            return bool(self.data[v])
        return bool(self.data[v >> 3] & (1 << (v & 7)))

    def members(self):
        """Member ids: insertion order for SPARSE, ascending for dense."""
        if self.repr == SPARSE:
            return list(self.data)
        if self.repr == BOOLMAP:
            buf = self.data
            return [v for v in range(self.universe) if buf[v]]
        out = []
        base = 0
        for byte in self.data:
            while byte:
                low = byte & -byte
                out.append(base + low.bit_length() - 1)
                byte ^= low
            base += 8
        return out

    # -- mutation -----------------------------------------------------------

    def enqueue(self, v, dedup=None):
        """Insert ``v``; returns the dedup accept decision.

        With no dedup policy every enqueue is accepted (a SPARSE subset may
        then hold duplicates). Dense representations cannot hold duplicates
        regardless of the policy.
        """
        if self._retired:
            raise FrontierError("enqueue on a retired frontier")
        if not 0 <= v < self.universe:
            raise FrontierError("vertex id %d out of range [0, %d)" % (v, self.universe))
        accepted = True if dedup is None else dedup.accept(v)
        if self.repr == SPARSE:
            if accepted:
                self.data.append(v)  # list.append is atomic under the GIL
        elif self.repr == BOOLMAP:
            self.data[v] = 1
            self._size = None
        else:
            self.data[v >> 3] |= 1 << (v & 7)
            self._size = None
        return accepted

    def extend_sparse(self, ids):
        if self.repr != SPARSE:
            raise FrontierError("extend_sparse on dense subset")
        self.data.extend(ids)

    def clear(self):
        clear_storage(self.data, self.repr)
        self._size = None

    def retire(self):
        self._retired = True

    # -- conversion ---------------------------------------------------------

    def convert(self, target):
        """New subset with the same member set in ``target`` representation.

        SPARSE -> dense deduplicates; dense -> SPARSE yields ascending ids.
        """
        if target not in _REPRS:
            raise FrontierError("unknown representation %r" % target)
        if target == self.repr:
            out = VertexSubset(self.universe, target, _copy_storage(self.data, self.repr))
            out._size = self._size
            return out
        members = self.members()
        out = VertexSubset(self.universe, target)
        if target == SPARSE:
            out.data.extend(members)
        elif target == BOOLMAP:
            buf = out.data
            for v in members:
                buf[v] = 1
        else:
            buf = out.data
            for v in members:
                buf[v >> 3] |= 1 << (v & 7)
        return out

    def __repr__(self):
        return "VertexSubset(universe=%d, repr=%s, size=%d)" % (
            self.universe, self.repr, self.size)


def new_storage(universe, repr_):
    if repr_ == SPARSE:
        return []
    if repr_ == BOOLMAP:
        return bytearray(universe)
    return _bitmap_bytes(universe)


def clear_storage(data, repr_):
    if repr_ == SPARSE:
        data.clear()
    else:
        data[:] = bytes(len(data))


def _copy_storage(data, repr_):
    if repr_ == SPARSE:
        return list(data)
    return bytearray(data)


def from_vertices(universe, ids):
    return VertexSubset.from_vertices(universe, ids)


def convert(vs, target):
    return vs.convert(target)


def enqueue(vs, v, dedup=None):
    return vs.enqueue(v, dedup)
