"""Parallel iterators: pipeline combinators and splitting-policy adaptors.

A :class:`ParIter` is a lazy description of a pipeline over a divisible
source.  Transform adaptors (map, filter, zip, fold) change what the items
are; policy adaptors (bound_depth, even_levels, force_depth, size_limit,
cap, join_context_policy, thief_splitting) change only the answer to
"should this piece be divided?".  Policy state updates on ``divide()``;
plain cuts through ``divide_at`` copy it unchanged.

Terminal operations build the producer stack, pick the configured scheduler
(join by default; ``.adaptive()``, ``.depjoin()``, ``.by_blocks()`` change
it), and run on the active runtime.
"""

from __future__ import annotations

import bisect
import math
import threading
from dataclasses import dataclass
from typing import Any, Callable, Optional

import numpy as np

from . import runtime as _rt
from . import schedulers as _sched
from .core import (NOTHING, Done, Producer, Reducer, Source, WorkProducer,
                   WorkState, WrapProducer, as_source)


# ------------------------------------------------------------ transform ops

class MapProducer(Producer):
    __slots__ = ("base", "f")

    def __init__(self, base: Producer, f: Callable[[Any], Any]):
        self.base = base
        self.f = f

    def __len__(self):
        return len(self.base)

    @property
    def origin(self):
        return self.base.origin

    def should_be_divided(self):
        return self.base.should_be_divided()

    def division_declined(self):
        self.base.division_declined()

    def task_completed(self):
        self.base.task_completed()

    def divide(self):
        l, r = self.base.divide()
        return MapProducer(l, self.f), MapProducer(r, self.f)

    def divide_at(self, i):
        l, r = self.base.divide_at(i)
        return MapProducer(l, self.f), MapProducer(r, self.f)

    def __next__(self):
        return self.f(next(self.base))

    def partial_fold(self, init, fold_op, limit):
        f = self.f
        return self.base.partial_fold(init, lambda acc, x: fold_op(acc, f(x)), limit)


class FilterProducer(Producer):
    """Length reports the not-yet-consumed base items (an upper bound on
    emitted items); fold budgets count consumed base items."""

    __slots__ = ("base", "pred")

    def __init__(self, base: Producer, pred: Callable[[Any], bool]):
        self.base = base
        self.pred = pred

    def __len__(self):
        return len(self.base)

    @property
    def origin(self):
        return self.base.origin

    def should_be_divided(self):
        return self.base.should_be_divided()

    def division_declined(self):
        self.base.division_declined()

    def task_completed(self):
        self.base.task_completed()

    def divide(self):
        l, r = self.base.divide()
        return FilterProducer(l, self.pred), FilterProducer(r, self.pred)

    def divide_at(self, i):
        l, r = self.base.divide_at(i)
        return FilterProducer(l, self.pred), FilterProducer(r, self.pred)

    def __next__(self):
        while True:
            x = next(self.base)
            if self.pred(x):
                return x

    def partial_fold(self, init, fold_op, limit):
        acc = init
        taken = 0
        while taken < limit:
            try:
                x = next(self.base)
            except StopIteration:
                break
            taken += 1
            if self.pred(x):
                acc = fold_op(acc, x)
                if isinstance(acc, Done):
                    break
        return acc


class ZipProducer(Producer):
    """Lockstep pair of equal-length producers; the left side's policy
    stack decides divisions and the right side is cut at the same index."""

    __slots__ = ("a", "b")

    def __init__(self, a: Producer, b: Producer):
        self.a = a
        self.b = b

    def __len__(self):
        return len(self.a)

    @property
    def origin(self):
        return self.a.origin

    def should_be_divided(self):
        return self.a.should_be_divided()

    def division_declined(self):
        self.a.division_declined()

    def task_completed(self):
        self.a.task_completed()
        self.b.task_completed()

    def divide(self):
        a1, a2 = self.a.divide()
        b1, b2 = self.b.divide_at(len(a1))
        return ZipProducer(a1, b1), ZipProducer(a2, b2)

    def divide_at(self, i):
        a1, a2 = self.a.divide_at(i)
        b1, b2 = self.b.divide_at(len(a1))
        return ZipProducer(a1, b1), ZipProducer(a2, b2)

    def __next__(self):
        return next(self.a), next(self.b)

    def partial_fold(self, init, fold_op, limit):
        acc = init
        taken = 0
        while taken < limit:
            try:
                x = next(self.a)
            except StopIteration:
                break
            y = next(self.b)
            acc = fold_op(acc, (x, y))
            taken += 1
            if isinstance(acc, Done):
                break
        return acc

    @property
    def take_chunk(self):
        ta = getattr(self.a, "take_chunk", None)
        tb = getattr(self.b, "take_chunk", None)
        if ta is None or tb is None:
            return None

        def take(limit):
            k = min(limit, len(self.a))
            ca, oa = ta(k)
            cb, _ = tb(len(ca))
            return (ca, cb), oa

        return take


_UNSET = object()


class FoldProducer(Producer):
    """Folds runs of base items into per-leaf accumulators.

    Each undivided piece emits exactly one item: the accumulator built from
    everything it consumed.  The reported length exceeds the base length by
    one until that emission happens.
    """

    __slots__ = ("base", "make", "op", "acc", "emitted")

    def __init__(self, base: Producer, make: Callable[[], Any], op: Callable[[Any, Any], Any],
                 acc=_UNSET, emitted: bool = False):
        self.base = base
        self.make = make
        self.op = op
        self.acc = acc
        self.emitted = emitted

    def __len__(self):
        return 0 if self.emitted else len(self.base) + 1

    @property
    def origin(self):
        return self.base.origin

    def should_be_divided(self):
        return self.base.should_be_divided()

    def division_declined(self):
        self.base.division_declined()

    def task_completed(self):
        self.base.task_completed()

    def _parts(self, l, r):
        # consumed prefix items live in our accumulator and stay on the left
        return (FoldProducer(l, self.make, self.op, self.acc, self.emitted),
                FoldProducer(r, self.make, self.op))

    def divide(self):
        return self._parts(*self.base.divide())

    def divide_at(self, i):
        # a cut at or past the end severs no base items; the right side then
        # has nothing to fold and must report empty, or block-wise callers
        # that cut by size would never see this piece drain
        l, r = self.base.divide_at(min(i, len(self.base)))
        return (FoldProducer(l, self.make, self.op, self.acc, self.emitted),
                FoldProducer(r, self.make, self.op,
                             emitted=self.emitted or i >= len(self.base)))

    def _current(self):
        return self.make() if self.acc is _UNSET else self.acc

    def __next__(self):
        if self.emitted:
            raise StopIteration
        acc = self._current()
        for x in self.base:
            acc = self.op(acc, x)
        self.emitted = True
        return acc

    def partial_fold(self, init, fold_op, limit):
        if self.emitted:
            return init
        taken = 0
        while taken < limit:
            try:
                x = next(self.base)
            except StopIteration:
                break
            self.acc = self.op(self._current(), x)
            taken += 1
        if len(self.base) == 0 and taken < limit:
            self.emitted = True
            return fold_op(init, self._current())
        return init


# --------------------------------------------------------------- policy ops

class _PolicyWrap(Producer):
    """Transparent wrapper: items, chunks and views pass straight through;
    only the division decision changes."""

    __slots__ = ("base",)

    def __init__(self, base: Producer):
        self.base = base

    def __len__(self):
        return len(self.base)

    @property
    def origin(self):
        return self.base.origin

    @property
    def view(self):
        return self.base.view

    @property
    def take_chunk(self):
        return getattr(self.base, "take_chunk", None)

    def division_declined(self):
        self.base.division_declined()

    def task_completed(self):
        self.base.task_completed()

    def __next__(self):
        return next(self.base)

    def partial_fold(self, init, fold_op, limit):
        return self.base.partial_fold(init, fold_op, limit)

    def _clone(self, new_base):
        raise NotImplementedError

    def divide_at(self, i):
        l, r = self.base.divide_at(i)
        return self._clone(l), self._clone(r)


class BoundDepth(_PolicyWrap):
    """Divide while the division depth is below a limit."""

    __slots__ = ("limit", "depth")

    def __init__(self, base, limit: int, depth: int = 0):
        super().__init__(base)
        self.limit = limit
        self.depth = depth

    def should_be_divided(self):
        return self.depth < self.limit and self.base.should_be_divided()

    def divide(self):
        l, r = self.base.divide()
        return (BoundDepth(l, self.limit, self.depth + 1),
                BoundDepth(r, self.limit, self.depth + 1))

    def _clone(self, nb):
        return BoundDepth(nb, self.limit, self.depth)


class EvenLevels(_PolicyWrap):
    """Force leaves onto even depths: any piece at an odd depth divides."""

    __slots__ = ("odd",)

    def __init__(self, base, odd: bool = False):
        super().__init__(base)
        self.odd = odd

    def should_be_divided(self):
        return self.base.should_be_divided() or self.odd

    def divide(self):
        l, r = self.base.divide()
        return EvenLevels(l, not self.odd), EvenLevels(r, not self.odd)

    def _clone(self, nb):
        return EvenLevels(nb, self.odd)


class ForceDepth(_PolicyWrap):
    """Divide unconditionally until a depth, then defer to the base."""

    __slots__ = ("limit", "depth")

    def __init__(self, base, limit: int, depth: int = 0):
        super().__init__(base)
        self.limit = limit
        self.depth = depth

    def should_be_divided(self):
        return self.depth < self.limit or self.base.should_be_divided()

    def divide(self):
        l, r = self.base.divide()
        return (ForceDepth(l, self.limit, self.depth + 1),
                ForceDepth(r, self.limit, self.depth + 1))

    def _clone(self, nb):
        return ForceDepth(nb, self.limit, self.depth)


class SizeLimit(_PolicyWrap):
    """Refuse division once a piece is at or below the threshold size."""

    __slots__ = ("threshold",)

    def __init__(self, base, threshold: int):
        super().__init__(base)
        self.threshold = threshold

    def should_be_divided(self):
        return len(self.base) > self.threshold and self.base.should_be_divided()

    def divide(self):
        l, r = self.base.divide()
        return SizeLimit(l, self.threshold), SizeLimit(r, self.threshold)

    def _clone(self, nb):
        return SizeLimit(nb, self.threshold)


class CapState:
    """Shared active-task budget for one pipeline run."""

    __slots__ = ("_lock", "threshold", "active", "hwm")

    def __init__(self, threshold: int):
        self._lock = threading.Lock()
        self.threshold = threshold
        self.active = 1
        self.hwm = 1

    def try_grant(self) -> bool:
        with self._lock:
            if self.active >= self.threshold:
                return False
            self.active += 1
            if self.active > self.hwm:
                self.hwm = self.active
            return True

    def release(self) -> None:
        with self._lock:
            self.active -= 1


class Cap(_PolicyWrap):
    """Grant divisions only while the live-task count is under a threshold.

    The grant is consumed by ``should_be_divided() == True``; a scheduler
    that then declines must call ``division_declined`` (they all do), and
    the grant is returned when the divided subtree completes.
    """

    __slots__ = ("state",)

    def __init__(self, base, state: CapState):
        super().__init__(base)
        self.state = state

    def should_be_divided(self):
        if not self.base.should_be_divided():
            return False
        if self.state.try_grant():
            return True
        self.base.division_declined()
        return False

    def division_declined(self):
        self.state.release()
        self.base.division_declined()

    def task_completed(self):
        self.state.release()
        self.base.task_completed()

    def divide(self):
        l, r = self.base.divide()
        return Cap(l, self.state), Cap(r, self.state)

    def _clone(self, nb):
        return Cap(nb, self.state)


class JoinContextPolicy(_PolicyWrap):
    """Left pieces always divide (up to a depth); right pieces divide only
    when the task running them was stolen."""

    __slots__ = ("limit", "depth", "is_left")

    def __init__(self, base, limit: int, depth: int = 0, is_left: bool = True):
        super().__init__(base)
        self.limit = limit
        self.depth = depth
        self.is_left = is_left

    def should_be_divided(self):
        if self.depth >= self.limit or not self.base.should_be_divided():
            return False
        return self.is_left or _rt.current_task_migrated()

    def divide(self):
        l, r = self.base.divide()
        return (JoinContextPolicy(l, self.limit, self.depth + 1, True),
                JoinContextPolicy(r, self.limit, self.depth + 1, False))

    def _clone(self, nb):
        return JoinContextPolicy(nb, self.limit, self.depth, self.is_left)


class ThiefSplit(_PolicyWrap):
    """Divide a fixed number of levels, then again only after a migration.

    Each piece carries a countdown and the worker that created it.  A piece
    whose countdown is spent divides again only when it finds itself on a
    different worker (it was stolen); the countdown then restarts.
    """

    __slots__ = ("initial", "counter", "owner")

    def __init__(self, base, initial: Optional[int] = None,
                 counter: Optional[int] = None, owner: Optional[int] = None):
        super().__init__(base)
        self.initial = initial
        self.counter = counter
        self.owner = owner

    def _resolve(self) -> None:
        # the default level count depends on the pool that actually runs the
        # piece, so it is read lazily from the executing worker
        if self.initial is None:
            w = _rt._current_worker()
            p = w.pool.worker_count if w is not None else _rt.active_runtime().worker_count
            self.initial = max(1, math.ceil(math.log2(p)) + 1)
        if self.counter is None:
            self.counter = self.initial

    def should_be_divided(self):
        if not self.base.should_be_divided():
            return False
        self._resolve()
        if self.owner is None:
            self.owner = _rt.current_worker_index()
        if self.counter > 0:
            return True
        return _rt.current_worker_index() != self.owner

    def divide(self):
        self._resolve()
        me = _rt.current_worker_index()
        nxt = (self.counter if self.counter > 0 else self.initial) - 1
        l, r = self.base.divide()
        return (ThiefSplit(l, self.initial, nxt, me),
                ThiefSplit(r, self.initial, nxt, me))

    def _clone(self, nb):
        return ThiefSplit(nb, self.initial, self.counter, self.owner)


# -------------------------------------------------------------------- merge

def _key(x, shift):
    return x >> shift if shift else x


def _bisect_sorted(data, lo, hi, key, right_side: bool, shift: int):
    if isinstance(data, np.ndarray) and data.dtype.kind in "iu":
        from . import _kernels
        return int(_kernels.bisect_shift(data, lo, hi, key, right_side, shift))
    if shift:
        # shifted keys only make sense for integers; search manually so the
        # shift applies to the probed elements too
        key >>= shift
        while lo < hi:
            mid = (lo + hi) // 2
            v = data[mid] >> shift
            if v < key or (right_side and v == key):
                lo = mid + 1
            else:
                hi = mid
        return lo
    if right_side:
        return bisect.bisect_right(data, key, lo, hi)
    return bisect.bisect_left(data, key, lo, hi)


class MergeProducer(Producer):
    """Merged view of two sorted inputs; ties come from the left input.

    Division cuts the longer input at its midpoint and binary-searches the
    matching cut in the other, picking the insertion side that keeps every
    tie's left-before-right order.  Halves are balanced only approximately.
    """

    __slots__ = ("a", "ai", "aend", "b", "bi", "bend", "_origin", "shift", "_fast")

    def __init__(self, a, ai, aend, b, bi, bend, origin=0, shift=0):
        self.a = a
        self.ai = ai
        self.aend = aend
        self.b = b
        self.bi = bi
        self.bend = bend
        self._origin = origin
        self.shift = shift
        self._fast = (isinstance(a, np.ndarray) and isinstance(b, np.ndarray)
                      and a.dtype.kind in "iu" and a.dtype == b.dtype)

    def __len__(self):
        return (self.aend - self.ai) + (self.bend - self.bi)

    @property
    def origin(self):
        return self._origin

    def should_be_divided(self):
        # dividing needs a side of length >= 2 so the midpoint cut makes
        # progress on both halves
        return max(self.aend - self.ai, self.bend - self.bi) >= 2

    def divide_at(self, i):
        # a plain positional cut is not meaningful for a merge; divide()
        # picks the split point, block cuts fall back to it
        return self.divide()

    def divide(self):
        la = self.aend - self.ai
        lb = self.bend - self.bi
        if la == 0 and lb == 0:
            empty = MergeProducer(self.a, self.ai, self.ai, self.b, self.bi,
                                  self.bi, self._origin, self.shift)
            return self, empty
        if la >= lb:
            mid = self.ai + la // 2
            k = self.a[mid]
            bcut = _bisect_sorted(self.b, self.bi, self.bend, k, False, self.shift)
            acut = mid
        else:
            mid = self.bi + lb // 2
            k = self.b[mid]
            acut = _bisect_sorted(self.a, self.ai, self.aend, k, True, self.shift)
            bcut = mid
        left_len = (acut - self.ai) + (bcut - self.bi)
        left = MergeProducer(self.a, self.ai, acut, self.b, self.bi, bcut,
                             self._origin, self.shift)
        right = MergeProducer(self.a, acut, self.aend, self.b, bcut, self.bend,
                              self._origin + left_len, self.shift)
        return left, right

    def __next__(self):
        if self.ai < self.aend:
            if self.bi < self.bend:
                x = self.a[self.ai]
                y = self.b[self.bi]
                if _key(x, self.shift) <= _key(y, self.shift):
                    self.ai += 1
                else:
                    x = y
                    self.bi += 1
            else:
                x = self.a[self.ai]
                self.ai += 1
        elif self.bi < self.bend:
            x = self.b[self.bi]
            self.bi += 1
        else:
            raise StopIteration
        self._origin += 1
        return x

    @property
    def take_chunk(self):
        if not self._fast:
            return None

        def take(limit):
            from . import _kernels
            k = min(limit, len(self))
            out = np.empty(k, dtype=self.a.dtype)
            self.ai, self.bi, produced = _kernels.merge_collect(
                self.a, self.ai, self.aend, self.b, self.bi, self.bend,
                out, k, self.shift)
            o = self._origin
            self._origin += produced
            return out[:produced], o

        return take


# ------------------------------------------------------------------- blocks

@dataclass(frozen=True)
class BlockSchedule:
    """Geometric block sizes: block k holds ``initial_size * growth**k``
    elements (the last one truncated).  ``initial_size=None`` resolves to
    the runtime's worker count when the run starts."""

    initial_size: Optional[int] = None
    growth_factor: float = 2.0

    def __post_init__(self):
        if self.initial_size is not None and self.initial_size < 1:
            raise ValueError("initial_size must be >= 1")
        if self.growth_factor < 1.0:
            raise ValueError("growth_factor must be >= 1.0")

    def size(self, k: int, default_initial: int) -> int:
        init = self.initial_size if self.initial_size is not None else max(1, default_initial)
        return max(1, int(init * self.growth_factor ** k))


# ------------------------------------------------------------------ pipeline

class ParIter:
    """A lazily composed parallel pipeline.

    Adaptors return new pipelines; nothing runs until a terminal operation
    (``sum``, ``reduce_with``, ``collect``, ``for_each``).  The producer
    stack is rebuilt per run, so one pipeline value can be run many times.
    """

    __slots__ = ("_make", "scheduler", "blocks", "adaptive_cfg")

    def __init__(self, make: Callable[[], Producer], scheduler: str = "join",
                 blocks: Optional[BlockSchedule] = None,
                 adaptive_cfg: Optional[_sched.AdaptiveConfig] = None):
        self._make = make
        self.scheduler = scheduler
        self.blocks = blocks
        self.adaptive_cfg = adaptive_cfg

    def _derive(self, make) -> "ParIter":
        return ParIter(make, self.scheduler, self.blocks, self.adaptive_cfg)

    # transforms ------------------------------------------------------------
    def map(self, f: Callable[[Any], Any]) -> "ParIter":
        base = self._make
        return self._derive(lambda: MapProducer(base(), f))

    def filter(self, pred: Callable[[Any], bool]) -> "ParIter":
        base = self._make
        return self._derive(lambda: FilterProducer(base(), pred))

    def zip(self, other) -> "ParIter":
        base = self._make
        other_make = _coerce_make(other)
        la, lb = len(base()), len(other_make())
        if la != lb:
            raise ValueError(f"zip length mismatch: {la} vs {lb}")
        return self._derive(lambda: ZipProducer(base(), other_make()))

    def fold(self, make_acc: Callable[[], Any], fold_op: Callable[[Any, Any], Any]) -> "ParIter":
        base = self._make
        return self._derive(lambda: FoldProducer(base(), make_acc, fold_op))

    # policies --------------------------------------------------------------
    def bound_depth(self, limit: int) -> "ParIter":
        _check_depth(limit)
        base = self._make
        return self._derive(lambda: BoundDepth(base(), limit))

    def even_levels(self) -> "ParIter":
        base = self._make
        return self._derive(lambda: EvenLevels(base()))

    def force_depth(self, limit: int) -> "ParIter":
        _check_depth(limit)
        base = self._make
        return self._derive(lambda: ForceDepth(base(), limit))

    def size_limit(self, threshold: int) -> "ParIter":
        if threshold < 1:
            raise ValueError("size_limit threshold must be >= 1")
        base = self._make
        return self._derive(lambda: SizeLimit(base(), threshold))

    def cap(self, threshold: int) -> "ParIter":
        if threshold < 1:
            raise ValueError("cap threshold must be >= 1")
        base = self._make
        return self._derive(lambda: Cap(base(), CapState(threshold)))

    def join_context_policy(self, limit: int) -> "ParIter":
        _check_depth(limit)
        base = self._make
        return self._derive(lambda: JoinContextPolicy(base(), limit))

    def thief_splitting(self, initial: Optional[int] = None) -> "ParIter":
        if initial is not None and initial < 0:
            raise ValueError("thief_splitting counter must be >= 0")
        base = self._make
        return self._derive(lambda: ThiefSplit(base(), initial))

    # schedulers ------------------------------------------------------------
    def adaptive(self, cfg: Optional[_sched.AdaptiveConfig] = None) -> "ParIter":
        return ParIter(self._make, "adaptive", self.blocks,
                       cfg or self.adaptive_cfg or _sched.AdaptiveConfig())

    def with_join(self) -> "ParIter":
        return ParIter(self._make, "join", self.blocks, self.adaptive_cfg)

    def depjoin(self) -> "ParIter":
        return ParIter(self._make, "depjoin", self.blocks, self.adaptive_cfg)

    def by_blocks(self, schedule: Optional[BlockSchedule] = None) -> "ParIter":
        return ParIter(self._make, self.scheduler,
                       schedule or BlockSchedule(), self.adaptive_cfg)

    # terminals -------------------------------------------------------------
    def _run(self, reducer: Reducer, ctx: Optional[_sched.ExecCtx] = None):
        ctx = ctx or _sched.make_ctx()
        return _sched.drive(self._make(), reducer, ctx, self.scheduler,
                            self.adaptive_cfg, self.blocks)

    def reduce_with(self, op: Callable[[Any, Any], Any], ctx=None):
        """Combine all items with ``op``; None when the pipeline is empty."""
        reducer = Reducer(
            identity=None,
            combine=op,
            fold_item=lambda acc, x: x if acc is NOTHING else op(acc, x),
        )
        return self._run(reducer, ctx)

    def sum(self, ctx=None):
        reducer = Reducer(
            identity=lambda: 0,
            combine=lambda a, b: a + b,
            fold_item=lambda acc, x: acc + x,
            chunk_fold=_sum_chunk,
        )
        return self._run(reducer, ctx)

    def collect(self, ctx=None) -> list:
        reducer = Reducer(
            identity=list,
            combine=_extend,
            fold_item=_append,
            chunk_fold=_extend_chunk,
        )
        return self._run(reducer, ctx)

    def for_each(self, f: Callable[[Any], None], chunk: Optional[Callable[[Any], None]] = None,
                 ctx=None) -> None:
        reducer = Reducer(
            identity=lambda: None,
            combine=lambda a, b: None,
            fold_item=lambda acc, x: (f(x), None)[1],
            chunk_fold=(None if chunk is None else
                        (lambda acc, ch, origin: (chunk(ch), None)[1])),
        )
        self._run(reducer, ctx)


def _sum_chunk(acc, chunk, origin):
    if isinstance(chunk, tuple):
        raise TypeError("sum() needs scalar items; map the pairs first")
    if isinstance(chunk, np.ndarray):
        return acc + chunk.sum().item()
    return acc + sum(chunk)


def _extend(a, b):
    a.extend(b)
    return a


def _append(acc, x):
    acc.append(x)
    return acc


def _extend_chunk(acc, chunk, origin):
    if isinstance(chunk, tuple):
        acc.extend(zip(*chunk))
    else:
        acc.extend(chunk)
    return acc


def _check_depth(limit: int) -> None:
    if limit < 0:
        raise ValueError("depth limit must be >= 0")


def _coerce_make(x) -> Callable[[], Producer]:
    if isinstance(x, ParIter):
        return x._make
    return lambda: _as_producer(as_source(x))


def _as_producer(src: Source) -> Producer:
    if isinstance(src, Producer):
        return src
    return WrapProducer(src)


# ------------------------------------------------------------- entry points

def par_iter(data) -> ParIter:
    """A parallel iterator over a list, numpy array, range, or source."""
    return ParIter(lambda: _as_producer(as_source(data)))


def wrap_iter(data) -> ParIter:
    """A parallel iterator whose items are the undivided leaf pieces.

    Dividing splits the underlying source; each leaf yields its remaining
    piece as a single item, which is how divide-and-conquer over sub-ranges
    (sorting, searching) becomes an ordinary pipeline.
    """
    return ParIter(lambda: WrapProducer(as_source(data)))


def work(state: WorkState) -> ParIter:
    """A parallel iterator that drives a resumable computation.

    The scheduler spends fold budgets on ``state.advance``; dividing splits
    the remaining work.  Items are the completed states.  The state object
    is consumed: build a fresh one per run.
    """
    produced = [False]

    def make():
        if produced[0]:
            raise RuntimeError("work() pipelines are single-use; build a fresh state")
        produced[0] = True
        return WorkProducer(state)

    return ParIter(make)


def merge_iter(a, b, shift: int = 0) -> ParIter:
    """Merged parallel iterator over two sorted sequences.

    Ties resolve to the left input.  Splitting is adaptive by default, which
    is the right policy for merges nested under other parallel work: they
    divide only when a worker actually asks.
    """
    la = len(a)
    lb = len(b)
    it = ParIter(lambda: MergeProducer(a, 0, la, b, 0, lb, 0, shift))
    return it.adaptive()
