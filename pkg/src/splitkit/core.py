"""Divisible data sources and sequential producers.

A source knows its length and how to split itself; a producer is a source
that can also be consumed sequentially, either one item at a time or in
bounded bites via :meth:`Producer.partial_fold`.  Schedulers decide *when*
to split by asking :meth:`Source.should_be_divided`; wrappers layered on a
source change that answer without touching how elements are produced.

Scheduler contract: after ``should_be_divided()`` returns True the caller
must either call ``divide()`` or call ``division_declined()``.  Stateful
wrappers (the cap adaptor) rely on this to keep their counters balanced.
``divide_at`` is a plain cut used for block scheduling and never updates
policy state.
"""

from __future__ import annotations

import math
from typing import Any, Callable, Iterator, Optional, Sequence


class Done:
    """Early-exit marker returned by a fold step.

    Wraps the final accumulator value; ``threshold`` is the highest input
    position still worth consuming (-1 when nothing further is needed).
    """

    __slots__ = ("value", "threshold")

    def __init__(self, value: Any, threshold: float = -1):
        self.value = value
        self.threshold = threshold


class _Nothing:
    """Absence of a result (skipped or empty branch)."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "NOTHING"


NOTHING = _Nothing()


class Source:
    """Base class for divisible inputs."""

    __slots__ = ()

    def __len__(self) -> int:
        raise NotImplementedError

    def divide_at(self, index: int) -> tuple["Source", "Source"]:
        """Cut into a prefix of length ``min(index, len)`` and the rest."""
        raise NotImplementedError

    def divide(self) -> tuple["Source", "Source"]:
        """Halve; when the length is odd the left part gets the extra item."""
        n = len(self)
        return self.divide_at((n + 1) // 2)

    def should_be_divided(self) -> bool:
        return len(self) > 1

    def division_declined(self) -> None:
        """Undo side effects of the last ``should_be_divided() == True``."""

    def task_completed(self) -> None:
        """Hook run when the subtree spawned from this division finishes."""

    @property
    def origin(self) -> int:
        """Offset of this piece's first element within the root input."""
        raise NotImplementedError


class Producer(Source):
    """A source that is also a sequential iterator over its elements."""

    __slots__ = ()

    def __iter__(self) -> Iterator[Any]:
        return self

    def __next__(self) -> Any:
        raise NotImplementedError

    def partial_fold(self, init: Any, fold_op: Callable[[Any, Any], Any], limit: int) -> Any:
        """Fold at most ``limit`` items into ``init`` and return the result.

        Stops early when the producer runs dry or ``fold_op`` returns a
        :class:`Done` marker.  The producer keeps its position, so folding
        the remainder later continues where this call stopped.
        """
        acc = init
        taken = 0
        while taken < limit:
            try:
                item = next(self)
            except StopIteration:
                break
            acc = fold_op(acc, item)
            taken += 1
            if isinstance(acc, Done):
                break
        return acc

    # Sources backed by contiguous storage override this with a method that
    # returns (view, origin) and advances; None means no bulk path.
    take_chunk: Optional[Callable[[int], tuple[Any, int]]] = None


class RangeSource(Producer):
    """Integers ``start <= x < stop``."""

    __slots__ = ("start", "stop", "_origin")

    def __init__(self, start: int, stop: int, origin: int = 0):
        self.start = start
        self.stop = max(start, stop)
        self._origin = origin

    def __len__(self) -> int:
        return self.stop - self.start

    @property
    def origin(self) -> int:
        return self._origin

    def divide_at(self, index: int):
        cut = min(max(index, 0), len(self))
        mid = self.start + cut
        return (
            RangeSource(self.start, mid, self._origin),
            RangeSource(mid, self.stop, self._origin + cut),
        )

    def __next__(self):
        if self.start >= self.stop:
            raise StopIteration
        v = self.start
        self.start += 1
        self._origin += 1
        return v

    def take_chunk(self, limit: int):
        k = min(limit, len(self))
        chunk = range(self.start, self.start + k)
        o = self._origin
        self.start += k
        self._origin += k
        return chunk, o


class SliceSource(Producer):
    """A window into a sequence or numpy array; splitting never copies."""

    __slots__ = ("data", "start", "stop", "_origin")

    def __init__(self, data: Sequence, start: int = 0, stop: Optional[int] = None, origin: Optional[int] = None):
        self.data = data
        self.start = start
        self.stop = len(data) if stop is None else stop
        self._origin = start if origin is None else origin

    def __len__(self) -> int:
        return self.stop - self.start

    @property
    def origin(self) -> int:
        return self._origin

    @property
    def view(self):
        return self.data[self.start : self.stop]

    def divide_at(self, index: int):
        cut = min(max(index, 0), len(self))
        mid = self.start + cut
        return (
            SliceSource(self.data, self.start, mid, self._origin),
            SliceSource(self.data, mid, self.stop, self._origin + cut),
        )

    def __next__(self):
        if self.start >= self.stop:
            raise StopIteration
        v = self.data[self.start]
        self.start += 1
        self._origin += 1
        return v

    def take_chunk(self, limit: int):
        k = min(limit, len(self))
        chunk = self.data[self.start : self.start + k]
        o = self._origin
        self.start += k
        self._origin += k
        return chunk, o


class TupleSource(Source):
    """Equal-length divisibles that split together at one index.

    Not iterable item-by-item; use :func:`wrap_iter` to hand whole pieces to
    a leaf function (the merge-sort (input, buffer) pair is the typical use).
    """

    __slots__ = ("parts", "_origin")

    def __init__(self, parts: tuple, origin: int = 0):
        lengths = {len(p) for p in parts}
        if len(lengths) > 1:
            raise ValueError(f"tuple source parts must have equal lengths, got {sorted(lengths)}")
        self.parts = tuple(parts)
        self._origin = origin

    def __len__(self) -> int:
        return len(self.parts[0]) if self.parts else 0

    @property
    def origin(self) -> int:
        return self._origin

    def divide_at(self, index: int):
        cut = min(max(index, 0), len(self))
        split = [p.divide_at(cut) for p in self.parts]
        left = TupleSource(tuple(s[0] for s in split), self._origin)
        right = TupleSource(tuple(s[1] for s in split), self._origin + cut)
        return left, right


class WrapProducer(Producer):
    """Presents a divisible source as a one-item producer.

    Dividing divides the wrapped source; consuming yields the remaining
    (undivided) piece itself, exactly once.  This turns divide-and-conquer
    over sub-ranges into an ordinary parallel iterator whose items are the
    leaf pieces.
    """

    __slots__ = ("inner", "taken")

    def __init__(self, inner: Source, taken: bool = False):
        self.inner = inner
        self.taken = taken

    def __len__(self) -> int:
        return 0 if self.taken else len(self.inner)

    @property
    def origin(self) -> int:
        return self.inner.origin

    def should_be_divided(self) -> bool:
        return not self.taken and self.inner.should_be_divided()

    def division_declined(self) -> None:
        self.inner.division_declined()

    def task_completed(self) -> None:
        self.inner.task_completed()

    def divide_at(self, index: int):
        l, r = self.inner.divide_at(index)
        return WrapProducer(l), WrapProducer(r)

    def divide(self):
        l, r = self.inner.divide()
        return WrapProducer(l), WrapProducer(r)

    def __next__(self):
        if self.taken:
            raise StopIteration
        self.taken = True
        return self.inner

    def partial_fold(self, init, fold_op, limit):
        if limit >= 1 and not self.taken:
            self.taken = True
            return fold_op(init, self.inner)
        return init


class WorkState(Source):
    """Base for resumable computations driven by :class:`WorkProducer`.

    ``__len__`` reports remaining work units and must shrink as the state
    advances; a state is complete when its length reaches zero.  ``divide``
    splits the *remaining* work.
    """

    __slots__ = ()

    def advance(self, budget: int) -> None:
        """Perform up to ``budget`` units of work, updating the state."""
        raise NotImplementedError


class WorkProducer(Producer):
    """Drives a :class:`WorkState`; yields the completed state as its item.

    ``partial_fold`` spends its budget on ``state.advance``, so an adaptive
    scheduler interleaves bounded work bursts with steal checks, and a
    divided-off right half continues from fresh state while the left keeps
    its cursor.
    """

    __slots__ = ("state", "emitted")

    def __init__(self, state: WorkState, emitted: bool = False):
        self.state = state
        self.emitted = emitted

    def __len__(self) -> int:
        return 0 if self.emitted else len(self.state)

    @property
    def origin(self) -> int:
        return self.state.origin

    def should_be_divided(self) -> bool:
        return not self.emitted and self.state.should_be_divided()

    def division_declined(self) -> None:
        self.state.division_declined()

    def task_completed(self) -> None:
        self.state.task_completed()

    def divide_at(self, index: int):
        l, r = self.state.divide_at(index)
        return WorkProducer(l), WorkProducer(r)

    def divide(self):
        l, r = self.state.divide()
        return WorkProducer(l), WorkProducer(r)

    def __next__(self):
        if self.emitted:
            raise StopIteration
        while len(self.state) > 0:
            self.state.advance(len(self.state))
        self.emitted = True
        return self.state

    def partial_fold(self, init, fold_op, limit):
        if self.emitted:
            return init
        spent = 0
        while spent < limit and len(self.state) > 0:
            step = min(limit - spent, len(self.state))
            self.state.advance(step)
            spent += step
        if len(self.state) == 0:
            self.emitted = True
            return fold_op(init, self.state)
        return init


class Reducer:
    """How leaf results are produced and merged back together.

    ``identity`` makes the neutral value, ``combine`` merges two subtree
    results (left argument is always the earlier subtree), and leaves are
    folded either by an explicit ``leaf_fold`` over the whole producer or
    item-by-item with ``fold_item``.  ``chunk_fold`` is an optional bulk
    step ``(acc, chunk, origin) -> acc`` used when the producer can hand out
    contiguous chunks.
    """

    __slots__ = ("identity", "combine", "fold_item", "leaf_fold", "chunk_fold")

    def __init__(
        self,
        identity: Optional[Callable[[], Any]],
        combine: Callable[[Any, Any], Any],
        fold_item: Optional[Callable[[Any, Any], Any]] = None,
        leaf_fold: Optional[Callable[[Producer], Any]] = None,
        chunk_fold: Optional[Callable[[Any, Any, int], Any]] = None,
    ):
        if fold_item is None and leaf_fold is None:
            raise ValueError("a reducer needs fold_item or leaf_fold")
        self.identity = identity
        self.combine = combine
        self.fold_item = fold_item
        self.leaf_fold = leaf_fold
        self.chunk_fold = chunk_fold

    def fresh(self) -> Any:
        return NOTHING if self.identity is None else self.identity()

    def fold_leaf(self, producer: Producer) -> Any:
        """Fold a whole leaf; may return :class:`Done` to stop the run."""
        if self.leaf_fold is not None:
            return self.leaf_fold(producer)
        return self.fold_portion(self.fresh(), producer, math.inf)

    def fold_portion(self, acc: Any, producer: Producer, limit) -> Any:
        """Fold up to ``limit`` units from ``producer`` into ``acc``."""
        if acc is NOTHING:
            acc = self.fresh()
        take = getattr(producer, "take_chunk", None)
        if self.chunk_fold is not None and take is not None:
            remaining = limit
            while remaining > 0 and len(producer) > 0:
                chunk, origin = take(min(remaining, len(producer)))
                n = len(chunk)
                if n == 0:
                    break
                acc = self.chunk_fold(acc, chunk, origin)
                remaining -= n
                if isinstance(acc, Done):
                    return acc
            return acc
        if self.fold_item is None:
            raise TypeError("reducer has no per-item fold; cannot fold a bounded portion")
        lim = len(producer) if limit is math.inf else int(limit)
        return producer.partial_fold(acc, self.fold_item, lim)

    def merge(self, a: Any, b: Any) -> Any:
        if a is NOTHING:
            return b
        if b is NOTHING:
            return a
        return self.combine(a, b)

    def finish(self, acc: Any) -> Any:
        if acc is NOTHING:
            return None if self.identity is None else self.identity()
        return acc


def as_source(data: Any) -> Source:
    """Coerce common inputs to a divisible source."""
    if isinstance(data, Source):
        return data
    if isinstance(data, range):
        if data.step != 1:
            raise ValueError("only step-1 ranges are divisible")
        return RangeSource(data.start, data.stop)
    if isinstance(data, tuple):
        return TupleSource(tuple(as_source(p) for p in data))
    if hasattr(data, "__len__") and hasattr(data, "__getitem__"):
        return SliceSource(data)
    raise TypeError(f"cannot make a divisible source from {type(data).__name__}")
