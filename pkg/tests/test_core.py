"""Divisible sources, producers, resumable work, reducers."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from splitkit.core import (
    Done,
    NOTHING,
    Producer,
    RangeSource,
    Reducer,
    SliceSource,
    TupleSource,
    WorkProducer,
    WorkState,
    WrapProducer,
    as_source,
)


# --------------------------------------------------------------- dividing

def test_divide_left_gets_ceiling():
    l, r = RangeSource(0, 7).divide()
    assert (len(l), len(r)) == (4, 3)
    assert list(l) == [0, 1, 2, 3]
    assert list(r) == [4, 5, 6]


def test_divide_even_split():
    l, r = RangeSource(0, 8).divide()
    assert (len(l), len(r)) == (4, 4)


def test_divide_at_clamps():
    s = SliceSource([1, 2, 3])
    l, r = s.divide_at(99)
    assert (list(l), list(r)) == ([1, 2, 3], [])
    l, r = SliceSource([1, 2, 3]).divide_at(-5)
    assert (list(l), list(r)) == ([], [1, 2, 3])


def test_origin_tracks_position_in_root():
    s = RangeSource(100, 110)
    l, r = s.divide_at(3)
    assert (l.origin, r.origin) == (0, 3)
    _, rr = r.divide_at(2)
    assert rr.origin == 5


def test_slice_origin_follows_consumption():
    s = SliceSource("abcdef")
    next(s), next(s)
    assert s.origin == 2
    _, r = s.divide_at(1)
    assert r.origin == 3


def test_should_be_divided_default():
    assert RangeSource(0, 2).should_be_divided()
    assert not RangeSource(0, 1).should_be_divided()
    assert not RangeSource(0, 0).should_be_divided()


def test_tuple_source_divides_componentwise():
    a = np.arange(10)
    b = np.arange(10, 20)
    t = TupleSource((SliceSource(a), SliceSource(b)))
    l, r = t.divide_at(4)
    assert list(l.parts[0].view) == list(a[:4])
    assert list(l.parts[1].view) == list(b[:4])
    assert list(r.parts[0].view) == list(a[4:])
    assert r.origin == 4


def test_tuple_source_rejects_uneven_lengths():
    with pytest.raises(ValueError):
        TupleSource((SliceSource([1, 2]), SliceSource([1, 2, 3])))


def test_as_source_coercions():
    assert isinstance(as_source(range(5)), RangeSource)
    assert isinstance(as_source([1, 2]), SliceSource)
    assert isinstance(as_source(np.arange(3)), SliceSource)
    assert isinstance(as_source((np.arange(3), np.arange(3))), TupleSource)
    with pytest.raises(ValueError):
        as_source(range(0, 10, 2))
    with pytest.raises(TypeError):
        as_source(iter([1]))


# ------------------------------------------------------------ partial_fold

def test_partial_fold_keeps_position():
    p = RangeSource(0, 10)
    acc = p.partial_fold(0, lambda a, x: a + x, 4)
    assert acc == 0 + 1 + 2 + 3
    assert len(p) == 6
    acc = p.partial_fold(acc, lambda a, x: a + x, 100)
    assert acc == sum(range(10))
    assert len(p) == 0


def test_partial_fold_stops_on_done():
    p = SliceSource([1, 2, -1, 4])
    acc = p.partial_fold(0, lambda a, x: Done(x) if x < 0 else a + x, 10)
    assert isinstance(acc, Done)
    assert acc.value == -1
    assert len(p) == 1  # the 4 was never consumed


def test_take_chunk_advances():
    p = SliceSource(np.arange(10), 2, 9)
    chunk, origin = p.take_chunk(3)
    assert list(chunk) == [2, 3, 4]
    assert origin == 2
    assert len(p) == 4
    chunk, origin = p.take_chunk(100)
    assert list(chunk) == [5, 6, 7, 8]
    assert origin == 5


def test_wrap_producer_emits_remaining_piece_once():
    w = WrapProducer(SliceSource([5, 6, 7]))
    l, r = w.divide_at(1)
    got = list(l)
    assert len(got) == 1 and list(got[0].view) == [5]
    assert list(list(r)[0].view) == [6, 7]
    assert list(r) == []  # already taken


def test_wrap_producer_partial_fold_budget():
    w = WrapProducer(SliceSource([1, 2]))
    assert w.partial_fold("acc", lambda a, p: (a, len(p)), 0) == "acc"
    assert w.partial_fold("acc", lambda a, p: (a, len(p)), 1) == ("acc", 2)
    assert w.partial_fold("x", lambda a, p: (a, len(p)), 5) == "x"


# ------------------------------------------------------------------ work()

class CountDown(WorkState):
    """Toy resumable work: counts units and records advance sizes."""

    def __init__(self, n, origin=0, log=None):
        self.n = n
        self._origin = origin
        self.log = [] if log is None else log
        self.done_units = 0

    def __len__(self):
        return self.n

    @property
    def origin(self):
        return self._origin

    def divide_at(self, i):
        cut = min(max(i, 0), self.n)
        return (CountDown(cut, self._origin, self.log),
                CountDown(self.n - cut, self._origin + cut, self.log))

    def advance(self, budget):
        step = min(budget, self.n)
        self.log.append(step)
        self.n -= step
        self.done_units += step


def test_work_producer_spends_budget_without_emitting():
    st_ = CountDown(10)
    p = WorkProducer(st_)
    acc = p.partial_fold(NOTHING, lambda a, s: ("done", s.done_units), 4)
    assert acc is NOTHING
    assert len(p) == 6
    acc = p.partial_fold(NOTHING, lambda a, s: ("done", s.done_units), 6)
    assert acc == ("done", 10)
    assert len(p) == 0
    # a finished producer folds nothing further
    assert p.partial_fold("same", lambda a, s: "changed", 5) == "same"


def test_work_producer_next_runs_to_completion():
    st_ = CountDown(7)
    p = WorkProducer(st_)
    out = list(p)
    assert len(out) == 1 and out[0].done_units == 7


# ----------------------------------------------------------------- reducer

def _sum_reducer():
    return Reducer(identity=lambda: 0, combine=lambda a, b: a + b,
                   fold_item=lambda a, x: a + x)


def test_reducer_requires_a_fold():
    with pytest.raises(ValueError):
        Reducer(identity=None, combine=lambda a, b: a)


def test_fold_portion_chunk_path_counts_origin():
    seen = []

    def chunk_fold(acc, chunk, origin):
        seen.append((list(chunk), origin))
        return acc + sum(chunk)

    r = Reducer(identity=lambda: 0, combine=lambda a, b: a + b,
                fold_item=lambda a, x: a + x, chunk_fold=chunk_fold)
    p = SliceSource(list(range(10)))
    acc = r.fold_portion(0, p, 4)
    assert acc == 6 and seen == [([0, 1, 2, 3], 0)]
    acc = r.fold_portion(acc, p, math.inf)
    assert acc == sum(range(10))
    assert seen[-1][1] == 4


def test_merge_passes_nothing_through():
    r = _sum_reducer()
    assert r.merge(NOTHING, 5) == 5
    assert r.merge(5, NOTHING) == 5
    assert r.merge(2, 3) == 5
    assert r.finish(NOTHING) == 0


def test_finish_without_identity_gives_none():
    r = Reducer(identity=None, combine=lambda a, b: a + b,
                fold_item=lambda a, x: a + x)
    assert r.finish(NOTHING) is None


# -------------------------------------------------------------- properties

@given(st.lists(st.integers(-100, 100), max_size=40), st.data())
def test_random_division_tree_preserves_items(xs, data):
    """Splitting arbitrarily then draining leaves yields the original order."""

    def drain(src, depth):
        if depth < 4 and len(src) > 1 and data.draw(st.booleans(), label=f"split@{depth}"):
            i = data.draw(st.integers(0, len(src)), label=f"cut@{depth}")
            l, r = src.divide_at(i)
            return drain(l, depth + 1) + drain(r, depth + 1)
        return list(src)

    assert drain(SliceSource(xs), 0) == xs


@given(st.lists(st.integers(-100, 100), min_size=0, max_size=30),
       st.integers(0, 31))
def test_partial_fold_then_rest_equals_full_fold(xs, k):
    p = SliceSource(xs)
    acc = p.partial_fold(0, lambda a, x: a + x, k)
    acc = p.partial_fold(acc, lambda a, x: a + x, len(xs))
    assert acc == sum(xs)


@given(st.lists(st.integers(0, 50), min_size=1, max_size=25), st.data())
def test_reduction_value_is_tree_shape_invariant(xs, data):
    """Any division tree combines to the same value as the sequential fold."""
    r = _sum_reducer()

    def run(src, depth):
        if depth < 4 and src.should_be_divided() and data.draw(st.booleans()):
            l, rgt = src.divide()
            return r.merge(run(l, depth + 1), run(rgt, depth + 1))
        return r.fold_leaf(src)

    assert r.finish(run(SliceSource(xs), 0)) == sum(xs)
