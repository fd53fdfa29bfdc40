"""Algorithms exercising the policy and scheduler combinations.

Each function builds an ordinary pipeline and picks its policies through
keyword arguments, so the same algorithm runs under any splitting strategy.
Leaf work on numpy arrays goes through compiled kernels; list and generic
inputs take the per-item paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Optional, Sequence

import numpy as np

from . import _kernels
from . import schedulers as _sched
from .adaptors import (BlockSchedule, MergeProducer, ParIter, _bisect_sorted,
                       par_iter, wrap_iter, work)
from .core import NOTHING, Done, Reducer, SliceSource, WorkState, as_source


def _apply_policy(it: ParIter, policy: Optional[str], param) -> ParIter:
    """Attach one named splitting policy to a pipeline."""
    if policy is None or policy == "default":
        return it
    if policy == "bound_depth":
        return it.bound_depth(param)
    if policy == "thief_splitting":
        return it.thief_splitting(param)
    if policy == "join_context_policy":
        return it.join_context_policy(param)
    if policy == "size_limit":
        return it.size_limit(param)
    if policy == "cap":
        return it.cap(param)
    if policy == "force_depth":
        return it.force_depth(param)
    if policy == "even_levels":
        return it.even_levels()
    raise ValueError(f"unknown policy {policy!r}")


def _apply_scheduler(it: ParIter, scheduler: str,
                     blocks: Optional[BlockSchedule]) -> ParIter:
    if scheduler == "adaptive":
        it = it.adaptive()
    elif scheduler == "depjoin":
        it = it.depjoin()
    elif scheduler == "join":
        it = it.with_join()
    else:
        raise ValueError(f"unknown scheduler {scheduler!r}")
    if blocks is not None:
        it = it.by_blocks(blocks if isinstance(blocks, BlockSchedule) else None)
    return it


def _first_hit(chunk, pred, pred_chunk) -> Optional[int]:
    """Index of the first matching element in a chunk, or None."""
    if pred_chunk is not None and isinstance(chunk, np.ndarray):
        hits = pred_chunk(chunk)
        if hits.any():
            return int(np.argmax(hits))
        return None
    for i, x in enumerate(chunk):
        if pred(x):
            return i
    return None


# --------------------------------------------------------------- find_first

def find_first(data, pred: Callable[[Any], bool], *,
               pred_chunk: Optional[Callable[[Any], Any]] = None,
               policy: Optional[str] = None, policy_param=None,
               scheduler: str = "join", blocks: Optional[BlockSchedule] = None,
               ctx: Optional[_sched.ExecCtx] = None):
    """Position and value of the first matching element, else None.

    A hit prunes every piece that starts after it; pieces before it still
    run so an earlier hit is never missed.  ``pred_chunk`` is the vectorized
    form used for numpy inputs; ``ctx.consumed`` counts evaluated elements.
    """
    ctx = ctx or _sched.make_ctx()

    def chunk_fold(acc, chunk, origin):
        ctx.consumed.add(len(chunk))
        j = _first_hit(chunk, pred, pred_chunk)
        if j is not None:
            hit = (origin + j, chunk[j])
            best = hit if acc is NOTHING or hit[0] < acc[0] else acc
            return Done(best, threshold=best[0])
        return acc

    def leaf_fold(p):
        take = getattr(p, "take_chunk", None)
        if take is not None:
            acc = NOTHING
            while len(p) > 0 and not ctx.skip(p.origin):
                chunk, origin = take(min(len(p), 65536))
                if len(chunk) == 0:
                    break
                acc = chunk_fold(acc, chunk, origin)
                if isinstance(acc, Done):
                    return acc
            return acc
        while not ctx.skip(p.origin):
            o = p.origin
            try:
                x = next(p)
            except StopIteration:
                break
            ctx.consumed.add(1)
            if pred(x):
                return Done((o, x), threshold=o)
        return NOTHING

    reducer = Reducer(
        identity=None,
        combine=lambda a, b: a if a[0] <= b[0] else b,
        leaf_fold=leaf_fold,
        fold_item=None,
        chunk_fold=chunk_fold,
    )
    it = _apply_scheduler(_apply_policy(par_iter(data), policy, policy_param),
                          scheduler, blocks)
    return it._run(reducer, ctx)


# ---------------------------------------------------------------------- all

def all_match(data, pred: Callable[[Any], bool], *,
              pred_chunk: Optional[Callable[[Any], Any]] = None,
              policy: Optional[str] = None, policy_param=None,
              scheduler: str = "join", blocks: Optional[BlockSchedule] = None,
              ctx: Optional[_sched.ExecCtx] = None) -> bool:
    """True when every element matches; a violation stops the whole run."""
    ctx = ctx or _sched.make_ctx()

    def chunk_fold(acc, chunk, origin):
        ctx.consumed.add(len(chunk))
        if pred_chunk is not None and isinstance(chunk, np.ndarray):
            ok = bool(pred_chunk(chunk).all())
        else:
            ok = all(pred(x) for x in chunk)
        if not ok:
            return Done(False, threshold=-1)
        return True

    def leaf_fold(p):
        take = getattr(p, "take_chunk", None)
        if take is not None:
            acc = NOTHING
            while len(p) > 0 and not ctx.stopped():
                chunk, origin = take(min(len(p), 65536))
                if len(chunk) == 0:
                    break
                acc = chunk_fold(acc, chunk, origin)
                if isinstance(acc, Done):
                    return acc
            return acc
        for x in p:
            ctx.consumed.add(1)
            if not pred(x):
                return Done(False, threshold=-1)
            if ctx.stopped():
                break
        return True

    reducer = Reducer(
        identity=lambda: True,
        combine=lambda a, b: a and b,
        leaf_fold=leaf_fold,
        chunk_fold=chunk_fold,
    )
    it = _apply_scheduler(_apply_policy(par_iter(data), policy, policy_param),
                          scheduler, blocks)
    out = it._run(reducer, ctx)
    return bool(out) if out is not None else True


# --------------------------------------------------------- filter + collect

def filter_collect_even(data, *, policy: Optional[str] = None, policy_param=None,
                        scheduler: str = "join",
                        ctx: Optional[_sched.ExecCtx] = None) -> list:
    """Even elements in input order, via per-leaf fold and list reduction."""
    it = par_iter(data).filter(lambda x: x % 2 == 0).fold(list, _push)
    it = _apply_scheduler(_apply_policy(it, policy, policy_param), scheduler, None)
    out = it.reduce_with(_concat, ctx=ctx)
    return [] if out is None else out


def _push(acc: list, x) -> list:
    acc.append(x)
    return acc


def _concat(a: list, b: list) -> list:
    a.extend(b)
    return a


# ------------------------------------------------------------------ max_sum

def max_sum_par(data, *, policy: str = "thief_splitting", policy_param: int = 4,
                scheduler: str = "join",
                ctx: Optional[_sched.ExecCtx] = None):
    """Largest sum over nonempty contiguous subarrays; 0 for empty input.

    Leaves compute (total, best, best prefix, best suffix) and the combine
    stitches adjacent segments, so the result is split-invariant.
    """
    src = as_source(data)
    if len(src) == 0:
        return 0

    it = wrap_iter(src).map(_max_sum_leaf)
    it = _apply_scheduler(_apply_policy(it, policy, policy_param), scheduler, None)
    out = it.reduce_with(_max_sum_combine, ctx=ctx)
    if out is None:
        return 0
    return out[1]


def _max_sum_leaf(piece):
    view = getattr(piece, "view", None)
    if view is None:
        view = list(piece)
    if len(view) == 0:
        return None
    if isinstance(view, np.ndarray) and view.dtype.kind in "iu":
        c = np.cumsum(view, dtype=np.int64)
        total = int(c[-1])
        prefix = int(c.max())
        base = np.concatenate(([0], c[:-1]))
        suffix = int(total - base.min())
        best = int((c - np.minimum.accumulate(base)).max())
        return total, best, prefix, suffix
    total = 0
    best = None
    prefix = None
    run = 0
    low = 0
    for x in view:
        total += x
        prefix = total if prefix is None else max(prefix, total)
        run = max(run + x, x)
        best = run if best is None else max(best, run)
        low = min(low, total)
    suffix = total - low
    return total, best, prefix, suffix


def _max_sum_combine(l, r):
    if l is None:
        return r
    if r is None:
        return l
    lt, lb, lp, ls = l
    rt, rb, rp, rs = r
    return (lt + rt,
            max(lb, rb, ls + rp),
            max(lp, lt + rp),
            max(rs, rt + ls))


# --------------------------------------------------------------------- sort

@dataclass
class SortBuffers:
    """An array to sort plus an equal-size scratch buffer."""

    data: np.ndarray
    scratch: np.ndarray

    def __post_init__(self):
        if len(self.data) != len(self.scratch):
            raise ValueError(f"scratch length {len(self.scratch)} != data length {len(self.data)}")
        if self.data.dtype != self.scratch.dtype:
            raise ValueError("data and scratch dtypes must match")


SORT_SPLITS = ("bound_depth", "thief_splitting", "join_context_policy")
SORT_SCHEDULERS = ("join", "depjoin")
SORT_MERGES = ("adaptive", "thief", "slice_work")

SORT_VARIANTS = tuple(
    (split, sched, merge)
    for split in SORT_SPLITS
    for sched in SORT_SCHEDULERS
    for merge in SORT_MERGES
)


def _leaf_sort(view: np.ndarray, shift: int) -> None:
    if shift == 0:
        view.sort(kind="stable")
    else:
        view[:] = view[np.argsort(view >> shift, kind="stable")]


def merge_sort_iter(buffers, *, split: str = "thief_splitting", split_param=None,
                    scheduler: str = "join", merge: str = "adaptive",
                    shift: int = 0, ctx: Optional[_sched.ExecCtx] = None) -> np.ndarray:
    """Stable parallel merge sort, in place, returning the sorted array.

    The source is the (data, scratch) pair dividing at one index; leaves
    sort their data slice, combines merge sibling slices into the matching
    scratch slices, buffers swapping per level.  ``split`` picks the
    sort-phase division policy, ``scheduler`` the task strategy, ``merge``
    how each combine's merge is parallelized.  Ordering compares
    ``value >> shift`` and equal keys keep their input order.
    """
    if isinstance(buffers, np.ndarray):
        buffers = SortBuffers(buffers, np.empty_like(buffers))
    if merge not in SORT_MERGES:
        raise ValueError(f"unknown merge kind {merge!r}")
    arr = buffers.data
    scratch = buffers.scratch
    n = len(arr)
    if n <= 1:
        return arr
    ctx = ctx or _sched.make_ctx()

    if split_param is None and split == "bound_depth":
        split_param = max(1, math.ceil(math.log2(2 * ctx.rt.worker_count)))
    if split_param is None and split == "join_context_policy":
        split_param = max(2, math.ceil(math.log2(2 * ctx.rt.worker_count)) + 2)

    def sort_leaf(piece):
        din, dout = piece.parts
        _leaf_sort(din.view, shift)
        return din, dout

    def combiner(l, r):
        ld, ls = l
        rd, rs = r
        if ld.data is not rd.data:
            # sibling subtrees of uneven height keep data in different
            # buffers; move the right side over before merging
            rs.view[:] = rd.view
            rd, rs = rs, rd
        out = SliceSource(ls.data, ls.start, rs.stop)
        _merge_views(ld.view, rd.view, out.view, merge, shift, ctx)
        return out, SliceSource(ld.data, ld.start, rd.stop)

    it = wrap_iter((arr, scratch)).map(sort_leaf)
    it = _apply_policy(it, split, split_param)
    it = it.even_levels()
    it = _apply_scheduler(it, scheduler, None)
    result, _spare = it.reduce_with(combiner, ctx=ctx)
    if result.data is not arr:
        arr[:] = result.view
    return arr


def _merge_views(lview, rview, out, merge: str, shift: int, ctx) -> None:
    n = len(lview) + len(rview)
    if n == 0:
        return
    if len(lview) == 0:
        out[:] = rview
        return
    if len(rview) == 0:
        out[:] = lview
        return
    if merge == "slice_work":
        merge_slices_adaptive(lview, rview, out, shift=shift, ctx=ctx)
        return
    merged = ParIter(lambda: MergeProducer(lview, 0, len(lview),
                                           rview, 0, len(rview), 0, shift))
    if merge == "thief":
        merged = merged.thief_splitting()
    else:
        merged = merged.adaptive()
    pipeline = merged.zip(range(n))

    def store(pair):
        v, i = pair
        out[i] = v

    def store_chunk(pair):
        vals, idxs = pair
        out[idxs.start:idxs.stop] = vals

    pipeline.for_each(store, chunk=store_chunk, ctx=ctx)


# ---------------------------------------------------------- slice merging

class MergeState(WorkState):
    """Resumable merge of two sorted slices into an output slice."""

    __slots__ = ("a", "ai", "aend", "b", "bi", "bend", "out", "oi", "shift", "_np")

    def __init__(self, a, ai, aend, b, bi, bend, out, oi, shift=0):
        self.a = a
        self.ai = ai
        self.aend = aend
        self.b = b
        self.bi = bi
        self.bend = bend
        self.out = out
        self.oi = oi
        self.shift = shift
        self._np = (isinstance(a, np.ndarray) and a.dtype.kind in "iu")

    def __len__(self):
        return (self.aend - self.ai) + (self.bend - self.bi)

    @property
    def origin(self):
        return self.oi

    def should_be_divided(self):
        return max(self.aend - self.ai, self.bend - self.bi) >= 2

    def divide_at(self, i):
        return self.divide()

    def divide(self):
        la = self.aend - self.ai
        lb = self.bend - self.bi
        if la >= lb:
            acut = self.ai + la // 2
            bcut = _bisect_sorted(self.b, self.bi, self.bend, self.a[acut],
                                  False, self.shift)
        else:
            bcut = self.bi + lb // 2
            acut = _bisect_sorted(self.a, self.ai, self.aend, self.b[bcut],
                                  True, self.shift)
        left_len = (acut - self.ai) + (bcut - self.bi)
        left = MergeState(self.a, self.ai, acut, self.b, self.bi, bcut,
                          self.out, self.oi, self.shift)
        right = MergeState(self.a, acut, self.aend, self.b, bcut, self.bend,
                           self.out, self.oi + left_len, self.shift)
        return left, right

    def advance(self, budget: int) -> None:
        if self._np:
            self.ai, self.bi, self.oi = _kernels.merge_advance(
                self.a, self.ai, self.aend, self.b, self.bi, self.bend,
                self.out, self.oi, budget, self.shift)
            return
        done = 0
        while done < budget:
            if self.ai < self.aend and (
                    self.bi >= self.bend or
                    _shifted(self.a[self.ai], self.shift) <= _shifted(self.b[self.bi], self.shift)):
                self.out[self.oi] = self.a[self.ai]
                self.ai += 1
            elif self.bi < self.bend:
                self.out[self.oi] = self.b[self.bi]
                self.bi += 1
            else:
                break
            self.oi += 1
            done += 1


def _shifted(x, shift):
    return x >> shift if shift else x


def merge_slices_adaptive(left, right, out, *, shift: int = 0,
                          scheduler: str = "adaptive",
                          ctx: Optional[_sched.ExecCtx] = None) -> None:
    """Merge two sorted slices into ``out``, splitting remaining work on
    demand.  Ties take the left slice's element."""
    if len(out) != len(left) + len(right):
        raise ValueError("output length must equal the sum of input lengths")
    if len(out) == 0:
        return
    state = MergeState(left, 0, len(left), right, 0, len(right), out, 0, shift)
    it = work(state)
    it = _apply_scheduler(it, scheduler, None)
    it.for_each(lambda s: None, ctx=ctx)


# ----------------------------------------------------------------- fannkuch

_FACT = [1]
for _i in range(1, 17):
    _FACT.append(_FACT[-1] * _i)


@dataclass(frozen=True)
class FannkuchResult:
    n: int
    checksum: int
    max_flips: int
    rebuilds: int
    tasks: int


def perm_from_index(idx: int, n: int):
    """Decode permutation ``idx`` (mixed-radix digits, digit i rotating the
    prefix of length i+1).  Returns (perm, count) arrays."""
    perm = np.arange(n, dtype=np.int64)
    count = np.zeros(n, dtype=np.int64)
    for i in range(n - 1, 0, -1):
        d, idx = divmod(idx, _FACT[i])
        count[i] = d
        if d:
            head = perm[: i + 1].copy()
            perm[: i + 1] = np.concatenate((head[d:], head[:d]))
    return perm, count


class FkState(WorkState):
    """A range of permutation indices with an incremental cursor.

    The left half of a division keeps the cursor and continues exactly
    where it stopped; the right half starts fresh and decodes its first
    permutation from its index (one rebuild)."""

    __slots__ = ("lo", "hi", "n", "perm", "count", "tmp", "fresh",
                 "checksum", "max_flips", "decodes")

    def __init__(self, lo, hi, n, perm=None, count=None, fresh=True,
                 checksum=0, max_flips=0, decodes=0):
        self.lo = lo
        self.hi = hi
        self.n = n
        self.perm = perm
        self.count = count
        self.tmp = np.zeros(n, dtype=np.int64)
        self.fresh = fresh
        self.checksum = checksum
        self.max_flips = max_flips
        self.decodes = decodes

    def __len__(self):
        return self.hi - self.lo

    @property
    def origin(self):
        return self.lo

    def divide_at(self, i):
        cut = min(max(i, 0), len(self))
        mid = self.lo + cut
        left = FkState(self.lo, mid, self.n, self.perm, self.count,
                       self.fresh, self.checksum, self.max_flips, self.decodes)
        right = FkState(mid, self.hi, self.n)
        return left, right

    def advance(self, budget: int) -> None:
        if self.fresh:
            self.perm, self.count = perm_from_index(self.lo, self.n)
            self.fresh = False
            self.decodes += 1
        k = min(budget, len(self))
        if k <= 0:
            return
        cs, mf = _kernels.fannkuch_chunk(self.perm, self.count, self.tmp,
                                         self.lo, k, self.n)
        self.checksum += int(cs)
        if mf > self.max_flips:
            self.max_flips = int(mf)
        self.lo += k


def fannkuch(n: int, *, policy: str = "adaptive", chunk_multiplier: int = 8,
             thief_counter: Optional[int] = None,
             ctx: Optional[_sched.ExecCtx] = None) -> FannkuchResult:
    """Checksum and maximum flip count over all n! prefix-reversal games.

    ``policy`` is one of ``static`` (a fixed number of equal index chunks,
    ``chunk_multiplier * workers`` of them), ``thief_splitting``, or
    ``adaptive``.  ``rebuilds`` counts permutations decoded from scratch
    beyond the first: the price of each division.
    """
    if not (1 <= n <= 16):
        raise ValueError("n must be in 1..16")
    total = _FACT[n]
    ctx = ctx or _sched.make_ctx()

    def finish(parts):
        if parts is None:
            return FannkuchResult(n, 0, 0, 0, 0)
        checksum, max_flips, decodes, tasks = parts
        return FannkuchResult(n, checksum, max_flips, max(decodes - 1, 0), tasks)

    if policy == "static":
        k = min(max(1, chunk_multiplier * ctx.rt.worker_count), total)
        states = [FkState(total * j // k, total * (j + 1) // k, n) for j in range(k)]

        def run_all(st: FkState):
            while len(st) > 0:
                st.advance(len(st))
            return st.checksum, st.max_flips, st.decodes, 1

        it = par_iter(states).map(run_all)
        return finish(it.reduce_with(_fk_combine, ctx=ctx))

    state = FkState(0, total, n)
    it = work(state).map(lambda s: (s.checksum, s.max_flips, s.decodes, 1))
    if policy == "thief_splitting":
        it = it.thief_splitting(thief_counter)
    elif policy == "adaptive":
        it = it.adaptive()
    else:
        raise ValueError(f"unknown fannkuch policy {policy!r}")
    return finish(it.reduce_with(_fk_combine, ctx=ctx))


def _fk_combine(a, b):
    return (a[0] + b[0], max(a[1], b[1]), a[2] + b[2], a[3] + b[3])
