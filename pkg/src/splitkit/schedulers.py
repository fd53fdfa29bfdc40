"""Schedulers: strategies for turning one divisible producer into tasks.

All four drivers consume the same (producer, reducer) pair, so a pipeline
can swap its execution strategy without touching the data or the policy
stack:

* ``schedule_join``: recursive divide with the runtime's fork-join.
* ``schedule_depjoin``: same task tree, but results flow through completion
  cells and the *last finishing* branch runs each combine, so a fast sibling
  never parks behind a slow one.
* ``schedule_adaptive``: one task works sequentially in geometrically
  growing bites and divides only when an idle worker has posted a steal
  request; the divided-off half is handed straight to that worker.
* ``schedule_blocks``: cuts the input into geometrically growing blocks and
  runs them one after another, each parallel inside, stopping between
  blocks once an early exit fires.
"""

from __future__ import annotations

import math
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any, Callable, Optional

from .core import NOTHING, Done, Producer, Reducer
from .runtime import Runtime, active_runtime


@dataclass(frozen=True)
class AdaptiveConfig:
    """Nano-loop budget schedule for the adaptive scheduler."""

    initial_block: int = 1
    growth: float = 2.0
    reset_on_steal: bool = True

    def __post_init__(self):
        if self.initial_block < 1:
            raise ValueError("initial_block must be >= 1")
        if self.growth < 1.0:
            raise ValueError("growth must be >= 1.0")

    def next_budget(self, budget: int) -> int:
        return max(int(math.ceil(budget * self.growth)), budget)


class Probe:
    """Optional observation sink for tests and the bench harness."""

    def __init__(self):
        self._lock = threading.Lock()
        self.leaves: list[dict] = []
        self.skipped = 0
        self.divisions = 0
        self.division_depths: list[int] = []
        self.combine_workers: list[Optional[int]] = []
        self.adaptive_tasks = 0
        self.micro_loops_per_task: list[int] = []
        self.budget_logs: list[list[int]] = []
        self.blocks: list[dict] = []
        self.active_tasks = 1
        self.task_hwm = 1

    def leaf(self, origin: int, length: int, depth: int, worker: Optional[int]) -> None:
        with self._lock:
            self.leaves.append({"origin": origin, "length": length,
                               "depth": depth, "worker": worker})

    def skip(self) -> None:
        with self._lock:
            self.skipped += 1

    def division(self, depth: int) -> None:
        with self._lock:
            self.divisions += 1
            self.division_depths.append(depth)
            self.active_tasks += 1
            if self.active_tasks > self.task_hwm:
                self.task_hwm = self.active_tasks

    def subtree_done(self) -> None:
        with self._lock:
            self.active_tasks -= 1

    def combine(self, worker: Optional[int]) -> None:
        with self._lock:
            self.combine_workers.append(worker)

    def adaptive_task(self, micro_loops: int, budgets: list[int]) -> None:
        with self._lock:
            self.adaptive_tasks += 1
            self.micro_loops_per_task.append(micro_loops)
            self.budget_logs.append(budgets)

    def block(self, info: dict) -> None:
        with self._lock:
            self.blocks.append(info)

    @property
    def leaf_lengths(self) -> list[int]:
        return [l["length"] for l in self.leaves]


_ambient_probe: Optional[Probe] = None
_ambient_recorder = None


@contextmanager
def probe():
    """Observe the next pipeline runs: ``with probe() as p: it.sum()``."""
    global _ambient_probe
    prev = _ambient_probe
    p = Probe()
    _ambient_probe = p
    try:
        yield p
    finally:
        _ambient_probe = prev


@contextmanager
def record_spans(recorder):
    """Route span recording of enclosed runs into ``recorder``."""
    global _ambient_recorder
    prev = _ambient_recorder
    _ambient_recorder = recorder
    try:
        yield recorder
    finally:
        _ambient_recorder = prev


class _AtomicMin:
    __slots__ = ("_lock", "value")

    def __init__(self):
        self._lock = threading.Lock()
        self.value = math.inf

    def offer(self, v) -> None:
        with self._lock:
            if v < self.value:
                self.value = v


class _Count:
    __slots__ = ("_lock", "value")

    def __init__(self, value=0):
        self._lock = threading.Lock()
        self.value = value

    def add(self, k=1):
        with self._lock:
            self.value += k
            return self.value


class ExecCtx:
    """Per-run shared state: runtime handle, early-exit plane, observers."""

    def __init__(self, rt: Runtime, probe: Optional[Probe] = None, recorder=None):
        self.rt = rt
        self.probe = probe
        self.recorder = recorder
        self.prune = _AtomicMin()
        self.abort = False
        self.consumed = _Count()
        self._exc_lock = threading.Lock()
        self.first_exc: Optional[BaseException] = None

    # early exit -----------------------------------------------------------
    def early_stop(self, threshold=-1) -> None:
        """Input positions strictly after ``threshold`` are no longer needed."""
        self.prune.offer(threshold)

    def skip(self, origin: int) -> bool:
        return origin > self.prune.value

    def stopped(self) -> bool:
        return self.abort or self.prune.value < math.inf

    def record_failure(self, exc: BaseException) -> None:
        with self._exc_lock:
            if self.first_exc is None:
                self.first_exc = exc
        self.abort = True

    # observation ----------------------------------------------------------
    def note_division(self, depth: int) -> None:
        self.rt.note_split()
        if self.probe is not None:
            self.probe.division(depth)

    def note_subtree_done(self) -> None:
        if self.probe is not None:
            self.probe.subtree_done()

    def span(self, label: str):
        if self.recorder is None:
            return _NULL_SPAN
        return _SpanScope(self, label)


class _NullSpan:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


_NULL_SPAN = _NullSpan()


class _SpanScope:
    __slots__ = ("ctx", "label", "wid")

    def __init__(self, ctx: ExecCtx, label: str):
        self.ctx = ctx
        self.label = label

    def __enter__(self):
        wid = self.ctx.rt.current_worker_id()
        self.wid = wid
        if wid is not None:
            task_id, parent_id = self.ctx.rt.current_task_ids()
            self.ctx.recorder.push(wid, task_id or 0, parent_id, self.label)
        return self

    def __exit__(self, *exc):
        if self.wid is not None:
            self.ctx.recorder.pop(self.wid)
        return False


def _run_leaf(producer: Producer, reducer: Reducer, ctx: ExecCtx, depth: int):
    if ctx.abort:
        return NOTHING
    if ctx.skip(producer.origin):
        if ctx.probe is not None:
            ctx.probe.skip()
        return NOTHING
    if ctx.probe is not None:
        ctx.probe.leaf(producer.origin, len(producer), depth, ctx.rt.current_worker_id())
    with ctx.span("leaf"):
        value = reducer.fold_leaf(producer)
    if isinstance(value, Done):
        ctx.early_stop(value.threshold)
        value = value.value
    return value


def _combine(reducer: Reducer, ctx: ExecCtx, a, b):
    if a is NOTHING:
        return b
    if b is NOTHING:
        return a
    if ctx.probe is not None:
        ctx.probe.combine(ctx.rt.current_worker_id())
    with ctx.span("combine"):
        return reducer.combine(a, b)


# --------------------------------------------------------------------- join

def schedule_join(producer: Producer, reducer: Reducer, ctx: ExecCtx, depth: int = 0):
    """Recursive divide-and-conquer on the runtime's fork-join."""
    if ctx.abort or ctx.skip(producer.origin):
        if ctx.probe is not None and not ctx.abort:
            ctx.probe.skip()
        return NOTHING
    if producer.should_be_divided():
        left, right = producer.divide()
        ctx.note_division(depth)
        try:
            lv, rv = ctx.rt.join(
                lambda: schedule_join(left, reducer, ctx, depth + 1),
                lambda: schedule_join(right, reducer, ctx, depth + 1),
            )
        except BaseException as e:
            ctx.record_failure(e)
            raise
        out = _combine(reducer, ctx, lv, rv)
        producer.task_completed()
        ctx.note_subtree_done()
        return out
    return _run_leaf(producer, reducer, ctx, depth)


# ------------------------------------------------------------------ depjoin

class _DepCell:
    """A two-slot rendezvous; whoever fills the second slot combines."""

    __slots__ = ("parent", "slot", "lock", "left", "right", "filled", "src")

    def __init__(self, parent, slot, src):
        self.parent = parent
        self.slot = slot
        self.lock = threading.Lock()
        self.left = NOTHING
        self.right = NOTHING
        self.filled = 0
        self.src = src


def schedule_depjoin(producer: Producer, reducer: Reducer, ctx: ExecCtx):
    """Like join, but each combine runs on whichever branch finishes last.

    The descending worker spawns right subtrees as stealable tasks and
    keeps walking left; a finished branch posts its value into its parent's
    cell and, when it arrives second, performs the combine and continues
    upward.  Nobody blocks on a specific sibling.
    """
    rt = ctx.rt
    result = [NOTHING]
    done = threading.Event()
    outstanding = _Count(1)

    def deliver(cell: Optional[_DepCell], slot: str, value):
        while True:
            if cell is None:
                result[0] = value
                done.set()
                return
            with cell.lock:
                if slot == "L":
                    cell.left = value
                else:
                    cell.right = value
                cell.filled += 1
                ready = cell.filled == 2
            if not ready:
                return
            try:
                value = _combine(reducer, ctx, cell.left, cell.right)
            except BaseException as e:
                ctx.record_failure(e)
                value = NOTHING
            cell.src.task_completed()
            ctx.note_subtree_done()
            cell, slot = cell.parent, cell.slot

    def descend(p: Producer, cell: Optional[_DepCell], slot: str, depth: int):
        try:
            while not ctx.abort and not ctx.skip(p.origin) and p.should_be_divided():
                left, right = p.divide()
                ctx.note_division(depth)
                child = _DepCell(cell, slot, p)
                outstanding.add(1)
                rt.spawn(lambda r=right, c=child, d=depth + 1: branch(r, c, "R", d))
                p, cell, slot, depth = left, child, "L", depth + 1
            deliver(cell, slot, _run_leaf(p, reducer, ctx, depth))
        except BaseException as e:
            ctx.record_failure(e)
            deliver(cell, slot, NOTHING)

    def branch(p, cell, slot, depth):
        try:
            descend(p, cell, slot, depth)
        finally:
            outstanding.add(-1)

    branch(producer, None, "L", 0)
    rt.wait_until(lambda: done.is_set() and outstanding.value == 0)
    return result[0]


# ----------------------------------------------------------------- adaptive

def schedule_adaptive(producer: Producer, reducer: Reducer, ctx: ExecCtx,
                      cfg: Optional[AdaptiveConfig] = None, depth: int = 0):
    """Steal-driven splitting around a sequential nano-loop.

    Between bounded fold bites the task checks for pending steal requests;
    only a claimed request triggers a division, and the divided-off right
    half is delivered straight to the requesting worker.  Task count is
    therefore exactly the number of successful steals plus one.
    """
    cfg = cfg or AdaptiveConfig()
    rt = ctx.rt
    acc = NOTHING
    pending: list[tuple[Any, Producer]] = []
    budget = cfg.initial_block
    budgets: list[int] = []
    micro = 0
    p = producer
    while True:
        if ctx.abort or ctx.skip(p.origin) or len(p) == 0:
            if ctx.probe is not None and ctx.skip(p.origin) and len(p) > 0:
                ctx.probe.skip()
            break
        budgets.append(budget)
        bite = min(budget, len(p))
        with ctx.span("nano"):
            try:
                acc = reducer.fold_portion(acc, p, bite)
            except BaseException as e:
                ctx.record_failure(e)
                break
        micro += 1
        if isinstance(acc, Done):
            ctx.early_stop(acc.threshold)
            acc = acc.value
            break
        if len(p) == 0:
            break
        if p.should_be_divided():
            req = rt.try_claim_steal_request()
            if req is not None:
                try:
                    left, right = p.divide()
                except BaseException as e:
                    rt.deliver(req, lambda: NOTHING)
                    ctx.record_failure(e)
                    break
                ctx.note_division(depth)
                task = rt.deliver(req, lambda r=right, d=depth + 1:
                                  schedule_adaptive(r, reducer, ctx, cfg, d))
                pending.append((task, p))
                p = left
                if cfg.reset_on_steal:
                    budget = cfg.initial_block
                continue
            p.division_declined()
        budget = cfg.next_budget(budget)
    # join divided-off halves; later divisions cover earlier input ranges
    for task, src in reversed(pending):
        rt.wait_until(task.done.is_set)
        if task.exc is not None:
            ctx.record_failure(task.exc)
            value = NOTHING
        else:
            value = NOTHING if task.cancelled else task.result
        acc = _combine(reducer, ctx, acc, value)
        src.task_completed()
        ctx.note_subtree_done()
    if ctx.probe is not None:
        ctx.probe.adaptive_task(micro, budgets)
    return acc


# ------------------------------------------------------------------- blocks

def schedule_blocks(producer: Producer, reducer: Reducer, ctx: ExecCtx,
                    schedule, inner: Callable[[Producer, Reducer, ExecCtx], Any],
                    default_initial: int):
    """Sequential geometric blocks, each run in parallel by ``inner``.

    Early exits are honored between blocks: once a block's run prunes the
    remainder, later blocks never start, which bounds wasted work to the
    current block.
    """
    acc = NOTHING
    k = 0
    p = producer
    while len(p) > 0 and not ctx.stopped():
        size = schedule.size(k, default_initial)
        block, p = p.divide_at(size)
        blk_len = len(block)  # running the block may consume it in place
        steals0 = ctx.rt.steal_count()
        splits0 = ctx.rt.split_count()
        tasks0 = ctx.probe.adaptive_tasks if ctx.probe is not None else 0
        with ctx.span("block"):
            value = inner(block, reducer, ctx)
        acc = _combine(reducer, ctx, acc, value)
        if ctx.probe is not None:
            ctx.probe.block({
                "index": k, "size": blk_len,
                "steals": ctx.rt.steal_count() - steals0,
                "splits": ctx.rt.split_count() - splits0,
                "adaptive_tasks": ctx.probe.adaptive_tasks - tasks0,
            })
        k += 1
    return acc


# ----------------------------------------------------------------- dispatch

def make_ctx(rt: Optional[Runtime] = None) -> ExecCtx:
    rt = rt or active_runtime()
    return ExecCtx(rt, probe=_ambient_probe, recorder=_ambient_recorder)


def drive(producer: Producer, reducer: Reducer, ctx: ExecCtx,
          scheduler: str = "join", adaptive_cfg: Optional[AdaptiveConfig] = None,
          blocks=None):
    """Run one pipeline to completion and return the finished reduction."""
    if scheduler == "join":
        inner = schedule_join
    elif scheduler == "depjoin":
        inner = schedule_depjoin
    elif scheduler == "adaptive":
        inner = lambda p, r, c: schedule_adaptive(p, r, c, adaptive_cfg)
    else:
        raise ValueError(f"unknown scheduler {scheduler!r}")
    if blocks is not None:
        top = lambda: schedule_blocks(producer, reducer, ctx, blocks, inner,
                                      default_initial=ctx.rt.worker_count)
    else:
        top = lambda: inner(producer, reducer, ctx)
    result = ctx.rt.run(top)
    if ctx.first_exc is not None:
        raise ctx.first_exc
    return reducer.finish(result)
