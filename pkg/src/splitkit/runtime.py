"""A minimal shared-memory fork-join runtime with work stealing.

Each worker thread owns a double-ended task queue.  The owner pushes and
pops at the newest end; an idle worker picks a victim uniformly at random
and steals from the oldest end.  ``join(left, right)`` makes the right
branch stealable, runs the left inline, then either pops the right branch
back or helps execute other tasks until the thief finishes it.

Idle workers that sweep every queue without finding work post a *steal
request*.  Cooperative producers (the adaptive scheduler) can claim one
request atomically and hand a freshly divided task straight to the hunter;
that handoff is what lets "tasks created == successful steals + 1" hold
exactly.

Blocking calls never hold a lock while waiting, and every wait loop doubles
as a hunt loop, so a worker blocked on a join keeps the machine busy.
"""

from __future__ import annotations

import itertools
import os
import random
import sys
import threading
from collections import deque
from dataclasses import dataclass
from typing import Any, Callable, Optional

THREADS_ENV = "SPLITKIT_THREADS"

_IDLE_WAIT = 0.0005
_STACK_SIZE = 32 * 1024 * 1024

_task_ids = itertools.count(1)


class _Counter:
    """A lock-guarded integer; reads are unlocked (single machine word)."""

    __slots__ = ("_lock", "value")

    def __init__(self, value: int = 0):
        self._lock = threading.Lock()
        self.value = value

    def add(self, k: int = 1) -> int:
        with self._lock:
            self.value += k
            return self.value


@dataclass(frozen=True)
class TaskContext:
    """Execution facts handed to ``join_context`` branches."""

    worker_id: int
    migrated: bool


class Task:
    __slots__ = ("fn", "creator", "task_id", "parent_id", "worker_id",
                 "result", "exc", "cancelled", "done")

    def __init__(self, fn: Callable[[], Any], creator: Optional[int], parent_id: Optional[int]):
        self.fn = fn
        self.creator = creator
        self.task_id = next(_task_ids)
        self.parent_id = parent_id
        self.worker_id: Optional[int] = None
        self.result: Any = None
        self.exc: Optional[BaseException] = None
        self.cancelled = False
        self.done = threading.Event()

    @property
    def migrated(self) -> bool:
        return self.creator is not None and self.worker_id is not None and self.worker_id != self.creator


class _StealRequest:
    """Posted by an empty-handed hunter; claimed by at most one resolver.

    The single-element token list makes claim/cancel a one-winner race:
    ``list.pop`` either succeeds once or raises.  The claimer attaches a
    task and sets the event; the canceller simply wins the token.
    """

    __slots__ = ("_token", "task", "event", "worker_id")

    def __init__(self, worker_id: int):
        self._token = [None]
        self.task: Optional[Task] = None
        self.event = threading.Event()
        self.worker_id = worker_id

    def try_take(self) -> bool:
        try:
            self._token.pop()
            return True
        except IndexError:
            return False

    def wait_task(self) -> Task:
        self.event.wait()
        return self.task


class _Worker:
    __slots__ = ("id", "pool", "deque", "rng", "victims", "current", "thread")

    def __init__(self, wid: int, pool: "Runtime", nworkers: int):
        self.id = wid
        self.pool = pool
        self.deque: deque[Task] = deque()
        self.rng = random.Random(0x5EED ^ wid)
        self.victims = [v for v in range(nworkers) if v != wid]
        self.current: Optional[Task] = None
        self.thread: Optional[threading.Thread] = None


_tls = threading.local()


def _current_worker() -> Optional[_Worker]:
    return getattr(_tls, "worker", None)


class Runtime:
    """A pool of workers plus the counters the policies observe."""

    def __init__(self, worker_count: int, pin_workers: bool = False):
        if not isinstance(worker_count, int) or worker_count < 1:
            raise ValueError(f"worker_count must be a positive integer, got {worker_count!r}")
        self.worker_count = worker_count
        self.pin_workers = pin_workers
        self._inbox: deque[Task] = deque()
        self._requests: deque[_StealRequest] = deque()
        self._steals = _Counter()
        self._splits = _Counter()
        self._shutdown = False
        self._workers = [_Worker(i, self, worker_count) for i in range(worker_count)]
        if sys.getrecursionlimit() < 100_000:
            sys.setrecursionlimit(100_000)
        old_stack = threading.stack_size()
        try:
            threading.stack_size(_STACK_SIZE)
        except (ValueError, RuntimeError):
            pass
        try:
            for w in self._workers:
                t = threading.Thread(target=self._worker_main, args=(w,),
                                     name=f"splitkit-worker-{w.id}", daemon=True)
                w.thread = t
                t.start()
        finally:
            try:
                threading.stack_size(old_stack)
            except (ValueError, RuntimeError):
                pass

    # ---------------------------------------------------------------- hunt

    def _hunt_one(self, w: _Worker) -> Optional[Task]:
        """One non-blocking sweep: own queue newest-first, then the inbox,
        then every other worker's queue oldest-first in random order."""
        try:
            return w.deque.pop()
        except IndexError:
            pass
        try:
            return self._inbox.popleft()
        except IndexError:
            pass
        if w.victims:
            w.rng.shuffle(w.victims)
            for v in w.victims:
                try:
                    t = self._workers[v].deque.popleft()
                except IndexError:
                    continue
                self._steals.add()
                return t
        return None

    def _acquire(self, w: _Worker, stop: Callable[[], bool]) -> Optional[Task]:
        """Hunt until a task turns up or ``stop()`` fires.

        After one empty sweep the worker posts a steal request so that
        cooperative producers know someone is starving.  The request is
        cancelled when ordinary stealing succeeds first; if a producer wins
        the claim race instead, the delivered task is honored.
        """
        t = self._hunt_one(w)
        if t is not None:
            return t
        req: Optional[_StealRequest] = None
        while True:
            if stop() or self._shutdown:
                if req is not None:
                    self._retire_request(w, req)
                return None
            if req is None:
                req = _StealRequest(w.id)
                self._requests.append(req)
            t = self._hunt_one(w)
            if t is not None:
                if req.try_take():
                    self._discard_request(req)
                    return t
                # a producer claimed the request; run what we already hold,
                # then honor the delivery
                self._execute(w, t)
                return req.wait_task()
            if req.event.wait(_IDLE_WAIT):
                return req.task

    def _retire_request(self, w: _Worker, req: _StealRequest) -> None:
        if req.try_take():
            self._discard_request(req)
        else:
            # claimed at the last moment: the delivered task must still run
            self._execute(w, req.wait_task())

    def _discard_request(self, req: _StealRequest) -> None:
        try:
            self._requests.remove(req)
        except ValueError:
            pass

    # ------------------------------------------------------------- execute

    def _execute(self, w: _Worker, task: Task) -> None:
        if task.cancelled:
            task.done.set()
            return
        prev = w.current
        w.current = task
        task.worker_id = w.id
        try:
            task.result = task.fn()
        except BaseException as e:
            task.exc = e
        finally:
            w.current = prev
            task.done.set()

    def _worker_main(self, w: _Worker) -> None:
        _tls.worker = w
        if self.pin_workers:
            try:
                cpus = sorted(os.sched_getaffinity(0))
                os.sched_setaffinity(0, {cpus[w.id % len(cpus)]})
            except (AttributeError, OSError):
                pass
        while not self._shutdown:
            t = self._acquire(w, stop=lambda: False)
            if t is None:
                break
            self._execute(w, t)

    # ------------------------------------------------------------ spawning

    def run(self, fn: Callable[[], Any]) -> Any:
        """Run ``fn`` inside the pool and block for its result.

        Called from a worker it just runs inline; from any other thread it
        enqueues a root task and waits.
        """
        w = _current_worker()
        if w is not None and w.pool is self:
            return fn()
        task = Task(fn, creator=None, parent_id=None)
        self._inbox.append(task)
        task.done.wait()
        if task.exc is not None:
            raise task.exc
        return task.result

    def join(self, left: Callable[[], Any], right: Callable[[], Any]) -> tuple[Any, Any]:
        """Run both branches, possibly in parallel; return their results.

        The right branch becomes a stealable task while the left runs
        inline.  An exception from either branch propagates after both have
        settled; an unstarted right branch is cancelled, never run.
        """
        return self._join_impl(left, right, with_context=False)

    def join_context(self, left: Callable[[TaskContext], Any], right: Callable[[TaskContext], Any]) -> tuple[Any, Any]:
        """Like :meth:`join` but each branch receives a :class:`TaskContext`
        telling it which worker it runs on and whether it was stolen."""
        return self._join_impl(left, right, with_context=True)

    def _join_impl(self, left, right, with_context: bool):
        w = _current_worker()
        if w is None or w.pool is not self:
            return self.run(lambda: self._join_impl(left, right, with_context))
        parent = w.current
        parent_id = parent.task_id if parent is not None else None

        if with_context:
            def right_fn():
                cw = _current_worker()
                ct = cw.current
                return right(TaskContext(cw.id, ct.migrated))
        else:
            right_fn = right

        task = Task(right_fn, creator=w.id, parent_id=parent_id)
        w.deque.append(task)
        try:
            if with_context:
                inherited = parent.migrated if parent is not None else False
                left_value = left(TaskContext(w.id, inherited))
            else:
                left_value = left()
        except BaseException:
            self._settle_sibling(w, task, run_if_local=False)
            raise
        self._settle_sibling(w, task, run_if_local=True)
        if task.exc is not None:
            raise task.exc
        return left_value, task.result

    def _settle_sibling(self, w: _Worker, task: Task, run_if_local: bool) -> None:
        """Bring a pushed right-branch task to completion (or cancel it)."""
        if not task.done.is_set():
            try:
                popped = w.deque.pop()
            except IndexError:
                popped = None
            if popped is task:
                if run_if_local:
                    self._execute(w, popped)
                else:
                    popped.cancelled = True
                    popped.done.set()
            elif popped is not None:
                # our task was stolen; the popped one belongs where it was
                w.deque.append(popped)
        self.wait_until(task.done.is_set)

    def wait_until(self, pred: Callable[[], bool]) -> None:
        """Block until ``pred()`` holds, executing other tasks meanwhile."""
        w = _current_worker()
        if w is None or w.pool is not self:
            while not pred():
                if self._shutdown:
                    raise RuntimeError("runtime shut down while waiting")
                threading.Event().wait(_IDLE_WAIT)
            return
        while not pred():
            t = self._acquire(w, stop=pred)
            if t is not None:
                self._execute(w, t)
            elif self._shutdown and not pred():
                raise RuntimeError("runtime shut down while waiting")

    def spawn(self, fn: Callable[[], Any]) -> Task:
        """Push a stealable task onto the calling worker's queue."""
        w = _current_worker()
        if w is None or w.pool is not self:
            raise RuntimeError("spawn() must be called from a worker task")
        parent = w.current
        task = Task(fn, creator=w.id, parent_id=parent.task_id if parent else None)
        w.deque.append(task)
        return task

    # ------------------------------------------------- steal-request plane

    def steal_requests_pending(self) -> bool:
        """True when at least one worker is hunting empty-handed."""
        return len(self._requests) > 0

    def try_claim_steal_request(self) -> Optional[_StealRequest]:
        """Atomically claim one pending request, or None.

        The claimer owns the request and must follow up with
        :meth:`deliver`; the hunter on the other end is already committed to
        waiting for it.
        """
        while True:
            try:
                req = self._requests.popleft()
            except IndexError:
                return None
            if req.try_take():
                return req

    def deliver(self, req: _StealRequest, fn: Callable[[], Any]) -> Task:
        """Hand a task straight to the requesting hunter; counts as a steal."""
        w = _current_worker()
        parent = w.current if w is not None else None
        task = Task(fn, creator=w.id if w is not None else None,
                    parent_id=parent.task_id if parent is not None else None)
        req.task = task
        self._steals.add()
        req.event.set()
        return task

    # ------------------------------------------------------------ counters

    def steal_count(self) -> int:
        return self._steals.value

    def split_count(self) -> int:
        return self._splits.value

    def note_split(self, k: int = 1) -> None:
        self._splits.add(k)

    def current_worker_id(self) -> Optional[int]:
        w = _current_worker()
        return w.id if w is not None and w.pool is self else None

    def current_migrated(self) -> bool:
        w = _current_worker()
        if w is None or w.pool is not self or w.current is None:
            return False
        return w.current.migrated

    def current_task_ids(self) -> tuple[Optional[int], Optional[int]]:
        """(task_id, parent_id) of the task running on this thread."""
        w = _current_worker()
        if w is None or w.pool is not self or w.current is None:
            return None, None
        return w.current.task_id, w.current.parent_id

    # ------------------------------------------------------------ lifecycle

    def close(self) -> None:
        global _installed
        self._shutdown = True
        for w in self._workers:
            if w.thread is not None:
                w.thread.join(timeout=5.0)
        with _state_lock:
            if _installed is self:
                _installed = None

    def __enter__(self) -> "Runtime":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


# ------------------------------------------------------------------ module

_state_lock = threading.Lock()
_installed: Optional[Runtime] = None
_default: Optional[Runtime] = None


def _env_worker_count() -> Optional[int]:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"{THREADS_ENV} must be >= 1, got {n}")
    return n


def resolve_worker_count(worker_count: Optional[int] = None) -> int:
    if worker_count is not None:
        return worker_count
    env = _env_worker_count()
    if env is not None:
        return env
    return os.cpu_count() or 1


def install(worker_count: Optional[int] = None, pin_workers: bool = False) -> Runtime:
    """Create a runtime and make it the process-wide active one.

    Use as a context manager; closing uninstalls it.  Installing while
    another installed runtime is live is an error (the lazily created
    default runtime does not count and is shut down first).
    """
    global _installed, _default
    with _state_lock:
        if _installed is not None:
            raise RuntimeError("a runtime is already installed in this scope")
        rt = Runtime(resolve_worker_count(worker_count), pin_workers)
        _installed = rt
    return rt


def active_runtime() -> Runtime:
    """The installed runtime, or a lazily created default-sized one."""
    global _default
    if _installed is not None:
        return _installed
    with _state_lock:
        if _installed is not None:
            return _installed
        if _default is None or _default._shutdown:
            _default = Runtime(resolve_worker_count())
        return _default


def steal_count() -> int:
    return active_runtime().steal_count()


def split_count() -> int:
    return active_runtime().split_count()


def steal_requests_pending() -> bool:
    return active_runtime().steal_requests_pending()


def current_worker_id() -> Optional[int]:
    return active_runtime().current_worker_id()


def current_task_migrated() -> bool:
    """True when the task running on this thread was stolen (any runtime)."""
    w = _current_worker()
    return w is not None and w.current is not None and w.current.migrated


def current_worker_index() -> Optional[int]:
    """Worker id on this thread regardless of which runtime owns it."""
    w = _current_worker()
    return w.id if w is not None else None
