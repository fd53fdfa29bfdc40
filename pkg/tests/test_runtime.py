"""Worker pool: join, stealing, steal requests, counters, install."""

import threading
import time

import pytest

import splitkit
from splitkit import Runtime, install
from splitkit.runtime import active_runtime, resolve_worker_count, THREADS_ENV


def test_worker_count_validation():
    with pytest.raises(ValueError):
        Runtime(0)
    with pytest.raises(ValueError):
        Runtime(-2)
    with pytest.raises(ValueError):
        Runtime("three")


def test_run_from_outside_and_inline(rt2):
    assert rt2.run(lambda: 41 + 1) == 42
    # from a worker, run() executes inline on the same thread
    outer = {}

    def fn():
        outer["tid"] = threading.get_ident()
        return rt2.run(lambda: threading.get_ident())

    assert rt2.run(fn) == outer["tid"]


def test_run_propagates_exception(rt2):
    with pytest.raises(ZeroDivisionError):
        rt2.run(lambda: 1 // 0)


def test_join_returns_both_results(rt2):
    got = rt2.run(lambda: rt2.join(lambda: "L", lambda: "R"))
    assert got == ("L", "R")


def test_join_left_exception_cancels_unstolen_right(rt1):
    ran = []

    def left():
        raise RuntimeError("boom")

    def right():
        ran.append(1)

    with pytest.raises(RuntimeError, match="boom"):
        rt1.run(lambda: rt1.join(left, right))
    assert ran == []  # single worker: right was still queued, so cancelled


def test_join_right_exception_propagates(rt2):
    def right():
        raise ValueError("from right")

    with pytest.raises(ValueError, match="from right"):
        rt2.run(lambda: rt2.join(lambda: 1, right))


def test_two_sleeps_overlap_on_two_workers(rt2):
    def branch():
        time.sleep(0.05)
        return 1

    t0 = time.perf_counter()
    got = rt2.run(lambda: rt2.join(branch, branch))
    wall = time.perf_counter() - t0
    assert got == (1, 1)
    assert wall < 0.090, f"branches did not overlap: {wall*1000:.1f}ms"


def test_single_worker_runs_everything_itself(rt1):
    seen = []

    def task(tag):
        def fn():
            seen.append((tag, rt1.current_worker_id()))
            return tag
        return fn

    got = rt1.run(lambda: rt1.join(task("a"), task("b")))
    assert got == ("a", "b")
    assert seen == [("a", 0), ("b", 0)]
    assert rt1.steal_count() == 0


def test_join_context_unstolen_right_is_not_migrated(rt1):
    def run():
        return rt1.join_context(lambda c: (c.worker_id, c.migrated),
                                lambda c: (c.worker_id, c.migrated))

    left, right = rt1.run(run)
    assert left == (0, False)
    assert right == (0, False)


def test_join_context_stolen_right_is_migrated(rt2):
    started = threading.Event()

    def left(c):
        # hold this worker until the sibling has been stolen and started
        assert started.wait(5.0), "right branch never started elsewhere"
        return c.migrated

    def right(c):
        started.set()
        time.sleep(0.01)
        return c.migrated

    lm, rm = rt2.run(lambda: rt2.join_context(left, right))
    assert lm is False
    assert rm is True
    assert rt2.steal_count() >= 1


def test_steal_requests_appear_when_a_worker_starves(rt2):
    def fn():
        deadline = time.time() + 5.0
        while not rt2.steal_requests_pending():
            if time.time() > deadline:
                return False
            time.sleep(0.001)
        return True

    assert rt2.run(fn) is True


def test_steal_requests_vanish_when_everyone_is_busy(rt2):
    stop = threading.Event()

    def busy():
        while not stop.is_set():
            time.sleep(0.001)
        return "done"

    def fn():
        task = rt2.spawn(busy)
        try:
            deadline = time.time() + 5.0
            while rt2.steal_requests_pending():
                if time.time() > deadline:
                    return "stuck"
                time.sleep(0.001)
            return "quiet"
        finally:
            stop.set()
            rt2.wait_until(task.done.is_set)

    assert rt2.run(fn) == "quiet"


def test_wait_until_executes_other_tasks_meanwhile(rt1):
    ran = []

    def fn():
        t = rt1.spawn(lambda: ran.append("spawned"))
        rt1.wait_until(t.done.is_set)  # single worker: must self-execute
        return list(ran)

    assert rt1.run(fn) == ["spawned"]


def test_spawn_outside_worker_rejected(rt2):
    with pytest.raises(RuntimeError):
        rt2.spawn(lambda: 1)


def test_steals_never_exceed_spawned_tasks(rt2):
    import numpy as np
    from splitkit import make_ctx, par_iter

    s0, p0 = rt2.steal_count(), rt2.split_count()
    ctx = make_ctx(rt2)
    got = par_iter(np.arange(20000)).bound_depth(6).with_join().sum(ctx=ctx)
    assert got == 20000 * 19999 // 2
    steals = rt2.steal_count() - s0
    splits = rt2.split_count() - p0
    assert splits == 63  # full binary tree of depth 6
    assert 0 <= steals <= splits


def test_install_is_exclusive():
    with install(1) as rt:
        assert active_runtime() is rt
        with pytest.raises(RuntimeError):
            install(1)
    # closing uninstalled it
    with install(2) as rt2_:
        assert active_runtime() is rt2_
        assert rt2_.worker_count == 2


def test_resolve_worker_count_env(monkeypatch):
    monkeypatch.delenv(THREADS_ENV, raising=False)
    assert resolve_worker_count(3) == 3
    monkeypatch.setenv(THREADS_ENV, "5")
    assert resolve_worker_count() == 5
    assert resolve_worker_count(2) == 2  # explicit beats env
    monkeypatch.setenv(THREADS_ENV, "zero")
    with pytest.raises(ValueError):
        resolve_worker_count()
    monkeypatch.setenv(THREADS_ENV, "0")
    with pytest.raises(ValueError):
        resolve_worker_count()
    monkeypatch.delenv(THREADS_ENV)
    import os
    assert resolve_worker_count() == (os.cpu_count() or 1)


def test_install_reads_env(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    with install() as rt:
        assert rt.worker_count == 3


def test_close_stops_workers():
    rt = Runtime(2)
    rt.close()
    for w in rt._workers:
        assert not w.thread.is_alive()


def test_module_counters_follow_active_runtime():
    with install(1):
        assert splitkit.steal_count() == 0
        assert splitkit.split_count() == 0
        assert splitkit.current_worker_id() is None  # main thread
        # an idle worker hunts, so its standing steal request shows up
        deadline = time.time() + 5.0
        while not splitkit.steal_requests_pending():
            assert time.time() < deadline
            time.sleep(0.001)
