"""Benchmark harness: seeded inputs, oracle checks, counters, CSV output.

Every run validates its result against an independently computed expected
value before it is recorded; a mismatch raises :class:`OracleMismatch`
rather than producing a row.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from . import algorithms as alg
from . import schedulers as _sched
from .adaptors import BlockSchedule
from .runtime import Runtime
from .schedulers import AdaptiveConfig

CSV_HEADER = ("bench", "policy", "workers", "size", "run",
              "wall_ns", "steals", "splits", "consumed")

BENCHES = ("sort", "find_first", "all", "max_sum", "filter_even", "fannkuch", "sum")


class OracleMismatch(AssertionError):
    """A benchmark result disagreed with its reference computation."""


@dataclass(frozen=True)
class BenchRecord:
    bench: str
    policy: str
    workers: int
    size: int
    run: int
    wall_ns: int
    steals: int
    splits: int
    consumed: int


@dataclass
class PolicySpec:
    """Parsed form of a ``--policy`` string.

    The grammar is plus-separated clauses: a splitting policy
    (``bound_depth=N``, ``thief_splitting[=N]``, ``join_context_policy=N``,
    ``size_limit=N``, ``cap=N``, ``force_depth=N``, ``even_levels``,
    ``default``), a scheduler (``join``, ``depjoin``, ``adaptive``), block
    scheduling (``by_blocks[=INIT[,GROWTH]]``), a sort merge kind
    (``merge=adaptive|thief|slice_work``), or ``static=K`` / ``static``
    for fannkuch chunking.
    """

    policy: Optional[str] = None
    policy_param: Optional[int] = None
    scheduler: str = "join"
    blocks: Optional[BlockSchedule] = None
    merge: str = "adaptive"
    fannkuch_mode: Optional[str] = None
    chunk_multiplier: int = 8
    raw: str = "default"


def parse_policy(text: str) -> PolicySpec:
    spec = PolicySpec(raw=text or "default")
    if not text or text == "default":
        return spec
    for clause in text.split("+"):
        clause = clause.strip()
        if not clause:
            continue
        name, _, arg = clause.partition("=")
        name = name.strip()
        arg = arg.strip()
        if name in ("bound_depth", "join_context_policy", "size_limit",
                    "cap", "force_depth"):
            if not arg:
                raise ValueError(f"policy {name} needs a value, e.g. {name}=4")
            spec.policy, spec.policy_param = name, int(arg)
        elif name == "thief_splitting":
            spec.policy = name
            spec.policy_param = int(arg) if arg else None
        elif name == "even_levels":
            spec.policy, spec.policy_param = name, None
        elif name == "default":
            spec.policy = None
        elif name in ("join", "depjoin", "adaptive"):
            spec.scheduler = name
        elif name == "by_blocks":
            if arg:
                parts = arg.split(",")
                init = int(parts[0])
                growth = float(parts[1]) if len(parts) > 1 else 2.0
                spec.blocks = BlockSchedule(init, growth)
            else:
                spec.blocks = BlockSchedule()
        elif name == "merge":
            if arg not in alg.SORT_MERGES:
                raise ValueError(f"merge must be one of {alg.SORT_MERGES}, got {arg!r}")
            spec.merge = arg
        elif name == "static":
            spec.fannkuch_mode = "static"
            if arg:
                spec.chunk_multiplier = int(arg)
        else:
            raise ValueError(f"unknown policy clause {clause!r}")
    return spec


def _run_one(bench: str, spec: PolicySpec, rng: np.random.Generator,
             size: int, ctx: _sched.ExecCtx) -> int:
    """Run one benchmark iteration inside ``ctx``; returns consumed count.

    Raises OracleMismatch when the result disagrees with the reference.
    """
    if bench == "sort":
        data = rng.permutation(size).astype(np.int32) if size else np.empty(0, np.int32)
        expected = np.sort(data, kind="stable")
        out = alg.merge_sort_iter(data, split=spec.policy or "thief_splitting",
                                  split_param=spec.policy_param,
                                  scheduler=spec.scheduler if spec.scheduler != "adaptive" else "join",
                                  merge=spec.merge, ctx=ctx)
        if not np.array_equal(out, expected):
            raise OracleMismatch("sort output differs from stable reference sort")
        ctx.consumed.add(size)
        return size
    if bench == "find_first":
        data = rng.integers(1, 2 ** 31 - 1, size=size, dtype=np.int32)
        target = int(rng.integers(0, max(size, 1)))
        if size:
            data[target] = -1
        found = alg.find_first(data, lambda x: x < 0,
                               pred_chunk=lambda v: v < 0,
                               policy=spec.policy, policy_param=spec.policy_param,
                               scheduler=spec.scheduler, blocks=spec.blocks, ctx=ctx)
        expected = (target, -1) if size else None
        got = None if found is None else (found[0], int(found[1]))
        if got != expected:
            raise OracleMismatch(f"find_first returned {got}, expected {expected}")
        return ctx.consumed.value
    if bench == "all":
        data = rng.integers(0, 2 ** 31 - 1, size=size, dtype=np.int32)
        target = int(rng.integers(0, max(size, 1)))
        if size:
            data[target] = -1
        got = alg.all_match(data, lambda x: x >= 0,
                            pred_chunk=lambda v: v >= 0,
                            policy=spec.policy, policy_param=spec.policy_param,
                            scheduler=spec.scheduler, blocks=spec.blocks, ctx=ctx)
        expected = bool(np.all(data >= 0)) if size else True
        if got != expected:
            raise OracleMismatch(f"all returned {got}, expected {expected}")
        return ctx.consumed.value
    if bench == "max_sum":
        data = rng.integers(-50, 51, size=size, dtype=np.int32)
        got = alg.max_sum_par(data, policy=spec.policy or "thief_splitting",
                              policy_param=spec.policy_param if spec.policy_param is not None else 4,
                              scheduler=spec.scheduler, ctx=ctx)
        expected = _max_sum_reference(data)
        if got != expected:
            raise OracleMismatch(f"max_sum returned {got}, expected {expected}")
        ctx.consumed.add(size)
        return size
    if bench == "filter_even":
        data = rng.integers(0, 2 ** 20, size=size, dtype=np.int64)
        got = alg.filter_collect_even(data, policy=spec.policy,
                                      policy_param=spec.policy_param,
                                      scheduler=spec.scheduler, ctx=ctx)
        expected = data[data % 2 == 0].tolist()
        if [int(x) for x in got] != expected:
            raise OracleMismatch("filter_even output differs from reference")
        ctx.consumed.add(size)
        return size
    if bench == "sum":
        data = rng.integers(0, 1000, size=size, dtype=np.int64)
        from .adaptors import par_iter
        it = par_iter(data)
        it = alg._apply_policy(it, spec.policy, spec.policy_param)
        it = alg._apply_scheduler(it, spec.scheduler, spec.blocks)
        got = it.sum(ctx=ctx)
        expected = int(data.sum())
        if got != expected:
            raise OracleMismatch(f"sum returned {got}, expected {expected}")
        ctx.consumed.add(size)
        return size
    if bench == "fannkuch":
        n = size
        mode = spec.fannkuch_mode or (
            "thief_splitting" if spec.policy == "thief_splitting" else
            "adaptive" if spec.scheduler == "adaptive" else "static")
        res = alg.fannkuch(n, policy=mode, chunk_multiplier=spec.chunk_multiplier,
                           thief_counter=spec.policy_param, ctx=ctx)
        expected = _fannkuch_reference(n)
        if (res.checksum, res.max_flips) != expected:
            raise OracleMismatch(
                f"fannkuch({n}) returned {(res.checksum, res.max_flips)}, expected {expected}")
        total = 1
        for i in range(2, n + 1):
            total *= i
        ctx.consumed.add(total)
        return total
    raise ValueError(f"unknown bench {bench!r}")


def _max_sum_reference(data) -> int:
    best = None
    run = 0
    for x in data:
        x = int(x)
        run = max(run + x, x)
        best = run if best is None else max(best, run)
    return 0 if best is None else best


_FK_CACHE: dict[int, tuple[int, int]] = {}


def _fannkuch_reference(n: int) -> tuple[int, int]:
    """Flip statistics by decoding every index independently (no cursor)."""
    if n in _FK_CACHE:
        return _FK_CACHE[n]
    total = 1
    for i in range(2, n + 1):
        total *= i
    checksum = 0
    max_flips = 0
    for idx in range(total):
        perm, _ = alg.perm_from_index(idx, n)
        p = list(map(int, perm))
        flips = 0
        while p[0] != 0:
            k = p[0]
            p[: k + 1] = p[: k + 1][::-1]
            flips += 1
        checksum += flips if idx % 2 == 0 else -flips
        if flips > max_flips:
            max_flips = flips
    _FK_CACHE[n] = (checksum, max_flips)
    return checksum, max_flips


def run(bench: str, policy: str, workers: int, size: int, runs: int, seed: int,
        *, runtime: Optional[Runtime] = None,
        span_recorder=None, span_run: Optional[int] = None) -> list[BenchRecord]:
    """Execute ``runs`` seeded iterations and return one record per run.

    ``span_recorder`` captures execution spans of run index ``span_run``
    (default: the last run).
    """
    if bench not in BENCHES:
        raise ValueError(f"unknown bench {bench!r}; choose from {BENCHES}")
    if runs < 1:
        raise ValueError("runs must be >= 1")
    if size < 0:
        raise ValueError("size must be >= 0")
    spec = parse_policy(policy)
    own_runtime = runtime is None
    rt = runtime if runtime is not None else Runtime(workers)
    if rt.worker_count != workers:
        raise ValueError(f"runtime has {rt.worker_count} workers, expected {workers}")
    if span_run is None:
        span_run = runs - 1
    records = []
    try:
        for run_idx in range(runs):
            rng = np.random.default_rng(seed + run_idx)
            recorder = span_recorder if run_idx == span_run else None
            ctx = _sched.ExecCtx(rt, probe=_sched._ambient_probe, recorder=recorder)
            steals0 = rt.steal_count()
            splits0 = rt.split_count()
            t0 = time.perf_counter_ns()
            consumed = _run_one(bench, spec, rng, size, ctx)
            wall = time.perf_counter_ns() - t0
            records.append(BenchRecord(
                bench=bench, policy=spec.raw, workers=workers, size=size,
                run=run_idx, wall_ns=wall,
                steals=rt.steal_count() - steals0,
                splits=rt.split_count() - splits0,
                consumed=consumed,
            ))
    finally:
        if own_runtime:
            rt.close()
    return records


def emit_csv(records, path: str) -> None:
    """Write records with the fixed header, one row per run."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for r in records:
            w.writerow([getattr(r, f) for f in CSV_HEADER])


def load_csv(path: str) -> list[BenchRecord]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"{path}: missing or wrong CSV header")
    out = []
    types = {f.name: f.type for f in fields(BenchRecord)}
    for row in rows[1:]:
        kw = dict(zip(CSV_HEADER, row))
        for key in ("workers", "size", "run", "wall_ns", "steals", "splits", "consumed"):
            kw[key] = int(kw[key])
        out.append(BenchRecord(**kw))
    return out
