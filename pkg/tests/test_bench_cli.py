"""Benchmark harness, span traces, SVG rendering, CLI exit codes."""

import json
import os

import numpy as np
import pytest

from splitkit import SpanRecorder, emit_spans, load_spans, record_spans, render_svg
from splitkit import bench as bench_mod
from splitkit import cli as cli_mod
from splitkit import make_ctx, par_iter
from splitkit.bench import (
    CSV_HEADER,
    BenchRecord,
    OracleMismatch,
    emit_csv,
    load_csv,
    parse_policy,
    run,
)


# ------------------------------------------------------------ policy parser

def test_parse_policy_defaults():
    spec = parse_policy("default")
    assert spec.policy is None and spec.scheduler == "join" and spec.blocks is None
    assert parse_policy("").raw == "default"


def test_parse_policy_clauses():
    spec = parse_policy("bound_depth=4+depjoin")
    assert (spec.policy, spec.policy_param, spec.scheduler) == ("bound_depth", 4, "depjoin")
    spec = parse_policy("thief_splitting+adaptive")
    assert (spec.policy, spec.policy_param, spec.scheduler) == ("thief_splitting", None, "adaptive")
    spec = parse_policy("by_blocks=128,1.5")
    assert spec.blocks.initial_size == 128 and spec.blocks.growth_factor == 1.5
    spec = parse_policy("by_blocks")
    assert spec.blocks is not None and spec.blocks.initial_size is None
    spec = parse_policy("merge=slice_work+join_context_policy=6")
    assert spec.merge == "slice_work" and spec.policy == "join_context_policy"
    spec = parse_policy("static=16")
    assert spec.fannkuch_mode == "static" and spec.chunk_multiplier == 16


def test_parse_policy_rejects_garbage():
    with pytest.raises(ValueError):
        parse_policy("warp_speed=9")
    with pytest.raises(ValueError):
        parse_policy("bound_depth")  # needs a value
    with pytest.raises(ValueError):
        parse_policy("merge=bogus")


# -------------------------------------------------------------------- bench

def test_run_produces_one_record_per_run(rt2):
    records = run("sum", "bound_depth=4", 2, 10_000, 3, 42, runtime=rt2)
    assert [r.run for r in records] == [0, 1, 2]
    for r in records:
        assert r.bench == "sum" and r.workers == 2 and r.size == 10_000
        assert r.wall_ns > 0 and r.steals >= 0 and r.splits >= 0
        assert r.consumed == 10_000


def test_run_is_seed_deterministic_for_counters_free_fields(rt2):
    a = run("max_sum", "bound_depth=3", 2, 5_000, 2, 7, runtime=rt2)
    b = run("max_sum", "bound_depth=3", 2, 5_000, 2, 7, runtime=rt2)
    assert [(r.bench, r.policy, r.size, r.run, r.consumed) for r in a] == \
           [(r.bench, r.policy, r.size, r.run, r.consumed) for r in b]


def test_run_validates_arguments(rt2):
    with pytest.raises(ValueError):
        run("nope", "default", 2, 10, 1, 0, runtime=rt2)
    with pytest.raises(ValueError):
        run("sum", "default", 2, 10, 0, 0, runtime=rt2)
    with pytest.raises(ValueError):
        run("sum", "default", 3, 10, 1, 0, runtime=rt2)  # worker mismatch


def test_all_benches_pass_their_oracles(rt2):
    sizes = {"sort": 3000, "find_first": 5000, "all": 5000, "max_sum": 2000,
             "filter_even": 2000, "sum": 5000, "fannkuch": 6}
    for bench, size in sizes.items():
        records = run(bench, "default", 2, size, 1, 123, runtime=rt2)
        assert len(records) == 1


def test_csv_round_trip(tmp_path, rt2):
    records = run("sum", "size_limit=500", 2, 2_000, 2, 9, runtime=rt2)
    path = str(tmp_path / "out.csv")
    emit_csv(records, path)
    first = open(path).readline().strip()
    assert first == "bench,policy,workers,size,run,wall_ns,steals,splits,consumed"
    assert load_csv(path) == records


def test_load_csv_rejects_wrong_header(tmp_path):
    path = str(tmp_path / "bad.csv")
    with open(path, "w") as fh:
        fh.write("a,b,c\n1,2,3\n")
    with pytest.raises(ValueError, match="header"):
        load_csv(path)


# -------------------------------------------------------------------- spans

def _record_sort_spans(rt):
    rec = SpanRecorder()
    with record_spans(rec):
        from splitkit.algorithms import merge_sort_iter
        rng = np.random.default_rng(0)
        merge_sort_iter(rng.permutation(4000).astype(np.int32),
                        split="bound_depth", split_param=3,
                        ctx=make_ctx(rt))
    return rec.spans()


def test_spans_non_overlapping_per_worker(rt2):
    spans = _record_sort_spans(rt2)
    assert spans, "no spans recorded"
    by_worker = {}
    for s in spans:
        by_worker.setdefault(s.worker_id, []).append(s)
    for wid, lane in by_worker.items():
        lane.sort(key=lambda s: s.start_ns)
        for a, b in zip(lane, lane[1:]):
            assert a.end_ns <= b.start_ns, f"worker {wid} spans overlap"
    for s in spans:
        assert s.end_ns > s.start_ns
        assert s.label in ("leaf", "combine", "nano", "block")


def test_spans_jsonl_round_trip(tmp_path, rt2):
    spans = _record_sort_spans(rt2)
    path = str(tmp_path / "trace.jsonl")
    emit_spans(spans, path)
    with open(path) as fh:
        for line in fh:
            assert list(json.loads(line).keys()) == [
                "task_id", "parent_id", "worker_id", "start_ns", "end_ns", "label"]
    assert load_spans(path) == spans


def test_load_spans_reports_bad_line_number(tmp_path):
    path = str(tmp_path / "bad.jsonl")
    with open(path, "w") as fh:
        fh.write('{"task_id": 1, "parent_id": null, "worker_id": 0, '
                 '"start_ns": 0, "end_ns": 5, "label": "leaf"}\n')
        fh.write('{"task_id": "x"}\n')
    with pytest.raises(ValueError, match=r":2:"):
        load_spans(path)


def test_block_spans_cover_their_blocks(rt1):
    rec = SpanRecorder()
    with record_spans(rec):
        from splitkit import BlockSchedule
        par_iter(np.arange(600)).by_blocks(BlockSchedule(64)).sum(ctx=make_ctx(rt1))
    blocks = [s for s in rec.spans() if s.label == "block"]
    assert len(blocks) >= 3
    for a, b in zip(blocks, blocks[1:]):
        assert a.end_ns <= b.start_ns  # blocks are strictly sequential


def test_render_svg_is_deterministic(tmp_path, rt2):
    spans = _record_sort_spans(rt2)
    p1 = str(tmp_path / "a.svg")
    p2 = str(tmp_path / "b.svg")
    render_svg(spans, p1)
    render_svg(spans, p2)
    b1 = open(p1, "rb").read()
    assert b1 == open(p2, "rb").read()
    assert b1.startswith(b"<svg") or b"<svg" in b1[:200]


def test_render_svg_handles_empty(tmp_path):
    path = str(tmp_path / "empty.svg")
    render_svg([], path)
    assert b"svg" in open(path, "rb").read()


# ---------------------------------------------------------------------- cli

def test_cli_run_writes_all_artifacts(tmp_path):
    csv_path = str(tmp_path / "r.csv")
    spans_path = str(tmp_path / "r.jsonl")
    svg_path = str(tmp_path / "r.svg")
    rc = cli_mod.main(["run", "--bench", "sort", "--policy", "bound_depth=4+depjoin",
                       "--workers", "2", "--size", "4000", "--runs", "2",
                       "--seed", "5", "--csv", csv_path,
                       "--spans", spans_path, "--svg", svg_path])
    assert rc == 0
    rows = load_csv(csv_path)
    assert len(rows) == 2 and rows[0].policy == "bound_depth=4+depjoin"
    assert load_spans(spans_path)
    assert os.path.getsize(svg_path) > 0


def test_cli_render_round_trip(tmp_path):
    spans_path = str(tmp_path / "t.jsonl")
    emit_spans([], spans_path)
    rc = cli_mod.main(["render", "--spans", spans_path,
                       "--svg", str(tmp_path / "t.svg")])
    assert rc == 0


def test_cli_usage_errors_exit_2(tmp_path):
    assert cli_mod.main([]) == 2
    assert cli_mod.main(["run", "--bench", "nope", "--size", "5"]) == 2
    assert cli_mod.main(["run", "--bench", "sum", "--size", "-3"]) == 2
    assert cli_mod.main(["run", "--bench", "sum", "--size", "5", "--runs", "0"]) == 2
    assert cli_mod.main(["run", "--bench", "sum", "--size", "5", "--workers", "0"]) == 2
    assert cli_mod.main(["run", "--bench", "sum", "--size", "5",
                         "--policy", "warp=1"]) == 2
    assert cli_mod.main(["run", "--bench", "sum", "--size", "5",
                         "--svg", str(tmp_path / "x.svg")]) == 2  # svg needs spans


def test_cli_io_errors_exit_3(tmp_path):
    assert cli_mod.main(["render", "--spans", str(tmp_path / "missing.jsonl"),
                         "--svg", str(tmp_path / "out.svg")]) == 3
    assert cli_mod.main(["run", "--bench", "sum", "--size", "100", "--workers", "1",
                         "--csv", str(tmp_path / "no_dir" / "out.csv")]) == 3


def test_cli_oracle_failure_exits_1(monkeypatch):
    monkeypatch.setattr(bench_mod, "_max_sum_reference", lambda data: -10 ** 9)
    rc = cli_mod.main(["run", "--bench", "max_sum", "--size", "500",
                       "--workers", "1"])
    assert rc == 1


def test_cli_threads_env_default(monkeypatch, capsys):
    monkeypatch.setenv("SPLITKIT_THREADS", "2")
    rc = cli_mod.main(["run", "--bench", "sum", "--size", "1000"])
    assert rc == 0
    assert "workers=2" in capsys.readouterr().out
