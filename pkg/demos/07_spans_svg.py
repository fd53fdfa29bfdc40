"""Execution spans: what every worker did, when, and for which task.

A span recorder attached to the run context captures per-worker
(task, start, end, label) segments.  They round-trip through JSON lines
and render to a self-contained SVG timeline.
"""

import numpy as np

import splitkit as sk

rt = sk.Runtime(4)
recorder = sk.SpanRecorder(rt.worker_count)

data = np.random.default_rng(3).integers(0, 1 << 40, size=200_000, dtype=np.int64)
with sk.record_spans(recorder):
    ctx = sk.ExecCtx(rt, recorder=recorder)
    sk.merge_sort_iter(data, split="bound_depth", split_param=4, ctx=ctx)

spans = recorder.spans()
print(f"captured {len(spans)} spans over {rt.worker_count} workers")
labels = sorted({s.label for s in spans})
print("labels:", labels)

sk.emit_spans(spans, "sort_spans.jsonl")
again = sk.load_spans("sort_spans.jsonl")
assert again == spans
sk.render_svg(spans, "sort_spans.svg")
print("wrote sort_spans.jsonl and sort_spans.svg")

rt.close()
