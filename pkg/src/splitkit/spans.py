"""Execution spans: recording, JSONL serialization, SVG rendering.

A span is one contiguous stretch of a worker doing one labeled thing.  The
recorder keeps a frame stack per worker: opening a nested span closes the
current segment of the enclosing frame, which resumes when the nested one
pops.  Spans on one worker therefore never overlap, even when a combine
runs nested parallel work.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, asdict
from typing import Iterable, Optional


@dataclass(frozen=True)
class ExecutionSpan:
    task_id: int
    parent_id: Optional[int]
    worker_id: int
    start_ns: int
    end_ns: int
    label: str


_JSON_KEYS = ("task_id", "parent_id", "worker_id", "start_ns", "end_ns", "label")


class _Frame:
    __slots__ = ("task_id", "parent_id", "label", "resume")

    def __init__(self, task_id, parent_id, label, resume):
        self.task_id = task_id
        self.parent_id = parent_id
        self.label = label
        self.resume = resume


class SpanRecorder:
    """Collects spans per worker lane; only each lane's worker writes to it."""

    def __init__(self, worker_count: int = 0):
        self._grow_lock = threading.Lock()
        self._stacks: list[list[_Frame]] = [[] for _ in range(worker_count)]
        self._out: list[list[ExecutionSpan]] = [[] for _ in range(worker_count)]

    def _lane(self, worker_id: int) -> list:
        if worker_id >= len(self._stacks):
            with self._grow_lock:
                while len(self._stacks) <= worker_id:
                    self._stacks.append([])
                    self._out.append([])
        return self._stacks[worker_id]

    def push(self, worker_id: int, task_id: int, parent_id: Optional[int], label: str) -> None:
        now = time.perf_counter_ns()
        stack = self._lane(worker_id)
        if stack:
            self._emit(worker_id, stack[-1], now)
        stack.append(_Frame(task_id, parent_id, label, now))

    def pop(self, worker_id: int) -> None:
        now = time.perf_counter_ns()
        stack = self._stacks[worker_id]
        frame = stack.pop()
        self._emit(worker_id, frame, now)
        if stack:
            stack[-1].resume = now

    def _emit(self, worker_id: int, frame: _Frame, end_ns: int) -> None:
        if end_ns > frame.resume:
            self._out[worker_id].append(ExecutionSpan(
                task_id=frame.task_id, parent_id=frame.parent_id,
                worker_id=worker_id, start_ns=frame.resume,
                end_ns=end_ns, label=frame.label))

    def spans(self) -> list[ExecutionSpan]:
        merged = [s for lane in self._out for s in lane]
        merged.sort(key=lambda s: (s.start_ns, s.worker_id, s.task_id))
        return merged


def emit_spans(spans: Iterable[ExecutionSpan], path: str) -> None:
    """Write one JSON object per line with a fixed key set."""
    with open(path, "w", encoding="utf-8") as fh:
        for s in spans:
            d = asdict(s)
            fh.write(json.dumps({k: d[k] for k in _JSON_KEYS}, sort_keys=False))
            fh.write("\n")


def load_spans(path: str) -> list[ExecutionSpan]:
    """Read spans back; malformed lines report their 1-based line number."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                d = json.loads(line)
                out.append(ExecutionSpan(
                    task_id=int(d["task_id"]),
                    parent_id=None if d["parent_id"] is None else int(d["parent_id"]),
                    worker_id=int(d["worker_id"]),
                    start_ns=int(d["start_ns"]),
                    end_ns=int(d["end_ns"]),
                    label=str(d["label"]),
                ))
            except (ValueError, KeyError, TypeError) as e:
                raise ValueError(f"{path}:{ln}: malformed span line: {e}") from None
    return out


_PALETTE = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
]

_LANE_H = 26
_LANE_GAP = 8
_MARGIN_L = 70
_MARGIN_T = 34
_MARGIN_B = 24
_WIDTH = 1200


def render_svg(spans: Iterable[ExecutionSpan], path: str, title: str = "execution spans") -> None:
    """Draw one rectangle per span in its worker's lane, colored by worker.

    Spans labeled ``block`` become vertical rules at their start and end
    instead of rectangles.  Output is deterministic for identical input.
    """
    spans = sorted(spans, key=lambda s: (s.worker_id, s.start_ns, s.task_id, s.label))
    rows = []
    if spans:
        t0 = min(s.start_ns for s in spans)
        t1 = max(s.end_ns for s in spans)
        span_w = max(t1 - t0, 1)
        workers = sorted({s.worker_id for s in spans})
        lane_of = {w: i for i, w in enumerate(workers)}
        height = _MARGIN_T + len(workers) * (_LANE_H + _LANE_GAP) + _MARGIN_B
        plot_w = _WIDTH - _MARGIN_L - 20

        def x(ns: int) -> float:
            return _MARGIN_L + (ns - t0) / span_w * plot_w

        rows.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{height}" '
                    f'font-family="monospace" font-size="11">')
        rows.append(f'<text x="{_MARGIN_L}" y="16">{_escape(title)} '
                    f'({len(spans)} spans, {span_w} ns)</text>')
        for w in workers:
            y = _MARGIN_T + lane_of[w] * (_LANE_H + _LANE_GAP)
            rows.append(f'<text x="6" y="{y + _LANE_H - 8}">w{w}</text>')
            rows.append(f'<line x1="{_MARGIN_L}" y1="{y + _LANE_H}" x2="{_MARGIN_L + plot_w}" '
                        f'y2="{y + _LANE_H}" stroke="#ddd" stroke-width="1"/>')
        rules = set()
        for s in spans:
            if s.label == "block":
                rules.add(s.start_ns)
                rules.add(s.end_ns)
        for ns in sorted(rules):
            rows.append(f'<line x1="{x(ns):.2f}" y1="{_MARGIN_T - 6}" x2="{x(ns):.2f}" '
                        f'y2="{height - _MARGIN_B}" stroke="#888" stroke-width="1" '
                        f'stroke-dasharray="4,3"/>')
        for s in spans:
            if s.label == "block":
                continue
            y = _MARGIN_T + lane_of[s.worker_id] * (_LANE_H + _LANE_GAP)
            x0 = x(s.start_ns)
            w_px = max(x(s.end_ns) - x0, 0.5)
            color = _PALETTE[s.worker_id % len(_PALETTE)]
            rows.append(f'<rect x="{x0:.2f}" y="{y}" width="{w_px:.2f}" height="{_LANE_H}" '
                        f'fill="{color}" stroke="#333" stroke-width="0.4">'
                        f'<title>{_escape(s.label)} task={s.task_id} worker={s.worker_id} '
                        f'{s.end_ns - s.start_ns} ns</title></rect>')
        rows.append("</svg>")
    else:
        rows.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="60" '
                    f'font-family="monospace" font-size="11">')
        rows.append(f'<text x="10" y="30">{_escape(title)} (no spans)</text>')
        rows.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(rows))
        fh.write("\n")


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
