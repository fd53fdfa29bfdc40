"""splitkit: composable task-splitting policies for shared-memory parallel
iteration.

Data sources that know how to divide themselves are driven by
interchangeable schedulers (fork-join, dependency-aware join, steal-driven
adaptive splitting, sequential block batching), with the division policy
layered on as pipeline adaptors rather than baked into each algorithm.
"""

from .core import (
    Done,
    NOTHING,
    Producer,
    RangeSource,
    Reducer,
    SliceSource,
    Source,
    TupleSource,
    WorkProducer,
    WorkState,
    as_source,
)
from .runtime import (
    Runtime,
    TaskContext,
    active_runtime,
    current_task_migrated,
    current_worker_id,
    install,
    resolve_worker_count,
    split_count,
    steal_count,
    steal_requests_pending,
    THREADS_ENV,
)
from .schedulers import (
    AdaptiveConfig,
    ExecCtx,
    Probe,
    make_ctx,
    probe,
    record_spans,
    schedule_adaptive,
    schedule_blocks,
    schedule_depjoin,
    schedule_join,
)
from .adaptors import (
    BlockSchedule,
    BoundDepth,
    Cap,
    CapState,
    EvenLevels,
    ForceDepth,
    JoinContextPolicy,
    MergeProducer,
    ParIter,
    SizeLimit,
    ThiefSplit,
    merge_iter,
    par_iter,
    work,
    wrap_iter,
)
from .algorithms import (
    FannkuchResult,
    SORT_VARIANTS,
    SortBuffers,
    all_match,
    fannkuch,
    filter_collect_even,
    find_first,
    max_sum_par,
    merge_slices_adaptive,
    merge_sort_iter,
    perm_from_index,
)
from .spans import ExecutionSpan, SpanRecorder, emit_spans, load_spans, render_svg

__version__ = "0.1.0"

__all__ = [
    "AdaptiveConfig",
    "BlockSchedule",
    "BoundDepth",
    "Cap",
    "CapState",
    "Done",
    "EvenLevels",
    "ExecCtx",
    "ExecutionSpan",
    "FannkuchResult",
    "ForceDepth",
    "JoinContextPolicy",
    "MergeProducer",
    "NOTHING",
    "ParIter",
    "Probe",
    "Producer",
    "RangeSource",
    "Reducer",
    "Runtime",
    "SORT_VARIANTS",
    "SizeLimit",
    "SliceSource",
    "SortBuffers",
    "Source",
    "SpanRecorder",
    "TaskContext",
    "ThiefSplit",
    "THREADS_ENV",
    "TupleSource",
    "WorkProducer",
    "WorkState",
    "active_runtime",
    "all_match",
    "as_source",
    "current_task_migrated",
    "current_worker_id",
    "emit_spans",
    "fannkuch",
    "filter_collect_even",
    "find_first",
    "install",
    "load_spans",
    "make_ctx",
    "max_sum_par",
    "merge_iter",
    "merge_slices_adaptive",
    "merge_sort_iter",
    "par_iter",
    "perm_from_index",
    "probe",
    "record_spans",
    "render_svg",
    "resolve_worker_count",
    "schedule_adaptive",
    "schedule_blocks",
    "schedule_depjoin",
    "schedule_join",
    "split_count",
    "steal_count",
    "steal_requests_pending",
    "wrap_iter",
    "work",
]
