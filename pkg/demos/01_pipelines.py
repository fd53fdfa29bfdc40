"""Parallel iterator pipelines over divisible sources.

Any indexable, splittable collection can feed a pipeline: numpy arrays,
ranges, lists, or equal-length tuples of them.  Adaptors compose lazily;
terminals run the pipeline on the shared worker pool.
"""

import numpy as np

import splitkit as sk

rt = sk.Runtime(4)
ctx = sk.make_ctx(rt)

data = np.arange(1000, dtype=np.int64)

# map/filter chains behave like their sequential cousins
total = sk.par_iter(data).filter(lambda x: x % 3 == 0).map(lambda x: x * x).sum(ctx=ctx)
print("sum of squares of multiples of 3:", total)

# zip walks two sources in lockstep; divisions cut both at the same index
weights = np.linspace(0, 1, len(data))
dot = sk.par_iter(data).zip(weights).map(lambda p: float(p[0]) * float(p[1])).sum(ctx=ctx)
print("weighted sum:", round(dot, 3))

# fold builds one accumulator per undivided piece; the reduction combines
# accumulators, so the pipeline never materializes intermediate lists
chunks = sk.par_iter(data).fold(lambda: 0, lambda a, x: a + int(x)).bound_depth(3).collect(ctx=ctx)
print("per-piece partial sums:", chunks)
print("their total:", sum(chunks))

# collect preserves input order no matter how the input was divided
evens = sk.par_iter(range(20)).filter(lambda x: x % 2 == 0).collect(ctx=ctx)
print("evens in order:", evens)

rt.close()
