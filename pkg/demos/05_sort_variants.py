"""Eighteen stable merge sorts from one skeleton.

The sort pipeline is a divisible (data, scratch) pair: leaves sort their
slice, combines merge sibling slices, buffers alternating per level.
Three split policies x two task schedulers x three merge strategies give
18 variants without touching the sort itself.
"""

import time

import numpy as np

import splitkit as sk

rt = sk.Runtime(4)
ctx = sk.make_ctx(rt)
rng = np.random.default_rng(7)
data = rng.integers(-(1 << 40), 1 << 40, size=500_000, dtype=np.int64)
want = np.sort(data, kind="stable")

sk.merge_sort_iter(data.copy(), ctx=ctx)  # compile kernels before timing

print(f"{'split':22s} {'scheduler':9s} {'merge':11s} {'ms':>7s}")
for split, sched, merge in sk.SORT_VARIANTS:
    arr = data.copy()
    t0 = time.perf_counter()
    sk.merge_sort_iter(arr, split=split, scheduler=sched, merge=merge, ctx=ctx)
    dt = (time.perf_counter() - t0) * 1000
    assert np.array_equal(arr, want)
    print(f"{split:22s} {sched:9s} {merge:11s} {dt:7.1f}")

# stability: sort (key, index) pairs by key only, indices stay ordered
n = 10_000
keys = rng.integers(0, 100, size=n, dtype=np.int64)
packed = (keys << 32) | np.arange(n, dtype=np.int64)
got = sk.merge_sort_iter(packed.copy(), shift=32, ctx=ctx)
ties = np.diff(got >> 32) == 0
assert np.all(np.diff(got & 0xFFFFFFFF)[ties] > 0)
print("ties kept their input order under shift-keyed sorting")

rt.close()
