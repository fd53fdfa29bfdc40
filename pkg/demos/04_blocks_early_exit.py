"""Block scheduling bounds the work an early exit can waste.

Searching a huge input in one parallel sweep starts pieces everywhere;
a hit near the front still lets far-away pieces burn cycles.  by_blocks
runs the input as a sequence of geometrically growing prefixes, checking
the stop flag between blocks: a hit at index i costs at most
2*(i+1) + 2*initial consumed elements with doubling blocks.
"""

import numpy as np

import splitkit as sk

rt = sk.Runtime(2)
n = 1_000_000
base = np.arange(n, dtype=np.int64)
initial = rt.worker_count

print(f"find first negative in {n} elements, doubling blocks from {initial}")
print(f"{'target':>8s} {'consumed':>9s} {'bound':>9s}")
for i in (0, 10, 1000, 50_000, n // 2, n - 1):
    arr = base.copy()
    arr[i] = -1
    ctx = sk.make_ctx(rt)
    pos, val = sk.find_first(arr, lambda x: x < 0, pred_chunk=lambda c: c < 0,
                             policy="size_limit", policy_param=1024,
                             blocks=sk.BlockSchedule(initial, 2.0), ctx=ctx)
    assert (pos, val) == (i, -1)
    bound = 2 * (i + 1) + 2 * initial
    print(f"{i:8d} {ctx.consumed.value:9d} {bound:9d}")

# the probe shows the block ladder itself
with sk.probe() as pr:
    ctx = sk.make_ctx(rt)
    sk.find_first(base, lambda x: x < 0, pred_chunk=lambda c: c < 0,
                  policy="size_limit", policy_param=1024,
                  blocks=sk.BlockSchedule(initial, 2.0), ctx=ctx)
print("miss scans every block:", [b["size"] for b in pr.blocks][:12], "...")

rt.close()
