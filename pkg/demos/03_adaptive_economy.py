"""The steal-driven scheduler divides only when someone actually asks.

Each task consumes its piece in geometrically growing bites and checks a
steal-request queue between bites.  A division happens only to serve a
claimed request, and the divided-off half goes straight to the requester,
so: tasks created == steals + 1, always.  No speculative task tree.
"""

import numpy as np

import splitkit as sk

for workers in (1, 2, 4):
    rt = sk.Runtime(workers)
    for n in (10_000, 100_000):
        before = rt.steal_count()
        with sk.probe() as pr:
            ctx = sk.make_ctx(rt)
            got = sk.par_iter(np.arange(n, dtype=np.int64)).adaptive().sum(ctx=ctx)
        steals = rt.steal_count() - before
        assert got == n * (n - 1) // 2
        assert pr.adaptive_tasks == steals + 1
        print(f"workers={workers} n={n:6d}: tasks={pr.adaptive_tasks:2d} "
              f"steals={steals:2d} (tasks == steals + 1)")
    if workers == 1:
        # one worker, no thieves: a single task eats the whole input in
        # doubling bites, so the bite count stays logarithmic
        [m] = pr.micro_loops_per_task
        print(f"  single worker took {m} bites for n={n} "
              f"(bound: ceil(log2 n) + 1 = {int(np.ceil(np.log2(n))) + 1})")
        print(f"  bite budgets: {pr.budget_logs[0]}")
    rt.close()
