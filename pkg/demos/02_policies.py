"""Splitting policies: who divides, how deep, and how often.

A policy wraps a divisible source and answers should_be_divided().
Policies stack, so a pipeline's division shape is assembled from parts.
The probe records every leaf (origin, length, depth) for inspection.
"""

import numpy as np

import splitkit as sk

rt = sk.Runtime(2)
data = np.arange(64, dtype=np.int64)


def run(label, it):
    with sk.probe() as pr:
        ctx = sk.make_ctx(rt)
        it.sum(ctx=ctx)
    depths = sorted({leaf["depth"] for leaf in pr.leaves})
    sizes = sorted({leaf["length"] for leaf in pr.leaves})
    print(f"{label:32s} leaves={len(pr.leaves):3d} depths={depths} sizes={sizes}")


# divide only to a fixed depth: 2^4 equal leaves
run("bound_depth(4)", sk.par_iter(data).bound_depth(4))

# never let a piece exceed 10 elements
run("size_limit(10)", sk.par_iter(data).size_limit(10))

# divide unconditionally to depth 2, then stop at depth 3
run("force_depth(2)+bound_depth(3)", sk.par_iter(data).force_depth(2).bound_depth(3))

# keep every leaf on an even depth (buffer-parity friendly shapes)
run("even_levels+bound_depth(3)", sk.par_iter(data).bound_depth(3).even_levels())

# cap the number of live divided subtrees, whatever the tree shape
run("cap(3)", sk.par_iter(data).cap(3))

# divide a few levels eagerly, then only after a steal moves the piece
run("thief_splitting(2)", sk.par_iter(data).thief_splitting(2))

# left pieces divide to a depth; right pieces divide only when stolen
run("join_context_policy(4)", sk.par_iter(data).join_context_policy(4))

rt.close()
