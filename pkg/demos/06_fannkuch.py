"""Permutation enumeration as a divisible, resumable computation.

The n! permutations are indexed; a piece is an index range plus a cursor
that advances by prefix rotations.  Dividing a piece costs one decode of
the right half's first permutation, so under the steal-driven scheduler
the number of from-scratch rebuilds equals the number of steals.
"""

import splitkit as sk

for n in (7, 8, 9):
    rt = sk.Runtime(4)
    line = [f"n={n}:"]
    for policy in ("static", "thief_splitting", "adaptive"):
        before = rt.steal_count()
        ctx = sk.make_ctx(rt)
        res = sk.fannkuch(n, policy=policy, ctx=ctx)
        steals = rt.steal_count() - before
        note = ""
        if policy == "adaptive":
            assert res.rebuilds == steals
            note = f" (rebuilds {res.rebuilds} == steals {steals})"
        line.append(f"{policy}: checksum={res.checksum} max_flips={res.max_flips}{note}")
    print("  ".join(line))
    rt.close()
