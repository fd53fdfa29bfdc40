"""Compiled leaf kernels.

Everything here is plain array math compiled with numba so a worker thread
can run it with the GIL released.  The orchestration layer never appears in
this module; kernels only move elements.

All ordering kernels take a ``shift`` parameter: elements compare by
``value >> shift``.  ``shift=0`` compares full values; a nonzero shift lets
packed (key << shift | tag) arrays order by key only, which is how stable
ordering is observable in tests.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def merge_advance(left, li, lend, right, ri, rend, out, oi, budget, shift):
    """Move up to ``budget`` elements of the two sorted inputs into ``out``.

    Ties take the left element first.  Returns the advanced ``(li, ri, oi)``
    cursors; callers own cursor state so a merge can stop and resume.
    """
    stop = oi + budget
    while oi < stop:
        if li < lend:
            if ri < rend:
                a = left[li] >> shift
                b = right[ri] >> shift
                if a <= b:
                    out[oi] = left[li]
                    li += 1
                else:
                    out[oi] = right[ri]
                    ri += 1
            else:
                out[oi] = left[li]
                li += 1
        elif ri < rend:
            out[oi] = right[ri]
            ri += 1
        else:
            break
        oi += 1
    return li, ri, oi


@njit(cache=True, nogil=True)
def merge_collect(left, li, lend, right, ri, rend, out, budget, shift):
    """Merge up to ``budget`` elements into the start of ``out``.

    Like merge_advance but writes a fresh buffer from index 0; used when a
    merged chunk is produced for a downstream consumer rather than written
    into its final slot.  Returns ``(li, ri, produced)``.
    """
    oi = 0
    while oi < budget:
        if li < lend:
            if ri < rend:
                if (left[li] >> shift) <= (right[ri] >> shift):
                    out[oi] = left[li]
                    li += 1
                else:
                    out[oi] = right[ri]
                    ri += 1
            else:
                out[oi] = left[li]
                li += 1
        elif ri < rend:
            out[oi] = right[ri]
            ri += 1
        else:
            break
        oi += 1
    return li, ri, oi


@njit(cache=True, nogil=True)
def bisect_shift(data, lo, hi, key, right_side, shift):
    """Binary search for ``key`` in sorted ``data[lo:hi]`` under the shift order.

    ``right_side=False`` returns the leftmost insertion point (elements < key
    stay left), ``True`` the rightmost (elements <= key stay left).
    """
    k = key >> shift
    while lo < hi:
        mid = (lo + hi) // 2
        v = data[mid] >> shift
        if v < k or (right_side and v == k):
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(cache=True, nogil=True)
def fannkuch_chunk(perm, count, tmp, index, budget, n):
    """Process ``budget`` permutations starting at the cursor state.

    ``perm``/``count`` hold the current permutation and its mixed-radix
    digits; ``index`` is its global position in the enumeration.  Flip counts
    accumulate into a checksum signed by index parity.  Returns
    ``(checksum_delta, max_flips)``; the cursor arrays advance in place.
    """
    checksum = 0
    max_flips = 0
    for _ in range(budget):
        flips = 0
        if perm[0] != 0:
            for i in range(n):
                tmp[i] = perm[i]
            k = tmp[0]
            while k != 0:
                i = 0
                j = k
                while i < j:
                    t = tmp[i]
                    tmp[i] = tmp[j]
                    tmp[j] = t
                    i += 1
                    j -= 1
                flips += 1
                k = tmp[0]
        if index % 2 == 0:
            checksum += flips
        else:
            checksum -= flips
        if flips > max_flips:
            max_flips = flips
        index += 1
        # advance to the next permutation: rotate prefixes, carrying digits
        i = 1
        while i < n:
            t = perm[0]
            for j in range(i):
                perm[j] = perm[j + 1]
            perm[i] = t
            count[i] += 1
            if count[i] <= i:
                break
            count[i] = 0
            i += 1
    return checksum, max_flips


def warm_up():
    """Compile every kernel on tiny inputs (populates the on-disk cache)."""
    a = np.array([1, 3], dtype=np.int64)
    b = np.array([2, 4], dtype=np.int64)
    out = np.zeros(4, dtype=np.int64)
    merge_advance(a, 0, 2, b, 0, 2, out, 0, 4, 0)
    merge_collect(a, 0, 2, b, 0, 2, out, 4, 0)
    bisect_shift(a, 0, 2, np.int64(2), False, 0)
    perm = np.arange(3, dtype=np.int64)
    count = np.zeros(3, dtype=np.int64)
    tmp = np.zeros(3, dtype=np.int64)
    fannkuch_chunk(perm, count, tmp, 0, 6, 3)
