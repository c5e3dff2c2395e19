"""Jitted kernels for index construction, pattern walks, and path sampling.

Kept free of package imports so the build cache stays valid; everything here
works on plain numpy arrays.
"""

import numpy as np
from numba import njit

INT64_MAX = np.iinfo(np.int64).max


@njit(cache=True)
def sam_build(seq, alphabet_size):
    """Online suffix-automaton build over ``seq``.

    Returns ``(length, link, nxt, minend, size)`` arrays trimmed to the state
    count. ``minend[v]`` is the smallest 0-based end position among all
    occurrences of the strings in state ``v``; clone states are filled by a
    post pass that pushes minima up the suffix-link tree.
    """
    n = seq.shape[0]
    cap = 2 * n + 2
    length = np.zeros(cap, dtype=np.int64)
    link = np.full(cap, -1, dtype=np.int64)
    nxt = np.full((cap, alphabet_size), -1, dtype=np.int64)
    minend = np.full(cap, INT64_MAX, dtype=np.int64)
    size = 1
    last = 0
    for i in range(n):
        c = seq[i]
        cur = size
        size += 1
        length[cur] = length[last] + 1
        minend[cur] = i
        p = last
        while p >= 0 and nxt[p, c] < 0:
            nxt[p, c] = cur
            p = link[p]
        if p < 0:
            link[cur] = 0
        else:
            q = nxt[p, c]
            if length[p] + 1 == length[q]:
                link[cur] = q
            else:
                clone = size
                size += 1
                length[clone] = length[p] + 1
                link[clone] = link[q]
                for a in range(alphabet_size):
                    nxt[clone, a] = nxt[q, a]
                while p >= 0 and nxt[p, c] == q:
                    nxt[p, c] = clone
                    p = link[p]
                link[q] = clone
                link[cur] = clone
        last = cur

    # Pass minima up the link tree in decreasing order of state length;
    # counting sort keeps this linear.
    count = np.zeros(n + 2, dtype=np.int64)
    for v in range(size):
        count[length[v] + 1] += 1
    for l in range(1, n + 2):
        count[l] += count[l - 1]
    order = np.empty(size, dtype=np.int64)
    for v in range(size):
        order[count[length[v]]] = v
        count[length[v]] += 1
    for r in range(size - 1, 0, -1):
        v = order[r]
        l = link[v]
        if l >= 0 and minend[v] < minend[l]:
            minend[l] = minend[v]

    return length[:size], link[:size], nxt[:size], minend[:size], size


@njit(cache=True)
def sam_walk_starts(nxt, minend, pattern, n_max):
    """Earliest 0-based start of each pattern prefix, ``-1`` once absent."""
    starts = np.full(n_max, -1, dtype=np.int64)
    v = 0
    for ell in range(n_max):
        v = nxt[v, pattern[ell]]
        if v < 0:
            break
        starts[ell] = minend[v] - ell
    return starts


@njit(cache=True)
def markov_sample(init_cdf, row_cdf, u):
    """State path from inverse-CDF draws; ``u`` supplies one uniform per step."""
    n = u.shape[0]
    out = np.empty(n, dtype=np.int64)
    s = np.searchsorted(init_cdf, u[0], side="right")
    out[0] = s
    for i in range(1, n):
        s = np.searchsorted(row_cdf[s], u[i], side="right")
        out[i] = s
    return out
