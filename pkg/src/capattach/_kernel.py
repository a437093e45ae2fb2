"""Compiled growth loop.

The graph is stored as fixed-width arrays so that long runs and large
ensembles stay in machine code:

* ``adj[v, :deg[v]]`` lists the neighbours of ``v`` (row 0 unused);
* ``open_list[:n_open]`` holds the open vertices, ``open_pos[v]`` the slot
  of ``v`` in it (or -1 once closed).

The subset chosen at a step depends on the order of ``open_list``; the pure
Python step in :mod:`capattach.graph_core` mirrors this loop exactly.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def grow_kernel(adj, deg, open_list, open_pos, n, n_open, m, uniforms,
                trace_total, trace_open):
    d = 2 * m
    total = 0
    for v in range(1, n + 1):
        total += deg[v]
    snap = np.empty(open_list.shape[0], dtype=open_list.dtype)
    for s in range(uniforms.shape[0]):
        k = n_open
        if k < m:
            raise AssertionError("fewer open vertices than edges per step")
        for i in range(k):
            snap[i] = open_list[i]
        # partial Fisher-Yates: snap[:m] becomes a uniform m-subset
        for i in range(m):
            j = i + int(uniforms[s, i] * (k - i))
            if j >= k:
                j = k - 1
            t = snap[i]
            snap[i] = snap[j]
            snap[j] = t
        v = n + 1
        for i in range(m):
            w = snap[i]
            adj[v, i] = w
            adj[w, deg[w]] = v
            deg[w] += 1
            total += 1
            if deg[w] == d:
                p = open_pos[w]
                last = open_list[n_open - 1]
                open_list[p] = last
                open_pos[last] = p
                open_pos[w] = -1
                n_open -= 1
        deg[v] = m
        total += m
        open_list[n_open] = v
        open_pos[v] = n_open
        n_open += 1
        n = v
        if trace_total.shape[0] > 0:
            trace_total[s] = total
            trace_open[s] = n_open
    return n, n_open
