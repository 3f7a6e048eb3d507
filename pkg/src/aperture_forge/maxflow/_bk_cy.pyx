# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Boykov-Kolmogorov max-flow / min-cut.

Mirrors ``_bk_py`` operation for operation (same arc layout, same FIFO
queue discipline, same scan order), so the two backends return identical
cuts; this one runs the inner loops at C speed.
"""

from libc.stdlib cimport free, malloc

import numpy as np

cimport numpy as cnp

cnp.import_array()

DEF FREE_NODE = 0
DEF TREE_S = 1
DEF TREE_T = 2
DEF NO_PARENT = -1
DEF TERMINAL = -2


cdef inline bint _has_root(int v, int t, int* parent, int* tails, int* heads) noexcept:
    cdef int p
    while True:
        p = parent[v]
        if p == TERMINAL:
            return True
        if p == NO_PARENT:
            return False
        v = tails[p] if t == TREE_S else heads[p]


def max_flow(cap_source, cap_sink, edge_from, edge_to, cap_fwd, cap_rev):
    """Min s-t cut of a float-capacity graph.

    Returns ``(flow, source_side)`` where ``source_side[v]`` is True for
    nodes on the source side of the minimum cut.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ts_arr = np.ascontiguousarray(cap_source, dtype=np.float64).copy()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] st_arr = np.ascontiguousarray(cap_sink, dtype=np.float64).copy()
    cdef cnp.ndarray[cnp.int32_t, ndim=1] ef = np.ascontiguousarray(edge_from, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] et = np.ascontiguousarray(edge_to, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cf = np.ascontiguousarray(cap_fwd, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cr = np.ascontiguousarray(cap_rev, dtype=np.float64)

    cdef int n = ts_arr.shape[0]
    cdef int e = ef.shape[0]
    cdef int narcs = 2 * e

    cdef double* ts_cap = <double*> cnp.PyArray_DATA(ts_arr)
    cdef double* st_cap = <double*> cnp.PyArray_DATA(st_arr)

    cdef int* heads = <int*> malloc(narcs * sizeof(int))
    cdef int* tails = <int*> malloc(narcs * sizeof(int))
    cdef double* rcap = <double*> malloc(narcs * sizeof(double))
    cdef int* adj_start = <int*> malloc((n + 2) * sizeof(int))
    cdef int* adj_arcs = <int*> malloc(narcs * sizeof(int))
    cdef char* tree = <char*> malloc(n * sizeof(char))
    cdef int* parent = <int*> malloc(n * sizeof(int))
    cdef char* in_active = <char*> malloc(n * sizeof(char))
    cdef int* active = <int*> malloc((n + 1) * sizeof(int))
    cdef int* orphans = <int*> malloc((n + 1) * sizeof(int))
    if (heads == NULL or tails == NULL or rcap == NULL or adj_start == NULL or
            adj_arcs == NULL or tree == NULL or parent == NULL or
            in_active == NULL or active == NULL or orphans == NULL):
        free(heads); free(tails); free(rcap); free(adj_start); free(adj_arcs)
        free(tree); free(parent); free(in_active); free(active); free(orphans)
        raise MemoryError()

    cdef double flow = 0.0, m, b
    cdef int i, v, u, a, p, q, o, x, into, out, child_arc, connector
    cdef int s_root, t_root
    cdef int qcap = n + 1
    cdef int active_head = 0, active_tail = 0
    cdef int orphan_head = 0, orphan_tail = 0
    cdef int t
    cdef bint found, reconnectable

    try:
        for v in range(n):
            m = ts_cap[v] if ts_cap[v] < st_cap[v] else st_cap[v]
            if m > 0.0:
                flow += m
                ts_cap[v] -= m
                st_cap[v] -= m

        for i in range(e):
            a = 2 * i
            tails[a] = ef[i]
            heads[a] = et[i]
            rcap[a] = cf[i]
            tails[a + 1] = et[i]
            heads[a + 1] = ef[i]
            rcap[a + 1] = cr[i]

        # CSR adjacency ordered by arc id within each node, matching the
        # insertion order of the reference implementation.
        for v in range(n + 2):
            adj_start[v] = 0
        for a in range(narcs):
            adj_start[tails[a] + 2] += 1
        for v in range(2, n + 2):
            adj_start[v] += adj_start[v - 1]
        for a in range(narcs):
            v = tails[a]
            adj_arcs[adj_start[v + 1]] = a
            adj_start[v + 1] += 1

        for v in range(n):
            in_active[v] = 0
            if ts_cap[v] > 0.0:
                tree[v] = TREE_S
                parent[v] = TERMINAL
            elif st_cap[v] > 0.0:
                tree[v] = TREE_T
                parent[v] = TERMINAL
            else:
                tree[v] = FREE_NODE
                parent[v] = NO_PARENT
                continue
            in_active[v] = 1
            active[active_tail] = v
            active_tail = (active_tail + 1) % qcap

        while True:
            # --- growth ---
            connector = -1
            while active_head != active_tail:
                p = active[active_head]
                t = tree[p]
                if t == FREE_NODE:
                    in_active[p] = 0
                    active_head = (active_head + 1) % qcap
                    continue
                for i in range(adj_start[p], adj_start[p + 1]):
                    a = adj_arcs[i]
                    out = a if t == TREE_S else a ^ 1
                    if rcap[out] <= 0.0:
                        continue
                    q = heads[a]
                    if tree[q] == FREE_NODE:
                        tree[q] = t
                        parent[q] = a if t == TREE_S else a ^ 1
                        if not in_active[q]:
                            in_active[q] = 1
                            active[active_tail] = q
                            active_tail = (active_tail + 1) % qcap
                    elif tree[q] != t:
                        connector = out  # already oriented S -> T
                        break
                if connector >= 0:
                    break
                in_active[p] = 0
                active_head = (active_head + 1) % qcap
            if connector < 0:
                break

            # --- augment ---
            u = tails[connector]
            v = heads[connector]
            b = rcap[connector]
            x = u
            while parent[x] != TERMINAL:
                a = parent[x]
                if rcap[a] < b:
                    b = rcap[a]
                x = tails[a]
            if ts_cap[x] < b:
                b = ts_cap[x]
            s_root = x
            x = v
            while parent[x] != TERMINAL:
                a = parent[x]
                if rcap[a] < b:
                    b = rcap[a]
                x = heads[a]
            if st_cap[x] < b:
                b = st_cap[x]
            t_root = x

            rcap[connector] -= b
            rcap[connector ^ 1] += b
            x = u
            while parent[x] != TERMINAL:
                a = parent[x]
                rcap[a] -= b
                rcap[a ^ 1] += b
                if rcap[a] <= 0.0:
                    parent[x] = NO_PARENT
                    orphans[orphan_tail] = x
                    orphan_tail = (orphan_tail + 1) % qcap
                x = tails[a]
            ts_cap[s_root] -= b
            if ts_cap[s_root] <= 0.0:
                parent[s_root] = NO_PARENT
                orphans[orphan_tail] = s_root
                orphan_tail = (orphan_tail + 1) % qcap
            x = v
            while parent[x] != TERMINAL:
                a = parent[x]
                rcap[a] -= b
                rcap[a ^ 1] += b
                if rcap[a] <= 0.0:
                    parent[x] = NO_PARENT
                    orphans[orphan_tail] = x
                    orphan_tail = (orphan_tail + 1) % qcap
                x = heads[a]
            st_cap[t_root] -= b
            if st_cap[t_root] <= 0.0:
                parent[t_root] = NO_PARENT
                orphans[orphan_tail] = t_root
                orphan_tail = (orphan_tail + 1) % qcap
            flow += b

            # --- adoption ---
            while orphan_head != orphan_tail:
                o = orphans[orphan_head]
                orphan_head = (orphan_head + 1) % qcap
                t = tree[o]
                found = False
                for i in range(adj_start[o], adj_start[o + 1]):
                    a = adj_arcs[i]
                    into = a ^ 1 if t == TREE_S else a
                    if rcap[into] <= 0.0:
                        continue
                    q = heads[a]
                    if tree[q] == t and _has_root(q, t, parent, tails, heads):
                        parent[o] = into
                        found = True
                        break
                if found:
                    continue
                for i in range(adj_start[o], adj_start[o + 1]):
                    a = adj_arcs[i]
                    q = heads[a]
                    if tree[q] != t:
                        continue
                    reconnectable = rcap[a ^ 1] > 0.0 if t == TREE_S else rcap[a] > 0.0
                    if reconnectable and not in_active[q]:
                        in_active[q] = 1
                        active[active_tail] = q
                        active_tail = (active_tail + 1) % qcap
                    child_arc = a if t == TREE_S else a ^ 1
                    if parent[q] == child_arc:
                        parent[q] = NO_PARENT
                        orphans[orphan_tail] = q
                        orphan_tail = (orphan_tail + 1) % qcap
                tree[o] = FREE_NODE

        source_side = np.zeros(n, dtype=bool)
        for v in range(n):
            if tree[v] == TREE_S:
                source_side[v] = True
        return flow, source_side
    finally:
        free(heads); free(tails); free(rcap); free(adj_start); free(adj_arcs)
        free(tree); free(parent); free(in_active); free(active); free(orphans)
