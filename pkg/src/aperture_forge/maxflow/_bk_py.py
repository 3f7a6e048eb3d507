"""Pure-Python Boykov-Kolmogorov max-flow / min-cut.

Reference implementation and import-time fallback for the compiled core in
``_bk_cy``. Both backends run the identical algorithm (search-tree growth,
path augmentation, orphan adoption) with the same arc layout and queue
discipline, so they produce identical cuts; this one simply executes the
inner loops in Python.

Arc layout: undirected edge e becomes directed arcs 2e (from -> to, with
``cap_fwd[e]``) and 2e+1 (to -> from, with ``cap_rev[e]``); the sister of
arc a is a ^ 1. Terminal capacities live in per-node arrays.
"""

import numpy as np

_FREE, _TREE_S, _TREE_T = 0, 1, 2
_NO_PARENT, _TERMINAL = -1, -2


def max_flow(cap_source, cap_sink, edge_from, edge_to, cap_fwd, cap_rev):
    """Min s-t cut of a float-capacity graph.

    Returns ``(flow, source_side)`` where ``source_side[v]`` is True for
    nodes on the source side of the minimum cut (nodes disconnected from
    both terminals land on the sink side).
    """
    n = len(cap_source)
    ts_cap = [float(c) for c in cap_source]
    st_cap = [float(c) for c in cap_sink]

    flow = 0.0
    for v in range(n):
        m = min(ts_cap[v], st_cap[v])
        if m > 0.0:
            flow += m
            ts_cap[v] -= m
            st_cap[v] -= m

    e = len(edge_from)
    heads = [0] * (2 * e)
    tails = [0] * (2 * e)
    rcap = [0.0] * (2 * e)
    adj = [[] for _ in range(n)]
    for i in range(e):
        u, v = int(edge_from[i]), int(edge_to[i])
        a = 2 * i
        tails[a], heads[a], rcap[a] = u, v, float(cap_fwd[i])
        tails[a + 1], heads[a + 1], rcap[a + 1] = v, u, float(cap_rev[i])
        adj[u].append(a)
        adj[v].append(a + 1)

    tree = [_FREE] * n
    parent = [_NO_PARENT] * n

    # FIFO of active nodes with membership flag (a node queues at most once).
    active = []
    active_head = 0
    in_active = [False] * n

    def push_active(v):
        if not in_active[v]:
            in_active[v] = True
            active.append(v)

    orphans = []
    orphan_head = 0

    for v in range(n):
        if ts_cap[v] > 0.0:
            tree[v] = _TREE_S
            parent[v] = _TERMINAL
            push_active(v)
        elif st_cap[v] > 0.0:
            tree[v] = _TREE_T
            parent[v] = _TERMINAL
            push_active(v)

    def has_root(v, t):
        # Walk the parent chain; valid only if it ends at a terminal.
        while True:
            p = parent[v]
            if p == _TERMINAL:
                return True
            if p == _NO_PARENT:
                return False
            v = tails[p] if t == _TREE_S else heads[p]

    def adopt():
        nonlocal orphan_head
        while orphan_head < len(orphans):
            o = orphans[orphan_head]
            orphan_head += 1
            t = tree[o]
            found = False
            for a in adj[o]:
                # Arc that would carry flow through the prospective parent.
                into = a ^ 1 if t == _TREE_S else a
                if rcap[into] <= 0.0:
                    continue
                q = heads[a]
                if tree[q] == t and has_root(q, t):
                    parent[o] = into
                    found = True
                    break
            if found:
                continue
            # No parent: o leaves the tree, its children become orphans,
            # neighbors that could reconnect are reactivated.
            for a in adj[o]:
                q = heads[a]
                if tree[q] != t:
                    continue
                reconnectable = rcap[a ^ 1] > 0.0 if t == _TREE_S else rcap[a] > 0.0
                if reconnectable:
                    push_active(q)
                child_arc = a if t == _TREE_S else a ^ 1
                if parent[q] == child_arc:
                    parent[q] = _NO_PARENT
                    orphans.append(q)
            tree[o] = _FREE
        del orphans[:]
        orphan_head = 0

    def augment(connector):
        u, v = tails[connector], heads[connector]
        b = rcap[connector]
        x = u
        while parent[x] != _TERMINAL:
            a = parent[x]
            if rcap[a] < b:
                b = rcap[a]
            x = tails[a]
        if ts_cap[x] < b:
            b = ts_cap[x]
        s_root = x
        x = v
        while parent[x] != _TERMINAL:
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
        while parent[x] != _TERMINAL:
            a = parent[x]
            rcap[a] -= b
            rcap[a ^ 1] += b
            if rcap[a] <= 0.0:
                parent[x] = _NO_PARENT
                orphans.append(x)
            x = tails[a]
        ts_cap[s_root] -= b
        if ts_cap[s_root] <= 0.0:
            parent[s_root] = _NO_PARENT
            orphans.append(s_root)
        x = v
        while parent[x] != _TERMINAL:
            a = parent[x]
            rcap[a] -= b
            rcap[a ^ 1] += b
            if rcap[a] <= 0.0:
                parent[x] = _NO_PARENT
                orphans.append(x)
            x = heads[a]
        st_cap[t_root] -= b
        if st_cap[t_root] <= 0.0:
            parent[t_root] = _NO_PARENT
            orphans.append(t_root)
        return b

    while True:
        connector = -1
        while active_head < len(active):
            p = active[active_head]
            t = tree[p]
            if t == _FREE:
                in_active[p] = False
                active_head += 1
                continue
            for a in adj[p]:
                out = a if t == _TREE_S else a ^ 1
                if rcap[out] <= 0.0:
                    continue
                q = heads[a]
                if tree[q] == _FREE:
                    tree[q] = t
                    parent[q] = a if t == _TREE_S else a ^ 1
                    push_active(q)
                elif tree[q] != t:
                    connector = out  # already oriented S -> T
                    break
            if connector >= 0:
                break
            in_active[p] = False
            active_head += 1
        if connector < 0:
            break
        if active_head > 0 and active_head * 2 > len(active):
            del active[:active_head]
            active_head = 0
        flow += augment(connector)
        adopt()

    source_side = np.array([t == _TREE_S for t in tree], dtype=bool)
    return flow, source_side
