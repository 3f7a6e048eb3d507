"""Max-flow backends: brute-force cut oracle, scipy cross-check, and
backend equivalence."""

import itertools

import numpy as np
import pytest
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from aperture_forge.maxflow import _bk_py, backend_name
import aperture_forge.maxflow as mf


def random_graph(rng, n, density=0.35, integer=False):
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < density:
                edges.append((u, v))
    if not edges:
        edges = [(0, n - 1)]
    e = len(edges)
    draw = (lambda size: rng.integers(0, 8, size).astype(float)) if integer \
        else (lambda size: rng.uniform(0.0, 5.0, size))
    cap_source = draw(n)
    cap_sink = draw(n)
    cap_source[rng.random(n) < 0.5] = 0.0
    cap_sink[rng.random(n) < 0.5] = 0.0
    edge_from = np.array([u for u, _ in edges], dtype=np.int32)
    edge_to = np.array([v for _, v in edges], dtype=np.int32)
    return cap_source, cap_sink, edge_from, edge_to, draw(e), draw(e)


def cut_value(assign_sink, cap_source, cap_sink, edge_from, edge_to, cap_fwd, cap_rev):
    total = 0.0
    for v, on_sink in enumerate(assign_sink):
        total += cap_source[v] if on_sink else cap_sink[v]
    for i in range(len(edge_from)):
        u, v = edge_from[i], edge_to[i]
        if not assign_sink[u] and assign_sink[v]:
            total += cap_fwd[i]
        elif assign_sink[u] and not assign_sink[v]:
            total += cap_rev[i]
    return total


def brute_min_cut(*graph):
    n = len(graph[0])
    best = np.inf
    for bits in itertools.product([False, True], repeat=n):
        best = min(best, cut_value(bits, *graph))
    return best


@pytest.mark.parametrize("solver", [_bk_py.max_flow, mf.max_flow])
def test_flow_matches_brute_force_cut(solver):
    rng = np.random.default_rng(11)
    for trial in range(30):
        graph = random_graph(rng, n=7)
        flow, side = solver(*graph)
        assert flow == pytest.approx(brute_min_cut(*graph), abs=1e-9)
        # The reported partition realizes the min cut value.
        assert cut_value(~side, *graph) == pytest.approx(flow, abs=1e-9)


@pytest.mark.parametrize("solver", [_bk_py.max_flow, mf.max_flow])
def test_flow_matches_scipy_on_integer_caps(solver):
    rng = np.random.default_rng(5)
    for trial in range(15):
        n = int(rng.integers(8, 40))
        graph = random_graph(rng, n=n, integer=True)
        cap_source, cap_sink, ef, et, cf, cr = graph
        flow, side = solver(*graph)

        # scipy wants one integer matrix with explicit terminal nodes.
        size = n + 2
        s, t = n, n + 1
        rows, cols, data = [], [], []
        for v in range(n):
            if cap_source[v] > 0:
                rows.append(s); cols.append(v); data.append(int(cap_source[v]))
            if cap_sink[v] > 0:
                rows.append(v); cols.append(t); data.append(int(cap_sink[v]))
        for i in range(len(ef)):
            if cf[i] > 0:
                rows.append(int(ef[i])); cols.append(int(et[i])); data.append(int(cf[i]))
            if cr[i] > 0:
                rows.append(int(et[i])); cols.append(int(ef[i])); data.append(int(cr[i]))
        m = csr_matrix((data, (rows, cols)), shape=(size, size), dtype=np.int64)
        expected = maximum_flow(m, s, t).flow_value
        assert flow == pytest.approx(expected, abs=1e-9)
        assert cut_value(~side, *graph) == pytest.approx(flow, abs=1e-9)


def test_backends_agree_exactly():
    if backend_name() != "compiled":
        pytest.skip("compiled backend unavailable")
    rng = np.random.default_rng(99)
    for trial in range(20):
        n = int(rng.integers(5, 60))
        graph = random_graph(rng, n=n)
        flow_py, side_py = _bk_py.max_flow(*graph)
        flow_cy, side_cy = mf.max_flow(*graph)
        assert flow_py == pytest.approx(flow_cy, rel=1e-12, abs=1e-12)
        assert np.array_equal(side_py, side_cy)


def test_disconnected_nodes_go_to_sink_side():
    # A node with no capacity anywhere is reported on the sink side.
    flow, side = mf.max_flow(
        [2.0, 0.0], [0.0, 0.0],
        np.array([], dtype=np.int32), np.array([], dtype=np.int32),
        np.array([]), np.array([]))
    assert flow == 0.0
    assert side[0] and not side[1]
