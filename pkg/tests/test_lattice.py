import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stringnet_afdlu.groups import make_cyclic
from stringnet_afdlu.lattice import Chain1, HoneycombTorus, spanning_tree

sizes = st.integers(2, 5)


@given(sizes, sizes)
def test_counts_and_incidence(lx, ly):
    L = HoneycombTorus(lx, ly)
    assert L.n_vertices - L.n_edges + L.n_plaquettes == 0   # torus
    assert all(len(v) == 3 for v in L.incident)
    for p in L.plaquettes:
        assert len(set(p.edges)) == 6 and len(set(p.vertices)) == 6
        for k, e in enumerate(p.edges):
            ends = {int(L.edge_tail[e]), int(L.edge_head[e])}
            assert ends == {p.vertices[k], p.vertices[(k + 1) % 6]}


@given(sizes, sizes, st.data())
def test_dual_path_boundary(lx, ly, data):
    L = HoneycombTorus(lx, ly)
    p = data.draw(st.integers(0, L.n_plaquettes - 1))
    q = data.draw(st.integers(0, L.n_plaquettes - 1))
    path = L.dual_path(p, q)
    if p == q:
        assert path == []
    else:
        assert L.path_endpoints(path) == {p: -1, q: 1}
        assert len(path) <= lx + ly


def test_orientation_signs():
    L = HoneycombTorus(3, 3)
    for e in range(L.n_edges):
        assert L.orientation(e, int(L.edge_pos[e])) == 1
        assert L.orientation(e, int(L.edge_neg[e])) == -1
    with pytest.raises(ValueError):
        L.orientation(0, next(p for p in range(9) if 0 not in L.plaquettes[p].edges))


def test_regions():
    L = HoneycombTorus(3, 3)
    R = L.region([0, 1, 3, 4])
    assert R.is_connected() and R.is_simply_connected() and R.euler_characteristic() == 1
    assert set(R.interior_edges) <= set(R.edges)
    with pytest.raises(ValueError):
        L.region([0, 1, 2])  # wraps the torus


def test_spanning_tree_covers_region():
    L = HoneycombTorus(3, 3)
    R = L.region([0, 1, 3, 4])
    tree = spanning_tree(R, over="plaquettes")
    assert set(tree) == {0, 1, 3, 4}
    assert sum(v is None for v in tree.values()) == 1


def test_coboundary_has_no_boundary():
    L = HoneycombTorus(3, 3)
    G = make_cyclic(3)
    c = Chain1.coboundary(L, G, {p: (p * 2) % 3 for p in range(9)})
    assert all(v == 0 for v in c.boundary().values())


def test_tails():
    L = HoneycombTorus(2, 2)
    t = L.add_tail(1)
    assert L.n_registers == L.n_edges + 2
    assert L.add_tail(1) is t
    with pytest.raises(ValueError):
        L.add_tail(2, edge=t.edge)
    segs, legs, own = L.ring(1)
    assert len(segs) == 7 and len(legs) == 7


def test_small_torus_rejected():
    with pytest.raises(ValueError):
        HoneycombTorus(1, 3)
