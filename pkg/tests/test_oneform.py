import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stringnet_afdlu import HoneycombTorus, StringNet, builtin
from stringnet_afdlu.groups import characters
from stringnet_afdlu.oneform import matter_string, regauge_region, roundtrip, solve_potential, ungauge_region
from stringnet_afdlu.oracle import fidelity
from stringnet_afdlu.state import inner

L33 = HoneycombTorus(3, 3)
MODELS = {n: StringNet(builtin(f"vec_z{n}"), HoneycombTorus(3, 3)) for n in (2, 3)}
GROUND = {n: m.ground_state_direct() for n, m in MODELS.items()}


@st.composite
def regions(draw):
    """Simply connected regions grown from a seed plaquette."""
    plaqs = [draw(st.integers(0, 8))]
    for _ in range(draw(st.integers(0, 3))):
        nbrs = sorted({q for p in plaqs for q, _ in L33.dual_adjacency[p]} - set(plaqs))
        cand = draw(st.sampled_from(nbrs))
        try:
            L33.region(plaqs + [cand])
        except ValueError:
            continue
        plaqs.append(cand)
    return plaqs


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([2, 3]), regions(), st.integers(0, 2 ** 31), st.booleans())
def test_roundtrip_identity(n, plaqs, seed, with_pair):
    model = MODELS[n]
    L = model.lattice
    st0 = GROUND[n]
    rng = np.random.default_rng(seed)
    if with_pair:
        p, q = (int(v) for v in rng.choice(9, size=2, replace=False))
        chi = characters(model.C.series[-1].group)[1]
        st0 = model.apply_char_string(st0, chi, L.dual_path(p, q))
    out, outcome, info = roundtrip(model, st0, L.region(plaqs), rng)
    assert abs(fidelity(st0, out) - 1) < 1e-10
    assert sum(info.get("charges", {}).values()) % n == 0


def test_condensed_edges_are_reset():
    model = MODELS[3]
    region = L33.region([0, 1, 3])
    st, out = ungauge_region(model, GROUND[3], region, np.random.default_rng(1))
    lab = st.labels(region.interior_edges)
    assert (lab == 0).all()
    assert set(out.potential) == {0, 1, 3}


def test_window_string_matches_matter_string():
    """A character string inside the region acts the same before and after ungauging."""
    model = MODELS[3]
    region = L33.region([0, 1, 3, 4])
    chi = characters(model.C.series[-1].group)[1]
    path = L33.dual_path(0, 4, within={0, 1, 3, 4})
    rng = np.random.default_rng(2)
    st, out = ungauge_region(model, GROUND[3], region, rng)
    moved = matter_string(model, out, 1, path)(st)
    back, _ = regauge_region(model, moved, out, np.random.default_rng(3))
    direct = model.apply_char_string(GROUND[3], chi, path)
    assert abs(fidelity(back, direct) - 1) < 1e-10


def test_potential_solves_edges():
    G = MODELS[3].C.series[-1].group
    region = L33.region([0, 1, 3])
    pot_in = {0: 1, 1: 2, 3: 0}
    edges = {e: (pot_in[L33.edge_pos[e]] - pot_in[L33.edge_neg[e]]) % 3 for e in region.interior_edges}
    pot = solve_potential(region, G, edges)
    for e, g in edges.items():
        assert (pot[L33.edge_pos[e]] - pot[L33.edge_neg[e]]) % 3 == g


def test_non_abelian_rejected():
    model = StringNet(builtin("ising"), HoneycombTorus(2, 2))
    with pytest.raises(ValueError):
        ungauge_region(model, model.vacuum(), model.lattice.region([0]), np.random.default_rng(0))
