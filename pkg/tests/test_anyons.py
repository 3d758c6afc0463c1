import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stringnet_afdlu import HoneycombTorus, StringNet, builtin
from stringnet_afdlu.anyons import (OMEGA, apply_string, attach_string_tails, domain_walls, dyon, dyon_idempotent,
                                    idempotent, path_plaquettes, phi_string_comparison, string_plan, ty_phi)
from stringnet_afdlu.state import inner


def expect(st, img):
    return float(np.real(inner(st, img)) / st.norm() ** 2)


def test_half_braiding_phases():
    d = dyon(1)
    for a in range(3):
        r, b, w = d.crossing(a, 1)
        assert np.isclose(w, OMEGA ** a)
    phi = ty_phi()
    for r in (1, 2):
        rout, _, w = phi.crossing(3, r)
        assert rout == 3 - r and np.isclose(w, OMEGA)


@settings(max_examples=12, deadline=None)
@given(st.integers(1, 2), st.integers(0, 8), st.integers(0, 8))
def test_dyon_strings_excite_only_endpoints(r, p0, pn):
    if p0 == pn:
        return
    C = builtin("vec_z3")
    model = StringNet(C, HoneycombTorus(3, 3))
    L = model.lattice
    path = L.dual_path(p0, pn)
    st0 = attach_string_tails(model, model.ground_state_direct(), path)
    try:
        st1 = apply_string(model, st0, path, dyon(r), r)
    except ValueError:
        return   # path crosses a tail junction
    plaqs = path_plaquettes(L, path)
    assert abs(expect(st1, model.apply_tube(st1, plaqs[0], dyon_idempotent((-r) % 3))) - 1) < 1e-10
    assert abs(expect(st1, model.apply_tube(st1, plaqs[-1], dyon_idempotent(r))) - 1) < 1e-10
    for q in range(9):
        if q not in (plaqs[0], plaqs[-1]):
            assert abs(expect(st1, model.apply_Bp(st1, q)) - 1) < 1e-10
    assert model.all_vertices_ok(st1)


def test_missing_tails_rejected():
    model = StringNet(builtin("vec_z3"), HoneycombTorus(3, 3))
    with pytest.raises(ValueError):
        string_plan(model, model.lattice.dual_path(0, 1))


def test_phi_string_matches_gauged_pair():
    res = phi_string_comparison(2, 2, 0, 1, seed=4)
    assert abs(res["fidelity"] - 1) < 1e-8
    assert all(abs(v - 1) < 1e-10 for v in res["gauged_PPhi"] + res["direct_PPhi"])
    assert res["gauged_vertices_ok"] and res["direct_vertices_ok"]


def test_tube_data_shapes():
    C = builtin("ty_z3")
    walls = domain_walls(C, "phi")
    assert sorted(walls) == [0, 1]
    assert idempotent(C, "phi") and idempotent(C, "vacuum")
    assert sum(dyon_idempotent(1).values()) != 0
