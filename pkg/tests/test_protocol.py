import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stringnet_afdlu import protocol as P


@pytest.mark.parametrize("name", sorted(P.BUILTIN_THEORIES))
def test_bundled_files_match_builtins(name, tmp_path):
    T = P.load_theory(name)
    B = P.BUILTIN_THEORIES[name]()
    assert P.theory_to_dict(T) == P.theory_to_dict(B)
    path = tmp_path / "t.json"
    P.save_theory(T, str(path))
    assert P.theory_to_dict(P.load_theory(str(path))) == P.theory_to_dict(T)


def test_phi_fusion_probabilities():
    T = P.load_theory("ty_z3_phi_sector")
    phi = T.index("Phi")
    probs = {T.labels[c]: p for c, p in T.probabilities(phi, phi).items()}
    assert probs == pytest.approx({"1": 0.25, "z": 0.25, "Phi": 0.5})
    rng = np.random.default_rng(0)
    draws = [T.labels[P.fuse_sample(T, phi, phi, rng)] for _ in range(20000)]
    for k, p in probs.items():
        assert abs(draws.count(k) / 20000 - p) < 4 * np.sqrt(p * (1 - p) / 20000)


@settings(max_examples=20)
@given(st.sampled_from(sorted(P.BUILTIN_THEORIES)), st.data())
def test_probabilities_normalized(name, data):
    T = P.load_theory(name)
    a = data.draw(st.integers(0, T.rank - 1))
    b = data.draw(st.integers(0, T.rank - 1))
    assert sum(T.probabilities(a, b).values()) == pytest.approx(1)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["sigma.1", "1.sigma", "sigma.sigma", "psi.sigma", "psi.psi"]), st.integers(1, 12),
       st.integers(0, 2 ** 31))
def test_doubled_ising_terminates_in_two_rounds(a, n, seed):
    T = P.load_theory("doubled_ising")
    tr = P.nilpotent_string_sim(T, a, n, np.random.default_rng(seed))
    assert tr.termination_round <= 2
    assert tr.far_end == a
    json.dumps(tr.to_dict())


def test_non_nilpotent_rejected():
    T = P.load_theory("ty_z3_phi_sector")
    assert not T.is_nilpotent()
    with pytest.raises(ValueError):
        P.nilpotent_string_sim(T, "Phi", 4, np.random.default_rng(0))


def test_solvable_sim_condenses_once():
    T = P.load_theory("ty_z3_phi_sector")
    trs = P.run_trials(lambda rng: P.solvable_string_sim(T, "Phi", 6, rng), 200, seed=1)
    assert {t.condensation_rounds for t in trs} == {1}
    assert all(t.far_end == "Phi" and t.termination_round == 1 for t in trs)
    branches = [t.rounds[0]["branch"] for t in trs]
    assert set(branches) == {"e1m2", "e2m1"}


def test_unnormalized_branching_rejected():
    data = P.theory_to_dict(P.load_theory("ty_z3_phi_sector"))
    data["condensation"]["map"]["Phi"] = [["e1m2", 0.5], ["e2m1", 0.6]]
    with pytest.raises(ValueError):
        P.theory_from_dict(data)


def test_inconsistent_dims_rejected():
    data = P.theory_to_dict(P.load_theory("doubled_ising"))
    data["dims"][2] = 1.5
    with pytest.raises(ValueError):
        P.theory_from_dict(data)


def test_trials_independent_of_threads():
    T = P.load_theory("ty_z3_phi_sector")
    a = P.naive_cyclic_sim(T, "Phi", 5, 3000, seed=9, threads=1)
    b = P.naive_cyclic_sim(T, "Phi", 5, 3000, seed=9, threads=4)
    assert np.array_equal(a, b)
    assert np.all(np.diff(a) >= 0)


def test_naive_curve_shape_and_errors():
    T = P.load_theory("ty_z3_phi_sector")
    curve = P.naive_cyclic_sim(T, "Phi", 4, 4000, p_cyclic=0.0)
    assert np.allclose(curve, 1)
    with pytest.raises(ValueError):
        P.naive_cyclic_sim(T, "z", 3, 10)
    with pytest.raises(ValueError):
        P.naive_cyclic_sim(T, "1", 3, 10)
    with pytest.raises(ValueError):
        P.load_theory("no_such_theory")
