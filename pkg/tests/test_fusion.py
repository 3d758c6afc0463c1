import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stringnet_afdlu.fusion import (builtin, dimension_residual, from_dict, load, nilpotency_class, pentagon_check,
                                    save, to_dict, unitarity_residual, validate, verify_grading, vec_zn)

NAMES = ["vec_z2", "vec_z3", "ising", "ty_z3"]


@pytest.mark.parametrize("name", NAMES)
def test_builtins_validate(name):
    C = builtin(name)
    validate(C)
    assert pentagon_check(C)["max_residual"] < 1e-12
    assert unitarity_residual(C) < 1e-12
    assert dimension_residual(C) < 1e-12
    assert verify_grading(C)


@settings(max_examples=8, deadline=None)
@given(st.integers(1, 6))
def test_vec_zn_consistent(n):
    C = vec_zn(n)
    validate(C)
    assert np.allclose(C.qdim, 1)
    assert nilpotency_class(C) == (1 if n > 1 else 0)


def test_ising_data():
    C = builtin("ising")
    s = C.index("sigma")
    assert np.isclose(C.qdim[s], np.sqrt(2))
    es, fs, M = C.F_matrix(s, s, s, s)
    assert es == fs == [0, 1]
    assert np.allclose(M, np.array([[1, 1], [1, -1]]) / np.sqrt(2))
    assert nilpotency_class(C) == 2
    assert [lev.group.order for lev in C.series] == [1, 2, 2]


def test_ty_data():
    C = builtin("ty_z3")
    s = C.index("sigma")
    assert np.isclose(C.qdim[s], np.sqrt(3))
    assert np.isclose(C.total_dim_sq, 6)
    es, fs, M = C.F_matrix(s, s, s, s)
    w = np.exp(2j * np.pi / 3)
    assert np.allclose(np.abs(M), 1 / np.sqrt(3))
    assert np.allclose(M, np.array([[w ** (-a * b) for b in fs] for a in es]) / np.sqrt(3))
    assert [lev.group.order for lev in C.series] == [1, 3, 2]


@pytest.mark.parametrize("name", NAMES)
def test_file_round_trip(name, tmp_path):
    C = builtin(name)
    path = tmp_path / f"{name}.json"
    save(C, str(path))
    D = load(str(path))
    assert D.checksum() == C.checksum()
    assert np.allclose(D.Farray, C.Farray)


def test_corrupted_F_rejected():
    data = to_dict(builtin("ising"))
    row = next(r for r in data["F"] if r[:4] == [2, 2, 2, 2])
    row[6] *= -1
    with pytest.raises(ValueError):
        from_dict(data)


def test_bad_grading_rejected():
    data = to_dict(builtin("ising"))
    data["series"][2]["grade"]["1"] = 1   # psi in the odd sector
    with pytest.raises(ValueError):
        from_dict(json.loads(json.dumps(data)))
    diag = []
    C = builtin("ising")
    C.series[1].grade[1] = 0
    C.series[1].grade[0] = 0
    C.series = C.series[1:]
    assert not verify_grading(C, diag) and diag


def test_unknown_builtin():
    with pytest.raises(ValueError):
        builtin("fibonacci")
    assert builtin("vec_zn(4)").rank == 4
