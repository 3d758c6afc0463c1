import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stringnet_afdlu.state import (ResourceError, SparseState, contract_register, fourier_basis, inner,
                                   measure_register, merge, permute_registers)

dims_st = st.lists(st.integers(1, 4), min_size=1, max_size=5)


def random_state(dims, rng, k=6):
    total = int(np.prod(dims))
    keys = rng.integers(0, total, size=k)
    amps = rng.normal(size=k) + 1j * rng.normal(size=k)
    return merge(dims, keys, amps)


@given(dims_st, st.data())
def test_encode_labels_round_trip(dims, data):
    labels = [data.draw(st.integers(0, d - 1)) for d in dims]
    s = SparseState.basis(dims, labels)
    assert s.labels()[0].tolist() == labels
    assert s.amplitude(labels) == 1


@given(dims_st, st.integers(0, 2 ** 31))
def test_merge_sums_duplicates(dims, seed):
    rng = np.random.default_rng(seed)
    s = random_state(dims, rng)
    doubled = merge(dims, np.concatenate([s.keys, s.keys]), np.concatenate([s.amps, s.amps]))
    assert np.allclose(doubled.amps, 2 * s.amps)
    assert np.all(np.diff(doubled.keys) > 0)


@settings(deadline=None)
@given(dims_st, st.integers(0, 2 ** 31))
def test_unitary_local_map_preserves_norm(dims, seed):
    rng = np.random.default_rng(seed)
    s = random_state(dims, rng)
    reg = int(rng.integers(len(dims)))
    U = np.linalg.qr(rng.normal(size=(dims[reg], dims[reg])) + 1j * rng.normal(size=(dims[reg], dims[reg])))[0]
    t = s.apply_local([reg], U)
    assert np.isclose(t.norm(), s.norm())
    back = t.apply_local([reg], U.conj().T)
    assert abs(inner(back, s) - s.norm() ** 2) < 1e-10


@settings(deadline=None)
@given(dims_st, st.integers(0, 2 ** 31))
def test_measurement_probabilities(dims, seed):
    rng = np.random.default_rng(seed)
    s = random_state(dims, rng).normalized()
    reg = int(rng.integers(len(dims)))
    d = dims[reg]
    probs = [contract_register(s, reg, fourier_basis(d)[:, k]).norm() ** 2 for k in range(d)]
    assert np.isclose(sum(probs), 1)
    k, post, p = measure_register(s, reg, fourier_basis(d), rng)
    assert np.isclose(p, probs[k]) and np.isclose(post.norm(), 1)


def test_fourier_basis_character_sign():
    B = fourier_basis(3)
    shifted = np.roll(B[:, 1], 1)   # |g> -> |g+1>
    assert np.allclose(shifted, np.exp(2j * np.pi / 3) * B[:, 1])


def test_permute_and_dump(tmp_path):
    rng = np.random.default_rng(0)
    s = random_state([2, 3, 4], rng).normalized()
    t = permute_registers(s, [2, 0, 1])
    for lab, a in zip(s.labels(), s.amps):
        assert t.amplitude([lab[2], lab[0], lab[1]]) == a
    assert np.allclose(permute_registers(t, [1, 2, 0]).amps, s.amps)
    path = tmp_path / "s.json"
    s.dump(str(path))
    assert abs(inner(SparseState.load(str(path)), s) - 1) < 1e-12


def test_layout_and_resource_errors():
    with pytest.raises(ResourceError):
        SparseState([2] * 70)
    with pytest.raises(ValueError):
        inner(SparseState([2]), SparseState([3]))
    with pytest.raises(ValueError):
        SparseState([2]).normalized()
    with pytest.raises(ValueError):
        SparseState.basis([2, 2], [0, 2])
