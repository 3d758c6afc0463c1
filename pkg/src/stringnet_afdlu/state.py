"""Sparse state vectors over mixed-radix registers.

Configurations are packed into int64 keys with register 0 most significant,
so sorted keys enumerate configurations lexicographically.  Amplitudes below
``PRUNE`` in modulus are dropped after every operation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import kernels

PRUNE = 1e-14
MAX_KEY = 2 ** 62


class ResourceError(RuntimeError):
    """Raised when a computation would exceed the configured size limits."""


class SparseState:
    __slots__ = ("dims", "strides", "keys", "amps", "names")

    def __init__(self, dims: Sequence[int], keys=None, amps=None, names=None):
        self.dims = np.asarray(dims, dtype=np.int64)
        total = 1
        for d in self.dims[::-1]:
            total *= int(d)
        if total > MAX_KEY:
            raise ResourceError(f"register space of size {total:.3g} does not fit a 63-bit key")
        strides = np.ones(len(self.dims), dtype=np.int64)
        for i in range(len(self.dims) - 2, -1, -1):
            strides[i] = strides[i + 1] * self.dims[i + 1]
        self.strides = strides
        self.keys = np.zeros(0, dtype=np.int64) if keys is None else np.asarray(keys, dtype=np.int64)
        self.amps = np.zeros(0, dtype=complex) if amps is None else np.asarray(amps, dtype=complex)
        self.names = list(names) if names is not None else [f"r{i}" for i in range(len(self.dims))]

    # construction
    @classmethod
    def basis(cls, dims, labels, names=None) -> "SparseState":
        st = cls(dims, names=names)
        st.keys = np.array([st.encode(labels)], dtype=np.int64)
        st.amps = np.ones(1, dtype=complex)
        return st

    def copy(self) -> "SparseState":
        return SparseState(self.dims, self.keys.copy(), self.amps.copy(), self.names)

    def with_data(self, keys, amps) -> "SparseState":
        return SparseState(self.dims, keys, amps, self.names)

    def encode(self, labels) -> int:
        labels = np.asarray(labels, dtype=np.int64)
        if labels.shape != self.dims.shape or (labels < 0).any() or (labels >= self.dims).any():
            raise ValueError("labels do not match register layout")
        return int(np.dot(labels, self.strides))

    def labels(self, regs=None) -> np.ndarray:
        """Decoded configurations, shape ``(len(self), len(regs))``."""
        regs = range(len(self.dims)) if regs is None else regs
        regs = np.asarray(list(regs), dtype=np.int64)
        if len(regs) == 0:
            return np.zeros((len(self.keys), 0), dtype=np.int64)
        return (self.keys[:, None] // self.strides[regs][None, :]) % self.dims[regs][None, :]

    def __len__(self):
        return len(self.keys)

    @property
    def n_registers(self) -> int:
        return len(self.dims)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2)))

    def normalized(self) -> "SparseState":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize the zero state")
        return self.with_data(self.keys.copy(), self.amps / n)

    def amplitude(self, labels) -> complex:
        k = self.encode(labels)
        i = np.searchsorted(self.keys, k)
        if i < len(self.keys) and self.keys[i] == k:
            return complex(self.amps[i])
        return 0j

    def __add__(self, other: "SparseState") -> "SparseState":
        _check_layout(self, other)
        return merge(self.dims, np.concatenate([self.keys, other.keys]),
                     np.concatenate([self.amps, other.amps]), self.names)

    def __mul__(self, c: complex) -> "SparseState":
        return self.with_data(self.keys.copy(), self.amps * c)

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + (-1) * other

    # register management
    def add_registers(self, dims, local_state=None, names=None) -> "SparseState":
        """Append registers (least significant) in a product state.

        ``local_state`` is a dense vector over the new registers' joint space;
        the default is the computational zero state.
        """
        dims = list(dims)
        new = SparseState(list(self.dims) + dims,
                          names=self.names + list(names or [f"r{len(self.dims) + i}" for i in range(len(dims))]))
        width = int(np.prod(dims)) if dims else 1
        vec = np.zeros(width, dtype=complex)
        if local_state is None:
            vec[0] = 1.0
        else:
            vec[:] = np.asarray(local_state, dtype=complex).ravel()
        nz = np.nonzero(np.abs(vec) > PRUNE)[0]
        keys = (self.keys[:, None] * width + nz[None, :]).ravel()
        amps = (self.amps[:, None] * vec[nz][None, :]).ravel()
        new.keys, new.amps = keys, amps
        return new

    def drop_registers(self, regs) -> "SparseState":
        """Remove registers that hold a definite label across the support."""
        regs = sorted(set(regs))
        if not regs:
            return self.copy()
        lab = self.labels()
        for r in regs:
            if len(np.unique(lab[:, r])) > 1:
                raise ValueError(f"register {self.names[r]} is not in a definite state")
        keep = [i for i in range(len(self.dims)) if i not in regs]
        new = SparseState(self.dims[keep], names=[self.names[i] for i in keep])
        new.keys = lab[:, keep] @ new.strides if keep else np.zeros(len(self.keys), dtype=np.int64)
        new.amps = self.amps.copy()
        return merge(new.dims, new.keys, new.amps, new.names)

    def reorder(self) -> "SparseState":
        return merge(self.dims, self.keys, self.amps, self.names)

    # operations
    def apply_diagonal(self, phase_fn: Callable[[np.ndarray], np.ndarray], regs) -> "SparseState":
        """Multiply each configuration by ``phase_fn(labels[:, regs])``."""
        f = np.asarray(phase_fn(self.labels(regs)), dtype=complex)
        return _prune(self.with_data(self.keys.copy(), self.amps * f))

    def apply_local(self, support, kernel) -> "SparseState":
        """Apply a local linear map on ``support``.

        ``kernel`` is either a dense square matrix over the joint alphabet of
        the support (row = output) or a callable taking a tuple of local labels
        and returning a list of ``(output_labels, coefficient)``.  Output
        tuples may be shorter than the support; only the leading registers are
        then rewritten (the rest act as read-only controls).
        """
        if len(self.keys) == 0:
            return self.copy()
        rows, keys, coefs = self.transitions(support, kernel)
        return merge(self.dims, keys, self.amps[rows] * coefs, self.names)

    def transitions(self, support, kernel):
        """Matrix elements of a local map on the current support.

        Returns ``(rows, new_keys, coefs)``: configuration ``keys[rows[i]]``
        is sent to ``new_keys[i]`` with weight ``coefs[i]``.
        """
        support = list(support)
        sdims = self.dims[support]
        loc = self.labels(support)
        if callable(kernel):
            fn = kernel
        else:
            K = np.asarray(kernel, dtype=complex)
            width = int(np.prod(sdims))
            if K.shape != (width, width):
                raise ValueError("kernel dimensions do not match the support")
            fn = _dense_as_callable(K, sdims)
        local_code = loc @ _strides(sdims)
        ucodes, first, inv = np.unique(local_code, return_index=True, return_inverse=True)
        inv = inv.ravel()
        counts = np.zeros(len(ucodes), dtype=np.int64)
        deltas: list[int] = []
        coefs: list[complex] = []
        strides = [int(v) for v in self.strides[support]]
        for i, row in enumerate(first):
            src = [int(v) for v in loc[row]]
            outs = fn(tuple(src))
            counts[i] = len(outs)
            for lab, c in outs:
                deltas.append(sum((o - v) * st for o, v, st in zip(lab, src, strides)))
                coefs.append(c)
        deltas_a = np.array(deltas, dtype=np.int64)
        coefs_a = np.array(coefs, dtype=complex)
        offsets = np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(np.int64)
        per_row = counts[inv]
        rows = np.repeat(np.arange(len(inv)), per_row)
        start = np.repeat(offsets[inv], per_row)
        within = np.arange(len(rows)) - np.repeat(np.cumsum(per_row) - per_row, per_row)
        idx = start + within
        return rows, self.keys[rows] + deltas_a[idx], coefs_a[idx]

    def project(self, reg: int, value: int) -> "SparseState":
        mask = self.labels([reg])[:, 0] == value
        return self.with_data(self.keys[mask], self.amps[mask])

    def to_dict(self) -> dict:
        lab = self.labels()
        return {"dims": self.dims.tolist(), "names": self.names,
                "configs": [[*map(int, l), float(a.real), float(a.imag)] for l, a in zip(lab, self.amps)]}

    @classmethod
    def from_dict(cls, data: dict) -> "SparseState":
        st = cls(data["dims"], names=data.get("names"))
        rows = data["configs"]
        if rows:
            lab = np.array([r[:-2] for r in rows], dtype=np.int64)
            if (lab < 0).any() or (lab >= st.dims[None, :]).any():
                raise ValueError("dumped labels exceed register alphabets")
            keys = lab @ st.strides
            amps = np.array([complex(r[-2], r[-1]) for r in rows])
            st = merge(st.dims, keys, amps, st.names)
        return st.normalized() if len(st) else st

    def dump(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path: str) -> "SparseState":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _strides(dims) -> np.ndarray:
    s = np.ones(len(dims), dtype=np.int64)
    for i in range(len(dims) - 2, -1, -1):
        s[i] = s[i + 1] * dims[i + 1]
    return s


def _dense_as_callable(K, sdims):
    st = _strides(sdims)

    def fn(src):
        col = int(np.dot(src, st))
        rows = np.nonzero(np.abs(K[:, col]) > PRUNE)[0]
        return [(tuple(int(r) // st % sdims), K[r, col]) for r in rows]
    return fn


def merge(dims, keys, amps, names=None) -> SparseState:
    """Sum duplicate keys, sort, and prune."""
    k, a = kernels.merge_sorted(np.asarray(keys, dtype=np.int64), np.asarray(amps, dtype=complex), PRUNE)
    return SparseState(dims, k, a, names)


def _prune(st: SparseState) -> SparseState:
    mask = np.abs(st.amps) > PRUNE
    return st.with_data(st.keys[mask], st.amps[mask])


def _check_layout(a: SparseState, b: SparseState):
    if not np.array_equal(a.dims, b.dims):
        raise ValueError("register layouts differ")


def inner(a: SparseState, b: SparseState) -> complex:
    """<a|b>, conjugate-linear in a."""
    _check_layout(a, b)
    common, ia, ib = np.intersect1d(a.keys, b.keys, assume_unique=True, return_indices=True)
    return complex(np.sum(np.conj(a.amps[ia]) * b.amps[ib]))


def fourier_basis(n: int) -> np.ndarray:
    """Columns are the character states |chi_k> = n^{-1/2} sum_g chi_k(g)^* |g>.

    With this sign the state |chi_k> picks up chi_k(h) under the shift
    |g> -> |g + h>.
    """
    g = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(g, g) / n) / np.sqrt(n)


def contract_register(state: SparseState, reg: int, vec) -> SparseState:
    """Apply the bra ``<vec|`` to one register and remove it from the layout."""
    vec = np.asarray(vec, dtype=complex)
    lab = state.labels()
    keep = [i for i in range(state.n_registers) if i != reg]
    dims = state.dims[keep]
    new = SparseState(dims, names=[state.names[i] for i in keep])
    keys = lab[:, keep] @ new.strides if keep else np.zeros(len(lab), dtype=np.int64)
    amps = state.amps * np.conj(vec[lab[:, reg]])
    return merge(dims, keys, amps, new.names)


def measure_register(state: SparseState, reg: int, basis: np.ndarray | None, rng,
                     discard: bool = False) -> tuple[int, SparseState, float]:
    """Projective measurement of one register.

    ``basis`` holds orthonormal columns; ``None`` means computational basis.
    Returns ``(outcome, collapsed normalized state, probability)``.  The
    collapsed state keeps the register in the observed basis state, unless
    ``discard`` is set, in which case the register is removed.
    """
    d = int(state.dims[reg])
    nrm = state.norm()
    if nrm == 0:
        raise ValueError("cannot measure the zero state")
    basis = np.eye(d) if basis is None else np.asarray(basis, dtype=complex)
    if not np.allclose(basis.conj().T @ basis, np.eye(d), atol=1e-12):
        raise ValueError("measurement basis is not orthonormal")
    branches = [contract_register(state, reg, basis[:, k]) for k in range(d)]
    probs = np.array([b.norm() ** 2 for b in branches]) / nrm ** 2
    probs = np.clip(probs, 0, None)
    probs /= probs.sum()
    k = int(rng.choice(d, p=probs))
    out = branches[k].normalized()
    if not discard:
        out = _reinsert(out, reg, int(state.dims[reg]), basis[:, k], state.names[reg])
    return k, out, float(probs[k])


def _reinsert(state: SparseState, reg: int, dim: int, vec, name) -> SparseState:
    new = state.add_registers([dim], vec, [name])
    # move the appended register to position reg
    order = list(range(state.n_registers))
    order.insert(reg, state.n_registers)
    return permute_registers(new, order)


def permute_registers(state: SparseState, order) -> SparseState:
    """New layout whose register i is the old register ``order[i]``."""
    lab = state.labels()[:, order]
    new = SparseState(state.dims[order], names=[state.names[i] for i in order])
    return merge(new.dims, lab @ new.strides, state.amps, new.names)


@dataclass
class MeasurementRecord:
    """Outcomes of one measurement round."""

    round: int
    registers: list = field(default_factory=list)
    outcomes: list = field(default_factory=list)
    probabilities: list = field(default_factory=list)
    seed: int | None = None
    corrections: list = field(default_factory=list)
    attempts: int = 1

    def to_dict(self) -> dict:
        return {"round": self.round, "registers": list(self.registers),
                "outcomes": [int(o) for o in self.outcomes],
                "probabilities": [float(f"{p:.12g}") for p in self.probabilities],
                "seed": self.seed, "corrections": self.corrections, "attempts": self.attempts}
