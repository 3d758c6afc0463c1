"""Brute-force verifiers: valid-configuration enumeration, operator matrices,
ground-space dimension by trace, and fidelities."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .fusion import FusionCategory
from .lattice import HoneycombTorus
from .state import ResourceError, SparseState, inner
from .stringnet import StringNet

MAX_CONFIGS = 3 ** 12


def fidelity(a: SparseState, b: SparseState) -> float:
    na, nb = a.norm(), b.norm()
    if na == 0 or nb == 0:
        raise ValueError("fidelity of a zero-norm state")
    return abs(inner(a, b)) / (na * nb)


def valid_configurations(model: StringNet, limit: int = MAX_CONFIGS, free_tails: bool = False) -> np.ndarray:
    """All register configurations satisfying every vertex rule, as sorted keys.

    Depth-first over registers; a vertex is checked as soon as its three
    registers are assigned.  Tail registers are fixed to the unit label
    unless ``free_tails``.
    """
    L = model.lattice
    n_r = L.n_registers
    rank = model.C.rank
    tails = {t.register for t in L.tails.values()}
    legs = [L.vertex_legs(v) for v in range(L.n_all_vertices)]
    completes = [[] for _ in range(n_r)]
    for v, lg in enumerate(legs):
        completes[max(r for r, _ in lg)].append(v)
    labels = [0] * n_r
    found = []

    def rec(i):
        if i == n_r:
            found.append(tuple(labels))
            if len(found) > limit:
                raise ResourceError(f"more than {limit} vertex-valid configurations")
            return
        for a in (range(rank) if free_tails or i not in tails else (0,)):
            labels[i] = a
            if all(model._vertex_ok([labels[r] for r, _ in legs[v]], [o for _, o in legs[v]])
                   for v in completes[i]):
                rec(i + 1)
        labels[i] = 0

    rec(0)
    st = SparseState(model.register_dims())
    full = np.array(found, dtype=np.int64).reshape(len(found), n_r)
    return np.sort(full @ st.strides)


def basis_state(model: StringNet, keys: np.ndarray) -> SparseState:
    return SparseState(model.register_dims(), keys, np.ones(len(keys), dtype=complex))


def operator_matrix(basis_keys: np.ndarray, dims, apply_transitions) -> sp.csr_matrix:
    """Sparse matrix of a local operator restricted to ``basis_keys``.

    ``apply_transitions(state)`` must return ``(rows, new_keys, coefs)`` as
    produced by ``SparseState.transitions``.  Images outside the basis raise.
    """
    st = SparseState(dims, basis_keys, np.ones(len(basis_keys), dtype=complex))
    rows, new_keys, coefs = apply_transitions(st)
    cols = np.searchsorted(basis_keys, new_keys)
    bad = (cols >= len(basis_keys)) | (basis_keys[np.minimum(cols, len(basis_keys) - 1)] != new_keys)
    if bad.any():
        raise ValueError("operator leaves the supplied basis")
    n = len(basis_keys)
    return sp.csr_matrix((coefs, (cols, rows)), shape=(n, n))


def plaquette_matrix(model: StringNet, keys: np.ndarray, p: int, coeffs: dict) -> sp.csr_matrix:
    kern = model._ring_kernel(p, model._weights(coeffs))
    sup = model.plaquette_support(p)
    return operator_matrix(keys, model.register_dims(), lambda st: st.transitions(sup, kern))


def ground_space_dim(C: FusionCategory, lattice: HoneycombTorus, limit: int = MAX_CONFIGS) -> float:
    """Trace of prod_v A_v prod_p B_p, summed over vertex-valid configurations.

    The resource guard applies to the number of vertex-valid configurations.
    """
    model = StringNet(C, lattice)
    keys = valid_configurations(model, limit)
    mats = [plaquette_matrix(model, keys, p, model.projector_coeffs()) for p in range(lattice.n_plaquettes)]
    half = len(mats) // 2
    left = mats[0]
    for m in mats[1:half]:
        left = left @ m
    right = mats[half]
    for m in mats[half + 1:]:
        right = right @ m
    # trace(left @ right) without forming the product
    tr = left.multiply(right.T).sum()
    return float(np.real(tr))


def dense_block(model: StringNet, op, keys: np.ndarray) -> np.ndarray:
    """Dense matrix of ``op(state) -> state`` on the span of ``keys``.

    Columns are images of the basis states; entries outside the span raise.
    """
    n = len(keys)
    M = np.zeros((n, n), dtype=complex)
    dims = model.register_dims() if not isinstance(keys, tuple) else keys[1]
    for i, k in enumerate(keys):
        out = op(SparseState(dims, np.array([k]), np.ones(1, dtype=complex)))
        idx = np.searchsorted(keys, out.keys)
        if len(out.keys) and ((idx >= n).any() or (keys[np.minimum(idx, n - 1)] != out.keys).any()):
            raise ValueError("operator leaves the block")
        M[idx, i] = out.amps
    return M


def gluing_phase(k: int, b_in: int) -> complex:
    """Closed-form gluing factor omega^{-k b} for TY(Z3)."""
    return complex(np.exp(-2j * np.pi * k * b_in / 3))


def shared_edges(lattice: HoneycombTorus, p: int, q: int) -> list[int]:
    return sorted(set(lattice.plaquettes[p].edges) & set(lattice.plaquettes[q].edges))


def _third_plaquette(lattice: HoneycombTorus, v: int, p: int, q: int) -> int:
    around = {int(lattice.edge_pos[e]) for e in lattice.incident[v]} | {int(lattice.edge_neg[e]) for e in lattice.incident[v]}
    (r,) = around - {p, q}
    return r


def fmove_expand_check(model: StringNet, p: int, q: int | None = None, k: int = 1) -> list[dict]:
    """Sigma-loop amplitudes by explicit plaquette-operator composition.

    One plaquette: the loop ``B^sigma_p |0>`` must have a positive amplitude
    (gluing product is empty).  Two adjacent plaquettes: starting from
    ``B^sigma_q B^sigma_p |0>``, a Z3 loop k on the third plaquette r at
    a gluing vertex v maps each configuration c (shared edge b) to one
    configuration c'; the expanded matrix element ``<c'|B^k_r|c>`` is
    compared with ``gluing_phase(k, b_in)``, b_in read pointing into v.
    Returns one record per checked configuration.
    """
    C, L = model.C, model.lattice
    if C.name != "ty_z3":
        raise ValueError("gluing factors are tabulated for TY(Z3)")
    sig = C.index("sigma")
    vac = model.vacuum()
    if q is None:
        st = model.apply_Bp_a(vac, p, sig)
        ring = list(L.plaquettes[p].edges)
        lab = st.labels()
        rows = np.nonzero((lab[:, ring] == sig).all(axis=1))[0]
        if len(rows) == 0:
            raise ValueError("no sigma-loop configuration produced")
        return [{"plaquettes": [p], "vertex": None, "b_in": None, "k": 0,
                 "computed": complex(st.amps[i] / abs(st.amps[i])), "predicted": 1.0 + 0j} for i in rows]
    edges = shared_edges(L, p, q)
    if len(edges) != 1:
        raise ValueError("two-plaquette sigma loops need plaquettes sharing exactly one edge")
    (e,) = edges
    st = model.apply_Bp_a(model.apply_Bp_a(vac, p, sig), q, sig)
    loop = sorted(set(L.plaquettes[p].edges) ^ set(L.plaquettes[q].edges))
    lab = st.labels()
    rows = np.nonzero((lab[:, loop] == sig).all(axis=1) & (lab[:, e] != sig))[0]
    if len(rows) == 0:
        raise ValueError("no two-plaquette sigma-loop configuration produced")
    out = []
    dims = model.register_dims()
    for v in (int(L.edge_tail[e]), int(L.edge_head[e])):
        r = _third_plaquette(L, v, p, q)
        for i in rows:
            b = int(lab[i, e])
            b_in = b if L.edge_head[e] == v else int(C.dual[b])
            img = model.apply_Bp_a(SparseState(dims, st.keys[i:i + 1], np.ones(1, dtype=complex)), r, k)
            if len(img.keys) != 1:
                raise ValueError("Z3 loop should map a configuration to a single configuration")
            out.append({"plaquettes": [p, q], "vertex": v, "third": r, "b_in": b_in, "k": k,
                        "computed": complex(img.amps[0]), "predicted": gluing_phase(k, b_in)})
    return out


def tube_matrix(model: StringNet, keys: np.ndarray, p: int, combo: dict) -> sp.csr_matrix:
    items = tuple(sorted(((tuple(int(v) for v in k), complex(c)) for k, c in combo.items()), key=lambda t: t[0]))
    kern = model._tube_kernel(p, items)
    sup = model.plaquette_support(p)
    return operator_matrix(keys, model.register_dims(), lambda st: st.transitions(sup, kern))


def projector_scan(model: StringNet, state: SparseState) -> dict:
    """Largest deviation of any A_v or B_p from acting as the identity on ``state``.

    For B_p both the residual norm (amplitudes below the prune threshold are
    dropped) and the deviation of the expectation value from 1 count.
    """
    nrm = state.norm()
    av = 0.0 if model.all_vertices_ok(state) else 1.0
    bp = 0.0
    for p in range(model.lattice.n_plaquettes):
        img = model.apply_Bp(state, p)
        bp = max(bp, (img - state).norm() / nrm, abs(inner(state, img) / nrm ** 2 - 1))
    return {"max_Av_deviation": av, "max_Bp_deviation": float(bp)}


def _sym_norm(X) -> float:
    return float(abs(X).max()) if X.nnz else 0.0


def tube_algebra_checks(model: StringNet, p: int = 0) -> dict:
    """Dense-matrix checks of the TY tube idempotents and domain walls on one tailed plaquette.

    The tail on p is added if missing; tail labels range freely over the
    trivial sector.  Returns residuals for idempotency, self-adjointness,
    orthogonality, the wall representation law and commutation with the
    other plaquette projectors.
    """
    from . import anyons

    C, L = model.C, model.lattice
    if p not in L.tails:
        L.add_tail(p)
        model._kernel_cache.clear()
    keys = valid_configurations(model, free_tails=True)
    m = lambda combo: tube_matrix(model, keys, p, combo)
    P1, PF = m(anyons.idempotent(C, "vacuum")), m(anyons.idempotent(C, "phi"))
    out = {"dimension": int(len(keys))}
    out["P1_idempotent"] = _sym_norm(P1 @ P1 - P1)
    out["PPhi_idempotent"] = _sym_norm(PF @ PF - PF)
    out["P1_selfadjoint"] = _sym_norm(P1 - P1.getH())
    out["PPhi_selfadjoint"] = _sym_norm(PF - PF.getH())
    out["orthogonal"] = max(_sym_norm(P1 @ PF), _sym_norm(PF @ P1))
    law = 0.0
    for a in ("vacuum", "phi"):
        B = {g: m(c) for g, c in anyons.domain_walls(C, a).items()}
        law = max(law, _sym_norm(B[1] @ B[1] - B[0]), _sym_norm(B[0] @ B[1] - B[1]),
                  _sym_norm(B[1] @ B[0] - B[1]), _sym_norm(B[0] @ B[0] - B[0]))
    out["wall_representation_law"] = law
    comm = 0.0
    for q in range(L.n_plaquettes):
        if q == p:
            continue
        Bq = plaquette_matrix(model, keys, q, model.projector_coeffs())
        comm = max(comm, _sym_norm(Bq @ PF - PF @ Bq), _sym_norm(Bq @ P1 - P1 @ Bq))
    out["commute_with_neighbours"] = comm
    out["trace_P1"] = float(np.real(P1.diagonal().sum()))
    out["trace_PPhi"] = float(np.real(PF.diagonal().sum()))
    return out
