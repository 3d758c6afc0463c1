"""Ungauging and regauging a Z_N symmetry on a simply connected region.

The Z_N string-net is a flat Z_N gauge field on the dual (triangular)
lattice: its vertices are honeycomb plaquettes and its flatness conditions
are the honeycomb vertex rules.  Ungauging attaches a Z_N matter ancilla to
every plaquette of the region, couples it to the interior edges, and
measures those edges.  Group actions use left multiplication (addition mod N).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .afdlu import ProtocolViolation
from .groups import AbelianGroup
from .lattice import Region, spanning_tree
from .state import SparseState, fourier_basis, measure_register
from .stringnet import StringNet


@dataclass
class UngaugeOutcome:
    region: Region
    ancillas: dict                                # plaquette -> register
    edge_outcomes: dict = field(default_factory=dict)   # interior edge -> g_e
    potential: dict = field(default_factory=dict)       # plaquette -> g_p
    probabilities: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"plaquettes": sorted(int(p) for p in self.region.plaquettes),
                "edge_outcomes": {str(e): int(g) for e, g in sorted(self.edge_outcomes.items())},
                "potential": {str(p): int(g) for p, g in sorted(self.potential.items())},
                "probabilities": [float(f"{x:.12g}") for x in self.probabilities]}


def _group(model: StringNet) -> AbelianGroup:
    G = model.C.series[-1].group
    if G.order != model.C.rank:
        raise ValueError("one-form gauging needs a Vec_{Z_N} string-net")
    return G


def _couple(model: StringNet, state: SparseState, region: Region, ancillas: dict, sign: int) -> SparseState:
    """Shift each interior edge by ``sign * (h_pos - h_neg)``."""
    L = model.lattice
    n = model.C.rank
    inner = set(region.interior_edges)
    st = state
    for p in sorted(region.plaquettes):
        edges = [e for e in L.plaquettes[p].edges if e in inner]
        if not edges:
            continue
        orient = [L.orientation(e, p) for e in edges]

        def fn(local, orient=orient):
            h = local[0]
            return [((h,) + tuple((l + sign * o * h) % n for l, o in zip(local[1:], orient)), 1.0)]
        st = st.apply_local([ancillas[p]] + edges, fn)
    return st


def solve_potential(region: Region, group: AbelianGroup, edge_values: dict, root: int | None = None) -> dict:
    """Plaquette potential g with g_pos(e) - g_neg(e) = edge_values[e]; root fixed at 0."""
    L = region.lattice
    tree = _tree(region, root)
    pot = {}
    for p, link in tree.items():
        if link is None:
            pot[p] = group.identity
            continue
        u, e = link
        g = edge_values[e]
        if L.edge_pos[e] == p:
            pot[p] = int(group.mul[pot[u], g])
        else:
            pot[p] = int(group.mul[pot[u], group.inv[g]])
    return pot


def _tree(region: Region, root: int | None):
    tree = spanning_tree(region, over="plaquettes")
    if root is None or root == min(region.plaquettes):
        return tree
    # regrow from a different root, same neighbour ordering
    from collections import deque
    L = region.lattice
    inner = set(region.interior_edges)
    out = {root: None}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w, e in sorted(L.dual_adjacency[u], key=lambda t: (t[0], t[1])):
            if e in inner and w in region.plaquettes and w not in out:
                out[w] = (u, e)
                queue.append(w)
    return out


def ungauge_region(model: StringNet, state: SparseState, region: Region, rng,
                   root: int | None = None) -> tuple[SparseState, UngaugeOutcome]:
    """Condense the region: matter ancillas on its plaquettes, interior edges reset to 0."""
    G = _group(model)
    L = model.lattice
    n = G.order
    if not region.plaquettes:
        return state.copy(), UngaugeOutcome(region, {})
    plist = sorted(region.plaquettes)
    start = state.n_registers
    plus = np.ones(n) / np.sqrt(n)
    st = state
    for p in plist:
        st = st.add_registers([n], plus, [f"m{p}"])
    ancillas = {p: start + i for i, p in enumerate(plist)}
    st = _couple(model, st, region, ancillas, +1)
    out = UngaugeOutcome(region, ancillas)
    for e in region.interior_edges:
        g, st, prob = measure_register(st, e, None, rng)
        out.edge_outcomes[e] = g
        out.probabilities.append(prob)
    # cocycle condition on every face (vertex with all edges interior)
    for v in region.interior_vertices:
        if not model.vertex_ok(v, [out.edge_outcomes[e] for e in L.incident[v]]):
            raise ProtocolViolation(f"edge outcomes are not flat around vertex {v}")
    pot = solve_potential(region, G, out.edge_outcomes, root)
    for e, g in out.edge_outcomes.items():
        if (pot[L.edge_pos[e]] - pot[L.edge_neg[e]]) % n != g:
            raise ProtocolViolation("edge outcomes are not a coboundary")
    out.potential = pot
    # byproduct on the matter, then reset the measured edges
    for p in plist:
        shift = np.roll(np.eye(n), -pot[p], axis=0)
        st = st.apply_local([ancillas[p]], shift)
    for e, g in out.edge_outcomes.items():
        st = st.apply_local([e], np.roll(np.eye(n), -g, axis=0))
    return st, out


def regauge_region(model: StringNet, state: SparseState, outcome: UngaugeOutcome, rng) -> tuple[SparseState, dict]:
    """Couple back, measure matter in the character basis, and correct."""
    G = _group(model)
    L = model.lattice
    region = outcome.region
    n = G.order
    if not region.plaquettes:
        return state.copy(), {}
    st = _couple(model, state, region, outcome.ancillas, -1)
    plist = sorted(region.plaquettes)
    basis = fourier_basis(n)
    first = min(outcome.ancillas.values())
    charges = {}
    for p in plist:
        k, st, _ = measure_register(st, first, basis, rng, discard=True)
        charges[p] = k
    if sum(charges.values()) % n:
        raise ProtocolViolation("matter charges do not fuse to the vacuum")
    # chain c' with boundary equal to the charges, pushed up the spanning tree
    tree = spanning_tree(region, over="plaquettes")
    order = list(tree)[::-1]
    resid = dict(charges)
    chain = {}
    for p in order:
        link = tree[p]
        if link is None:
            continue
        u, e = link
        c = resid[p] % n
        if c:
            chain[e] = c if L.edge_pos[e] == p else (-c) % n
            resid[u] = (resid[u] + c) % n
        resid[p] = 0
    if chain:
        edges = sorted(chain)
        ks = np.array([chain[e] for e in edges])
        st = st.apply_diagonal(lambda lab: np.exp(2j * np.pi * np.sum(ks[None, :] * lab, axis=1) / n), edges)
    return st.normalized(), {"charges": charges, "chain": {int(e): int(c) for e, c in chain.items()}}


def roundtrip(model: StringNet, state: SparseState, region: Region, rng, window_op=None):
    st, out = ungauge_region(model, state, region, rng)
    if window_op is not None:
        st = apply_symmetric_in_window(model, st, out, window_op)
    st, info = regauge_region(model, st, out, rng)
    return st, out, info


def matter_symmetry(model: StringNet, state: SparseState, outcome: UngaugeOutcome, g: int) -> SparseState:
    n = model.C.rank
    st = state
    for a in outcome.ancillas.values():
        st = st.apply_local([a], np.roll(np.eye(n), g, axis=0))
    return st


def apply_symmetric_in_window(model: StringNet, state: SparseState, outcome: UngaugeOutcome, op) -> SparseState:
    """Apply ``op`` to the condensed state after checking it commutes with the residual symmetry."""
    from .state import inner
    for g in range(1, model.C.rank):
        a = op(matter_symmetry(model, state, outcome, g))
        b = matter_symmetry(model, op(state), outcome, g)
        diff = a - b
        if diff.norm() > 1e-10 * max(1.0, b.norm()):
            raise ValueError("operator does not commute with the global symmetry")
    return op(state)


def matter_string(model: StringNet, outcome: UngaugeOutcome, k: int, path):
    """Ungauged image of a character string lying inside the region.

    On the condensed state the edge label is ``h_neg - h_pos`` in terms of the
    matter, so the string becomes a product of matter clock operators.
    """
    L = model.lattice
    n = model.C.rank

    def op(state):
        st = state
        for e, s in path:
            p, q = int(L.edge_pos[e]), int(L.edge_neg[e])
            regs = [outcome.ancillas[p], outcome.ancillas[q]]

            def phase(lab, s=s):
                return np.exp(2j * np.pi * k * s * ((lab[:, 1] - lab[:, 0]) % n) / n)
            st = st.apply_diagonal(phase, regs)
        return st
    return op
