"""Levin-Wen vertex and plaquette operators on the honeycomb torus.

Labels are stored per edge in the lattice orientation (A to B).  Around a
plaquette, labels are read counter-clockwise: an edge running clockwise
contributes its dual.  Legs are read pointing away from the plaquette, so the
leg at a B vertex contributes its dual.

The hexagon operator B^s slides a loop ``s`` onto the boundary ring; the
matrix element is a product of one F-symbol per ring vertex (see
``kernels.ring_fuse``).
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from . import kernels
from .fusion import FusionCategory
from .groups import Character
from .lattice import HoneycombTorus
from .state import PRUNE, SparseState


class StringNet:
    """A fusion category placed on a honeycomb torus."""

    def __init__(self, C: FusionCategory, lattice: HoneycombTorus):
        self.C = C
        self.lattice = lattice
        self.fusion_s = [[tuple(C.fusion_out[x][s]) for x in range(C.rank)] for s in range(C.rank)]
        self._F = C.Farray
        self._kernel_cache: dict = {}

    # layout
    @property
    def n_edges(self) -> int:
        return self.lattice.n_edges

    def register_dims(self) -> list[int]:
        return [self.C.rank] * self.lattice.n_registers

    def register_names(self) -> list[str]:
        names = [f"e{e}" for e in range(self.n_edges)]
        for p, t in self.lattice.tails.items():
            names += [f"s{t.edge}", f"t{p}"]
        return names

    def vacuum(self) -> SparseState:
        dims = self.register_dims()
        return SparseState.basis(dims, [0] * len(dims), self.register_names())

    def attach_tail(self, state: SparseState, p: int, edge: int | None = None) -> SparseState:
        """Ensure plaquette p has a tail and extend ``state`` to all tail registers.

        New registers hold the unit tail and a copy of the split edge's label,
        so vertex rules are unaffected.
        """
        L = self.lattice
        if p not in L.tails:
            L.add_tail(p, edge)
            self._kernel_cache.clear()
        return self.extend_state(state)

    def extend_state(self, state: SparseState) -> SparseState:
        """Append missing tail registers (in tail order) to a state."""
        st = state
        for q, t in self.lattice.tails.items():
            if t.segment < st.n_registers:
                continue
            if t.segment != st.n_registers:
                raise ValueError("state does not match the lattice registers")
            st = st.add_registers([self.C.rank, self.C.rank], names=[f"s{t.edge}", f"t{q}"])
            st = st.apply_local([t.edge, t.segment, t.register], lambda local: [((local[0], local[0], 0), 1.0)])
        return st

    # vertex rule
    def _vertex_ok(self, labels, outgoing) -> bool:
        d = self.C.dual
        a, b, c = (x if o else d[x] for x, o in zip(labels, outgoing))
        return bool(self.C.N[a, b, d[c]])

    def vertex_ok(self, v: int, labels) -> bool:
        """Vertex rule at v for labels of its registers in ``vertex_legs`` order."""
        return self._vertex_ok(labels, [o for _, o in self.lattice.vertex_legs(v)])

    def vertex_mask_local(self, v, lab):
        N, d = self.C.N, self.C.dual
        outs = [o for _, o in self.lattice.vertex_legs(v)]
        a, b, c = (lab[:, i] if o else d[lab[:, i]] for i, o in enumerate(outs))
        return N[a, b, d[c]].astype(float)

    def vertex_mask(self, labels: np.ndarray, v: int) -> np.ndarray:
        regs = [r for r, _ in self.lattice.vertex_legs(v)]
        return self.vertex_mask_local(v, labels[:, regs]).astype(bool)

    def apply_Av(self, state: SparseState, v: int) -> SparseState:
        regs = [r for r, _ in self.lattice.vertex_legs(v)]
        return state.apply_diagonal(lambda lab: self.vertex_mask_local(v, lab), regs)

    def all_vertices_ok(self, state: SparseState) -> bool:
        lab = state.labels(range(state.n_registers))
        return all(self.vertex_mask(lab, v).all() for v in range(self.lattice.n_all_vertices))

    # plaquette operators
    def plaquette_support(self, p: int) -> list[int]:
        segs, legs, _ = self.lattice.ring(p)
        return [r for r, _ in segs] + [r for r, _ in legs]

    def _read_ring(self, p: int, local):
        """Ring labels read counter-clockwise and leg labels read outward."""
        segs, legs, own = self.lattice.ring(p)
        dual = self.C.dual
        n = len(segs)
        x = [r if c else int(dual[r]) for r, (_, c) in zip(local[:n], segs)]
        j = [l if o else int(dual[l]) for l, (_, o) in zip(local[n:], legs)]
        return x, j

    def _ring_kernel(self, p: int, weights: tuple):
        """Callable kernel for sum_s weights[s] B^s on plaquette p.

        On a plaquette carrying its own tail only the trivial tail survives.
        """
        key = (p, weights, len(self.lattice.tails))
        if key in self._kernel_cache:
            return self._kernel_cache[key]
        segs, legs, own = self.lattice.ring(p)
        dual = self.C.dual
        ccw = [c for _, c in segs]
        N = self.C.N
        F = self._F
        terms = [(s, w) for s, w in enumerate(weights) if w != 0]
        n = len(segs)

        @lru_cache(maxsize=None)
        def fn(local):
            x, j = self._read_ring(p, local)
            if own is not None:
                if local[n + own] != 0:
                    return []
                j[own] = 0
            for k in range(n):
                if not N[j[k], x[k], x[k - 1]]:
                    raise ValueError(f"vertex rule violated on plaquette {p}")
            acc: dict = {}
            for s, w in terms:
                ys, cs = kernels.ring_fuse(F, self.fusion_s[s], x, j, s, PRUNE)
                for y, c in zip(ys, cs):
                    acc[y] = acc.get(y, 0) + w * c
            out = []
            for y, c in acc.items():
                if abs(c) > PRUNE:
                    out.append((tuple(yk if cc else int(dual[yk]) for yk, cc in zip(y, ccw)), c))
            return out

        self._kernel_cache[key] = fn
        return fn

    # tubes
    def tube_amplitudes(self, x, j, own, r, s, q, p_new):
        """Ring labels and amplitudes of the tube T^s_{p q r} on a tailed ring.

        The loop ``s`` crosses the tail; the crossing is resolved with the
        outer tail segment ``r`` fusing with ``s`` into ``q``, and ``q``
        splitting into ``s`` and the new inner tail ``p``.  The loop then
        slides onto the ring with one F-move per ring vertex; at the
        junction the two moves are F^{x r s} and the inverse of F^{x s p}.
        """
        F = self._F
        d = self.C.qdim
        n = len(x)
        opts = [self.fusion_s[s][xk] for xk in x]
        pref = np.sqrt(d[r] * d[s] / d[q])
        out = []

        def factor(k, ym, yk):
            if k == own:
                a = F[x[k], r, s, ym, x[k - 1], q]
                if a == 0:
                    return 0.0
                return a * np.conj(F[x[k], s, p_new, ym, yk, q])
            return F[j[k], x[k], s, ym, x[k - 1], yk]

        def rec(k, ys, amp):
            if k == n:
                c = amp * factor(0, ys[-1], ys[0])
                if abs(c) > PRUNE:
                    out.append((tuple(ys), c * pref))
                return
            for yk in opts[k]:
                c = amp if k == 0 else amp * factor(k, ys[-1], yk)
                if abs(c) > PRUNE:
                    rec(k + 1, ys + [yk], c)
        rec(0, [], 1.0 + 0j)
        return out

    def _tube_kernel(self, p: int, combo: tuple):
        """Callable kernel for sum c T^s_{pqr} on p; combo holds ((s, q, p, r), c)."""
        key = ("tube", p, combo, len(self.lattice.tails))
        if key in self._kernel_cache:
            return self._kernel_cache[key]
        segs, legs, own = self.lattice.ring(p)
        if own is None:
            raise ValueError(f"plaquette {p} has no tail")
        dual = self.C.dual
        ccw = [c for _, c in segs]
        n = len(segs)

        @lru_cache(maxsize=None)
        def fn(local):
            x, j = self._read_ring(p, local)
            r_old = local[n + own]
            acc: dict = {}
            for (s, q, pn, r), w in combo:
                if r != r_old:
                    continue
                for y, c in self.tube_amplitudes(x, j, own, r, s, q, pn):
                    k = (y, pn)
                    acc[k] = acc.get(k, 0) + w * c
            out = []
            for (y, pn), c in acc.items():
                if abs(c) > PRUNE:
                    ring = tuple(yk if cc else int(dual[yk]) for yk, cc in zip(y, ccw))
                    lg = list(local[n:])
                    lg[own] = pn
                    out.append((ring + tuple(lg), c))
            return out

        self._kernel_cache[key] = fn
        return fn

    def apply_tube(self, state: SparseState, p: int, combo) -> SparseState:
        """Apply a linear combination of tubes on tailed plaquette p.

        ``combo`` maps ``(s, q, p_new, r_old)`` to a coefficient.
        """
        items = tuple(sorted(((tuple(int(v) for v in k), complex(c)) for k, c in dict(combo).items()),
                             key=lambda t: t[0]))
        return state.apply_local(self.plaquette_support(p), self._tube_kernel(p, items))

    def _weights(self, coeffs: dict) -> tuple:
        w = [0.0] * self.C.rank
        for s, c in coeffs.items():
            w[s] += c
        return tuple(w)

    def apply_Bp_a(self, state: SparseState, p: int, a: int) -> SparseState:
        return self.apply_Bp_combo(state, p, {a: 1.0})

    def apply_Bp_combo(self, state: SparseState, p: int, coeffs: dict) -> SparseState:
        """Apply ``sum_s coeffs[s] B_p^s``."""
        return state.apply_local(self.plaquette_support(p), self._ring_kernel(p, self._weights(coeffs)))

    def graded_coeffs(self, level: int, g: int) -> dict:
        """Coefficients of B^g at ``level``: (1/D^2) sum_{a in sector g} d_a B^a."""
        lev = self.C.series[level]
        if not 0 <= g < lev.group.order:
            raise ValueError("group element outside the level's grading group")
        D2 = self.C.level_dim_sq(level)
        return {a: self.C.qdim[a] / D2 for a in lev.sector(g)}

    def apply_Bp_g(self, state: SparseState, p: int, g: int, level: int | None = None) -> SparseState:
        level = len(self.C.series) - 1 if level is None else level
        return self.apply_Bp_combo(state, p, self.graded_coeffs(level, g))

    def projector_coeffs(self, level: int | None = None) -> dict:
        """Coefficients of the plaquette projector of the level-``level`` string-net."""
        level = len(self.C.series) - 1 if level is None else level
        objs = self.C.series[level].objects
        D2 = sum(self.C.qdim[a] ** 2 for a in objs)
        return {a: self.C.qdim[a] / D2 for a in objs}

    def apply_Bp(self, state: SparseState, p: int, level: int | None = None) -> SparseState:
        return self.apply_Bp_combo(state, p, self.projector_coeffs(level))

    def charge_projector_coeffs(self, level: int, chi: Character) -> dict:
        """(1/|G|) sum_g chi(g)^* B^g, projecting onto plaquette charge chi."""
        G = self.C.series[level].group
        out: dict = {}
        for g in G.elements:
            for a, c in self.graded_coeffs(level, g).items():
                out[a] = out.get(a, 0) + np.conj(chi(g)) * c / G.order
        return out

    # character strings
    def char_phase(self, chi: Character, level: int) -> np.ndarray:
        """Diagonal of the edge character operator, indexed by label."""
        lev = self.C.series[level]
        return np.array([chi(lev.grade.get(a, 0)) if a in lev.grade else 1.0 for a in range(self.C.rank)])

    def apply_char_string(self, state: SparseState, chi: Character, path, level: int | None = None) -> SparseState:
        """Multiply by prod over ``(edge, sign)`` of chi(grade(label))**sign.

        With ``path = lattice.dual_path(p, q)`` this moves charge ``chi`` from
        q to p: the plaquette charge at p is multiplied by chi^{-1} and the
        one at q by chi.
        """
        level = len(self.C.series) - 1 if level is None else level
        if not path:
            return state.copy()
        diag = self.char_phase(chi, level)
        edges = [e for e, _ in path]
        signs = np.array([s for _, s in path])

        def phase(lab):
            vals = diag[lab]
            vals = np.where(signs[None, :] > 0, vals, np.conj(vals))
            return np.prod(vals, axis=1)
        return state.apply_diagonal(phase, edges)

    # ground state
    def ground_state_direct(self, level: int | None = None) -> SparseState:
        st = self.vacuum()
        for p in range(self.lattice.n_plaquettes):
            st = self.apply_Bp(st, p, level)
        return st.normalized()

    def expectation_Bp(self, state: SparseState, p: int, level: int | None = None) -> complex:
        from .state import inner
        return inner(state, self.apply_Bp(state, p, level)) / inner(state, state)


def apply_Av(model: StringNet, state, v):
    return model.apply_Av(state, v)


def apply_Bp_a(model: StringNet, state, p, a):
    return model.apply_Bp_a(state, p, a)


def apply_Bp_g(model: StringNet, state, p, g, level=None):
    return model.apply_Bp_g(state, p, g, level)


def apply_char_string(model: StringNet, state, chi, path, level=None):
    return model.apply_char_string(state, chi, path, level)


def ground_state_direct(C: FusionCategory, lattice: HoneycombTorus) -> SparseState:
    return StringNet(C, lattice).ground_state_direct()
