"""Anyons on tailed plaquettes: half-braidings, tubes, domain walls, strings.

A tailed plaquette carries an extra register hanging from a junction on one
boundary edge (see ``HoneycombTorus.add_tail``).  Tubes ``T^s_{pqr}`` act on
the ring and the tail (``StringNet.apply_tube``); linear combinations of
tubes give the anyon idempotents and the domain-wall operators used when
gauging with anyons present.

String operators are supported for anyons whose internal labels are
invertible objects, so every string maps a basis configuration to a single
configuration times a phase.  This covers the dyons of Vec_Z3 and the
non-Abelian anyon of TY(Z3) built from them.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .afdlu import ProtocolViolation, kw_round
from .fusion import FusionCategory
from .lattice import HoneycombTorus
from .state import MeasurementRecord, SparseState
from .stringnet import StringNet

OMEGA = np.exp(2j * np.pi / 3)


@dataclass(frozen=True)
class HalfBraiding:
    """Crossing data ``Omega^{a, r s b}`` of an anyon string with edge label a.

    The string's internal label changes from r to s across the edge, and b
    is the label of the edge piece merged with the string.
    """

    name: str
    category: str
    omega: dict = field(default_factory=dict)   # (a, r, s, b) -> complex
    labels: tuple = ()                          # internal labels r

    def __call__(self, a: int, r: int, s: int, b: int) -> complex:
        return self.omega.get((a, r, s, b), 0.0)

    def crossing(self, a: int, r: int) -> tuple[int, int, complex]:
        """The unique ``(s, b, Omega)`` for an invertible internal label r."""
        hits = [(s, b, w) for (a2, r2, s, b), w in self.omega.items() if a2 == a and r2 == r and w != 0]
        if len(hits) != 1:
            raise ValueError("crossing is not unique for this half-braiding")
        return hits[0]

    def weight(self, C: FusionCategory, a: int, r: int, s: int, b: int) -> float:
        """Resolution weight sqrt(d_b / (d_a sqrt(d_r d_s)))."""
        d = C.qdim
        return float(np.sqrt(d[b] / (d[a] * np.sqrt(d[r] * d[s]))))


def _z3_add(a: int, b: int) -> int:
    return (a + b) % 3


def dyon(r: int) -> HalfBraiding:
    """Vec_Z3 dyon string with internal label r and Omega^{a, r r (r+a)} = omega^{r a}.

    The string from p0 to pn leaves tail label -r at p0 and r at pn.  The
    two choices r = 1, 2 are exchanged by the charge-flux duality.
    """
    om = {(a, r, r, _z3_add(r, a)): OMEGA ** (r * a) for a in range(3)}
    return HalfBraiding(f"dyon{r}", "vec_z3", om, (r,))


def ty_phi() -> HalfBraiding:
    """The TY(Z3) anyon whose strings restrict to sums of the two dyon strings.

    Z3 edges act as for ``dyon``; crossing a sigma edge flips r to -r with
    phase omega.
    """
    om = {}
    for r in (1, 2):
        for a in range(3):
            om[(a, r, r, _z3_add(r, a))] = OMEGA ** (r * a)
    om[(3, 1, 2, 3)] = OMEGA
    om[(3, 2, 1, 3)] = OMEGA
    return HalfBraiding("phi", "ty_z3", om, (1, 2))


# tube combinations -------------------------------------------------------

@dataclass(frozen=True)
class TubeElement:
    """Basis tube ``T^s_{p q r}``: outer tail r, loop s, middle q, new tail p."""

    s: int
    q: int
    p: int
    r: int

    def key(self) -> tuple:
        return (self.s, self.q, self.p, self.r)


def _sigma(C: FusionCategory) -> int:
    return C.rank - 1


def wall_coefficients(C: FusionCategory, anyon: str, g: int) -> dict:
    """Tube coefficients of the domain-wall operator for ``anyon`` and grade g.

    ``anyon`` is ``"vacuum"`` or ``"phi"`` (the orbit of the two dyons).  Grade
    0 combines Z3 loops, grade 1 the sigma loop.
    """
    if C.name != "ty_z3":
        raise ValueError("domain walls are tabulated for TY(Z3)")
    sig = _sigma(C)
    tails = (0,) if anyon == "vacuum" else (1, 2) if anyon == "phi" else None
    if tails is None:
        raise ValueError(f"unknown anyon {anyon!r}")
    out = {}
    for r in tails:
        if g == 0:
            for s in range(3):
                out[(s, _z3_add(r, s), r, r)] = OMEGA ** (-r * s) / 3
        elif g == 1:
            out[(sig, sig, (-r) % 3, r)] = (OMEGA ** 2 if r else 1.0) / np.sqrt(3)
        else:
            raise ValueError("grade must be 0 or 1")
    return out


def domain_walls(C: FusionCategory, anyon: str) -> dict:
    return {g: wall_coefficients(C, anyon, g) for g in (0, 1)}


def idempotent(C: FusionCategory, anyon: str) -> dict:
    """Tube idempotent: the average of the two domain-wall operators."""
    out: dict = {}
    for g in (0, 1):
        for k, c in wall_coefficients(C, anyon, g).items():
            out[k] = out.get(k, 0) + c / 2
    return out


def dyon_idempotent(r: int) -> dict:
    """Z3 tube idempotent of the dyon whose tail carries r."""
    return {(s, _z3_add(r, s), r, r): OMEGA ** (-r * s) / 3 for s in range(3)}


def apply_tube(model: StringNet, state: SparseState, p: int, combo: dict) -> SparseState:
    return model.apply_tube(state, p, combo)


# strings -----------------------------------------------------------------

def path_plaquettes(lattice: HoneycombTorus, path) -> list[int]:
    if not path:
        raise ValueError("string path is empty")
    e, s = path[0]
    plaqs = [int(lattice.edge_pos[e] if s > 0 else lattice.edge_neg[e])]
    for e, s in path:
        plaqs.append(int(lattice.edge_neg[e] if s > 0 else lattice.edge_pos[e]))
    return plaqs


def string_tails(lattice: HoneycombTorus, path) -> list[tuple[int, int]]:
    """Tail placement for a string along ``path``: ``[(p0, edge), (pn, edge)]``.

    The first tail sits on the edge just before the first crossed edge in
    p0's counter-clockwise order, the last one on the edge just after the
    last crossed edge in pn's order.
    """
    plaqs = path_plaquettes(lattice, path)
    P0, Pn = lattice.plaquettes[plaqs[0]], lattice.plaquettes[plaqs[-1]]
    i0 = P0.edges.index(path[0][0])
    i1 = Pn.edges.index(path[-1][0])
    e0, e1 = P0.edges[i0 - 1], Pn.edges[(i1 + 1) % 6]
    if e0 == e1 or plaqs[0] == plaqs[-1]:
        raise ValueError("string endpoints need distinct plaquettes and tail edges")
    return [(plaqs[0], e0), (plaqs[-1], e1)]


def attach_string_tails(model: StringNet, state: SparseState, path) -> SparseState:
    for p, e in string_tails(model.lattice, path):
        if p in model.lattice.tails and model.lattice.tails[p].edge != e:
            raise ValueError(f"plaquette {p} already has a tail on another edge")
        state = model.attach_tail(state, p, e)
    return state


def _ring_slots(model: StringNet, p: int):
    """Counter-clockwise ring of p as parallel lists (see ``HoneycombTorus.ring``)."""
    segs, legs, own = model.lattice.ring(p)
    return [r for r, _ in segs], [c for _, c in segs], [r for r, _ in legs], [o for _, o in legs], own


def string_plan(model: StringNet, path) -> list[dict]:
    """Where the strand runs in each plaquette of the path.

    In p_k the strand starts on the crossed edge e_k (p0: at its own tail
    junction) and slides counter-clockwise up to the crossed edge e_{k+1}
    (pn: into its tail).  ``start``/``stop`` are ring positions: segment
    positions for crossed edges, vertex positions for junctions.
    """
    L = model.lattice
    plaqs = path_plaquettes(L, path)
    for p, e in string_tails(L, path):
        if p not in L.tails or L.tails[p].edge != e:
            raise ValueError(f"string endpoint {p} lacks its tail; use attach_string_tails")
    for e, _ in path:
        if L.tail_on_edge(e) is not None:
            raise ValueError("a string cannot cross an edge carrying a tail junction")
    plan = []
    for k, p in enumerate(plaqs):
        segs, _, _, _, own = _ring_slots(model, p)
        start = own if k == 0 else segs.index(path[k - 1][0])
        stop = own if k == len(plaqs) - 1 else segs.index(path[k][0])
        plan.append({"plaquette": p, "start": start, "stop": stop, "n": len(segs)})
    return plan


def apply_string(model: StringNet, state: SparseState, path, anyon: HalfBraiding,
                 r: int | None = None) -> SparseState:
    """String operator of ``anyon`` along a dual path.

    With ``r`` given only the component with internal label r at p0 is
    applied; otherwise the components for all ``anyon.labels`` are summed.

    The internal label is carried by a strand that slides counter-clockwise
    inside each plaquette of the path and fuses into the ring segments it
    runs along, with one F-move per ring vertex as for the plaquette loop.
    Crossing the edge e_k contributes the half-braiding; crossed edges keep
    their labels.  The strand leaves the tail of p0 and enters the tail of
    pn through the junction moves used by tubes.  Internal labels must be
    invertible, so each configuration maps to a single configuration.
    """
    if r is None:
        out = None
        for lab in anyon.labels:
            term = apply_string(model, state, path, anyon, lab)
            out = term if out is None else out + term
        return out
    C = model.C
    F = C.Farray
    dual = C.dual
    plan = string_plan(model, path)
    slots = [_ring_slots(model, step["plaquette"]) for step in plan]
    regs: list = []
    for segs, _, legs, _, _ in slots:
        regs += segs + legs
    regs = list(dict.fromkeys(regs))
    pos = {g: i for i, g in enumerate(regs)}

    def one(a, b):
        out = C.fusion_out[a][b]
        if len(out) != 1:
            raise ValueError("string labels must be invertible")
        return int(out[0])

    last = len(plan) - 1

    def kernel(local):
        lab = list(local)
        amp = 1.0 + 0j
        strand = int(r)
        for k, step in enumerate(plan):
            segs, ccw, legs, louts, own = slots[k]
            n = step["n"]

            def rd(g, forward):
                v = lab[pos[g]]
                return v if forward else int(dual[v])
            x = [rd(g, c) for g, c in zip(segs, ccw)]
            j = [rd(g, o) for g, o in zip(legs, louts)]
            if k > 0:
                psegs, pccw = slots[k - 1][0], slots[k - 1][1]
                ie = plan[k - 1]["stop"]
                a = rd(psegs[ie], pccw[ie])
                rin = strand
                rout, b, w = anyon.crossing(a, rin)
                amp *= w * anyon.weight(C, a, rin, rout, b)
                strand = int(rout)
                # the previous strand still occupies e_k next to the shared vertex
                x[step["start"]] = int(dual[b])
            s_ = strand
            if k == 0:
                tau = step["start"]
                q_old = lab[pos[legs[tau]]]
                p_new = one(q_old, int(dual[s_]))
                amp *= np.conj(F[x[tau], s_, p_new, x[tau - 1], one(x[tau], s_), q_old])
                lab[pos[legs[tau]]] = p_new
                fused = [tau]
                m = (tau + 1) % n
            else:
                fused = []
                m = (step["start"] + 1) % n
            stop = step["stop"]
            while m != stop:
                amp *= F[j[m], x[m], s_, one(x[m - 1], s_), x[m - 1], one(x[m], s_)]
                fused.append(m)
                m = (m + 1) % n
            if k < last:
                # vertex before the crossed edge e_{k+1}; that edge stays unfused
                amp *= F[j[m], x[m], s_, one(x[m - 1], s_), x[m - 1], one(x[m], s_)]
            else:
                tau = stop
                r_old = lab[pos[legs[tau]]]
                q_new = one(r_old, s_)
                amp *= F[x[tau], r_old, s_, one(x[tau - 1], s_), x[tau - 1], q_new]
                lab[pos[legs[tau]]] = q_new
            for m in fused:
                v = one(x[m], s_)
                lab[pos[segs[m]]] = v if ccw[m] else int(dual[v])
        if abs(amp) < 1e-14:
            return []
        return [(tuple(lab[pos[g]] for g in regs), amp)]

    return state.apply_local(regs, kernel)


# gauging with anyons present --------------------------------------------

def gauge_with_anyons(model: StringNet, state: SparseState, level: int, tail_charges: dict, rng,
                      max_attempts: int = 64) -> tuple[SparseState, MeasurementRecord]:
    """Gauging round with anyons sitting on tailed plaquettes.

    ``tail_charges`` maps each tailed plaquette to the anyon it should carry
    after gauging (``"vacuum"`` or ``"phi"``); the controlled operator there
    is built from that anyon's domain walls.  A round that ends with an
    unpaired charge is repeated on the same input (the input is known to the
    simulator); the number of repeats is stored as ``record.attempts``.
    """
    for p in tail_charges:
        if p not in model.lattice.tails:
            raise ValueError(f"plaquette {p} has no tail")
    walls = {p: domain_walls(model.C, a) for p, a in tail_charges.items()}
    for attempt in range(1, max_attempts + 1):
        try:
            out, rec = kw_round(model, state, level, rng, walls=walls)
        except ProtocolViolation:
            continue
        rec.attempts = attempt
        return out, rec
    raise ProtocolViolation(f"no symmetric branch after {max_attempts} attempts")


def phi_string_comparison(lx: int, ly: int, p0: int | None = None, pn: int | None = None,
                          seed: int = 0, path=None) -> dict:
    """Gauge a dyon-pair state and compare it with the TY Phi string.

    Builds ``(W^{dyon1} + W^{dyon2})|Omega_Z3>`` at level 1 of TY(Z3),
    gauges it with Phi walls on both endpoints, applies the Phi string to
    the TY ground state directly, and reports the fidelity together with the
    endpoint ``P^Phi`` and bulk ``B_p`` expectation values of both states.
    Either the endpoints (shortest dual path) or an explicit ``path`` is given.
    """
    from .fusion import builtin
    from .oracle import fidelity
    from .state import inner

    C = builtin("ty_z3")
    L = HoneycombTorus(lx, ly)
    model = StringNet(C, L)
    if path is None:
        path = L.dual_path(p0, pn)
    plaqs = path_plaquettes(L, path)
    p0, pn = plaqs[0], plaqs[-1]
    z3 = attach_string_tails(model, model.ground_state_direct(level=1), path)
    ty = attach_string_tails(model, model.ground_state_direct(level=2), path)
    pair = apply_string(model, z3, path, dyon(1), 1) + apply_string(model, z3, path, dyon(2), 2)
    rng = np.random.default_rng(seed)
    gauged, rec = gauge_with_anyons(model, pair, 2, {p0: "phi", pn: "phi"}, rng)
    direct = apply_string(model, ty, path, ty_phi())
    PF = idempotent(C, "phi")

    def expect(st, op):
        return float(np.real(inner(st, op(st))) / st.norm() ** 2)
    out = {"path": [[int(e), int(s)] for e, s in path], "fidelity": fidelity(gauged, direct),
           "attempts": rec.attempts, "outcomes": [int(o) for o in rec.outcomes]}
    for tag, st in (("gauged", gauged), ("direct", direct)):
        out[f"{tag}_PPhi"] = [expect(st, lambda s, p=p: model.apply_tube(s, p, PF)) for p in (p0, pn)]
        out[f"{tag}_bulk_Bp"] = [expect(st, lambda s, q=q: model.apply_Bp(s, q, level=2))
                                 for q in range(L.n_plaquettes) if q not in (p0, pn)]
        out[f"{tag}_vertices_ok"] = model.all_vertices_ok(st)
    return out
