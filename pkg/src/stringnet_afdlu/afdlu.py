"""Sequential gauging: controlled plaquette operators, character-basis
measurement, and feedforward with character strings."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .fusion import FusionCategory, verify_grading
from .groups import AbelianGroup, Character, characters
from .lattice import HoneycombTorus
from .state import MeasurementRecord, SparseState, fourier_basis, measure_register
from .stringnet import StringNet


class ProtocolViolation(RuntimeError):
    """Measurement outcomes inconsistent with a symmetric input.

    ``record`` holds the measurement record of the round that failed.
    """

    def __init__(self, msg: str, record=None):
        super().__init__(msg)
        self.record = record


@dataclass
class GaugingRound:
    level: int
    group: AbelianGroup
    ancillas: list = field(default_factory=list)

    @property
    def basis(self) -> np.ndarray:
        return fourier_basis(self.group.order)


@dataclass
class ProtocolTranscript:
    category: str
    lx: int
    ly: int
    seed: int | None
    rounds: list = field(default_factory=list)
    checksum: str = ""
    discarded: list = field(default_factory=list)   # records of restarted attempts

    @property
    def attempts(self) -> int:
        return len(self.discarded) + 1

    def to_dict(self) -> dict:
        return {"category": self.category, "lattice": [self.lx, self.ly], "seed": self.seed,
                "attempts": self.attempts, "discarded": [r.to_dict() for r in self.discarded],
                "rounds": [r.to_dict() for r in self.rounds], "final_state_checksum": self.checksum}


def state_checksum(state: SparseState, digits: int = 10) -> str:
    """Hash of the support and amplitudes rounded to ``digits`` decimals, up to global phase."""
    amps = state.amps
    if len(amps):
        i = int(np.argmax(np.abs(amps) > np.abs(amps).max() - 1e-9))
        amps = amps * np.exp(-1j * np.angle(amps[i])) / state.norm()
    h = hashlib.sha256(state.keys.tobytes())
    # adding 0.0 folds -0.0 into 0.0 so the bytes are sign-stable
    h.update((np.round(amps.real, digits) + 0.0).tobytes())
    h.update((np.round(amps.imag, digits) + 0.0).tobytes())
    return h.hexdigest()[:16]


def attach_ancillas(state: SparseState, lattice: HoneycombTorus, group: AbelianGroup, prefix="a") -> tuple[SparseState, list]:
    """One |+> ancilla per plaquette, appended after the existing registers."""
    n = group.order
    plus = np.ones(n) / np.sqrt(n)
    start = state.n_registers
    st = state
    for p in range(lattice.n_plaquettes):
        st = st.add_registers([n], plus, [f"{prefix}{p}"])
    return st, list(range(start, start + lattice.n_plaquettes))


def controlled_coeffs(model: StringNet, level: int, g: int, extend: bool = True,
                      representative: bool = False) -> dict:
    """Plaquette-operator coefficients applied when the ancilla holds ``g``.

    ``extend`` adds the identity on the complement of the level's trivial
    sector projector, which makes the controlled operator unitary.
    ``representative`` uses a single object ``B^s / d_s`` of sector g; it agrees
    with the full sum on states already in the trivial-sector +1 eigenspace.
    """
    C = model.C
    if representative:
        s = model.C.series[level].sector(g)[0]
        coeffs = {s: 1.0 / C.qdim[s]}
    else:
        coeffs = dict(model.graded_coeffs(level, g))
    if extend:
        e = C.series[level].group.identity
        for a, c in model.graded_coeffs(level, e).items():
            coeffs[a] = coeffs.get(a, 0) - c
        coeffs[C.unit] = coeffs.get(C.unit, 0) + 1.0
    return coeffs


def extended_wall_coeffs(model: StringNet, walls: dict, g: int) -> dict:
    """Tube combination ``W^g - W^e + 1`` for domain-wall operators ``walls``."""
    e = min(walls)
    out = dict(walls[g])
    for k, c in walls[e].items():
        out[k] = out.get(k, 0) - c
    for r in range(model.C.rank):
        k = (model.C.unit, r, r, r)
        out[k] = out.get(k, 0) + 1.0
    return {k: c for k, c in out.items() if abs(c) > 1e-15}


def _controlled_kernels(model: StringNet, p: int, level: int, walls=None, extend=True, representative=False):
    G = model.C.series[level].group
    if walls is None:
        return [model._ring_kernel(p, model._weights(controlled_coeffs(model, level, g, extend, representative)))
                for g in G.elements]
    kerns = []
    for g in G.elements:
        combo = extended_wall_coeffs(model, walls, g) if extend else walls[g]
        items = tuple(sorted(((tuple(int(v) for v in k), complex(c)) for k, c in combo.items()),
                             key=lambda t: t[0]))
        kerns.append(model._tube_kernel(p, items))
    return kerns


def controlled_Bp(model: StringNet, state: SparseState, p: int, ancilla: int, level: int,
                  extend: bool = True, representative: bool = False, walls: dict | None = None) -> SparseState:
    """Apply sum_g |g><g| (x) B_p^g with the ancilla register as control.

    On a tailed plaquette pass ``walls``: a map from group element to the
    tube combination of the domain-wall operator for the anyon held there.
    """
    if ancilla >= state.n_registers:
        raise ValueError("ancilla register missing")
    G = model.C.series[level].group
    if int(state.dims[ancilla]) != G.order:
        raise ValueError("ancilla alphabet does not match the grading group")
    kern = _controlled_kernels(model, p, level, walls, extend, representative)

    def fn(local):
        g = local[0]
        return [((g,) + y, c) for y, c in kern[g](local[1:])]
    return state.apply_local([ancilla] + model.plaquette_support(p), fn)


def set_entangler(model: StringNet, state: SparseState, level: int, **kw) -> tuple[SparseState, list]:
    """Attach |+> ancillas and apply every controlled plaquette operator."""
    G = model.C.series[level].group
    st, anc = attach_ancillas(state, model.lattice, G)
    for p, a in enumerate(anc):
        st = controlled_Bp(model, st, p, a, level, **kw)
    return st, anc


def global_symmetry(state: SparseState, ancillas, group: AbelianGroup, g: int) -> SparseState:
    """Left-multiply every ancilla label by ``g``."""
    shift = np.zeros((group.order, group.order))
    for h in group.elements:
        shift[group.mul[g, h], h] = 1.0
    st = state
    for a in ancillas:
        st = st.apply_local([a], shift)
    return st


def pair_charges(lattice: HoneycombTorus, charges: dict, group: AbelianGroup) -> list:
    """Greedy nearest-neighbour pairing of plaquette charges.

    ``charges`` maps plaquette -> character index (0 = trivial).  Returns a list
    of ``(p, q, character index)``: a string that moves the charge from p onto q.
    """
    chars = characters(group)
    mult = {}
    for a in chars:
        for b in chars:
            mult[a.index, b.index] = next(c.index for c in chars if np.allclose(c.values, a.values * b.values))
    todo = {p: c for p, c in charges.items() if c != 0}
    moves = []
    while todo:
        p = min(todo)
        c = todo.pop(p)
        if not todo:
            raise ProtocolViolation("unpaired plaquette charge")
        q = min(todo, key=lambda r: (lattice.plaquette_distance(p, r), r))
        moves.append((p, q, c))
        merged = mult[todo[q], c]
        if merged == 0:
            todo.pop(q)
        else:
            todo[q] = merged
    return moves


def _conj_index(group: AbelianGroup, k: int) -> int:
    chars = characters(group)
    return next(c.index for c in chars if np.allclose(c.values, np.conj(chars[k].values)))


def measure_plaquette(model: StringNet, state: SparseState, p: int, level: int, rng, basis=None,
                      walls: dict | None = None, **kw) -> tuple[int, SparseState, float]:
    """Attach a |+> ancilla to p, apply the controlled operator, measure it.

    The ancilla is never materialized: contracting it with basis vector k
    leaves ``n^{-1/2} sum_g conj(basis[g, k]) B^g_p`` acting on the state,
    which is exactly what ``measure_register`` on an explicit ancilla gives.
    """
    G = model.C.series[level].group
    n = G.order
    basis = fourier_basis(n) if basis is None else np.asarray(basis, dtype=complex)
    kerns = _controlled_kernels(model, p, level, walls, kw.get("extend", True), kw.get("representative", False))
    sup = model.plaquette_support(p)
    images = [state.apply_local(sup, kerns[g]) for g in G.elements]
    nrm = state.norm()
    if nrm == 0:
        raise ValueError("cannot measure the zero state")
    branches = []
    for k in range(n):
        b = images[0] * (np.conj(basis[0, k]) / np.sqrt(n))
        for g in range(1, n):
            b = b + images[g] * (np.conj(basis[g, k]) / np.sqrt(n))
        branches.append(b)
    probs = np.clip(np.array([b.norm() ** 2 for b in branches]) / nrm ** 2, 0, None)
    probs /= probs.sum()
    k = int(rng.choice(n, p=probs))
    return k, branches[k].normalized(), float(probs[k])


def kw_round(model: StringNet, state: SparseState, level: int, rng, round_index: int | None = None,
             seed: int | None = None, walls: dict | None = None, **kw) -> tuple[SparseState, MeasurementRecord]:
    """One gauging round at ``level``: entangle, measure characters, correct.

    The controlled operators on different plaquettes commute and each
    measurement touches only its own ancilla, so plaquettes are entangled
    and measured one at a time (see ``measure_plaquette``).  ``walls`` maps
    tailed plaquettes to domain-wall operators.
    """
    G = model.C.series[level].group
    rnd = GaugingRound(level, G)
    rec = MeasurementRecord(round=level if round_index is None else round_index, seed=seed)
    walls = walls or {}
    charges = {}
    st = state
    for p in range(model.lattice.n_plaquettes):
        k, st, prob = measure_plaquette(model, st, p, level, rng, rnd.basis, walls.get(p), **kw)
        rec.registers.append(f"a{p}")
        rec.outcomes.append(k)
        rec.probabilities.append(prob)
        # outcome k leaves the plaquette in the charge sector conj(chi_k)
        charges[p] = _conj_index(G, k)
    chars = characters(G)
    try:
        moves = pair_charges(model.lattice, charges, G)
    except ProtocolViolation as exc:
        raise ProtocolViolation(str(exc), rec) from None
    for p, q, c in moves:
        path = model.lattice.dual_path(p, q)
        st = model.apply_char_string(st, chars[c], path, level)
        rec.corrections.append({"from": p, "to": q, "character": c, "edges": [int(e) for e, _ in path]})
    return st.normalized(), rec


def prepare(C: FusionCategory, lattice: HoneycombTorus, seed: int | None = None, max_attempts: int = 64,
            **kw) -> tuple[SparseState, ProtocolTranscript]:
    """Run every gauging round of the grading series starting from the vacuum.

    On a torus a round can end with a single unpaired charge: the previous
    level's ground state overlaps the sector holding one flux through the
    torus.  No string can remove it, so the run restarts from the vacuum
    (the random stream continues) and the failed round is kept in
    ``transcript.discarded``.
    """
    if not C.series or not verify_grading(C):
        raise ValueError("category needs a valid grading series")
    model = StringNet(C, lattice)
    rng = np.random.default_rng(seed)
    tr = ProtocolTranscript(C.name, lattice.lx, lattice.ly, seed)
    for _ in range(max_attempts):
        st = model.vacuum()
        tr.rounds = []
        try:
            for level in range(1, len(C.series)):
                st, rec = kw_round(model, st, level, rng, seed=seed, **kw)
                tr.rounds.append(rec)
        except ProtocolViolation as exc:
            tr.discarded.append(exc.record)
            continue
        tr.checksum = state_checksum(st)
        return st, tr
    raise ProtocolViolation(f"no symmetric branch after {max_attempts} attempts")
