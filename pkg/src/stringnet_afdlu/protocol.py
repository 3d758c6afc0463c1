"""Label-level Monte Carlo of long-range string operators built from
finite-depth rounds of pair creation, fusion measurement and feedforward.

No state vectors appear here: anyons are labels, fusion outcomes are sampled
with the Born weight ``N_ab^c d_c / (d_a d_b)``, and grading levels decide
which residual charges still need another round.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .groups import AbelianGroup, direct_product, make_cyclic

DATA_DIR = os.path.join(os.path.dirname(__file__), "data", "theories")


@dataclass
class TheoryLevel:
    labels: tuple[int, ...]
    group: AbelianGroup
    grade: dict[int, int]


@dataclass
class AnyonTheory:
    """Fusion data of an anyon theory without F- or R-symbols.

    ``series`` lists nested levels from the vacuum up; each level is graded
    by an Abelian group whose trivial sector is the previous level.
    ``condensation`` optionally maps labels to ``[(descendant, weight)]`` in
    the theory ``child`` obtained by condensing.
    """

    name: str
    labels: list[str]
    dual: np.ndarray
    N: np.ndarray
    dims: np.ndarray
    series: list[TheoryLevel] = field(default_factory=list)
    condensation: dict = field(default_factory=dict)
    child: "AnyonTheory | None" = None

    def __post_init__(self):
        self.dual = np.asarray(self.dual, dtype=np.int64)
        self.N = np.asarray(self.N, dtype=np.int64)
        self.dims = np.asarray(self.dims, dtype=float)
        n = len(self.labels)
        if self.N.shape != (n, n, n):
            raise ValueError("fusion table has wrong shape")
        lhs = np.einsum("abc,c->ab", self.N, self.dims)
        if np.abs(lhs - np.outer(self.dims, self.dims)).max() > 1e-9:
            raise ValueError("fusion rules inconsistent with dimensions")
        for a, ws in self.condensation.items():
            if abs(sum(w for _, w in ws) - 1) > 1e-9:
                raise ValueError(f"branching weights of {self.labels[a]} are not normalized")
        diag: list = []
        if self.series and not self._grading_ok(diag):
            raise ValueError("; ".join(diag))

    @property
    def rank(self) -> int:
        return len(self.labels)

    @property
    def unit(self) -> int:
        return 0

    def index(self, name: str) -> int:
        return self.labels.index(name)

    def outcomes(self, a: int, b: int) -> np.ndarray:
        return np.nonzero(self.N[a, b])[0]

    def probabilities(self, a: int, b: int) -> dict[int, float]:
        d = self.dims
        return {int(c): float(self.N[a, b, c] * d[c] / (d[a] * d[b])) for c in self.outcomes(a, b)}

    def is_invertible(self, a: int) -> bool:
        return abs(self.dims[a] - 1) < 1e-12

    def _grading_ok(self, diag: list) -> bool:
        if tuple(self.series[0].labels) != (self.unit,):
            diag.append("level 0 must be the vacuum alone")
        for i, lev in enumerate(self.series):
            G, objs = lev.group, set(lev.labels)
            for a, b in product(objs, repeat=2):
                for c in self.outcomes(a, b):
                    if c not in objs:
                        diag.append(f"level {i}: {self.labels[a]}x{self.labels[b]} leaves the level")
                    elif lev.grade[int(c)] != G.mul[lev.grade[a], lev.grade[b]]:
                        diag.append(f"level {i}: grading broken by {self.labels[a]}x{self.labels[b]}")
            if i > 0:
                triv = {a for a in lev.labels if lev.grade[a] == G.identity}
                if triv != set(self.series[i - 1].labels):
                    diag.append(f"level {i}: trivial sector differs from level {i - 1}")
        return not diag

    def is_nilpotent(self) -> bool:
        return bool(self.series) and set(self.series[-1].labels) == set(range(self.rank))

    def level_of(self, a: int) -> int:
        for i, lev in enumerate(self.series):
            if a in lev.labels:
                return i
        raise ValueError(f"{self.labels[a]} is not covered by the grading series")

    def grade(self, a: int, level: int) -> tuple:
        lev = self.series[level]
        return lev.group.labels[lev.grade[a]]


def fuse_sample(theory: AnyonTheory, a: int, b: int, rng) -> int:
    """Sample the fusion channel of a and b with weight N d_c / (d_a d_b)."""
    probs = theory.probabilities(a, b)
    cs = list(probs)
    return int(cs[rng.choice(len(cs), p=np.array([probs[c] for c in cs]))])


# transcripts -------------------------------------------------------------

@dataclass
class FusionTranscript:
    theory: str
    anyon: str
    length: int
    rounds: list = field(default_factory=list)
    far_end: str = ""
    termination_round: int = 0
    condensation_rounds: int = 0

    def to_dict(self) -> dict:
        return {"theory": self.theory, "anyon": self.anyon, "length": self.length, "rounds": self.rounds,
                "far_end": self.far_end, "termination_round": self.termination_round,
                "condensation_rounds": self.condensation_rounds}


def _string_round(theory: AnyonTheory, a: int, start: int, end: int, rng) -> tuple[list, list]:
    """One sequential-fusion string of a from ``start`` to ``end``.

    Pairs (a-bar, a) are created on every unit step; each a is fused with
    the next a-bar.  Returns the fused records and the non-vacuum residuals
    as ``(position, label)``.
    """
    rec, residual = [], []
    ab = int(theory.dual[a])
    for pos in range(start + 1, end):
        c = fuse_sample(theory, a, ab, rng)
        rec.append({"position": pos, "pair": [theory.labels[a], theory.labels[ab]], "outcome": theory.labels[c]})
        if c != theory.unit:
            residual.append((pos, c))
    return rec, residual


def _absorb(theory: AnyonTheory, far: int, b: int) -> int:
    """Fuse a transported residual into the far end.

    The residuals of a string of a together with its far end always carry
    total charge a (every created pair is neutral), so the far end keeps its
    label; the channel is checked for admissibility.
    """
    if not theory.N[b, far, far]:
        raise RuntimeError(f"residual {theory.labels[b]} cannot fuse into {theory.labels[far]}")
    return far


def nilpotent_string_sim(theory: AnyonTheory, a: int | str, n: int, rng) -> FusionTranscript:
    """Create an (a-bar, a) pair a distance n apart by sequential fusion.

    Round 1 runs the string of a.  Every later round transports the
    residuals of the previous one to the far end: invertible residuals move
    by a unitary string, others by their own sequential-fusion string, whose
    residuals sit one grading level lower.
    """
    if not theory.is_nilpotent():
        raise ValueError(f"theory {theory.name} is not nilpotent")
    if isinstance(a, str):
        a = theory.index(a)
    if n < 1:
        raise ValueError("string length must be positive")
    tr = FusionTranscript(theory.name, theory.labels[a], n)
    far = a
    if theory.is_invertible(a):
        tr.rounds.append({"round": 1, "fused": [], "residuals": [], "level": theory.level_of(a)})
        tr.far_end, tr.termination_round = theory.labels[far], 1
        return tr
    fused, pending = _string_round(theory, a, 0, n, rng)
    tr.rounds.append({"round": 1, "fused": fused, "level": theory.level_of(a),
                      "residuals": [[p, theory.labels[c], list(theory.grade(c, theory.level_of(a)))]
                                    for p, c in pending]})
    rnd = 1
    while pending:
        rnd += 1
        nxt, fused = [], []
        for pos, b in pending:
            if not theory.is_invertible(b):
                f, res = _string_round(theory, b, pos, n, rng)
                fused += f
                nxt += res
            far = _absorb(theory, far, b)
        tr.rounds.append({"round": rnd, "fused": fused, "transported": [theory.labels[b] for _, b in pending],
                          "residuals": [[p, theory.labels[c]] for p, c in nxt]})
        pending = nxt
    tr.far_end, tr.termination_round = theory.labels[far], rnd
    return tr


def run_trials(fn, trials: int, seed: int = 0, threads: int = 1) -> list:
    """``[fn(rng_t) for t in range(trials)]`` with rng_t seeded by (seed, t).

    Each trial owns its stream, so the result does not depend on ``threads``.
    """
    def one(t):
        return fn(np.random.default_rng([seed, t]))
    if threads <= 1:
        return [one(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(one, range(trials)))


def naive_cyclic_sim(theory: AnyonTheory, a: int | str, D: int, trials: int, seed: int = 0,
                     p_cyclic: float | None = None, threads: int = 1) -> np.ndarray:
    """Success curve of the naive strategy for a cyclic anyon.

    Each round fuses the residual pair; the round fails when the outcome is
    a again (a appears in a x a-bar) and succeeds otherwise.  Returns
    ``curve[d-1] = P(success within d rounds)`` for d = 1..D.  ``p_cyclic``
    overrides the probability of the cyclic outcome.
    """
    if isinstance(a, str):
        a = theory.index(a)
    ab = int(theory.dual[a])
    if not theory.N[a, ab, a] or theory.is_invertible(a):
        raise ValueError(f"{theory.labels[a]} is not cyclic")
    if D < 0:
        raise ValueError("depth must be non-negative")

    def trial(rng):
        for d in range(1, D + 1):
            if p_cyclic is None:
                cyc = fuse_sample(theory, a, ab, rng) == a
            else:
                cyc = rng.random() < p_cyclic
            if not cyc:
                return d
        return D + 1
    first = np.array(run_trials(trial, trials, seed, threads))
    return np.array([(first <= d).mean() for d in range(1, D + 1)])


def solvable_string_sim(theory: AnyonTheory, a: int | str, n: int, rng) -> FusionTranscript:
    """Sequential condensation for theories with condensation maps.

    Each condensation round maps the pair onto the child theory: the
    endpoint a branches to a descendant with the stored weight (its partner
    to the dual descendant), then the child string runs.  Without a
    condensation map this is ``nilpotent_string_sim``.  After the child
    string, regauging restores the parent labels at the endpoints.
    """
    if isinstance(a, str):
        a = theory.index(a)
    if theory.child is None or not theory.condensation:
        tr = nilpotent_string_sim(theory, a, n, rng)
        return tr
    desc = theory.condensation.get(a)
    if not desc:
        raise ValueError(f"no condensation data for {theory.labels[a]}")
    child = theory.child
    ws = np.array([w for _, w in desc])
    pick = desc[int(rng.choice(len(desc), p=ws))][0]
    b = child.index(pick) if isinstance(pick, str) else int(pick)
    inner = solvable_string_sim(child, b, n, rng)
    tr = FusionTranscript(theory.name, theory.labels[a], n)
    tr.rounds = [{"round": 0, "condensed": theory.labels[a], "branch": child.labels[b]}] + inner.rounds
    if inner.far_end != child.labels[b]:
        raise RuntimeError("child string ended with the wrong label")
    tr.far_end = theory.labels[a]
    tr.termination_round = inner.termination_round
    tr.condensation_rounds = inner.condensation_rounds + 1
    return tr


# builtin theories ----------------------------------------------------------

def _trivial_level() -> TheoryLevel:
    return TheoryLevel((0,), make_cyclic(1), {0: 0})


def abelian_dz(n: int) -> AnyonTheory:
    """Quantum double of Z_n: labels e^a m^b stored at index a*n + b."""
    labels = [f"e{a}m{b}" for a in range(n) for b in range(n)]
    labels[0] = "1"
    idx = lambda a, b: (a % n) * n + (b % n)
    N = np.zeros((n * n,) * 3, dtype=np.int64)
    for a, b, c, d in product(range(n), repeat=4):
        N[idx(a, b), idx(c, d), idx(a + c, b + d)] = 1
    dual = [idx(-a, -b) for a in range(n) for b in range(n)]
    G = direct_product(make_cyclic(n), make_cyclic(n))
    top = TheoryLevel(tuple(range(n * n)), G, {i: i for i in range(n * n)})
    return AnyonTheory(f"d_z{n}", labels, dual, N, np.ones(n * n), [_trivial_level(), top])


def doubled_ising() -> AnyonTheory:
    """Ising x conjugate Ising: labels ``a.b`` with a, b in {1, psi, sigma}."""
    names = ["1", "psi", "sigma"]
    d1 = [1.0, 1.0, np.sqrt(2)]
    n1 = np.zeros((3, 3, 3), dtype=np.int64)
    for a in range(3):
        n1[0, a, a] = n1[a, 0, a] = 1
    n1[1, 1, 0] = 1
    n1[1, 2, 2] = n1[2, 1, 2] = 1
    n1[2, 2, 0] = n1[2, 2, 1] = 1
    labels = [f"{x}.{y}" for x in names for y in names]
    labels[0] = "1"
    N = np.einsum("ace,bdf->abcdef", n1, n1).reshape(9, 9, 9)
    dims = np.outer(d1, d1).ravel()
    G = direct_product(make_cyclic(2), make_cyclic(2))
    ab = (0, 1, 3, 4)           # 1, psi x {1, psi}
    g1 = {i: (i // 3) * 2 + (i % 3) for i in ab}
    # top level graded by whether each factor is sigma
    g2 = {i: (2 if i // 3 == 2 else 0) + (1 if i % 3 == 2 else 0) for i in range(9)}
    series = [_trivial_level(), TheoryLevel(ab, G, g1), TheoryLevel(tuple(range(9)), G, g2)]
    return AnyonTheory("doubled_ising", labels, list(range(9)), N, dims, series)


def ty_phi_sector() -> AnyonTheory:
    """The fusion-closed sector {1, z, Phi} of the TY(Z3) center.

    Phi x Phi = 1 + z + Phi, so Phi is cyclic, the grading series stops at
    the vacuum and the sector is not nilpotent.  Condensing the boson z
    lands in the Z3 double, where Phi splits into the dyons e1m2 and e2m1
    with equal weights.
    """
    N = np.zeros((3, 3, 3), dtype=np.int64)
    for a in range(3):
        N[0, a, a] = N[a, 0, a] = 1
    N[1, 1, 0] = 1
    N[1, 2, 2] = N[2, 1, 2] = 1
    N[2, 2, 0] = N[2, 2, 1] = N[2, 2, 2] = 1
    child = abelian_dz(3)
    cond = {0: [("1", 1.0)], 1: [("1", 1.0)], 2: [("e1m2", 0.5), ("e2m1", 0.5)]}
    return AnyonTheory("ty_z3_phi_sector", ["1", "z", "Phi"], [0, 1, 2], N, [1.0, 1.0, 2.0],
                       [_trivial_level()],
                       cond, child)


BUILTIN_THEORIES = {"doubled_ising": doubled_ising, "d_z3": lambda: abelian_dz(3),
                    "d_z2": lambda: abelian_dz(2), "ty_z3_phi_sector": ty_phi_sector}


# file format ---------------------------------------------------------------

def _factor_orders(G: AbelianGroup) -> list[int]:
    if G.order == 1:
        return []
    return [int(max(l[i] for l in G.labels)) + 1 for i in range(len(G.labels[0]))]


def _group_from_orders(orders) -> AbelianGroup:
    G = make_cyclic(1)
    for k, o in enumerate(orders):
        G = make_cyclic(int(o)) if k == 0 else direct_product(G, make_cyclic(int(o)))
    return G


def theory_to_dict(T: AnyonTheory) -> dict:
    out = {"name": T.name, "labels": list(T.labels), "duals": T.dual.tolist(), "dims": T.dims.tolist(),
           "fusion": [[int(a), int(b), int(c)] for a, b, c in zip(*np.nonzero(T.N))],
           "series": [{"labels": list(map(int, lev.labels)), "group": _factor_orders(lev.group),
                       "grade": {str(a): list(lev.group.labels[g]) if lev.group.order > 1 else []
                                 for a, g in lev.grade.items()}} for lev in T.series]}
    if T.child is not None:
        out["condensation"] = {"child": T.child.name,
                               "map": {T.labels[a]: [[d, w] for d, w in ws] for a, ws in T.condensation.items()}}
    return out


def theory_from_dict(data: dict) -> AnyonTheory:
    labels = list(data["labels"])
    n = len(labels)
    N = np.zeros((n, n, n), dtype=np.int64)
    for a, b, c in data["fusion"]:
        N[a, b, c] = 1
    series = []
    for lev in data["series"]:
        G = _group_from_orders(lev["group"])
        where = {tuple(l): i for i, l in enumerate(G.labels)}
        grade = {int(a): (where[tuple(g)] if G.order > 1 else 0) for a, g in lev["grade"].items()}
        series.append(TheoryLevel(tuple(lev["labels"]), G, grade))
    cond, child = {}, None
    if "condensation" in data:
        child = load_theory(data["condensation"]["child"])
        cond = {labels.index(a): [(d, float(w)) for d, w in ws] for a, ws in data["condensation"]["map"].items()}
    return AnyonTheory(data["name"], labels, data["duals"], N, data["dims"], series, cond, child)


def load_theory(name_or_path: str) -> AnyonTheory:
    """Load a theory from a JSON file, or by name from the bundled data."""
    path = name_or_path
    if not os.path.exists(path):
        path = os.path.join(DATA_DIR, f"{name_or_path}.json")
    if not os.path.exists(path):
        if name_or_path in BUILTIN_THEORIES:
            return BUILTIN_THEORIES[name_or_path]()
        raise ValueError(f"unknown theory {name_or_path!r}")
    with open(path) as fh:
        return theory_from_dict(json.load(fh))


def save_theory(T: AnyonTheory, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(theory_to_dict(T), fh, indent=1)
