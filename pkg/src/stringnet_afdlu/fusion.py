"""Multiplicity-free fusion categories with nested Abelian gradings.

F-symbols follow the convention ``[F^{abc}_d]_{ef}`` mapping the basis where
``a`` and ``b`` fuse first to ``e`` onto the basis where ``b`` and ``c`` fuse
first to ``f``.  The pentagon equation is checked in the form

    [F^{fcd}_e]_{gl} [F^{abl}_e]_{fk} = sum_h [F^{abc}_g]_{fh} [F^{ahd}_e]_{gk} [F^{bcd}_k]_{hl}
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .groups import AbelianGroup, make_cyclic

DEFAULT_TOL = 1e-10


@dataclass
class GradingLevel:
    objects: tuple[int, ...]
    group: AbelianGroup
    grade: dict[int, int]  # object -> group element

    def sector(self, g: int) -> tuple[int, ...]:
        return tuple(a for a in self.objects if self.grade[a] == g)


@dataclass
class FusionCategory:
    names: list[str]
    dual: np.ndarray
    N: np.ndarray
    qdim: np.ndarray
    fsym: dict = field(default_factory=dict)
    series: list[GradingLevel] = field(default_factory=list)
    name: str = ""

    def __post_init__(self):
        self.dual = np.asarray(self.dual, dtype=np.int64)
        self.N = np.asarray(self.N, dtype=np.int64)
        self.qdim = np.asarray(self.qdim, dtype=float)
        n = self.rank
        if self.N.shape != (n, n, n):
            raise ValueError("fusion table has wrong shape")
        if self.N.min() < 0 or self.N.max() > 1:
            raise ValueError("only multiplicity-free categories are supported")
        self.fusion_out = [[tuple(np.nonzero(self.N[a, b])[0]) for b in range(n)] for a in range(n)]
        self._F = np.zeros((n,) * 6, dtype=complex)
        for key, val in self.fsym.items():
            self._F[key] = val

    # basic data
    @property
    def rank(self) -> int:
        return len(self.names)

    @property
    def unit(self) -> int:
        return 0

    @property
    def total_dim_sq(self) -> float:
        return float(np.sum(self.qdim ** 2))

    def index(self, name: str) -> int:
        return self.names.index(name)

    def admissible(self, a: int, b: int, c: int) -> bool:
        return bool(self.N[a, b, c])

    def F(self, a, b, c, d, e, f) -> complex:
        return self._F[a, b, c, d, e, f]

    @property
    def Farray(self) -> np.ndarray:
        return self._F

    def F_admissible(self, a, b, c, d, e, f) -> bool:
        N = self.N
        return bool(N[a, b, e] and N[e, c, d] and N[b, c, f] and N[a, f, d])

    def admissible_tuples(self):
        n = self.rank
        for a, b, c in product(range(n), repeat=3):
            for e in self.fusion_out[a][b]:
                for d in self.fusion_out[e][c]:
                    for f in self.fusion_out[b][c]:
                        if self.N[a, f, d]:
                            yield a, b, c, d, e, f

    def F_matrix(self, a, b, c, d):
        es = [e for e in self.fusion_out[a][b] if self.N[e, c, d]]
        fs = [f for f in self.fusion_out[b][c] if self.N[a, f, d]]
        M = np.array([[self._F[a, b, c, d, e, f] for f in fs] for e in es], dtype=complex)
        return es, fs, M

    # grading helpers
    @property
    def top(self) -> GradingLevel:
        return self.series[-1]

    def grading(self, a: int, level: int | None = None) -> int:
        lev = self.series[-1 if level is None else level]
        return lev.grade[a]

    def level_dim_sq(self, level: int) -> float:
        """Total dimension squared of the trivial sector of ``level`` (i.e. of level-1)."""
        lev = self.series[level]
        return float(sum(self.qdim[a] ** 2 for a in lev.sector(lev.group.identity)))

    def checksum(self) -> str:
        return hashlib.sha256(json.dumps(to_dict(self), sort_keys=True).encode()).hexdigest()[:16]

    def __repr__(self):
        return f"FusionCategory({self.name or self.names})"


# ---------------------------------------------------------------- checks

def pentagon_check(C: FusionCategory, tol: float = DEFAULT_TOL) -> dict:
    F = C.Farray
    N = C.N
    out = C.fusion_out
    n = C.rank
    worst = 0.0
    violations = []
    structural = []
    for key in C.admissible_tuples():
        if key not in C.fsym and abs(F[key]) == 0:
            structural.append(key)
    for a, b, c, d in product(range(n), repeat=4):
        for f in out[a][b]:
            for g in out[f][c]:
                for e in out[g][d]:
                    for l in out[c][d]:
                        if not N[f, l, e]:
                            continue
                        for k in out[b][l]:
                            if not N[a, k, e]:
                                continue
                            lhs = F[f, c, d, e, g, l] * F[a, b, l, e, f, k]
                            rhs = 0j
                            for h in out[b][c]:
                                if N[a, h, g] and N[h, d, k]:
                                    rhs += F[a, b, c, g, f, h] * F[a, h, d, e, g, k] * F[b, c, d, k, h, l]
                            r = abs(lhs - rhs)
                            worst = max(worst, r)
                            if r > tol:
                                violations.append(((a, b, c, d, e, f, g, k, l), r))
    return {"max_residual": worst, "violations": violations, "structural": structural}


def unitarity_residual(C: FusionCategory) -> float:
    worst = 0.0
    n = C.rank
    for a, b, c, d in product(range(n), repeat=4):
        es, fs, M = C.F_matrix(a, b, c, d)
        if not es:
            continue
        if len(es) != len(fs):
            return np.inf
        worst = max(worst, float(np.abs(M @ M.conj().T - np.eye(len(es))).max()))
    return worst


def dimension_residual(C: FusionCategory) -> float:
    d = C.qdim
    lhs = np.einsum("abc,c->ab", C.N, d)
    return float(np.abs(lhs - np.outer(d, d)).max())


def verify_grading(C: FusionCategory, diagnostics: list | None = None) -> bool:
    diag = [] if diagnostics is None else diagnostics
    if not C.series:
        diag.append("no grading series")
        return False
    if tuple(C.series[0].objects) != (C.unit,):
        diag.append("level 0 must be the unit object alone")
    if set(C.series[-1].objects) != set(range(C.rank)):
        diag.append("top level does not contain every object")
    for i, lev in enumerate(C.series):
        G = lev.group
        objs = set(lev.objects)
        for a in objs:
            if C.dual[a] not in objs or lev.grade[C.dual[a]] != G.inv[lev.grade[a]]:
                diag.append(f"level {i}: dual of {C.names[a]} in wrong sector")
            for b in objs:
                for c in C.fusion_out[a][b]:
                    if c not in objs:
                        diag.append(f"level {i}: {C.names[a]}x{C.names[b]} leaves the level")
                    elif lev.grade[c] != G.mul[lev.grade[a], lev.grade[b]]:
                        diag.append(f"level {i}: {C.names[a]}x{C.names[b]}->{C.names[c]} breaks grading")
        if i > 0:
            trivial = set(lev.sector(G.identity))
            if trivial != set(C.series[i - 1].objects):
                diag.append(f"level {i}: trivial sector differs from level {i - 1}")
    return not diag


def nilpotency_class(C: FusionCategory) -> int:
    return sum(1 for lev in C.series[1:] if lev.group.order > 1)


def validate(C: FusionCategory, tol: float = DEFAULT_TOL) -> None:
    """Raise ``ValueError`` if any category invariant fails."""
    if not np.all(C.qdim > 0):
        raise ValueError("quantum dimensions must be positive")
    if dimension_residual(C) > tol:
        raise ValueError("fusion rules inconsistent with quantum dimensions")
    for a in range(C.rank):
        if not C.N[a, C.dual[a], C.unit]:
            raise ValueError(f"dual of {C.names[a]} is wrong")
    rep = pentagon_check(C, tol)
    if rep["structural"]:
        raise ValueError(f"missing F entries, e.g. {rep['structural'][0]}")
    if rep["violations"]:
        raise ValueError(f"pentagon residual {rep['max_residual']:.3g} above tolerance")
    if unitarity_residual(C) > tol:
        raise ValueError("F-matrices are not unitary")
    diag: list = []
    if not verify_grading(C, diag):
        raise ValueError("; ".join(diag))


# ---------------------------------------------------------------- builtins

def _fill_default(N, fsym):
    n = N.shape[0]
    for a, b, c in product(range(n), repeat=3):
        for e in np.nonzero(N[a, b])[0]:
            for d in np.nonzero(N[e, c])[0]:
                for f in np.nonzero(N[b, c])[0]:
                    if N[a, f, d]:
                        fsym.setdefault((a, b, c, int(d), int(e), int(f)), 1.0 + 0j)
    return fsym


def _level(objects, group, grade):
    return GradingLevel(tuple(objects), group, dict(grade))


def vec_zn(n: int) -> FusionCategory:
    N = np.zeros((n, n, n), dtype=np.int64)
    for a, b in product(range(n), repeat=2):
        N[a, b, (a + b) % n] = 1
    G = make_cyclic(n)
    series = [_level([0], make_cyclic(1), {0: 0}), _level(range(n), G, {a: a for a in range(n)})]
    return FusionCategory([str(a) for a in range(n)], [(-a) % n for a in range(n)], N,
                          np.ones(n), _fill_default(N, {}), series, name=f"vec_z{n}")


def ising() -> FusionCategory:
    one, psi, sig = 0, 1, 2
    N = np.zeros((3, 3, 3), dtype=np.int64)
    for a in range(3):
        N[one, a, a] = N[a, one, a] = 1
    N[psi, psi, one] = 1
    N[psi, sig, sig] = N[sig, psi, sig] = 1
    N[sig, sig, one] = N[sig, sig, psi] = 1
    r = 1 / np.sqrt(2)
    fsym = {
        (sig, sig, sig, sig, one, one): r, (sig, sig, sig, sig, one, psi): r,
        (sig, sig, sig, sig, psi, one): r, (sig, sig, sig, sig, psi, psi): -r,
        (psi, sig, psi, sig, sig, sig): -1, (sig, psi, sig, psi, sig, sig): -1,
    }
    _fill_default(N, fsym)
    Z2 = make_cyclic(2)
    series = [
        _level([one], make_cyclic(1), {one: 0}),
        _level([one, psi], Z2, {one: 0, psi: 1}),
        _level([one, psi, sig], Z2, {one: 0, psi: 0, sig: 1}),
    ]
    return FusionCategory(["1", "psi", "sigma"], [0, 1, 2], N, [1, 1, np.sqrt(2)],
                          fsym, series, name="ising")


def ty_z3() -> FusionCategory:
    sig = 3
    w = np.exp(2j * np.pi / 3)
    N = np.zeros((4, 4, 4), dtype=np.int64)
    for a, b in product(range(3), repeat=2):
        N[a, b, (a + b) % 3] = 1
    for a in range(3):
        N[a, sig, sig] = N[sig, a, sig] = 1
        N[sig, sig, a] = 1
    fsym = {}
    for a, b in product(range(3), repeat=2):
        fsym[(a, sig, b, sig, sig, sig)] = w ** (a * b)
        fsym[(sig, a, sig, b, sig, sig)] = w ** (a * b)
        fsym[(sig, sig, sig, sig, a, b)] = w ** (-a * b) / np.sqrt(3)
    _fill_default(N, fsym)
    series = [
        _level([0], make_cyclic(1), {0: 0}),
        _level([0, 1, 2], make_cyclic(3), {0: 0, 1: 1, 2: 2}),
        _level([0, 1, 2, sig], make_cyclic(2), {0: 0, 1: 0, 2: 0, sig: 1}),
    ]
    return FusionCategory(["0", "1", "2", "sigma"], [0, 2, 1, 3], N,
                          [1, 1, 1, np.sqrt(3)], fsym, series, name="ty_z3")


def builtin(name: str) -> FusionCategory:
    """Look up a built-in category: ``ising``, ``ty_z3`` or ``vec_zN`` / ``vec_zn(N)``."""
    key = name.strip().lower()
    if key == "ising":
        return ising()
    if key in ("ty_z3", "ty"):
        return ty_z3()
    for prefix in ("vec_zn(", "vec_z"):
        if key.startswith(prefix):
            digits = key[len(prefix):].rstrip(")")
            if digits.isdigit() and int(digits) >= 1:
                return vec_zn(int(digits))
    raise ValueError(f"unknown category {name!r}")


# ---------------------------------------------------------------- file format

def to_dict(C: FusionCategory) -> dict:
    fusion = [[int(a), int(b), int(c)] for a, b, c in zip(*np.nonzero(C.N))]
    F = [[*map(int, k), float(np.real(v)), float(np.imag(v))]
         for k, v in sorted(C.fsym.items()) if abs(v) > 0]
    series = [{"objects": list(map(int, lev.objects)), "group_order": lev.group.order,
               "grade": {str(a): int(g) for a, g in lev.grade.items()}} for lev in C.series]
    return {"name": C.name, "objects": list(C.names), "duals": C.dual.tolist(),
            "qdims": C.qdim.tolist(), "fusion": fusion, "F": F, "series": series}


def from_dict(data: dict, tol: float = DEFAULT_TOL) -> FusionCategory:
    names = list(data["objects"])
    n = len(names)
    N = np.zeros((n, n, n), dtype=np.int64)
    for a, b, c in data["fusion"]:
        N[a, b, c] = 1
    fsym = {tuple(int(x) for x in row[:6]): complex(row[6], row[7]) for row in data["F"]}
    series = [_level(lev["objects"], make_cyclic(int(lev["group_order"])),
                     {int(a): int(g) for a, g in lev["grade"].items()}) for lev in data["series"]]
    C = FusionCategory(names, data["duals"], N, data["qdims"], fsym, series, name=data.get("name", ""))
    validate(C, tol)
    return C


def load(path: str, tol: float = DEFAULT_TOL) -> FusionCategory:
    with open(path) as fh:
        return from_dict(json.load(fh), tol)


def save(C: FusionCategory, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(to_dict(C), fh, indent=1)
