"""Acceptance battery: one check function per criterion, one PASS/FAIL line each.

Run with pytest (the lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""
from __future__ import annotations

import io
import itertools
import time

import numpy as np
import pytest

from stringnet_afdlu import HoneycombTorus, StringNet, builtin
from stringnet_afdlu import protocol as P
from stringnet_afdlu.afdlu import prepare
from stringnet_afdlu.anyons import phi_string_comparison
from stringnet_afdlu.cli import run
from stringnet_afdlu.fusion import dimension_residual, pentagon_check, unitarity_residual, verify_grading
from stringnet_afdlu.groups import characters
from stringnet_afdlu.oneform import roundtrip
from stringnet_afdlu.oracle import (fidelity, fmove_expand_check, ground_space_dim, plaquette_matrix,
                                    projector_scan, shared_edges, tube_algebra_checks, valid_configurations)

RESULTS: dict[int, tuple[bool, str]] = {}


def _prepare_battery(name, sizes, time_limit):
    worst_pair = worst_direct = worst_proj = slowest = 0.0
    for lx, ly, seed_list in sizes:
        C, L = builtin(name), HoneycombTorus(lx, ly)
        model = StringNet(C, L)
        ref = model.ground_state_direct()
        states = []
        for s in seed_list:
            t = time.perf_counter()
            st, _ = prepare(C, L, seed=s)
            slowest = max(slowest, time.perf_counter() - t)
            states.append(st)
            worst_direct = max(worst_direct, abs(fidelity(st, ref) - 1))
            scan = projector_scan(model, st)
            worst_proj = max(worst_proj, scan["max_Av_deviation"], scan["max_Bp_deviation"])
        for a, b in itertools.combinations(states, 2):
            worst_pair = max(worst_pair, abs(fidelity(a, b) - 1))
    ok = worst_pair <= 1e-8 and worst_direct <= 1e-8 and worst_proj <= 1e-10 and slowest < time_limit
    detail = (f"pairwise {worst_pair:.1e}, vs direct {worst_direct:.1e}, projectors {worst_proj:.1e}, "
              f"slowest run {slowest:.1f}s")
    return ok, detail


def criterion_1():
    return _prepare_battery("ising", [(2, 2, range(20)), (3, 3, range(20))], 60.0)


def criterion_2():
    ok, detail = _prepare_battery("ty_z3", [(2, 2, range(20)), (3, 3, range(3))], 300.0)
    model = StringNet(builtin("ty_z3"), HoneycombTorus(3, 3))
    L = model.lattice
    recs = fmove_expand_check(model, 0)
    for q in range(1, L.n_plaquettes):
        if len(shared_edges(L, 0, q)) == 1:
            for k in (1, 2):
                recs += fmove_expand_check(model, 0, q, k)
    gl = max(abs(r["computed"] - r["predicted"]) for r in recs)
    return ok and gl <= 1e-10, f"{detail}; sigma-loop gluing {gl:.1e} over {len(recs)} amplitudes"


def criterion_3():
    found = {}
    for name, want in (("vec_z3", 9), ("ising", 9), ("ty_z3", 15)):
        found[name] = ground_space_dim(builtin(name), HoneycombTorus(2, 2))
    ok = all(abs(found[n] - w) <= 1e-6 for n, w in (("vec_z3", 9), ("ising", 9), ("ty_z3", 15)))
    return ok, ", ".join(f"{n} {v:.9f}" for n, v in found.items())


def criterion_4():
    """Round-2 charge projectors of Ising as operators and as measurement branches."""
    C, L = builtin("ising"), HoneycombTorus(2, 2)
    model = StringNet(C, L)
    one, psi, sig = C.index("1"), C.index("psi"), C.index("sigma")
    keys = valid_configurations(model)
    chars = characters(C.series[2].group)
    worst = 0.0
    for p in range(L.n_plaquettes):
        B = {a: plaquette_matrix(model, keys, p, {a: 1.0}).toarray() for a in (one, psi, sig)}
        for k, chi in enumerate(chars):
            sign = 1 if k == 0 else -1
            target = (B[one] + B[psi] + sign * np.sqrt(2) * B[sig]) / 4
            proj = plaquette_matrix(model, keys, p, model.charge_projector_coeffs(2, chi)).toarray()
            worst = max(worst, np.abs(proj - target).max())
    # measurement branches on the round-1 ground state
    from stringnet_afdlu.afdlu import measure_plaquette
    from stringnet_afdlu.state import inner
    psi1 = model.ground_state_direct(level=1)
    branch_dev = 0.0
    seen = set()
    for seed in range(12):
        rng = np.random.default_rng(seed)
        p = seed % L.n_plaquettes
        k, post, prob = measure_plaquette(model, psi1, p, 2, rng)
        seen.add(k)
        ref = model.apply_Bp_combo(psi1, p, model.charge_projector_coeffs(2, chars[k]))
        branch_dev = max(branch_dev, abs(ref.norm() ** 2 - prob), abs(abs(inner(ref.normalized(), post)) - 1))
    ok = worst <= 1e-12 and branch_dev <= 1e-12 and seen == {0, 1}
    return ok, f"operator residual {worst:.1e}, branch residual {branch_dev:.1e}, outcomes seen {sorted(seen)}"


def criterion_5():
    cases = 0
    worst = 0.0
    for n in (2, 3):
        C = builtin(f"vec_z{n}")
        L = HoneycombTorus(3, 3)
        model = StringNet(C, L)
        gs = model.ground_state_direct()
        chi = characters(C.series[-1].group)[1]
        regions = [[0], [0, 1], [0, 1, 3], [4, 5, 7], [0, 1, 3, 4]]
        pairs = [None, (0, 4), (1, 8)]
        for i, plaqs in enumerate(regions):
            region = L.region(plaqs)
            for pair in pairs:
                st = gs if pair is None else model.apply_char_string(gs, chi, L.dual_path(*pair))
                rng = np.random.default_rng([n, i, 0 if pair is None else pair[1]])
                out, _, _ = roundtrip(model, st, region, rng)
                worst = max(worst, abs(fidelity(st, out) - 1))
                cases += 1
    return worst <= 1e-10 and cases >= 10, f"{cases} round trips, worst |F-1| {worst:.1e}"


def criterion_6():
    worst_f = worst_p = worst_b = 0.0
    runs = 0
    for p0, pn, seed in ((0, 1, 0), (0, 2, 1), (1, 3, 2), (2, 3, 3)):
        res = phi_string_comparison(2, 2, p0, pn, seed=seed)
        worst_f = max(worst_f, abs(res["fidelity"] - 1))
        worst_p = max(worst_p, max(abs(v - 1) for v in res["gauged_PPhi"] + res["direct_PPhi"]))
        worst_b = max(worst_b, max(abs(v - 1) for v in res["gauged_bulk_Bp"] + res["direct_bulk_Bp"]))
        runs += 1
    ok = worst_f <= 1e-8 and worst_p <= 1e-10 and worst_b <= 1e-10
    return ok, f"{runs} endpoint pairs, |F-1| {worst_f:.1e}, |P^Phi-1| {worst_p:.1e}, bulk |B_p-1| {worst_b:.1e}"


def criterion_7():
    res = tube_algebra_checks(StringNet(builtin("ty_z3"), HoneycombTorus(2, 2)))
    keys = ("P1_idempotent", "P1_selfadjoint", "PPhi_idempotent", "PPhi_selfadjoint", "orthogonal",
            "wall_representation_law")
    worst = max(res[k] for k in keys)
    return worst <= 1e-12, f"worst residual {worst:.1e} over {', '.join(keys)}"


def criterion_8():
    T = P.load_theory("ty_z3_phi_sector")
    D, trials = 6, 10_000
    d = np.arange(1, D + 1)
    lines, ok = [], True
    for pc, label in ((None, 0.5), (2 / 3, 2 / 3)):
        curve = P.naive_cyclic_sim(T, "Phi", D, trials, seed=7, p_cyclic=pc)
        expect = 1 - label ** d
        sigma = np.sqrt(expect * (1 - expect) / trials)
        z = np.max(np.abs(curve - expect) / sigma)
        ok &= bool(z <= 3)
        lines.append(f"p={label:.3f} max z {z:.2f}")
    DI = P.load_theory("doubled_ising")
    worst_round = 0
    for a in ("sigma.1", "sigma.sigma", "1.sigma", "sigma.psi"):
        trs = P.run_trials(lambda rng, a=a: P.nilpotent_string_sim(DI, a, 8, rng), 1000, seed=3)
        worst_round = max(worst_round, max(t.termination_round for t in trs))
        ok &= all(t.far_end == a for t in trs)
    ok &= worst_round <= 2
    return ok, "; ".join(lines) + f"; doubled Ising worst termination round {worst_round} over 4x1000 trials"


def criterion_9():
    parts, ok = [], True
    for name in ("vec_z2", "vec_z3", "ising", "ty_z3"):
        C = builtin(name)
        pent = pentagon_check(C)["max_residual"]
        uni = unitarity_residual(C)
        dim = dimension_residual(C)
        grad = verify_grading(C)
        ok &= pent < 1e-12 and uni < 1e-12 and dim <= 1e-12 and grad
        parts.append(f"{name}: pentagon {pent:.1e} unitarity {uni:.1e} dims {dim:.1e} grading {grad}")
    return ok, "; ".join(parts)


def _cli(argv):
    buf = io.StringIO()
    code = run(argv, out=buf)
    return code, buf.getvalue()


def criterion_10():
    commands = [
        ["prepare", "--category", "ising", "--lx", "2", "--ly", "2", "--seed", "5"],
        ["prepare", "--category", "ty_z3", "--lx", "2", "--ly", "2", "--seed", "2"],
        ["oneform", "--roundtrip", "--group", "z3", "--region", "0:0,1:0", "--pair", "0:0,2:2", "--seed", "4"],
        ["protocol", "cyclic", "--theory", "ty_z3_phi_sector", "--anyon", "Phi", "--trials", "2000"],
        ["protocol", "nilpotent", "--theory", "doubled_ising", "--anyon", "sigma.sigma", "--trials", "300"],
    ]
    bad = []
    for cmd in commands:
        outs = {_cli(["--deterministic"] + cmd), _cli(["--deterministic"] + cmd),
                _cli(["--deterministic", "--threads", "4"] + cmd)}
        if len(outs) != 1 or next(iter(outs))[0] != 0:
            bad.append(cmd[0])
    return not bad, f"{len(commands)} commands x 3 runs byte-identical" if not bad else f"differs: {bad}"


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 11)}
TITLES = {1: "Ising preparation", 2: "TY(Z3) preparation and sigma-loop gluing", 3: "ground-space dimensions",
          4: "Ising round-2 projectors", 5: "one-form round trip", 6: "gauged dyon pair vs Phi string",
          7: "tube idempotents and walls", 8: "label-level protocol statistics",
          9: "category consistency", 10: "determinism"}


def line(i: int) -> str:
    ok, detail = RESULTS[i]
    return f"criterion {i:2d} {'PASS' if ok else 'FAIL'}  {TITLES[i]}: {detail}"


def summary_lines() -> list[str]:
    return [line(i) for i in sorted(RESULTS)]


@pytest.mark.parametrize("i", sorted(CRITERIA))
def test_criterion(i):
    try:
        ok, detail = CRITERIA[i]()
    except Exception as exc:
        RESULTS[i] = (False, f"error {type(exc).__name__}: {exc}")
        raise
    RESULTS[i] = (bool(ok), detail)
    print(line(i))
    assert ok, detail


if __name__ == "__main__":
    for i, fn in CRITERIA.items():
        try:
            ok, detail = fn()
        except Exception as exc:
            ok, detail = False, f"error {type(exc).__name__}: {exc}"
        RESULTS[i] = (bool(ok), detail)
        print(line(i), flush=True)
