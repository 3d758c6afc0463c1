"""Command-line front end: every subcommand prints one JSON report.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or input error,
3 resource guard hit.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

import numpy as np

from . import __version__
from .afdlu import ProtocolViolation, prepare
from .fusion import builtin, load
from .lattice import HoneycombTorus
from .state import ResourceError, SparseState
from .stringnet import StringNet

SCHEMA_VERSION = 1
TOL_STATE = 1e-8
TOL_OPERATOR = 1e-10
TOL_DENSE = 1e-12


class Report:
    def __init__(self, command: str, inputs: dict):
        self.data = {"schema_version": SCHEMA_VERSION, "artifact_version": __version__,
                     "command": command, "inputs": inputs, "checks": [], "result": {}}
        self.t0 = time.perf_counter()
        self.timings: dict = {}

    def check(self, name: str, value, threshold, ok: bool) -> None:
        self.data["checks"].append({"name": name, "value": _plain(value), "threshold": threshold, "pass": bool(ok)})

    def close_to(self, name: str, value: float, target: float, tol: float) -> None:
        self.check(name, value, {"target": target, "tolerance": tol}, abs(value - target) <= tol)

    def below(self, name: str, value: float, tol: float) -> None:
        self.check(name, value, {"max": tol}, value <= tol)

    def time(self, name: str) -> None:
        self.timings[name] = round(time.perf_counter() - self.t0, 3)

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.data["checks"])

    def finish(self, deterministic: bool) -> dict:
        self.data["pass"] = self.passed
        if not deterministic:
            self.time("total")
            self.data["timings"] = self.timings
        return self.data


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(f"{float(x):.12g}")
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return [float(f"{x.real:.12g}"), float(f"{x.imag:.12g}")]
    return x


def _category(name: str):
    try:
        return builtin(name)
    except ValueError:
        return load(name)


def _coords(text: str, lattice: HoneycombTorus) -> list[int]:
    """Parse ``"x:y,x:y,..."`` into plaquette indices."""
    out = []
    for item in text.split(","):
        try:
            x, y = (int(v) for v in item.strip().split(":"))
        except ValueError:
            raise ValueError(f"bad plaquette coordinate {item!r}; expected x:y") from None
        if not (0 <= x < lattice.lx and 0 <= y < lattice.ly):
            raise ValueError(f"plaquette {item!r} outside the {lattice.lx}x{lattice.ly} torus")
        out.append(lattice.plaquette(x, y))
    return out


def path_from_coords(text: str, lattice: HoneycombTorus) -> list[tuple[int, int]]:
    """Dual path through consecutive adjacent plaquettes (lowest shared edge)."""
    plaqs = _coords(text, lattice)
    if len(plaqs) < 2:
        raise ValueError("a path needs at least two plaquettes")
    path = []
    for p, q in zip(plaqs, plaqs[1:]):
        shared = sorted(e for w, e in lattice.dual_adjacency[p] if w == q)
        if not shared:
            raise ValueError(f"plaquettes {p} and {q} are not adjacent")
        path.append((shared[0], lattice.orientation(shared[0], p)))
    return path


# subcommands ---------------------------------------------------------------

def _state_checks(rep: Report, model: StringNet, st: SparseState) -> None:
    from .oracle import fidelity, projector_scan
    scan = projector_scan(model, st)
    rep.below("vertex_projectors", scan["max_Av_deviation"], TOL_OPERATOR)
    rep.below("plaquette_projectors", scan["max_Bp_deviation"], TOL_OPERATOR)
    ref = StringNet(model.C, HoneycombTorus(model.lattice.lx, model.lattice.ly)).ground_state_direct()
    rep.close_to("fidelity_vs_direct", fidelity(st, ref), 1.0, TOL_STATE)


def cmd_prepare(args, rep: Report) -> None:
    C = _category(args.category)
    rep.data["category_checksum"] = C.checksum()
    L = HoneycombTorus(args.lx, args.ly)
    st, tr = prepare(C, L, seed=args.seed)
    rep.time("prepare")
    rep.data["result"]["transcript"] = tr.to_dict()
    if args.dump:
        st.dump(args.dump)
    if args.transcript:
        with open(args.transcript, "w") as fh:
            json.dump(tr.to_dict(), fh, indent=1, sort_keys=True)
    if not args.no_check:
        _state_checks(rep, StringNet(C, L), st)
        rep.time("checks")


def cmd_verify(args, rep: Report) -> None:
    C = _category(args.category)
    rep.data["category_checksum"] = C.checksum()
    st = SparseState.load(args.state)
    model = StringNet(C, HoneycombTorus(args.lx, args.ly))
    if list(st.dims) != model.register_dims():
        raise ValueError("state layout does not match the category and lattice")
    _state_checks(rep, model, st)


def cmd_gsd(args, rep: Report) -> None:
    from .oracle import ground_space_dim
    C = _category(args.category)
    rep.data["category_checksum"] = C.checksum()
    d = ground_space_dim(C, HoneycombTorus(args.lx, args.ly))
    rep.data["result"]["gsd"] = d
    rep.close_to("integer", d, float(round(d)), 1e-6)
    if args.expect is not None:
        rep.close_to("expected", d, float(args.expect), 1e-6)


def cmd_string_op(args, rep: Report) -> None:
    from . import anyons
    C = _category(args.category)
    rep.data["category_checksum"] = C.checksum()
    L = HoneycombTorus(args.lx, args.ly)
    path = path_from_coords(args.path, L)
    plaqs = anyons.path_plaquettes(L, path)
    if args.anyon == "phi":
        if C.name != "ty_z3":
            raise ValueError("the phi string lives in ty_z3")
        res = anyons.phi_string_comparison(args.lx, args.ly, path=path, seed=args.seed)
        rep.data["result"] = res
        rep.close_to("fidelity_gauged_vs_direct", res["fidelity"], 1.0, TOL_STATE)
        for tag in ("gauged", "direct"):
            for i, v in enumerate(res[f"{tag}_PPhi"]):
                rep.close_to(f"{tag}_endpoint{i}_PPhi", v, 1.0, TOL_OPERATOR)
            for i, v in enumerate(res[f"{tag}_bulk_Bp"]):
                rep.close_to(f"{tag}_bulk{i}_Bp", v, 1.0, TOL_OPERATOR)
            rep.check(f"{tag}_vertices", res[f"{tag}_vertices_ok"], True, res[f"{tag}_vertices_ok"])
        return
    if args.anyon not in ("dyon1", "dyon2") or C.name != "vec_z3":
        raise ValueError("supported strings: phi on ty_z3, dyon1/dyon2 on vec_z3")
    r = int(args.anyon[-1])
    model = StringNet(C, L)
    st = anyons.attach_string_tails(model, model.ground_state_direct(), path)
    st = anyons.apply_string(model, st, path, anyons.dyon(r), r)
    nrm = st.norm() ** 2
    from .state import inner
    ends = [(plaqs[0], (-r) % 3), (plaqs[-1], r)]
    for i, (p, t) in enumerate(ends):
        v = float(np.real(inner(st, model.apply_tube(st, p, anyons.dyon_idempotent(t)))) / nrm)
        rep.close_to(f"endpoint{i}_dyon_idempotent", v, 1.0, TOL_OPERATOR)
    for q in range(L.n_plaquettes):
        if q not in (plaqs[0], plaqs[-1]):
            v = float(np.real(inner(st, model.apply_Bp(st, q))) / nrm)
            rep.close_to(f"bulk_Bp_{q}", v, 1.0, TOL_OPERATOR)


def cmd_tube(args, rep: Report) -> None:
    from .oracle import tube_algebra_checks
    C = _category(args.category)
    rep.data["category_checksum"] = C.checksum()
    if C.name != "ty_z3":
        raise ValueError("tube idempotents are tabulated for ty_z3")
    res = tube_algebra_checks(StringNet(C, HoneycombTorus(args.lx, args.ly)))
    rep.data["result"] = res
    if args.check:
        tag = "P1" if args.idempotent == "vacuum" else "PPhi"
        rep.below(f"{tag}_idempotent", res[f"{tag}_idempotent"], TOL_DENSE)
        rep.below(f"{tag}_selfadjoint", res[f"{tag}_selfadjoint"], TOL_DENSE)
        rep.below("orthogonal", res["orthogonal"], TOL_DENSE)
        rep.below("wall_representation_law", res["wall_representation_law"], TOL_DENSE)


def cmd_oneform(args, rep: Report) -> None:
    from .fusion import vec_zn
    from .groups import characters
    from .oneform import roundtrip
    from .oracle import fidelity
    if not args.roundtrip:
        raise ValueError("only --roundtrip is available")
    if not args.group.startswith("z"):
        raise ValueError("group must be zN")
    n = int(args.group[1:])
    C = vec_zn(n)
    rep.data["category_checksum"] = C.checksum()
    L = HoneycombTorus(args.lx, args.ly)
    model = StringNet(C, L)
    region = L.region(_coords(args.region, L))
    if not region.is_simply_connected():
        raise ValueError("region must be simply connected")
    st = model.ground_state_direct()
    if args.pair:
        chi = characters(C.series[-1].group)[1]
        a, b = _coords(args.pair, L)
        st = model.apply_char_string(st, chi, L.dual_path(a, b))
    rng = np.random.default_rng(args.seed)
    out, outcome, info = roundtrip(model, st, region, rng)
    rep.data["result"] = {"outcome": outcome.to_dict(), "regauge": info}
    rep.close_to("roundtrip_fidelity", fidelity(st, out), 1.0, TOL_OPERATOR)


def cmd_protocol(args, rep: Report) -> None:
    from . import protocol as P
    T = P.load_theory(args.theory)
    rep.data["theory_checksum"] = hashlib.sha256(json.dumps(P.theory_to_dict(T), sort_keys=True).encode()).hexdigest()[:16]
    a = args.anyon
    if args.kind == "cyclic":
        a = a or next((T.labels[x] for x in range(T.rank) if T.N[x, T.dual[x], x] and not T.is_invertible(x)), None)
        if a is None:
            raise ValueError(f"theory {T.name} has no cyclic anyon")
        curve = P.naive_cyclic_sim(T, a, args.depth, args.trials, args.seed, args.p_cyclic, args.threads)
        ai = T.index(a)
        p = args.p_cyclic if args.p_cyclic is not None else T.probabilities(ai, int(T.dual[ai]))[ai]
        d = np.arange(1, args.depth + 1)
        expect = 1 - p ** d
        sigma = np.sqrt(expect * (1 - expect) / args.trials)
        rep.data["result"] = {"anyon": a, "p_cyclic": p, "curve": curve.tolist(), "expected": expect.tolist()}
        for k in range(args.depth):
            rep.check(f"depth{k + 1}", curve[k], {"target": expect[k], "three_sigma": 3 * sigma[k]},
                      abs(curve[k] - expect[k]) <= 3 * sigma[k] + 1e-12)
        if args.csv:
            with open(args.csv, "w") as fh:
                fh.write("depth,success,expected\n")
                for k in range(args.depth):
                    fh.write(f"{k + 1},{curve[k]:.6f},{expect[k]:.6f}\n")
        return
    sim = P.nilpotent_string_sim if args.kind == "nilpotent" else P.solvable_string_sim
    if a is None:
        a = T.labels[int(np.argmax(T.dims))]
    trs = P.run_trials(lambda rng: sim(T, a, args.length, rng), args.trials, args.seed, args.threads)
    rounds = [t.termination_round for t in trs]
    bound = sum(1 for lev in T.series[1:] if lev.group.order > 1) or 1
    if args.kind == "solvable" and T.child is not None:
        bound = sum(1 for lev in T.child.series[1:] if lev.group.order > 1) or 1
    hist = {str(r): rounds.count(r) for r in sorted(set(rounds))}
    rep.data["result"] = {"anyon": a, "termination_histogram": hist,
                          "condensation_rounds": sorted({t.condensation_rounds for t in trs}),
                          "first_transcript": trs[0].to_dict()}
    rep.check("terminates_within_bound", max(rounds), {"max": bound}, max(rounds) <= bound)
    rep.check("far_end_equals_anyon", sum(t.far_end == a for t in trs), {"target": len(trs)},
              all(t.far_end == a for t in trs))


# entry point -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stringnet-afdlu", description=__doc__.splitlines()[0])
    ap.add_argument("--deterministic", action="store_true", help="omit timings from the report")
    ap.add_argument("--threads", type=int, default=1, help="worker cap; never changes results")
    ap.add_argument("--report", help="also write the report to this file")
    sub = ap.add_subparsers(dest="command", required=True)

    def lattice(p, lx=2, ly=2):
        p.add_argument("--lx", type=int, default=lx)
        p.add_argument("--ly", type=int, default=ly)

    p = sub.add_parser("prepare", help="run the gauging protocol from the vacuum")
    p.add_argument("--category", required=True)
    lattice(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dump", help="write the final state here")
    p.add_argument("--transcript", help="write the transcript here")
    p.add_argument("--no-check", action="store_true")
    p = sub.add_parser("verify", help="projector scan and fidelity of a dumped state")
    p.add_argument("--state", required=True)
    p.add_argument("--category", required=True)
    lattice(p)
    p = sub.add_parser("gsd", help="ground-space dimension by trace")
    p.add_argument("--category", required=True)
    lattice(p)
    p.add_argument("--expect", type=float)
    p = sub.add_parser("string-op", help="anyon string operator checks")
    p.add_argument("--category", required=True)
    p.add_argument("--anyon", required=True)
    p.add_argument("--path", required=True, help="plaquettes x:y,x:y,... along the string")
    p.add_argument("--seed", type=int, default=0)
    lattice(p)
    p = sub.add_parser("tube", help="tube-algebra idempotent checks")
    p.add_argument("--category", required=True)
    p.add_argument("--idempotent", choices=["vacuum", "phi"], required=True)
    p.add_argument("--check", action="store_true")
    lattice(p)
    p = sub.add_parser("oneform", help="ungauge/regauge round trip")
    p.add_argument("--roundtrip", action="store_true")
    p.add_argument("--group", required=True, help="zN")
    p.add_argument("--region", required=True, help="plaquettes x:y,x:y,...")
    p.add_argument("--pair", help="two plaquettes x:y,x:y carrying a charge pair")
    p.add_argument("--seed", type=int, default=0)
    lattice(p, 3, 3)
    p = sub.add_parser("protocol", help="label-level string protocols")
    p.add_argument("kind", choices=["nilpotent", "cyclic", "solvable"])
    p.add_argument("--theory", required=True, help="theory file or bundled name")
    p.add_argument("--anyon")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--length", type=int, default=8)
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--p-cyclic", type=float)
    p.add_argument("--csv")
    return ap


COMMANDS = {"prepare": cmd_prepare, "verify": cmd_verify, "gsd": cmd_gsd, "string-op": cmd_string_op,
            "tube": cmd_tube, "oneform": cmd_oneform, "protocol": cmd_protocol}


def run(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    inputs = {k: v for k, v in sorted(vars(args).items()) if k not in ("report", "threads", "deterministic")}
    rep = Report(args.command, inputs)
    code = 0
    try:
        COMMANDS[args.command](args, rep)
    except ResourceError as exc:
        rep.data["error"] = f"resource guard: {exc}"
        code = 3
    except (ValueError, FileNotFoundError, KeyError) as exc:
        rep.data["error"] = str(exc)
        code = 2
    except ProtocolViolation as exc:
        rep.data["error"] = f"protocol violation: {exc}"
        code = 1
    data = rep.finish(args.deterministic)
    if code == 0 and not data["pass"]:
        code = 1
    text = json.dumps(data, indent=1, sort_keys=True)
    print(text, file=out)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text + "\n")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
