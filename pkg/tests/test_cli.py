import io
import json

import pytest

from stringnet_afdlu.cli import run


def call(*argv):
    buf = io.StringIO()
    code = run(list(argv), out=buf)
    return code, buf.getvalue()


def test_prepare_report_schema(tmp_path):
    rep = tmp_path / "r.json"
    code, text = call("--report", str(rep), "prepare", "--category", "ising", "--seed", "2")
    assert code == 0
    data = json.loads(text)
    assert data == json.loads(rep.read_text())
    assert data["pass"] and data["schema_version"] == 1
    assert {"command", "inputs", "checks", "result", "category_checksum", "timings"} <= set(data)
    assert all({"name", "value", "threshold", "pass"} <= set(c) for c in data["checks"])


def test_deterministic_reports_are_byte_identical():
    args = ("prepare", "--category", "ty_z3", "--seed", "3")
    a = call("--deterministic", *args)
    b = call("--deterministic", "--threads", "3", *args)
    assert a == b and "timings" not in json.loads(a[1])


def test_dump_and_verify(tmp_path):
    path = tmp_path / "s.json"
    assert call("prepare", "--category", "vec_z3", "--dump", str(path))[0] == 0
    assert call("verify", "--state", str(path), "--category", "vec_z3")[0] == 0
    assert call("verify", "--state", str(path), "--category", "ising")[0] == 2


def test_gsd_expectation_failure_exit_code():
    assert call("gsd", "--category", "vec_z2", "--expect", "4")[0] == 0
    assert call("gsd", "--category", "vec_z2", "--expect", "5")[0] == 1


@pytest.mark.parametrize("argv", [
    ("prepare", "--category", "nonsense"),
    ("string-op", "--category", "vec_z3", "--anyon", "dyon1", "--path", "0:0,2:2", "--lx", "3", "--ly", "3"),
    ("oneform", "--roundtrip", "--group", "z3", "--region", "0:0,1:0,2:0"),
    ("protocol", "cyclic", "--theory", "missing_theory"),
])
def test_input_errors_exit_2(argv):
    assert call(*argv)[0] == 2


def test_string_and_protocol_commands():
    assert call("string-op", "--category", "vec_z3", "--anyon", "dyon2", "--path", "0:0,1:0,2:0",
                "--lx", "3", "--ly", "3")[0] == 0
    assert call("oneform", "--roundtrip", "--group", "z2", "--region", "0:0,1:0", "--pair", "0:0,2:1")[0] == 0
    code, text = call("--deterministic", "protocol", "cyclic", "--theory", "ty_z3_phi_sector", "--trials", "2000")
    assert code == 0 and json.loads(text)["result"]["anyon"] == "Phi"
    assert call("protocol", "nilpotent", "--theory", "doubled_ising", "--trials", "100")[0] == 0


def test_theory_without_cyclic_anyon():
    assert call("protocol", "cyclic", "--theory", "d_z3")[0] == 2
