import io
import json
import subprocess
import sys

import pytest

from naryder.cli import run
from naryder.exact_linalg import Matrix
from naryder.filippov import build_filippov
from naryder.formats import FormatError, algebra_from_json, algebra_to_json, load_algebra


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), out)
    return code, json.loads(out.getvalue())


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def test_build_roundtrip(tmp_path):
    code, res = call("build", "A:5")
    assert code == 0 and res["status"] == "PASS"
    assert algebra_from_json(res["payload"]) == build_filippov(5)
    path = write(tmp_path, "a5.json", res["payload"])
    code, res = call("der", path)
    assert code == 0 and res["payload"]["dim"] == 10
    assert "characterization" in res["payload"]


def test_der_m8():
    code, res = call("der", "M8")
    assert code == 0 and res["payload"]["dim"] == 21 and res["payload"]["antisymmetric"]
    assert res["payload"]["listed_basis_check"]["ok"]


def test_locder_bound_m8():
    code, res = call("locder-bound", "M8")
    assert code == 0
    p = res["payload"]
    assert p["dim"] == 28 and p["antisymmetric"] and p["quotient_dim"] == 7


def test_locder_bound_random_probes_deterministic():
    a = call("locder-bound", "A:4", "--random-probes", "3", "--seed", "4")
    b = call("locder-bound", "A:4", "--random-probes", "3", "--seed", "4")
    assert a == b and a[1]["seeds"] == {"random_probes": 4}


def test_check_commands():
    code, res = call("check", "filippov", "A:4")
    assert code == 0 and res["payload"]["violation_count"] == 0
    code, res = call("check", "filippov", "M8")
    assert code == 1 and res["payload"]["violation_count"] > 0
    code, res = call("check", "identities", "M8", "--trials", "3", "--seed", "2")
    assert code == 0 and res["seeds"] == {"identities": 2}


def test_local_cert(tmp_path):
    diag = Matrix.unit(0, 0, 4).to_json()
    code, res = call("local-cert", "A:4", "--map", write(tmp_path, "m.json", diag))
    assert code == 1
    assert res["payload"]["status"] == "COUNTEREXAMPLE"
    assert res["payload"]["probe"]["probe"] == "Xi_1"
    code, res = call("local-cert", "M8", "--map", write(tmp_path, "m8.json", Matrix.zeros(8).to_json()))
    assert code == 2


def test_witness(tmp_path):
    d21 = (Matrix.unit(1, 0, 4) - Matrix.unit(0, 1, 4)).to_json()
    m = write(tmp_path, "m.json", d21)
    code, res = call("witness", "A:4", "--map", m, "--points", write(tmp_path, "p.json", [[1, 0, 0, 0]]))
    assert code == 0 and res["payload"]["feasible"]
    ident = write(tmp_path, "i.json", Matrix.identity(4).to_json())
    code, res = call("witness", "A:4", "--map", ident, "--points", write(tmp_path, "q.json", [[1, 0, 0, 0]]))
    assert code == 1 and res["status"] == "INFEASIBLE"


def test_params(tmp_path):
    M = Matrix.unit(2, 1, 8) - Matrix.unit(1, 2, 8) + Matrix.unit(0, 3, 8) - Matrix.unit(3, 0, 8)
    code, res = call("params", write(tmp_path, "m.json", M.to_json()))
    assert code == 0 and res["payload"]["params"]["alpha"][0] == "1"
    code, res = call("params", write(tmp_path, "bad.json", (M + Matrix.unit(2, 0, 8) - Matrix.unit(0, 2, 8)).to_json()))
    assert code == 1 and "gamma" in res["payload"]["error"]
    code, res = call("params", write(tmp_path, "a.json", {"alpha": [1] + [0] * 20}))
    assert code == 0


def test_m8_witness(tmp_path):
    nabla = (Matrix.unit(2, 1, 8) - Matrix.unit(1, 2, 8)).to_json()
    m = write(tmp_path, "n.json", nabla)
    x = write(tmp_path, "x.json", [0, 1, 0, 0, 0, 0, 0, 0])
    code, res = call("m8-witness", "--map", m, "--point", x)
    assert code == 0 and res["payload"]["oracle_feasible"]
    odd = write(tmp_path, "y.json", [0, 1, 1, 0, 0, 0, 0, 0])
    code, res = call("m8-witness", "--map", m, "--point", odd)
    assert code == 2 and res["payload"]["error"] == "NotRationalSquare"
    code, res = call("m8-witness", "--map", m, "--point", odd, "--mode", "approx")
    assert code == 0


def test_frame(tmp_path):
    x = write(tmp_path, "x.json", [0, "3/5", "4/5", 0, 0, 0, 0, 0])
    y = write(tmp_path, "y.json", [0, 0, 0, 0, 1, 0, 0, 0])
    code, res = call("frame", "--x", x, "--y", y)
    assert code == 0 and len(res["payload"]["automorphism"]) == 8
    code, res = call("frame", "--x", x, "--y", x)
    assert code == 2


def test_explore_reproducible(monkeypatch):
    a = call("explore-2local", "--trials", "10", "--seed", "3")
    assert a == call("explore-2local", "--trials", "10", "--seed", "3")
    monkeypatch.setenv("NARYDER_SEED", "3")
    assert call("explore-2local", "--trials", "10") == a


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["der", "A:3"],
    ["der", "B:7"],
    ["der", "/nonexistent.json"],
    ["explore-2local", "--trials", "0"],
])
def test_usage_errors(argv):
    code, res = call(*argv)
    assert code == 2 and res["status"] == "ERROR"


def test_malformed_files(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert call("der", str(bad))[0] == 2
    good = algebra_to_json(build_filippov(4))
    for broken in (
        dict(good, extra=1),
        {k: v for k, v in good.items() if k != "dim"},
        dict(good, brackets=[{"args": [2, 1, 3], "value": {"1": "1"}}]),
        dict(good, brackets=[{"args": [1, 2, 3], "value": {"9": "1"}}]),
        dict(good, brackets=[{"args": [1, 2, 3], "value": {"1": 0.5}}]),
        dict(good, brackets=good["brackets"] + good["brackets"][:1]),
    ):
        with pytest.raises(FormatError):
            algebra_from_json(broken)
        assert call("der", write(tmp_path, "b.json", broken))[0] == 2
    mismatch = write(tmp_path, "m.json", Matrix.identity(3).to_json())
    assert call("local-cert", "A:4", "--map", mismatch)[0] == 2


def test_load_algebra_identifiers():
    assert load_algebra("A:6").dim == 6
    assert load_algebra("M8").arity == 3
    with pytest.raises(FormatError):
        load_algebra("A:2")


def test_pretty_output():
    out = io.StringIO()
    assert run(["--pretty", "locder-bound", "A:4"], out) == 0
    assert out.getvalue().startswith("locder-bound: PASS")


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "naryder.cli", "der", "A:4"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["payload"]["dim"] == 6
