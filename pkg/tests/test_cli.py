import json
import subprocess
import sys

import pytest

from anoflip.cli import run


def cli(*args, stdin=None):
    proc = subprocess.run([sys.executable, "-m", "anoflip", *args], input=stdin,
                          capture_output=True, text=True)
    return proc.returncode, proc.stdout, proc.stderr


@pytest.fixture(scope="module")
def flow_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "f.json"
    assert run(["example", "two-holed-torus-flow", "--out", str(path)]) == 0
    return path


def test_example_piped_into_validate():
    code, out, _ = cli("example", "two-holed-torus")
    assert code == 0
    code, out, _ = cli("validate", stdin=out)
    assert code == 0
    assert json.loads(out)["valid"] is True


def test_invalid_fatgraph_exit_code():
    doc = {"vertices": [{"id": 0, "darts": [0, 1, 2]}, {"id": 1, "darts": [3, 4, 5]}],
           "edges": [[0, 3], [1, 4], [2, 5]]}
    code, out, _ = cli("validate", stdin=json.dumps(doc))
    assert code == 2
    assert any("odd_valence" in v for v in json.loads(out)["violations"])


def test_flip_then_compare(flow_file, tmp_path):
    flipped = tmp_path / "g.json"
    assert run(["flip", str(flow_file), "--piece", "0", "--out", str(flipped)]) == 0
    code, out, _ = cli("compare", str(flow_file), str(flipped), "--max-len", "6")
    assert code == 0
    assert json.loads(out) == {"result": "Equal"}


def test_search_equiv(flow_file, tmp_path):
    flipped = tmp_path / "g.json"
    run(["flip", str(flow_file), "--piece", "1", "--out", str(flipped)])
    code, out, _ = cli("search-equiv", str(flow_file), str(flipped), "--expect", "found")
    doc = json.loads(out)
    assert code == 0 and doc["result"] == "Found" and doc["valid"]
    code, _, _ = cli("search-equiv", str(flow_file), str(flipped), "--expect", "exhausted")
    assert code == 2


def test_construction_commands(tmp_path):
    path = tmp_path / "c.json"
    assert run(["example", "construction", "--n", "2", "--seed", "0", "--out", str(path)]) == 0
    code, out, _ = cli("transitive", str(path))
    assert code == 0 and json.loads(out) == {"transitive": True}
    code, out, _ = cli("itineraries", str(path), "--max-len", "2")
    assert code == 0 and json.loads(out)["count"] > 0
    flipped = tmp_path / "d.json"
    run(["flip", str(path), "--piece", "0", "--out", str(flipped)])
    code, out, _ = cli("classify", str(path), str(flipped), "--max-len", "3")
    assert code == 0 and json.loads(out)["count"] == 2
    code, out, _ = cli("search-equiv", str(path), str(flipped))
    assert code == 0 and json.loads(out)["result"] == "Exhausted"


def test_build_piece_and_batch(tmp_path):
    code, out, _ = cli("example", "two-holed-torus")
    code, piece, _ = cli("build", "--lambda", "5", stdin=out)
    assert code == 0 and json.loads(piece)["lambda"] == 5.0
    xs = [json.loads(cli("example", "xn", "--n", str(n))[1]) for n in (1, 2)]
    code, flow, _ = cli("build", "--seed", "1", stdin=json.dumps({"fatgraphs": xs}))
    assert code == 0 and len(json.loads(flow)["pieces"]) == 2


def test_integrate_reports_pi():
    code, out, _ = cli("integrate", "--lambda", "10", "--x", "0", "--z", "0")
    doc = json.loads(out)
    assert code == 0 and doc["termination"] == "ExitFace"
    assert abs(doc["time"] - 3.141592653589793) < 1e-6


def test_integrate_csv():
    code, out, _ = cli("integrate", "--x", "0.2", "--format", "csv", "--stride", "100")
    assert code == 0 and out.startswith("t,x,y,z_unwrapped")


def test_cone_check_and_identity_rejection():
    code, out, _ = cli("cone-check", "--lambda", "10", "--matrix", "0,1,1,0", "--grid", "4")
    assert code == 0 and json.loads(out)["verdict"] is True
    code, out, _ = cli("cone-check", "--matrix", "1,0,0,1")
    assert code == 2 and json.loads(out)["error"] == "FiberGluedToFiber"


def test_verify_block():
    code, out, _ = cli("verify-block", "--lambda", "20", "--grid", "20")
    assert code == 0 and json.loads(out)["passed"]


def test_usage_errors():
    code, _, err = cli("bogus")
    assert code == 1 and "schema" in err
    code, _, _ = cli("cone-check", "--matrix", "1,2")
    assert code == 1
    code, _, _ = cli("flip", "/nonexistent.json", "--piece", "0")
    assert code == 1
    code, _, _ = cli("integrate", "--lambda", "-3")
    assert code == 1


def test_outputs_are_deterministic():
    a = cli("example", "construction", "--n", "2", "--seed", "4")[1]
    b = cli("example", "construction", "--n", "2", "--seed", "4")[1]
    assert a == b


def test_round_trip_through_build(flow_file):
    text = flow_file.read_text()
    code, out, _ = cli("build", str(flow_file))
    assert code == 0 and json.loads(out) == json.loads(text)
