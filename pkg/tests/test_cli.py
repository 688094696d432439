import json
import subprocess
import sys

import pytest

from repairforge import __version__, io
from repairforge.cli import main


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


@pytest.fixture
def q3(workdir, capsys):
    assert main(["gen", "evenodd", "--p", "3", "-o", "eo3.spec"]) == 0
    assert main(["pipeline", "alg1", "--base", "eo3.spec", "--perms", "identity",
                 "-o", "q3.spec", "--manifest", "q3.json"]) == 0
    capsys.readouterr()
    return workdir / "q3.spec"


def _error(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_gen_and_verify(workdir, capsys):
    assert main(["gen", "evenodd", "--p", "3", "-o", "eo3.spec"]) == 0
    assert main(["verify", "eo3.spec"]) == 0
    assert "OK: MDS on all 10" in capsys.readouterr().out


def test_gen_families(workdir, capsys):
    assert main(["gen", "mdr1", "-o", "m.spec"]) == 0
    assert main(["gen", "cauchy", "--n", "6", "--k", "4", "--w", "3", "-o", "c.spec"]) == 0
    assert main(["verify", "m.spec", "--simulate"]) == 0
    assert main(["verify", "c.spec"]) == 0
    assert io.load_spec("c.spec").alpha == 3


def test_pipeline_alg1_alpha_16(q3):
    assert io.load_spec(q3).alpha == 16
    manifest = json.loads((q3.parent / "q3.json").read_text())
    assert [r["alpha"] for r in manifest["rounds"]] == [4, 8, 16]


def test_repair_node_zero_rows(q3, capsys):
    assert main(["repair", str(q3), "--node", "0"]) == 0
    last = capsys.readouterr().out.strip().splitlines()[-1]
    assert last.split()[-1] == "{1,2,5,6,9,10,13,14}"
    assert last.split()[1] == "remainder"


def test_repair_json_is_zero_based(q3, capsys):
    assert main(["repair", str(q3), "--node", "3", "--format", "json", "--seed", "4"]) == 0
    rep = json.loads(capsys.readouterr().out)["reports"][0]
    assert rep["helpers"][0]["rows"] == list(range(8))
    assert rep["optimal_access"] and rep["total_downloaded"] == 32


def test_encode_erase_repair_decode(q3, workdir, capsys):
    message = workdir / "msg.bin"
    message.write_bytes(bytes(range(256)) * 3)
    assert main(["encode", str(q3), str(message), "--out-dir", "shards"]) == 0
    original = (workdir / "shards" / io.shard_name(0)).read_bytes()
    assert main(["erase", "shards", "--node", "0"]) == 0
    assert main(["repair", str(q3), "--node", "0", "--dir", "shards", "--format", "csv"]) == 0
    assert (workdir / "shards" / io.shard_name(0)).read_bytes() == original

    assert main(["erase", "shards", "--node", "1"]) == 0
    assert main(["erase", "shards", "--node", "4"]) == 0
    assert main(["decode", str(q3), "shards", "-o", "out.bin"]) == 0
    assert (workdir / "out.bin").read_bytes() == message.read_bytes()

    assert main(["repair", str(q3), "--node", "1", "--dir", "shards"]) == 2
    assert "missing" in _error(capsys)["message"]


def test_transform_command(workdir, capsys):
    assert main(["gen", "cauchy", "--n", "5", "--k", "3", "--w", "3", "-o", "c.spec"]) == 0
    assert main(["transform", "c.spec", "--targets", "3,4", "-o", "t.spec"]) == 0
    assert io.load_spec("t.spec").alpha == 12
    assert main(["verify", "t.spec", "--simulate"]) == 0


def test_report_formats_and_figures(q3, workdir, capsys):
    assert main(["report", str(q3), "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 6 and lines[0].startswith("schema,failed")
    assert main(["report", str(q3), "--format", "json", "--figure", "figs/q3"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert all(r["optimal_bandwidth"] for r in doc["reports"])
    for suffix in ("bandwidth", "access"):
        png = workdir / "figs" / f"q3_{suffix}.png"
        assert png.read_bytes()[:4] == b"\x89PNG"


def test_pipeline_alg2(workdir, capsys):
    assert main(["gen", "mdr1", "-o", "m.spec"]) == 0
    assert main(["pipeline", "alg2", "--base", "m.spec", "--force-space-share", "-o", "c3.spec"]) == 0
    assert "anyway" in capsys.readouterr().err
    assert io.load_spec("c3.spec").alpha == 32


def test_error_exit_codes(workdir, capsys):
    assert main(["gen", "evenodd", "--p", "4"]) == 6
    assert _error(capsys)["error"] == "NotPrime"
    assert main(["gen", "cauchy", "--n", "20", "--k", "3", "--w", "2"]) == 6
    (workdir / "junk.spec").write_text("{}")
    assert main(["verify", "junk.spec"]) == 10
    err = _error(capsys)
    assert err == {"error": "FormatError", "message": err["message"], "exit_code": 10}
    assert main(["verify", "missing.spec"]) == 11
    assert main(["gen", "evenodd", "-o", "eo3.spec"]) == 0
    assert main(["pipeline", "alg2", "--base", "eo3.spec"]) == 6
    assert main(["erase", ".", "--node", "3"]) == 10


def test_repair_of_naive_remainder(workdir, capsys):
    assert main(["gen", "evenodd", "-o", "eo3.spec"]) == 0
    assert main(["transform", "eo3.spec", "--targets", "0,1", "-o", "t.spec"]) == 0
    assert main(["repair", "t.spec", "--node", "3"]) == 0
    assert "naive" in capsys.readouterr().out


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "repairforge.cli", "--version"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == f"repairforge {__version__}"
