import csv
import io
import json
import subprocess
import sys

import pytest

from driftlap import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_example(capsys):
    code, out, _ = run(
        capsys, "verify", "--space", "heisenberg", "--candidate", "power", "--p", "2,3,5",
        "--L", "0,0.4", "--points", "200", "--seed", "42", "--tol", "1e-8",
    )
    assert code == cli.EXIT_PASS
    rep = json.loads(out)
    assert rep["schema_version"] == cli.SCHEMA_VERSION and rep["pass"] is True
    m = rep["manifest"]
    assert m["subcommand"] == "verify" and m["seed"] == 42 and m["version"]
    assert m["config"]["points"] == 200
    assert len(rep["records"]) == 6


def test_verify_vacuous(capsys):
    code, out, err = run(capsys, "verify", "--space", "grushin", "--p", "4", "--L", "0", "--n", "2")
    assert code == cli.EXIT_PASS
    assert "vacuously" in err
    assert json.loads(out)["records"][0]["excluded"] is True


@pytest.mark.parametrize("shell", ["2:1", "abc", "0:1", "1"])
def test_malformed_shell(capsys, shell):
    code, _, err = run(capsys, "verify", "--shell", shell)
    assert code == cli.EXIT_CONFIG and "config error" in err


def test_bad_lists_are_config_errors(capsys):
    assert run(capsys, "verify", "--p", "3,x")[0] == cli.EXIT_CONFIG
    assert run(capsys, "verify", "--p", "0.5")[0] == cli.EXIT_CONFIG
    assert run(capsys, "verify", "--space", "grushin", "--c", "0")[0] == cli.EXIT_CONFIG


def test_verify_failure_exit_code(capsys):
    # a tolerance below the rounding floor must fail, with exit 1 not 2
    code, out, _ = run(capsys, "verify", "--p", "7", "--L", "-1.2", "--tol", "1e-300", "--points", "20")
    assert code == cli.EXIT_FAIL
    assert json.loads(out)["pass"] is False


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", "--space", "euclid"])
    assert exc.value.code == 2


def test_csv_projection(capsys):
    code, out, _ = run(capsys, "verify", "--p", "3", "--L", "0,0.4", "--points", "20", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 2
    assert list(rows[0])[:4] == ["p", "L", "shape", "candidate"]
    assert float(rows[1]["L"]) == 0.4


def test_delta_examples(capsys):
    code, out, _ = run(capsys, "delta", "--space", "heisenberg", "--p", "2", "--L", "0", "--eps", "0.2,0.1,0.05")
    assert code == 0
    rec = json.loads(out)["records"][0]
    assert rec["deviation"] <= 0.02
    code, out, err = run(capsys, "delta", "--p", "2", "--L", "1")
    assert code == 0 and "degenerate" in err
    rec = json.loads(out)["records"][0]
    assert rec["degenerate"] and all(abs(complex(*m)) == 0 for m in rec["masses"])
    assert run(capsys, "delta", "--resolution", "8")[0] == cli.EXIT_CONFIG


def test_diagram_examples(capsys):
    assert run(capsys, "diagram", "--space", "heisenberg", "--points", "40")[0] == 0
    assert run(capsys, "diagram", "--space", "grushin", "--n", "3", "--points", "40")[0] == 0
    code, _, err = run(capsys, "diagram", "--L-ladder", "2,1")
    assert code == cli.EXIT_CONFIG and "ExcludedParameter" in err


def test_config_file_and_hash(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"p": "3", "L": "0.4", "points": 30}))
    code, out, _ = run(capsys, "verify", "--config", str(cfg), "--points", "25")
    assert code == 0
    rep = json.loads(out)
    assert rep["manifest"]["config"]["points"] == 25  # flags beat the file
    assert len(rep["manifest"]["config_hash"]) == 64
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"pints": 3}))
    assert run(capsys, "verify", "--config", str(bad))[0] == cli.EXIT_CONFIG


@pytest.mark.parametrize("cmd", [["verify", "--points", "30"], ["delta", "--resolution", "32"], ["diagram", "--points", "20"]])
def test_round_trip(tmp_path, capsys, cmd):
    out = tmp_path / "r.json"
    cli.main(cmd + ["--out", str(out)])
    capsys.readouterr()
    text = out.read_text()
    loaded = cli.load_report(text)
    parsed = loaded["parsed"]
    if cmd[0] == "verify":
        again = parsed.to_dict()["records"]
    else:
        again = [r.to_dict() for r in parsed]
    assert again == json.loads(text)["records"]


def test_console_script_deterministic_across_threads(tmp_path):
    reports = []
    for threads in ("1", "3"):
        out = tmp_path / f"t{threads}.json"
        env = {"DRIFTLAP_THREADS": threads, "PATH": "/usr/bin:/bin:/usr/local/bin"}
        subprocess.run(
            [sys.executable, "-m", "driftlap.cli", "verify", "--p", "2,3", "--L", "0,0.4",
             "--points", "40", "--out", str(out)],
            check=True, env=env,
        )
        reports.append(cli.strip_volatile(json.loads(out.read_text())))
    assert reports[0] == reports[1]


def test_negative_list_values(capsys):
    code, out, _ = run(capsys, "verify", "--p", "3", "--L", "-1.2,0.4", "--points", "10", "--c", "-1")
    assert code == 0
    assert [r["L"] for r in json.loads(out)["records"]] == [-1.2, 0.4]
    code, out, _ = run(capsys, "diagram", "--L-ladder", "-0.16,-0.08,-0.04,-0.02,-0.01", "--points", "10")
    assert code == 0
