import json
import subprocess
import sys

import pytest

from afasim.cli import main, parse_range

FIELDS = {
    "report_version", "machine_id", "k", "input_summary", "accept_probability",
    "accept_probability_decimal", "decision", "oracle_prediction", "agreement_delta",
}


def call(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def report(capsys, *argv):
    code, out, _ = call(capsys, "run", *argv)
    assert code == 0
    data = json.loads(out)
    assert set(data) == FIELDS
    return data


def test_gen(capsys):
    assert call(capsys, "gen", "0")[1].strip() == "a" * 7
    assert call(capsys, "gen", "1")[1].strip() == "a" * 7 + "b" + "a" * 56
    assert call(capsys, "gen", "1", "--mutate", "block1+1", "--rle")[1].strip() == "a^7 b a^57"
    assert call(capsys, "gen", "9")[0] == 2


def test_run_powereq(capsys):
    data = report(capsys, "powereq", "--k", "25", "a^7")
    assert data["accept_probability"] == "1" and data["decision"] == "accept"
    assert data["input_summary"] == {"length": 7, "a_count": 7, "b_count": 0, "blocks": [7], "t_sum": 0}
    data = report(capsys, "powereq", "a^8")
    assert data["accept_probability"] == "1/51" and data["decision"] == "reject"
    assert data["agreement_delta"] == "0"


def test_run_accepts_shorthand_after_options(capsys):
    data = report(capsys, "powereq", "--k", "2", "a^7", "b", "a^57")
    assert data["accept_probability"] == "1/5"


def test_run_from_file(capsys, tmp_path):
    path = tmp_path / "x.txt"
    path.write_text("a^7 b a^56\n")
    assert report(capsys, "powereq", "--file", str(path))["input_summary"]["blocks"] == [7, 56]


def test_run_combined(capsys, tmp_path):
    bits = tmp_path / "all.bits"
    bits.write_text("1111\n")
    data = report(capsys, "combined", "--oracle", str(bits), "--k", "25", "a^7")
    assert data["decision"] == "accept"
    assert float(data["accept_probability"]) >= 0.98
    assert float(data["agreement_delta"]) < 1e-9


@pytest.mark.parametrize("argv", [
    ["run", "powereq", "abc"],
    ["run", "powereq"],
    ["run", "powereq", "a^x"],
    ["run", "combined", "--oracle", "/nonexistent.bits", "a"],
    ["run", "combined", "--n-max", "0", "a^9"],
    ["run", "powereq", "--bogus"],
    ["sweep", "k", "9..2"],
    ["frobnicate"],
])
def test_usage_errors(capsys, argv):
    code, _, err = call(capsys, *argv)
    assert code == 2 and err


def test_parse_range():
    assert parse_range("2..5") == [2, 3, 4, 5]
    assert parse_range("64..256:64") == [64, 128, 192, 256]


def test_sweep_k(capsys):
    code, out, _ = call(capsys, "sweep", "k", "2..6")
    rows = [line.split("\t") for line in out.strip().splitlines()[1:]]
    assert code == 0 and len(rows) == 5
    assert all(r[-1] == "True" for r in rows)
    assert rows[0][2] == "4/5"


def test_sweep_guard_shrinks(capsys):
    code, out, _ = call(capsys, "sweep", "guard", "2..4", "--n-max", "1")
    deltas = [float(line.split("\t")[1]) for line in out.strip().splitlines()[1:]]
    assert code == 0 and deltas[0] > deltas[1] > deltas[2]


def test_verify_small(capsys):
    code, out, _ = call(capsys, "verify", "powereq", "--ks", "2", "--exhaustive-len", "6",
                        "--random", "5", "--max-len", "30", "--quiet")
    assert code == 0 and out.startswith("PASS powereq")
    code, out, _ = call(capsys, "verify", "combined", "--oracles", "2", "--n-max", "1")
    assert code == 0 and "ok" in out and "PASS combined" in out


def test_verify_failure_exit_code(capsys):
    code, out, _ = call(capsys, "verify", "combined", "--oracles", "1", "--n-max", "0",
                        "--tolerance", "-1", "--quiet")
    assert code == 1 and out.startswith("FAIL")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "afasim", "gen", "0", "--rle"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.strip() == "a^7"
