import json
import subprocess
import sys

import numpy as np
import pytest

from posinormal.cli import main, parse_sizes
from posinormal.errors import InputError
from posinormal.matop import random_ep
from posinormal.report import CSV_COLUMNS, read_matrix_file, write_matrix_file


def run(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:  # argparse usage errors
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--no-timestamp")
    return code, json.loads(out)


class TestAnalyze:
    def test_identity(self, capsys):
        code, rep = run_json(capsys, "analyze", "--construct", "identity", "3")
        assert code == 0
        assert rep["summary"]["posinormal"] and rep["summary"]["normal"]
        assert rep["summary"]["lambda_min"] == pytest.approx(1.0)
        assert rep["tolerance"] == {"rank_rtol": 1e-10, "psd_rtol": 1e-10, "residual_rtol": 1e-10}

    def test_jordan(self, capsys):
        code, rep = run_json(capsys, "analyze", "--construct", "jordan", "2")
        assert code == 0
        assert not rep["results"]["posinormal"]
        assert rep["results"]["kernel_dims"] == [1, 2]

    def test_truncation_caveat(self, capsys):
        _, rep = run_json(capsys, "analyze", "--construct", "shift", "4")
        assert rep["results"]["caveat"]
        assert rep["results"]["commutator_min_eig"] == pytest.approx(-1.0)

    def test_deterministic_without_timestamp(self, capsys):
        args = ("analyze", "--construct", "ep", "6", "3", "--seed", "4", "--no-timestamp")
        first = run(capsys, *args)[1]
        second = run(capsys, *args)[1]
        assert first == second and "timestamp" not in json.loads(first)

    def test_timestamp_present_by_default(self, capsys):
        code, out, _ = run(capsys, "analyze", "--construct", "identity", "2")
        assert "timestamp" in json.loads(out)

    def test_file_input_and_round_trip(self, capsys, tmp_path):
        A = random_ep(5, 2, 9)
        path = tmp_path / "a.json"
        write_matrix_file(path, A)
        assert np.array_equal(read_matrix_file(path).entries, A.entries)
        emitted = tmp_path / "b.json"
        code, rep = run_json(capsys, "analyze", "--file", str(path), "--emit-matrix", str(emitted))
        assert code == 0 and rep["summary"]["ep"]
        assert np.array_equal(read_matrix_file(emitted).entries, A.entries)

    def test_certificate_serialized_as_matrix_file(self, capsys):
        _, rep = run_json(capsys, "analyze", "--construct", "identity", "2")
        witness = rep["results"]["certificate"]["witness"]
        assert witness["rows"] == 2 and len(witness["entries"]) == 4

    def test_out_file(self, capsys, tmp_path):
        out = tmp_path / "r.json"
        code, stdout, _ = run(capsys, "analyze", "--construct", "identity", "2", "--out", str(out))
        assert code == 0 and stdout == ""
        assert json.loads(out.read_text())["command"] == "analyze"

    def test_tolerance_flags(self, capsys):
        _, rep = run_json(capsys, "analyze", "--construct", "identity", "2", "--tol", "1e-8",
                          "--tol-psd", "1e-6")
        assert rep["tolerance"] == {"rank_rtol": 1e-8, "psd_rtol": 1e-6, "residual_rtol": 1e-8}


class TestInputErrors:
    @pytest.mark.parametrize(
        "argv",
        [
            ("analyze", "--construct", "nope"),
            ("analyze", "--construct", "ep", "3", "5"),
            ("analyze", "--construct", "jordan", "x"),
            ("analyze", "--file", "/nonexistent/m.json"),
            ("analyze", "--construct", "identity", "2", "--tol", "0.5"),
            ("analyze", "--construct", "identity", "2", "--format", "csv"),
            ("family", "nope"),
            ("family", "shift", "--sizes", "8..4"),
            ("powers", "--construct", "identity", "2", "--kmax", "0"),
            ("qtop", "U +", "show"),
            ("qtop", "U", "U"),
            ("analyze",),
        ],
    )
    def test_exit_code_two(self, capsys, argv):
        assert run(capsys, *argv)[0] == 2

    def test_parse_error_reports_position(self, capsys):
        code, _, err = run(capsys, "qtop", "U + )", "show")
        assert code == 2 and "position 4" in err

    def test_malformed_matrix_file(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"rows": 2, "cols": 2, "entries": [[1, 0]]}))
        assert run(capsys, "analyze", "--file", str(path))[0] == 2
        path.write_text(json.dumps({"rows": 1, "cols": 2, "entries": [[1, 0], [0, 0]]}))
        assert run(capsys, "analyze", "--file", str(path))[0] == 2


class TestPowers:
    def test_ep_powers(self, capsys):
        code, rep = run_json(capsys, "powers", "--construct", "ep", "8", "5", "--seed", "2")
        assert code == 0 and rep["summary"]["all_powers_ep"]
        assert [r["k"] for r in rep["results"]] == [1, 2, 3, 4, 5]

    def test_jordan_powers(self, capsys):
        code, rep = run_json(capsys, "powers", "--construct", "jordan", "3", "--kmax", "3")
        assert code == 0 and not rep["summary"]["input_ep"]
        # J^3 = 0 is posinormal by the zero-matrix convention
        assert [r["posinormal"] for r in rep["results"]] == [False, False, True]


class TestFamily:
    def test_example1(self, capsys):
        code, rep = run_json(capsys, "family", "example1", "--sizes", "4..256", "--kmax", "2")
        assert code == 0
        assert rep["summary"]["classifications"] == {"1": "stable", "2": "decaying"}

    def test_csv(self, capsys, tmp_path):
        code, out, _ = run(capsys, "family", "shift", "--sizes", "4,8,16,32", "--format", "csv")
        lines = out.strip().splitlines()
        assert code == 0 and lines[0] == ",".join(CSV_COLUMNS) and len(lines) == 5
        side = tmp_path / "c.csv"
        run(capsys, "family", "shift", "--sizes", "4..32", "--csv", str(side))
        assert side.read_text() == out

    def test_parse_sizes(self):
        assert parse_sizes("4..32") == [4, 8, 16, 32]
        assert parse_sizes("3,5,9") == [3, 5, 9]
        with pytest.raises(InputError):
            parse_sizes("a..b")


class TestQtop:
    def test_self_commutator(self, capsys):
        code, rep = run_json(capsys, "qtop", "U* + 2U", "self-commutator")
        assert code == 0 and rep["summary"]["eigenvalues"] == [pytest.approx(3.0)]

    def test_action_first(self, capsys):
        code, rep = run_json(capsys, "qtop", "hyponormal", "(U* + 2U)^2")
        assert code == 0 and rep["summary"]["hyponormal"] is False
        assert rep["summary"]["min_eigenvalue"] == pytest.approx((15 - 3 * np.sqrt(41)) / 2)

    def test_verify(self, capsys):
        code, rep = run_json(capsys, "qtop", "U = U* · U^2", "verify")
        assert code == 0 and rep["summary"] == {"equal": True, "residual": 0.0}
        assert run(capsys, "qtop", "U U* = I", "verify")[0] == 1

    def test_probe(self, capsys):
        code, rep = run_json(capsys, "qtop", "U* + 2U", "probe", "--trials", "500", "--max-support", "64")
        assert code == 0 and not rep["summary"]["falsified"]
        assert run(capsys, "qtop", "U*", "probe", "--c", "0.5", "--trials", "5")[0] == 1


class TestSuite:
    def test_single_suite_table(self, capsys):
        code, out, _ = run(capsys, "suite", "minimality")
        assert code == 0 and "[PASS]" in out and "[FAIL]" not in out

    def test_suite_json_out(self, capsys, tmp_path):
        path = tmp_path / "s.json"
        code, _, _ = run(capsys, "suite", "lemma2", "--instances", "50", "--out", str(path))
        rep = json.loads(path.read_text())
        assert code == 0 and rep["summary"]["passed"] and rep["input"]["instances"] == 50


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "posinormal", "qtop", "U*U = I", "verify",
                           "--no-timestamp"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["summary"]["equal"]
