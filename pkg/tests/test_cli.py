import csv
import io
import json
import math
import subprocess
import sys

import pytest

from seebeckopt.cli import SWEEP_HEADER, main
from seebeckopt.documents import DocumentError, parse_document, to_profile

F12 = 1 + 0.5 * math.log(2)


def run(capsys, *argv):
    try:
        code = main([str(a) for a in argv])
    except SystemExit as exc:
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def write_json(tmp_path, obj, name="p.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return path


class TestOptimal:
    def test_json(self, capsys):
        code, out, _ = run(capsys, "optimal", "--s0", 1, "--s1", 2, "--zt2", 1)
        doc = json.loads(out)
        assert code == 0
        assert (doc["q"], doc["x0"], doc["x1"]) == (0.5, 0.5, 0.75)
        assert doc["f_max"] == pytest.approx(1.3465736, abs=1e-7)
        assert doc["delta_t_max"] == pytest.approx(0.6732868, abs=1e-7)
        assert doc["profile"]["kind"] == "piecewise"

    def test_e_squared(self, capsys):
        code, out, _ = run(capsys, "optimal", "--s0", 1, "--s1", repr(math.e**2), "--zt2", 0.5)
        assert code == 0 and json.loads(out)["delta_t_max"] == pytest.approx(0.5, abs=1e-15)

    def test_reversed_bounds(self, capsys):
        code, _, err = run(capsys, "optimal", "--s0", 2, "--s1", 1)
        assert code == 2 and "s_hi" in err

    def test_negative_zt2(self, capsys):
        assert run(capsys, "optimal", "--s0", 1, "--s1", 2, "--zt2", -1)[0] == 2

    def test_samples_csv(self, capsys):
        code, out, _ = run(capsys, "optimal", "--s0", 1, "--s1", 2, "--n", 4, "--format", "csv")
        summary, samples = out.split("\n\n")
        assert code == 0
        rows = list(csv.reader(io.StringIO(samples)))
        assert rows[0] == ["x", "S"]
        assert [float(r[1]) for r in rows[1:]] == pytest.approx([1, 1, 4 / 3, 2], rel=1e-15)
        assert "f_max,1.3465735902799727" in summary

    def test_samples_json(self, capsys):
        _, out, _ = run(capsys, "optimal", "--s0", 1, "--s1", 2, "--n", 4)
        assert json.loads(out)["samples"]["S"][-1] == 2.0

    def test_round_trip_through_eval(self, capsys, tmp_path):
        path = tmp_path / "opt.json"
        for bounds in [(1, 2), (0.3, 7.0), (2, 2)]:
            run(capsys, "optimal", "--s0", bounds[0], "--s1", bounds[1], "--out", path)
            code, out, _ = run(capsys, "eval", path)
            expected = 1 + 0.5 * math.log(bounds[1] / bounds[0])
            assert code == 0
            assert json.loads(out)["ratio"] == pytest.approx(expected, rel=1e-12)


class TestEval:
    def test_constant_piecewise(self, capsys, tmp_path):
        p = write_json(tmp_path, {"kind": "piecewise", "segments": [{"from": 0, "to": 1, "type": "constant", "value": 1}]})
        code, out, _ = run(capsys, "eval", p)
        assert code == 0 and json.loads(out)["ratio"] == 1.0

    def test_optimum_document(self, capsys, tmp_path):
        doc = {
            "kind": "piecewise",
            "segments": [
                {"from": 0, "to": 0.5, "type": "constant", "value": 1},
                {"from": 0.5, "to": 0.75, "type": "hyperbolic", "q": 0.5},
                {"from": 0.75, "to": 1, "type": "constant", "value": 2},
            ],
            "bounds": {"s0": 1, "s1": 2},
        }
        code, out, _ = run(capsys, "eval", write_json(tmp_path, doc))
        assert code == 0 and json.loads(out)["ratio"] == pytest.approx(1.3465736, abs=1e-7)

    def test_gap_is_tiling_error(self, capsys, tmp_path):
        doc = {
            "kind": "piecewise",
            "segments": [
                {"from": 0, "to": 0.4, "type": "constant", "value": 1},
                {"from": 0.5, "to": 1, "type": "constant", "value": 1},
            ],
        }
        code, _, err = run(capsys, "eval", write_json(tmp_path, doc))
        assert code == 2 and "tiling" in err and "segments.1" in err

    def test_sampled_schemes(self, capsys, tmp_path):
        p = write_json(tmp_path, {"kind": "sampled", "values": [2, 1]})
        assert json.loads(run(capsys, "eval", p, "--scheme", "paper")[1])["ratio"] == 0.5
        _, out, _ = run(capsys, "eval", p, "--scheme", "exact", "--format", "csv")
        assert out.splitlines()[0] == "quantity,value"

    def test_bound_violation(self, capsys, tmp_path):
        p = write_json(tmp_path, {"kind": "sampled", "values": [1, 3, 1], "bounds": {"s0": 1, "s1": 2}})
        code, _, err = run(capsys, "eval", p)
        assert code == 2 and "values.1" in err

    def test_piecewise_bound_violation(self, capsys, tmp_path):
        doc = {"kind": "piecewise", "segments": [{"from": 0, "to": 1, "type": "constant", "value": 3}], "bounds": {"s0": 1, "s1": 2}}
        assert run(capsys, "eval", write_json(tmp_path, doc))[0] == 2

    @pytest.mark.parametrize(
        "doc,field",
        [
            ({"kind": "sampled", "values": [1], "extra": 1}, "extra"),
            ({"kind": "sampled", "values": ["a"]}, "values.0"),
            ({"kind": "sampled"}, "values"),
            ({"kind": "blob"}, "kind"),
            ({"kind": "piecewise", "segments": [{"from": 0, "to": 1, "type": "constant", "q": 1}]}, "q"),
            ({"kind": "sampled", "values": [1], "bounds": {"s0": 1}}, "bounds.s1"),
        ],
    )
    def test_schema_errors_name_field(self, capsys, tmp_path, doc, field):
        code, _, err = run(capsys, "eval", write_json(tmp_path, doc))
        assert code == 2 and field in err

    def test_unparsable_and_missing(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run(capsys, "eval", bad)[0] == 2
        assert run(capsys, "eval", tmp_path / "missing.json")[0] == 2


def test_document_round_trip_is_exact():
    doc = parse_document('{"kind": "sampled", "values": [0.1, 0.30000000000000004, 7]}')
    assert to_profile(doc).values.tolist() == [0.1, 0.30000000000000004, 7.0]
    with pytest.raises(DocumentError):
        parse_document('{"kind": "sampled", "values": [1], "bounds": {"s0": 1, "s1": 2, "s2": 3}}')


class TestOptimize:
    def test_converges(self, capsys, tmp_path):
        out_path = tmp_path / "prof.json"
        code, out, _ = run(capsys, "optimize", "--s0", 1, "--s1", 2, "--n", 2000, "--out", out_path)
        doc = json.loads(out)
        assert code == 0 and doc["converged"]
        assert abs(doc["f_value"] - 1.3465736) <= 1e-3
        assert doc["kkt"]["passed"]
        saved = json.loads(out_path.read_text())
        assert saved["kind"] == "sampled" and len(saved["values"]) == 2000
        code, out, _ = run(capsys, "eval", out_path)
        assert code == 0 and json.loads(out)["ratio"] == doc["f_value"]

    def test_degenerate(self, capsys):
        code, out, _ = run(capsys, "optimize", "--s0", 1, "--s1", 1, "--n", 100)
        assert code == 0 and json.loads(out)["f_value"] == pytest.approx(1.0, rel=1e-15)

    def test_forced_non_convergence(self, capsys):
        code, out, _ = run(capsys, "optimize", "--max-iters", 1, "--s0", 1, "--s1", 10)
        assert code == 3 and json.loads(out)["converged"] is False

    @pytest.mark.parametrize("extra", [["--n", "1"], ["--tol", "0"], ["--max-iters", "0"], ["--s1", "x"]])
    def test_bad_arguments(self, capsys, extra):
        argv = ["optimize", "--s0", "1", "--s1", "2", *extra]
        assert run(capsys, *argv)[0] == 2


class TestSweep:
    def test_columns_and_determinism(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(capsys, "sweep", "--s0", 1, "--ratios", "2,5,10", "--out", a)[0] == 0
        assert run(capsys, "sweep", "--s0", 1, "--ratios", "2,5,10", "--out", b)[0] == 0
        assert a.read_bytes() == b.read_bytes()
        raw = a.read_bytes()
        assert b"\r" not in raw and raw.endswith(b"\n")
        rows = list(csv.reader(io.StringIO(raw.decode())))
        assert tuple(rows[0]) == SWEEP_HEADER
        assert [float(r[2]) for r in rows[1:]] == pytest.approx([1.3465736, 1.8047190, 2.1512925], abs=1e-6)
        assert all(float(r[3]) <= 2e-3 and r[5] == "true" for r in rows[1:])
        assert [float(r[0]) for r in rows[1:]] == [2, 5, 10]

    def test_ratio_one(self, capsys):
        code, out, _ = run(capsys, "sweep", "--s0", 1, "--ratios", "1")
        row = out.splitlines()[1].split(",")
        assert code == 0 and float(row[2]) == 1.0 and float(row[3]) <= 1e-9

    def test_parallel_matches_serial(self, capsys):
        serial = run(capsys, "sweep", "--s0", 1, "--ratios", "3,1.5", "--n", 300, "--init", "random", "--seed", 5)[1]
        parallel = run(capsys, "sweep", "--s0", 1, "--ratios", "3,1.5", "--n", 300, "--init", "random", "--seed", 5, "--jobs", 2)[1]
        assert serial == parallel

    @pytest.mark.parametrize("ratios", ["0.5", "2,abc", ","])
    def test_bad_ratios(self, capsys, ratios):
        assert run(capsys, "sweep", "--s0", 1, "--ratios", ratios)[0] == 2

    def test_unwritable(self, capsys, tmp_path):
        code, _, err = run(capsys, "sweep", "--s0", 1, "--ratios", "2", "--out", tmp_path / "no" / "such" / "x.csv")
        assert code == 2 and "cannot write" in err


class TestVerify:
    def test_all_pass(self, capsys):
        code, out, _ = run(capsys, "verify", "--s0", 1, "--s1", 2, "--n", 2000)
        assert code == 0
        assert "FAIL" not in out and out.count("[PASS]") == 10

    def test_degenerate(self, capsys):
        assert run(capsys, "verify", "--s0", 1, "--s1", 1)[0] == 0

    def test_zero_tolerance_fails(self, capsys):
        code, out, _ = run(capsys, "verify", "--s0", 1, "--s1", 2, "--tol", 0)
        assert code == 1 and "[FAIL]" in out

    def test_bad_arguments(self, capsys):
        assert run(capsys, "verify", "--s0", 1, "--s1", 2, "--tol", -1)[0] == 2
        assert run(capsys, "verify", "--s0", 0, "--s1", 2)[0] == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "seebeckopt", "optimal", "--s0", "1", "--s1", "2", "--format", "csv"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "q,0.5" in proc.stdout.splitlines()


def test_missing_subcommand_is_usage_error(capsys):
    assert run(capsys)[0] == 2
