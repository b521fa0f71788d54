import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from cychom.cli import main
from cychom.report import RunReport, parse_jsonl

DATA = Path(__file__).resolve().parents[1] / "src" / "cychom" / "data"


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def records(out):
    return parse_jsonl(out)


def strip_timings(recs):
    return [{k: v for k, v in r.items() if k != "timings"} for r in recs]


def test_validate_bundled_passes(capsys):
    code, out = run(capsys, "validate", str(DATA / "A4.alg"))
    recs = records(out)
    assert code == 0
    assert recs[0]["schema"] == "cychom-report/1"
    assert recs[-1]["passed"] is True and recs[-1]["exit_code"] == 0


def test_zero_denominator_is_an_input_error(capsys, tmp_path):
    data = json.loads((DATA / "kdual.alg").read_text())
    data["mult"][1][3] = "1/0"
    path = tmp_path / "zero.alg"
    path.write_text(json.dumps(data))
    code, out = run(capsys, "validate", str(path))
    assert code == 2
    assert "zero denominator" in records(out)[-1]["error"]


def test_broken_leibniz_is_a_math_failure_with_witness(capsys, tmp_path):
    data = json.loads((DATA / "A4.alg").read_text())
    data["diff"].append([3, 1, "1"])
    path = tmp_path / "broken.alg"
    path.write_text(json.dumps(data))
    code, out = run(capsys, "validate", str(path))
    recs = records(out)
    assert code == 1
    failures = recs[1]["failures"]
    assert {f["axiom"] for f in failures} == {"leibniz"}
    assert all(f["witness"] for f in failures)


def test_missing_algebra_is_usage_error(capsys):
    code, out = run(capsys, "validate", "no_such_algebra")
    assert code == 2


def test_suite_needing_second_algebra(capsys):
    code, out = run(capsys, "identities", "--suite", "kunneth", "--algebra", "kdual")
    assert code == 2
    assert "algebra2" in records(out)[-1]["error"]


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["identities", "--suite", "nonsense", "--algebra", "k"])
    assert exc.value.code == 2


def test_appendix_suite_on_dual_numbers(capsys):
    code, out = run(capsys, "identities", "--suite", "appendix", "--algebra", "kdual.alg",
                    "--algebra2", "kdual.alg", "--max-degree", "3")
    recs = records(out)
    assert code == 0
    assert [r["name"] for r in recs[1:-1]] == ["ix", "x", "xi", "xii", "xiii", "xiv"]


def test_connection_suite_on_clifford(capsys):
    code, out = run(capsys, "identities", "--suite", "connection", "--algebra", "clifford_d.alg")
    assert code == 0
    assert records(out)[1]["kind"] == "u-connection"


def test_reports_are_reproducible_up_to_timings(capsys):
    argv = ("identities", "--suite", "kunneth", "--algebra", "random:3", "--algebra2",
            "kdual", "--max-degree", "2", "--seed", "7")
    _, out1 = run(capsys, *argv)
    _, out2 = run(capsys, *argv)
    r1, r2 = records(out1), records(out2)
    assert strip_timings(r1) == strip_timings(r2)
    assert r1[0]["seed"] == 7


def test_mutation_is_detected(capsys):
    code, out = run(capsys, "identities", "--suite", "kunneth", "--algebra", "A4",
                    "--algebra2", "kodd", "--max-degree", "3", "--mutate", "star")
    recs = records(out)
    assert code == 1
    assert recs[0]["inputs"]["mutation"] == "star"
    failed = [r for r in recs[1:-1] if r["passed"] is False]
    assert failed and all(r["witnesses"] for r in failed)


def test_ts_with_clashing_variables(capsys):
    code, out = run(capsys, "ts", "--f", "x^2", "--g", "x^2")
    assert code == 2
    assert "VariableClash" in records(out)[-1]["error"]


def test_homology_of_ground_field(capsys):
    code, out = run(capsys, "homology", "--algebra", "k", "--mode", "periodic", "--trunc", "3")
    recs = records(out)
    assert code == 0
    assert recs[1]["dims"] == {"even": 1, "odd": 0}
    assert recs[1]["passed"] is None


def test_homology_too_large_is_refused(capsys):
    code, out = run(capsys, "homology", "--algebra", "A4", "--trunc", "4", "--max-dim", "50")
    assert code == 2
    assert "ComplexTooLarge" in records(out)[-1]["error"]


def test_text_format_and_output_file(capsys, tmp_path):
    path = tmp_path / "rep.txt"
    code, out = run(capsys, "validate", "kdual", "--format", "text", "--output", str(path))
    assert code == 0
    assert out.splitlines()[-1].startswith("PASS (exit 0")
    assert path.read_text() == out


def test_tampered_report_is_rejected(capsys):
    _, out = run(capsys, "validate", "kdual")
    lines = out.splitlines()
    lines[1] = lines[1].replace('"passed":true', '"passed":false')
    with pytest.raises(ValueError):
        parse_jsonl("\n".join(lines))


def test_informational_results_do_not_fail():
    rep = RunReport("x")
    rep.add("info", "a", None)
    assert rep.passed and rep.exit_code == 0
    rep.add("check", "b", False)
    assert not rep.passed and rep.exit_code == 1


def test_u_window_environment_variable():
    env = dict(os.environ, CYCHOM_MAX_UWINDOW="-3,5")
    proc = subprocess.run([sys.executable, "-m", "cychom", "validate", "k"], env=env,
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert records(proc.stdout)[0]["inputs"]["u_window"] == [-3, 5]
