import hashlib
import json

import numpy as np
import pytest

from invex2d.data_handling.corpus import NAMED_BOUNDARY_INVEX, NAMED_INSTANCES
from invex2d.data_handling.export import BOUNDARY_COLUMNS, read_boundary_csv
from invex2d.main import EXIT_INCONCLUSIVE, EXIT_PASSED, EXIT_USAGE, EXIT_VIOLATED, configure_logging, main, run


def test_crescent_file_is_boundary_invex(problems_dir):
    path = problems_dir / "crescent.nlp2"
    code, report = run(["check", str(path), "--mode", "boundary"])
    assert code == EXIT_PASSED
    assert report.verdicts["boundary"] == "boundary-invex"
    assert report.input_digest == hashlib.sha256(path.read_text(encoding="utf-8").encode("utf-8")).hexdigest()


def test_anti_disk_weak_check_reports_witness(problems_dir):
    code, report = run(["check", str(problems_dir / "antidisk.nlp2"), "--mode", "weak"])
    assert code == EXIT_VIOLATED
    assert report.verdicts["weak"] == "violated"
    assert all(w["constraint"] == "hole" for w in report.witnesses)
    assert any(np.allclose(w["point"], [0.0, 1.0], atol=1e-6) for w in report.witnesses)


def test_kt_empirical_mode():
    code, report = run(["check", "builtin:anti-disk", "--mode", "kt-empirical"])
    assert code == EXIT_VIOLATED
    assert max(report.details["kkt_gaps"]) == pytest.approx(3.0, abs=1e-3)
    assert report.witnesses


@pytest.mark.parametrize("name", sorted(NAMED_INSTANCES))
def test_exit_codes_over_named_instances(name):
    code, _ = run(["check", f"builtin:{name}", "--mode", "boundary"])
    assert code == (EXIT_PASSED if NAMED_BOUNDARY_INVEX[name] else EXIT_VIOLATED)


def test_opf_thermal():
    code, report = run(["opf", "--verify", "thermal"])
    assert code == EXIT_PASSED
    assert report.verdicts == {"thermal": "pass"}
    assert report.details["thermal"].psi_residual < 1e-10


def test_opf_flags_override_canonical_values():
    code, report = run(["opf", "--su", "2.0", "--c2", "0.3", "--verify", "thermal"])
    assert code in (EXIT_PASSED, EXIT_VIOLATED)
    assert report.details["params"]["s_u"] == 2.0
    assert report.details["params"]["c2"] == 0.3


def test_opf_parameter_outside_window_is_an_error():
    code, report = run(["opf", "--theta-hi", "0.8", "--verify", "thermal"])
    assert code == EXIT_INCONCLUSIVE
    assert "ParameterWindowError" in report.details["error"]


@pytest.mark.parametrize(
    "argv",
    [["bogus"], ["check", "builtin:unit-disk"], ["check", "builtin:unit-disk", "--mode", "strong"], ["oracle"]],
)
def test_usage_errors(argv):
    code, report = run(argv)
    assert code == EXIT_USAGE
    assert report is None


def test_missing_inputs_are_errors(tmp_path):
    assert run(["kkt", str(tmp_path / "missing.nlp2")])[0] == EXIT_INCONCLUSIVE
    assert run(["kkt", "builtin:no-such-instance"])[0] == EXIT_INCONCLUSIVE


def test_trace_writes_csv(tmp_path):
    out = tmp_path / "boundary.csv"
    code, report = run(["trace", "builtin:unit-disk", "--out", str(out)])
    assert code == EXIT_PASSED
    rows = read_boundary_csv(out)
    assert tuple(rows[0]) == BOUNDARY_COLUMNS
    assert len(rows) == report.details["rows_written"]
    assert {row["active"] for row in rows} == {"disk"}
    assert report.details["components"][0]["simple"]


def test_kkt_and_oracle_commands():
    code, report = run(["kkt", "builtin:anti-disk"])
    assert code == EXIT_PASSED
    assert report.details["kkt_gap"] == pytest.approx(3.0, abs=1e-6)
    code, report = run(["oracle", "builtin:unit-disk", "--grid", "101"])
    assert code == EXIT_PASSED
    assert report.details["global_max"].best_value == pytest.approx(1.0, abs=1e-6)


def test_reports_are_deterministic_apart_from_timings():
    argv = ["check", "builtin:crescent", "--mode", "boundary", "--seed", "7"]
    first, second = (json.loads(run(argv)[1].to_json()) for _ in range(2))
    assert first.pop("timings").keys() == second.pop("timings").keys()
    assert first == second
    assert first["seed"] == 7


def test_main_prints_json(capsys):
    assert main(["check", "builtin:unit-disk", "--mode", "weak", "--json"]) == EXIT_PASSED
    document = json.loads(capsys.readouterr().out)
    assert document["verdicts"] == {"weak": "weakly-boundary-invex"}
    assert document["exit_code"] == EXIT_PASSED


def test_unknown_log_level_falls_back(monkeypatch):
    monkeypatch.setenv("INVEX2D_LOG", "chatty")
    configure_logging()
