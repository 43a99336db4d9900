import csv
import io
import json
import math

import pytest

from dunkl_czo_lab import cli, reports
from dunkl_czo_lab.errors import ConfigError, MissingReports
from dunkl_czo_lab.suites import Check, SuiteResult


def _run(tmp_path, *extra):
    return cli.main(["run", "--out", str(tmp_path), *extra])


def _files(run_dir):
    return {p.name: p.read_bytes() for p in sorted(run_dir.iterdir())}


def test_run_writes_deterministic_reports(tmp_path, capsys):
    args = ("--group", "z2xz2", "--suite", "geometry,lifting", "--seed", "3")
    assert _run(tmp_path / "a", *args) == 0
    assert _run(tmp_path / "b", *args) == 0
    (da,), (db,) = list((tmp_path / "a").iterdir()), list((tmp_path / "b").iterdir())
    assert _files(da) == _files(db)
    report = json.loads((da / "geometry.json").read_text(encoding="utf-8"))
    assert report["exit_status"] == 0 and report["config"]["seed"] == 3
    text = (da / "geometry.json").read_text(encoding="utf-8")
    assert text == reports.dumps(report)  # keys sorted, stable layout
    for csv_path in da.glob("*.csv"):
        rows = list(csv.reader(io.StringIO(csv_path.read_text(encoding="utf-8"))))
        assert rows and all(len(r) == len(rows[0]) for r in rows)
    assert "PASS" in capsys.readouterr().out


def test_timestamped_directories_do_not_collide(tmp_path):
    a = reports.new_run_dir(tmp_path)
    b = reports.new_run_dir(tmp_path)
    assert a != b and a.parent == b.parent == tmp_path


def test_summary_reads_latest_run(tmp_path, capsys):
    assert _run(tmp_path, "--group", "z2", "--suite", "geometry") == 0
    capsys.readouterr()
    assert cli.main(["summary", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "suite" in out.splitlines()[1] and "geometry" in out


def test_summary_without_reports(tmp_path, capsys):
    assert cli.main(["summary", "--out", str(tmp_path / "nothing")]) == 1
    assert "error" in capsys.readouterr().err
    with pytest.raises(MissingReports):
        reports.latest_run(tmp_path)


def test_config_file_and_flag_overrides(tmp_path):
    (tmp_path / "g.json").write_text(json.dumps({"type": "I2(m)", "m": 4, "dimension": 2, "kappa": [1.0, 0.5]}))
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"group": "g.json", "suites": ["geometry"], "seed": 5}))
    args = cli.make_parser().parse_args(["run", "--config", str(cfg_path), "--kappa", "2", "--seed", "9"])
    cfg = cli.build_config(args)
    assert cfg.seed == 9 and cfg.suite_list == ["geometry"]
    spec = cfg.root_system()
    assert spec.coxeter_m == 4 and set(spec.kappa) == {2.0}


@pytest.mark.parametrize("bad", [{"suites": ["nope"]}, {"kappa": [-1]}, {"colour": "red"}, {"budget": "huge"}])
def test_bad_configs_exit_one(tmp_path, bad, capsys):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(bad))
    assert cli.main(["run", "--config", str(p), "--out", str(tmp_path)]) == 1
    assert "error" in capsys.readouterr().err


def test_unreadable_config():
    with pytest.raises(ConfigError):
        cli.load_config("/nonexistent/cfg.json")


def _result(*checks):
    res = SuiteResult("x")
    for kind, value in checks:
        res.add(f"c{len(res.checks)}", "chamber", kind, value, 1.0)
    return res


def test_exit_codes():
    assert reports.exit_status([_result(("hard", 0.5), ("soft", 0.5))]) == reports.EXIT_OK
    assert reports.exit_status([_result(("hard", 0.5), ("soft", 2.0))]) == reports.EXIT_DRIFT
    assert reports.exit_status([_result(("hard", 2.0), ("soft", 2.0))]) == reports.EXIT_HARD_FAILURE
    assert reports.exit_status([_result(("info", 9.0))]) == reports.EXIT_OK


def test_check_status_and_non_finite_values():
    c = Check("s", "n", "a", "hard", math.nan, 1.0, "le")
    assert not c.passed and c.status == "fail"
    assert json.loads(reports.dumps({"v": math.inf}))["v"] == "inf"
    assert Check("s", "n", "a", "soft", 3.0, 1.0, "ge").status == "pass"


def test_csv_header_and_float_repr():
    text = reports.csv_text([{"a": 0.1, "b": 1}, {"b": 2, "c": "z"}])
    assert text.splitlines() == ["a,b,c", "0.1,1,", ",2,z"]
