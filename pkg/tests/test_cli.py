import csv
import io
import json

import pytest

from poissonball.cli import COLUMNS, ConfigError, load_config, main, solve_reports


def run(argv):
    out = io.StringIO()
    code = main(argv, stdout=out)
    return code, out.getvalue()


def test_constants_table():
    code, text = run(["constants", "--n-max", "5"])
    assert code == 0
    row3 = text.splitlines()[1].split()
    assert row3[0] == "3" and row3[3] == "1.5000000000" and row3[4] == "0.2222222222"
    assert len(text.splitlines()) == 4


def test_verify_qc_to_files(tmp_path):
    out = tmp_path / "qc.csv"
    code, text = run(["verify", "--suite", "qc", "--instances", "20", "--out", str(out)])
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert tuple(rows[0]) == COLUMNS and all(r["pass"] == "1" for r in rows)
    summary = json.loads((tmp_path / "qc.json").read_text())
    assert summary == json.loads(text) and summary["failed"] == 0


def test_verify_mainlemma_near_threshold():
    code, text = run(["verify", "--suite", "mainlemma", "--instances", "20", "--a-frac", "0.99"])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(text)))
    a_over = [json.loads(r["params"])["a_over_Cn"] for r in rows if r["name"] == "main_lemma_M"]
    assert max(a_over) == pytest.approx(0.99)


def test_verify_mainlemma_beyond_threshold_fails():
    code, text = run(["verify", "--suite", "mainlemma", "--instances", "20", "--a-frac", "1.2"])
    assert code == 1


def test_verify_geometry_ball():
    code, _ = run(["verify", "--suite", "geometry", "--domain", "ball:1", "--instances", "5"])
    assert code == 0


def test_unknown_suite_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--suite", "nope"])
    assert exc.value.code == 2


def test_bad_domain_is_error():
    code, _ = run(["verify", "--suite", "geometry", "--domain", "torus:1"])
    assert code == 2


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nsuite = lemma9\ninstances = 7\ndim = 4\n")
    assert load_config(cfg)["dim"] == 4
    code, text = run(["verify", "--config", str(cfg), "--dim", "3"])
    rows = list(csv.DictReader(io.StringIO(text)))
    assert code == 0 and len(rows) == 7 and {r["n"] for r in rows} == {"3"}
    cfg.write_text("colour = red\n")
    with pytest.raises(ConfigError):
        load_config(cfg)


def test_tolerance_override():
    code, text = run(["verify", "--suite", "energy", "--instances", "3", "--tol", "0.5"])
    assert code == 0


def test_deterministic_output_across_jobs():
    argv = ["verify", "--suite", "lemma15", "--instances", "12", "--seed", "7"]
    _, first = run(argv)
    _, second = run(argv)
    _, parallel = run(argv + ["--jobs", "2"])
    assert first == second == parallel


def test_seed_changes_output():
    _, a = run(["verify", "--suite", "lemma9", "--instances", "4", "--seed", "1"])
    _, b = run(["verify", "--suite", "lemma9", "--instances", "4", "--seed", "2"])
    assert a != b


def test_solve_converges_with_level():
    err = {lv: {r.name: r.lhs for r in solve_reports(3, lv, count=10)} for lv in (4, 8)}
    assert err[8]["solve_exp_harmonic"] < 1e-3 * err[4]["solve_exp_harmonic"]
    assert err[8]["solve_harmonic"] < 1e-10


def test_solve_command(tmp_path):
    code, _ = run(["solve", "--instances", "10", "--out", str(tmp_path / "s.csv")])
    assert code == 0


def test_rule_cache_env(tmp_path, monkeypatch):
    monkeypatch.setenv("POISSONBALL_RULE_CACHE", str(tmp_path))
    code, _ = run(["solve", "--instances", "5", "--level", "6"])
    assert code == 0
    assert len(list(tmp_path.iterdir())) >= 2
