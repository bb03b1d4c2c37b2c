"""Command-line surface: formats, merging, exit codes, determinism."""

import json
import math

import pytest

from threshold_diffusion import AccuracyError
from threshold_diffusion import cli
from threshold_diffusion.validate import criterion_3

BM_FLAGS = ["--mu1", "0", "--mu2", "0", "--sigma1", "1", "--sigma2", "1", "--a", "0"]


def run(capsys, argv):
    rc = cli.main(argv)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def parse_csv_rows(text):
    rows = []
    for line in text.splitlines():
        if not line or line.startswith("#") or line[0].isalpha():
            continue
        rows.append([float(v) for v in line.split(",")])
    return rows


def test_density_gaussian_points(capsys):
    rc, out, _ = run(capsys, ["density", *BM_FLAGS,
                              "--t", "1", "--x", "0", "--z-grid", "0:1:2"])
    assert rc == 0
    lines = out.splitlines()
    assert lines[0] == "# t=1 x=0"
    assert lines[1] == "z,p"
    rows = parse_csv_rows(out)
    assert rows[0][0] == 0.0
    assert rows[0][1] == pytest.approx(1.0 / math.sqrt(2 * math.pi), rel=1e-12)
    assert rows[1][1] == pytest.approx(math.exp(-0.5) / math.sqrt(2 * math.pi), rel=1e-12)


def test_density_blocks_per_time_and_start(capsys):
    rc, out, _ = run(capsys, ["density", *BM_FLAGS,
                              "--t", "0.5,1", "--x", "0,1", "--z-grid", "-1:1:3"])
    assert rc == 0
    assert out.count("# t=") == 4
    assert len(parse_csv_rows(out)) == 12


def test_density_json(capsys):
    rc, out, _ = run(capsys, ["density", *BM_FLAGS, "--format", "json",
                              "--t", "1", "--x", "0", "--z-grid", "0:1:2"])
    assert rc == 0
    rows = json.loads(out)
    assert [set(r) for r in rows] == [{"t", "x", "z", "p"}] * 2
    assert rows[0]["p"] == pytest.approx(1.0 / math.sqrt(2 * math.pi), rel=1e-12)


def test_potential_json(capsys):
    rc, out, _ = run(capsys, ["potential", "--mu1", "1", "--mu2", "-1",
                              "--sigma1", "1", "--sigma2", "2", "--a", "0",
                              "--q", "1", "--x", "0.3", "--format", "json",
                              "--z-grid", "-1:1:3"])
    assert rc == 0
    rows = json.loads(out)
    assert set(rows[0]) == {"q", "x", "z", "u"}
    assert all(r["u"] > 0 for r in rows)


def test_stationary_point(capsys):
    rc, out, _ = run(capsys, ["stationary", "--mu1", "1", "--mu2", "-1",
                              "--sigma1", "1", "--sigma2", "1", "--a", "0",
                              "--z", "0"])
    assert rc == 0
    assert parse_csv_rows(out) == [[0.0, 1.0]]


def test_value_symmetric_start(capsys):
    rc, out, _ = run(capsys, ["value", "--mu-bar", "0", "--sigma-bar", "2",
                              "--mu-low", "0", "--sigma-low", "1",
                              "--a", "0", "--T", "1", "--x", "0"])
    assert rc == 0
    rows = parse_csv_rows(out)
    assert rows[0][1] == pytest.approx(2.0 / 3.0, abs=1e-3)


def test_exit_lt_table(capsys):
    rc, out, _ = run(capsys, ["exit-lt", "--mu1", "1", "--mu2", "-1",
                              "--sigma1", "1", "--sigma2", "2", "--a", "0",
                              "--x", "0", "--y", "-1", "--z", "1",
                              "--q-grid", "0.5:2:4"])
    assert rc == 0
    assert out.splitlines()[0] == "q,down,up"
    rows = parse_csv_rows(out)
    assert len(rows) == 4
    for q, down, up in rows:
        assert 0.0 < down < 1.0 and 0.0 < up < 1.0
        assert down + up < 1.0
    downs = [r[1] for r in rows]
    assert downs == sorted(downs, reverse=True)


def test_simulate_csv_and_summary_streams(capsys, tmp_path):
    argv = ["simulate", *BM_FLAGS, "--x0", "0", "--horizon", "0.1", "--dt", "0.01",
            "--n-paths", "500", "--seed", "7"]
    rc, out, err = run(capsys, argv)
    assert rc == 0
    assert out.splitlines()[0] == "path_index,terminal_value"
    assert len(parse_csv_rows(out)) == 500
    summary = json.loads(err)
    assert summary["n"] == 500 and summary["seed"] == 7

    # with a file target the summary moves to stdout
    target = tmp_path / "paths.csv"
    rc, out, err = run(capsys, argv + ["--out", str(target)])
    assert rc == 0
    assert err == ""
    assert json.loads(out)["n"] == 500
    assert target.read_text().splitlines()[0] == "path_index,terminal_value"


def test_simulate_rerun_is_identical(capsys):
    argv = ["simulate", *BM_FLAGS, "--x0", "0", "--horizon", "0.1", "--dt", "0.01",
            "--n-paths", "500", "--seed", "7"]
    _, first, _ = run(capsys, argv)
    _, second, _ = run(capsys, argv)
    assert first == second


def test_simulate_json_embeds_summary(capsys):
    rc, out, err = run(capsys, ["simulate", *BM_FLAGS, "--x0", "0", "--horizon", "0.1",
                                "--dt", "0.01", "--n-paths", "20", "--seed", "1",
                                "--format", "json"])
    assert rc == 0
    assert err == ""
    doc = json.loads(out)
    assert set(doc) == {"summary", "paths"}
    assert len(doc["paths"]) == 20


@pytest.mark.parametrize("argv", [
    ["density", "--mu1", "0", "--mu2", "0", "--sigma1", "-1", "--sigma2", "1",
     "--a", "0", "--t", "1", "--x", "0", "--z-grid", "0:1:2"],
    ["density", *BM_FLAGS, "--t", "1", "--x", "0", "--z-grid", "0:1:1"],
    ["stationary", "--mu1", "1", "--mu2", "-1", "--sigma1", "1", "--sigma2", "1",
     "--a", "0", "--z", "0", "--z-grid", "0:1:2"],
    ["stationary", "--mu1", "1", "--mu2", "-1", "--sigma1", "1", "--sigma2", "1",
     "--a", "0"],
    ["density", *BM_FLAGS, "--t", "1", "--x", "0", "--z-grid", "0:1:2",
     "--no-such-flag", "1"],
    ["exit-lt", "--mu1", "1", "--mu2", "-1", "--sigma1", "1", "--sigma2", "2",
     "--a", "0", "--x", "5", "--y", "-1", "--z", "1", "--q-grid", "0.5:2:4"],
    ["simulate", *BM_FLAGS, "--x0", "0", "--horizon", "0.1", "--dt", "0.01",
     "--n-paths", "10", "--seed", "1", "--threads", "0"],
])
def test_invalid_requests_exit_2(capsys, argv):
    rc, _, _ = run(capsys, argv)
    assert rc == 2


def test_accuracy_failure_exits_3_and_leaves_no_file(capsys, tmp_path, monkeypatch):
    def broken(problem, x, settings=None):
        raise AccuracyError("synthetic failure", estimate=2.0, error_estimate=1.0)
    monkeypatch.setattr(cli, "value_function", broken)
    target = tmp_path / "values.csv"
    rc, _, err = run(capsys, ["value", "--mu-bar", "0", "--sigma-bar", "2",
                              "--mu-low", "0", "--sigma-low", "1", "--a", "0",
                              "--T", "1", "--x", "0", "--out", str(target)])
    assert rc == 3
    assert "accuracy" in err
    assert not target.exists()


def test_unwritable_target_exits_4(capsys, tmp_path):
    rc, _, _ = run(capsys, ["stationary", "--mu1", "1", "--mu2", "-1",
                            "--sigma1", "1", "--sigma2", "1", "--a", "0",
                            "--z", "0", "--out", str(tmp_path)])
    assert rc == 4


def test_missing_config_exits_4(capsys):
    rc, _, err = run(capsys, ["density", *BM_FLAGS, "--t", "1", "--x", "0",
                              "--z-grid", "0:1:2", "--config", "/no/such/file.cfg"])
    assert rc == 4
    assert "config" in err


def test_config_merge_explicit_flags_win(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nsigma2 = 5\nt = 2\n")
    merged = ["density", "--mu1", "0", "--mu2", "0", "--sigma1", "1", "--sigma2", "3",
              "--a", "0", "--t", "1", "--x", "0", "--z-grid", "0:1:2",
              "--config", str(cfg)]
    rc, out_merged, _ = run(capsys, merged)
    assert rc == 0
    direct = ["density", "--mu1", "0", "--mu2", "0", "--sigma1", "1", "--sigma2", "3",
              "--a", "0", "--t", "1", "--x", "0", "--z-grid", "0:1:2"]
    # explicit --sigma2 and --t override the config file values
    rc, out_direct, _ = run(capsys, direct)
    assert rc == 0
    assert out_merged == out_direct
    assert "# t=1 " in out_merged


def test_config_supplies_missing_flags(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("mu1 = 0\nmu2 = 0\nsigma1 = 1\nsigma2 = 1\na = 0\n")
    rc, out, _ = run(capsys, ["density", "--t", "1", "--x", "0",
                              "--z-grid", "0:1:2", "--config", str(cfg)])
    assert rc == 0
    assert parse_csv_rows(out)[0][1] == pytest.approx(
        1.0 / math.sqrt(2 * math.pi), rel=1e-12)


def test_malformed_config_exits_2(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("sigma2 5\n")
    rc, _, _ = run(capsys, ["density", *BM_FLAGS, "--t", "1", "--x", "0",
                            "--z-grid", "0:1:2", "--config", str(cfg)])
    assert rc == 2


def test_invalid_threads_env_exits_2(capsys, monkeypatch):
    monkeypatch.setenv("THRESHOLD_DIFFUSION_THREADS", "many")
    rc, _, _ = run(capsys, ["simulate", *BM_FLAGS, "--x0", "0", "--horizon", "0.1",
                            "--dt", "0.01", "--n-paths", "10", "--seed", "1"])
    assert rc == 2


def test_validate_subset_passes(capsys, monkeypatch):
    monkeypatch.setattr(cli._validate, "ALL_CRITERIA", (criterion_3,))
    rc, out, _ = run(capsys, ["validate"])
    assert rc == 0
    entries = json.loads(out)
    assert len(entries) == 1
    assert entries[0]["criterion"] == 3
    assert entries[0]["passed"] is True
    assert entries[0]["seconds"] >= 0.0


def test_validate_subset_fails_under_absurd_tolerance(capsys, monkeypatch):
    monkeypatch.setattr(cli._validate, "ALL_CRITERIA", (criterion_3,))
    rc, out, _ = run(capsys, ["validate", "--tol", "1e-15"])
    assert rc == 1
    assert json.loads(out)[0]["passed"] is False


def test_help_exits_0(capsys):
    assert cli.main(["--help"]) == 0
    capsys.readouterr()
