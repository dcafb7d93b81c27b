import json

import numpy as np
import pytest

from tmes import __version__
from tmes.cli import main
from tmes.csvio import read_columns, read_config


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def arma_csv(tmp_path, capsys):
    path = tmp_path / "arma.csv"
    code, _, _ = run(["simulate", "--model", "arma", "--n", 600, "--seed", 4, "--out", path], capsys)
    assert code == 0
    return path


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_simulate_is_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert run(["simulate", "--model", "garch", "--n", 300, "--seed", 9, "--out", p], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    cfg = read_config(a)
    assert cfg["seed"] == 9 and cfg["command"] == "simulate"
    assert cfg["resolved_model"]["model"] == "garch"
    t, x, y = read_columns(a, ["t", "x", "y"])
    assert t.tolist() == list(range(1, 301)) and np.all(np.isfinite(x))


def test_simulate_to_stdout(capsys):
    code, out, _ = run(["simulate", "--model", "mma", "--n", 20, "--seed", 1, "--L", 3], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# config: ") and lines[1] == "t,x,y" and len(lines) == 22


def test_seed_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("TMES_SEED", "123")
    p = tmp_path / "s.csv"
    run(["simulate", "--model", "arma", "--n", 50, "--out", p], capsys)
    assert read_config(p)["seed"] == 123


def test_invalid_parameter_exits_2(capsys):
    code, _, err = run(["simulate", "--model", "mma", "--phi", 1.2, "--seed", 0], capsys)
    assert code == 2 and "phi must lie in (0, 1)" in err


def test_bad_flag_exits_2(capsys):
    code, _, err = run(["estimate", "--no-such-flag"], capsys)
    assert code == 2 and err.startswith("error:")


def test_estimate_matches_library(arma_csv, tmp_path, capsys):
    from tmes import TimeSeriesPair, empirical_tmes, select_threshold

    out = tmp_path / "est.csv"
    assert run(["estimate", "--input", arma_csv, "--h-max", 4, "--out", out], capsys)[0] == 0
    lag, delta = read_columns(out, ["lag", "delta"])
    x, y = read_columns(arma_csv, ["x", "y"])
    ts = TimeSeriesPair(x, y)
    spec = select_threshold(y, 20)
    assert delta.tolist() == [empirical_tmes(ts, spec, h) for h in range(5)]


def test_estimate_centered_column(arma_csv, capsys):
    code, out, _ = run(["estimate", "--input", arma_csv, "--h-max", 1, "--centered"], capsys)
    assert code == 0 and out.splitlines()[1] == "lag,delta0"


def test_estimate_lag_out_of_range(arma_csv, capsys):
    code, _, err = run(["estimate", "--input", arma_csv, "--h-max", 600], capsys)
    assert code == 2 and "out of range" in err


def test_missing_column_and_missing_file(arma_csv, tmp_path, capsys):
    code, _, err = run(["estimate", "--input", arma_csv, "--x-col", "nope"], capsys)
    assert code == 2 and "missing column 'nope'" in err
    code, _, err = run(["estimate", "--input", tmp_path / "absent.csv"], capsys)
    assert code == 1


def test_bootstrap_outputs_and_rerun(arma_csv, tmp_path, capsys):
    bs, reps, qq = tmp_path / "bs.csv", tmp_path / "reps.csv", tmp_path / "qq.csv"
    argv = ["bootstrap", "--input", arma_csv, "--h-max", 2, "--B", 40, "--seed", 17,
            "--out", bs, "--replicates-out", reps, "--qq-out", qq]
    assert run(argv, capsys)[0] == 0
    lag, delta, lo, hi = read_columns(bs, ["lag", "delta", "lo", "hi"])
    assert lag.tolist() == [0, 1, 2] and np.all(lo <= hi)
    rlag, idx, _ = read_columns(reps, ["lag", "replicate_index", "value"])
    assert rlag.size == 120 and idx.max() == 39
    assert read_columns(qq, ["lag", "theoretical", "sample"])[0].size == 120

    again = tmp_path / "again.csv"
    assert run(["bootstrap", "--config", bs, "--out", again], capsys)[0] == 0
    assert again.read_bytes() == bs.read_bytes()

    threaded = tmp_path / "threaded.csv"
    assert run(argv[:-6] + ["--out", threaded, "--threads", 4], capsys)[0] == 0
    assert threaded.read_bytes() == bs.read_bytes()


def test_flags_override_config(arma_csv, tmp_path, capsys):
    bs = tmp_path / "bs.csv"
    run(["bootstrap", "--input", arma_csv, "--h-max", 1, "--B", 20, "--seed", 1, "--out", bs], capsys)
    out = tmp_path / "bs2.csv"
    run(["bootstrap", "--config", bs, "--B", 25, "--out", out], capsys)
    cfg = read_config(out)
    assert cfg["B"] == 25 and cfg["seed"] == 1 and cfg["h_max"] == 1


def test_config_for_other_command_is_rejected(arma_csv, tmp_path, capsys):
    est = tmp_path / "est.csv"
    run(["estimate", "--input", arma_csv, "--h-max", 1, "--out", est], capsys)
    code, _, err = run(["bootstrap", "--config", est], capsys)
    assert code == 2 and "config is for 'estimate'" in err


@pytest.mark.parametrize("argv, expected", [
    (["arma-extremogram", "--h", 1], 0.5000160005),
    (["mma-cdf", "--x", 1.0], 0.003345),
    (["copula-tmes", "--rho-h", 0.5, "--mean-x", 1.0, "--delta0", 3.0], 2.0),
    (["mma-delta", "--h", 0], 4.0581),
])
def test_oracle_kinds(argv, expected, capsys):
    code, out, _ = run(["oracle", *argv], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["value"] == pytest.approx(expected, abs=1e-4)
    assert payload["config"]["kind"] == argv[0]


def test_oracle_monte_carlo(capsys):
    argv = ["oracle", "mc-delta0", "--model", "arma", "--paths", 10, "--path-len", 2000, "--seed", 3]
    code, out, _ = run(argv, capsys)
    payload = json.loads(out)
    assert code == 0 and payload["method"] == "monte_carlo" and payload["error_estimate"] > 0


def test_oracle_usage_errors(capsys):
    assert run(["oracle"], capsys)[0] == 2
    assert run(["oracle", "mma-cdf"], capsys)[0] == 2
    assert run(["oracle", "nonsense"], capsys)[0] == 2


def _dated(path, n, seed, start_day=1):
    rng = np.random.default_rng(seed)
    rows = [f"2020-{1 + (i + start_day - 1) // 28:02d}-{1 + (i + start_day - 1) % 28:02d},{v!r}"
            for i, v in enumerate(rng.normal(size=n).tolist())]
    path.write_text("date,value\n" + "\n".join(rows) + "\n")
    return path


def test_window_csv_and_json(tmp_path, capsys):
    xp, yp = _dated(tmp_path / "x.csv", 215, 1), _dated(tmp_path / "y.csv", 215, 2)
    out = tmp_path / "w.csv"
    argv = ["window", "--x-csv", xp, "--y-csv", yp, "--window", 210, "--B", 15, "--seed", 5]
    assert run(argv + ["--out", out], capsys)[0] == 0
    cols = read_columns(out, ["lag", "delta0", "lo", "hi"])
    assert cols[0].size == 6 * 4
    assert read_config(out)["lags"] == "0,1,3,7"
    code, text, _ = run(argv + ["--format", "json"], capsys)
    payload = json.loads(text)
    assert payload["columns"] == ["end_date", "lag", "delta0", "lo", "hi"]
    assert len(payload["rows"]) == 24 and payload["rows"][0][0] == "2020-08-14"
    again = tmp_path / "w2.csv"
    assert run(["window", "--config", out, "--out", again], capsys)[0] == 0
    assert again.read_bytes() == out.read_bytes()


def test_window_gap_policy(tmp_path, capsys):
    xp, yp = _dated(tmp_path / "x.csv", 215, 1), _dated(tmp_path / "y.csv", 215, 2, start_day=2)
    base = ["window", "--x-csv", xp, "--y-csv", yp, "--window", 210, "--B", 5, "--seed", 1]
    code, _, err = run(base + ["--policy", "error_on_gap"], capsys)
    assert code == 2 and "calendars differ" in err
    code, out, _ = run(base + ["--lags", "0"], capsys)
    assert code == 0 and len(out.splitlines()) == 2 + 5  # 214 shared dates
