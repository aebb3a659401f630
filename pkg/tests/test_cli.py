"""End-to-end command-line coverage via main(argv)."""

import json
import math

import numpy as np
import pytest

from degfit.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_version_string(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    assert out.startswith("degfit ")
    assert "graph-json v1" in out and "degrees-csv v1" in out


def test_missing_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


# ---------------------------------------------------------------------------
# mean


def test_mean_finite_at_zero(capsys):
    code, out, _ = run(capsys, "mean", "--regime", "finite", "--r", "5", "--t", "0")
    assert code == 0
    obj = json.loads(out)
    assert obj["mu"] == pytest.approx(2.0, abs=1e-12)
    assert obj["mu_prime"] == pytest.approx(-2.0, abs=1e-12)
    assert obj["z1"] == pytest.approx(math.log(5.0), rel=1e-14)
    assert obj["t"] == 0.0


def test_mean_continuous(capsys):
    code, out, _ = run(capsys, "mean", "--regime", "continuous", "--t", "2.0")
    assert code == 0
    obj = json.loads(out)
    assert obj["mu"] == pytest.approx(0.5, rel=1e-14)
    assert obj["mu_prime"] == pytest.approx(-0.25, rel=1e-14)


def test_mean_outside_domain_is_input_error(capsys):
    code, _, err = run(capsys, "mean", "--regime", "continuous", "--t", "-1.0")
    assert code == 2
    assert err.startswith("degfit: ")


def test_regime_flag_consistency(capsys):
    code, _, err = run(capsys, "mean", "--regime", "finite", "--t", "0")
    assert code == 2 and "--r" in err
    code, _, err = run(capsys, "mean", "--regime", "continuous", "--r", "3", "--t", "1")
    assert code == 2 and "--r" in err


# ---------------------------------------------------------------------------
# check


def test_check_non_graphic_continuous(capsys, tmp_path):
    d = write(tmp_path, "d.csv", "5,2,2\n")
    code, out, _ = run(capsys, "check", "--regime", "continuous", "--degrees", d)
    assert code == 3
    obj = json.loads(out)
    assert obj["graphic"] is False


def test_check_graphic_finite(capsys, tmp_path):
    d = write(tmp_path, "d.csv", "4,4,4\n")
    code, out, _ = run(capsys, "check", "--regime", "finite", "--r", "3", "--degrees", d)
    assert code == 0
    assert json.loads(out)["graphic"] is True


def test_check_fractional_degrees_rejected_for_discrete(capsys, tmp_path):
    d = write(tmp_path, "d.csv", "1.5,1.5,1\n")
    code, _, err = run(capsys, "check", "--regime", "infinite", "--degrees", d)
    assert code == 2
    assert err.startswith("degfit: ")


def test_check_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "check", "--regime", "continuous", "--degrees",
                       str(tmp_path / "absent.csv"))
    assert code == 2
    assert err.startswith("degfit: ")


# ---------------------------------------------------------------------------
# sample and fit round trip


def test_sample_then_fit_round_trip(capsys, tmp_path):
    theta = write(tmp_path, "theta.csv", ",".join(["0.7"] * 25) + "\n")
    graph_out = str(tmp_path / "g.json")
    degrees_out = str(tmp_path / "d.csv")
    code, _, _ = run(
        capsys, "sample", "--regime", "continuous", "--theta", theta,
        "--seed", "11", "--out", graph_out, "--degrees-out", degrees_out,
    )
    assert code == 0
    g = json.loads(open(graph_out).read())
    assert set(g) == {"n", "regime", "edges"}
    assert g["n"] == 25 and g["regime"] == {"kind": "continuous"}

    code, out, _ = run(capsys, "fit", "--regime", "continuous", "--degrees", degrees_out)
    assert code == 0
    rep = json.loads(out)
    assert rep["converged"] is True
    assert rep["residual_inf"] <= 1e-8
    assert len(rep["theta_hat"]) == 25


def test_sample_identical_seed_identical_bytes(capsys, tmp_path):
    theta = write(tmp_path, "theta.csv", "0.5,0.6,0.7,0.8\n")
    out1 = str(tmp_path / "g1.json")
    out2 = str(tmp_path / "g2.json")
    for out in (out1, out2):
        code, _, _ = run(capsys, "sample", "--regime", "infinite", "--theta", theta,
                         "--seed", "3", "--stream", "9", "--out", out)
        assert code == 0
    assert open(out1, "rb").read() == open(out2, "rb").read()


def test_sample_distinct_stream_differs(capsys, tmp_path):
    theta = write(tmp_path, "theta.csv", ",".join(["0.5"] * 12) + "\n")
    out1 = str(tmp_path / "g1.json")
    out2 = str(tmp_path / "g2.json")
    run(capsys, "sample", "--regime", "continuous", "--theta", theta,
        "--seed", "3", "--stream", "0", "--out", out1)
    run(capsys, "sample", "--regime", "continuous", "--theta", theta,
        "--seed", "3", "--stream", "1", "--out", out2)
    assert open(out1).read() != open(out2).read()


def test_fit_closed_form_continuous(capsys, tmp_path):
    d = write(tmp_path, "d.csv", "2,2,2\n")
    code, out, _ = run(capsys, "fit", "--regime", "continuous", "--degrees", d)
    assert code == 0
    rep = json.loads(out)
    assert rep["theta_hat"] == pytest.approx([0.5, 0.5, 0.5], abs=1e-10)


def test_fit_no_mle_exit_code(capsys, tmp_path):
    d = write(tmp_path, "d.csv", "3,2,1\n")
    code, out, _ = run(capsys, "fit", "--regime", "continuous", "--degrees", d)
    assert code == 3
    obj = json.loads(out)
    assert obj["error"] == "no-mle"
    assert "detail" in obj


def test_fit_divergence_exit_code(capsys, tmp_path):
    d = write(tmp_path, "d.csv", "2,2,2\n")
    code, out, _ = run(capsys, "fit", "--regime", "finite", "--r", "2", "--degrees", d)
    assert code == 3
    rep = json.loads(out)
    assert rep["diverged"] is True and rep["converged"] is False
    assert rep["theta_hat"] is None


def test_fit_trace_csv(capsys, tmp_path):
    d = write(tmp_path, "d.csv", "3,4,5,4\n")
    trace = str(tmp_path / "trace.csv")
    code, _, _ = run(capsys, "fit", "--regime", "finite", "--r", "4",
                     "--degrees", d, "--trace", trace)
    assert code == 0
    lines = open(trace).read().splitlines()
    assert lines[0] == "iter,step_inf,residual_inf"
    assert lines[1].split(",")[0] == "1"
    steps = [float(l.split(",")[1]) for l in lines[1:]]
    assert steps[-1] < steps[0]


def test_fit_theta0_start(capsys, tmp_path):
    d = write(tmp_path, "d.csv", "2,2,2\n")
    theta0 = write(tmp_path, "theta0.csv", "0.5,0.5,0.5\n")
    code, out, _ = run(capsys, "fit", "--regime", "continuous", "--degrees", d,
                       "--theta0", theta0)
    assert code == 0
    assert json.loads(out)["iterations"] == 0


def test_fit_malformed_degrees(capsys, tmp_path):
    d = write(tmp_path, "d.csv", "2,,2\n")
    code, _, err = run(capsys, "fit", "--regime", "continuous", "--degrees", d)
    assert code == 2
    assert err.startswith("degfit: ")


def test_fit_threads_flag_validated(capsys, tmp_path):
    d = write(tmp_path, "d.csv", "2,2,2\n")
    code, _, err = run(capsys, "fit", "--regime", "continuous", "--degrees", d,
                       "--threads", "0")
    assert code == 2
    code1, out1, _ = run(capsys, "fit", "--regime", "continuous", "--degrees", d,
                         "--threads", "1")
    code4, out4, _ = run(capsys, "fit", "--regime", "continuous", "--degrees", d,
                         "--threads", "4")
    assert code1 == code4 == 0
    assert out1 == out4


# ---------------------------------------------------------------------------
# experiment


def config_file(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def test_experiment_trace_outputs(capsys, tmp_path):
    cfg = config_file(tmp_path, "cfg.json", {
        "regime": {"kind": "finite", "r": 2},
        "theta_law": {"kind": "uniform", "lo": -0.8, "hi": 0.8},
        "seed": 5,
        "n": 20,
    })
    out_dir = tmp_path / "out"
    code, out, _ = run(capsys, "experiment", "--kind", "trace",
                       "--config", cfg, "--out", str(out_dir))
    assert code == 0
    summary = json.loads(out)
    assert summary["existed"] is True and summary["converged"] is True
    assert "contraction" in summary
    assert (out_dir / "trace.csv").exists()
    assert (out_dir / "summary.json").exists()
    assert (out_dir / "trace.png").stat().st_size > 0
    on_disk = json.loads((out_dir / "summary.json").read_text())
    assert on_disk == summary


def test_experiment_consistency_outputs(capsys, tmp_path):
    cfg = config_file(tmp_path, "cfg.json", {
        "regime": {"kind": "continuous"},
        "theta_law": {"kind": "symmetric", "base": 0.75, "jitter": 0.25},
        "seed": 17,
        "n_values": [10, 20],
        "replicates": 3,
    })
    out_dir = tmp_path / "out"
    code, out, _ = run(capsys, "experiment", "--kind", "consistency",
                       "--config", cfg, "--out", str(out_dir))
    assert code == 0
    lines = (out_dir / "consistency.csv").read_text().splitlines()
    assert lines[0] == "n,replicate,existed,converged,iterations,err_inf,err_scaled"
    assert len(lines) == 1 + 2 * 3
    assert (out_dir / "consistency.png").stat().st_size > 0
    summary = json.loads(out)
    assert set(summary["per_n"]) == {"10", "20"}


def test_experiment_scatter_outputs(capsys, tmp_path):
    cfg = config_file(tmp_path, "cfg.json", {
        "regime": {"kind": "infinite"},
        "theta_law": {"kind": "symmetric", "base": 0.75, "jitter": 0.25},
        "seed": 41,
        "n": 30,
    })
    out_dir = tmp_path / "out"
    code, out, _ = run(capsys, "experiment", "--kind", "scatter",
                       "--config", cfg, "--out", str(out_dir))
    assert code == 0
    lines = (out_dir / "scatter.csv").read_text().splitlines()
    assert lines[0] == "vertex,theta_true,theta_hat"
    assert len(lines) == 31
    assert (out_dir / "scatter.png").stat().st_size > 0
    assert json.loads(out)["existed"] is True


def test_experiment_trace_without_mle_exits_3(capsys, tmp_path):
    cfg = config_file(tmp_path, "cfg.json", {
        "regime": {"kind": "infinite"},
        "theta_law": {"kind": "symmetric", "base": 1.5, "jitter": 0.2},
        "seed": 0,
        "n": 4,
    })
    out_dir = tmp_path / "out"
    code, out, _ = run(capsys, "experiment", "--kind", "trace",
                       "--config", cfg, "--out", str(out_dir))
    assert code == 3
    assert json.loads(out)["existed"] is False
    # outputs still written for inspection
    assert (out_dir / "trace.csv").exists()


def test_experiment_rerun_byte_identical(capsys, tmp_path):
    cfg = config_file(tmp_path, "cfg.json", {
        "regime": {"kind": "continuous"},
        "theta_law": {"kind": "symmetric", "base": 0.75, "jitter": 0.25},
        "seed": 17,
        "n_values": [10, 20],
        "replicates": 2,
    })
    outs = []
    for name in ("a", "b"):
        out_dir = tmp_path / name
        code, _, _ = run(capsys, "experiment", "--kind", "consistency",
                         "--config", cfg, "--out", str(out_dir))
        assert code == 0
        outs.append((out_dir / "consistency.csv").read_bytes())
    assert outs[0] == outs[1]


def test_experiment_malformed_config(capsys, tmp_path):
    bad = write(tmp_path, "cfg.json", "{not json")
    code, _, err = run(capsys, "experiment", "--kind", "trace",
                       "--config", bad, "--out", str(tmp_path / "out"))
    assert code == 2
    assert "malformed config" in err


def test_experiment_unknown_kind_rejected(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["experiment", "--kind", "walk", "--config", "x", "--out", "y"])
    assert exc.value.code == 2
