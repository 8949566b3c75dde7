import numpy as np
import pytest

from ncbm.behavior import BehaviorParams, build_tpm
from ncbm.cli import main
from ncbm.estimation import synthetic_record
from ncbm.formats import fmt, format_log, read_log, read_matrix

EXAMPLE_FLAGS = ["--a", "0.1", "--b", "0.2", "--c", "0.05", "--d", "0.05", "--e", "0.3"]
LOG_HEADER = ("node_id,interval,pkts_forwarded,pkts_received,remaining_power,"
              "power_consumption_rate,initial_energy,recovery_durations\n")


@pytest.fixture(autouse=True)
def no_env_config(monkeypatch):
    monkeypatch.delenv("NCBM_CONFIG", raising=False)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    lines = [line for line in text.splitlines() if not line.startswith("#")]
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


def test_fmt():
    assert fmt(0.6) == "0.600000000000"
    assert fmt(1.0) == "1.00000000000"
    assert fmt(-0.0) == "0.00000000000"
    assert fmt(5) == "5"
    assert fmt(float("nan")) == "nan"


def test_tpm_prints_matrix_and_writes_file(capsys, tmp_path):
    out_file = tmp_path / "p.txt"
    code, out, _ = run(capsys, "tpm", *EXAMPLE_FLAGS, "--out", str(out_file))
    assert code == 0
    assert out.startswith("# ncbm 0.1.0")
    assert "W " in out and "0.800000000000" in out
    text = out_file.read_text()
    assert "# states: W D I L" in text
    np.testing.assert_allclose(read_matrix(out_file), build_tpm(BehaviorParams(0.1, 0.2, 0.05, 0.05, 0.3)))


def test_tpm_validation_exit_code(capsys):
    code, _, err = run(capsys, "tpm", "--a", "1.1", "--b", "0.2", "--c", "0.05", "--d", "0.05", "--e", "0.3")
    assert code == 2
    assert "a=1.1" in err


def test_tpm_missing_param(capsys):
    code, _, err = run(capsys, "tpm", "--a", "0.1")
    assert code == 2 and "missing" in err


def test_config_file_equivalent_to_flags(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# example\na = 0.1\nb = 0.2\nc=0.05\nd = 0.05  # loss\ne = 0.3\n")
    _, from_flags, _ = run(capsys, "tpm", *EXAMPLE_FLAGS)
    _, from_config, _ = run(capsys, "tpm", "--config", str(cfg))
    assert from_flags == from_config


def test_env_config_and_flag_override(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("a = 0.3\nb = 0.2\nc = 0.05\nd = 0.05\ne = 0.3\n")
    monkeypatch.setenv("NCBM_CONFIG", str(cfg))
    _, out, _ = run(capsys, "tpm", "--a", "0.1")
    _, ref, _ = run(capsys, "tpm", *EXAMPLE_FLAGS)
    assert out == ref


def test_unknown_config_key(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("a = 0.1\nalpah = 3\n")
    code, _, err = run(capsys, "tpm", "--config", str(cfg))
    assert code == 2 and "alpah" in err


def test_steady_two_state(capsys, tmp_path):
    out_file = tmp_path / "steady.csv"
    code, out, _ = run(capsys, "steady", "--a", "0.2", "--b", "0.3", "--c", "0", "--d", "0", "--e", "0",
                       "--out", str(out_file))
    assert code == 0
    rows = csv_rows(out)
    assert rows[0]["state"] == "W" and rows[0]["pi"] == "0.600000000000"
    assert out_file.read_text() == out
    assert list(rows[0]) == ["state", "pi", "mean_sojourn", "limiting"]


def test_limiting_unit_means_column_equals_pi(capsys):
    _, out, _ = run(capsys, "limiting", *EXAMPLE_FLAGS)
    for row in csv_rows(out):
        assert row["pi"] == row["limiting"]


def test_limiting_with_per_transition_means(capsys):
    means = ",".join(["2"] * 4 + ["1"] * 12)
    _, out, _ = run(capsys, "limiting", "--a", "0.2", "--b", "0.3", "--c", "0", "--d", "0", "--e", "0",
                    "--sojourn-means", means)
    assert csv_rows(out)[0]["limiting"] == "0.750000000000"


def test_limiting_matches_engine(capsys):
    from ncbm.smp import limiting_distribution
    params = BehaviorParams(0.13, 0.27, 0.08, 0.04, 0.35)
    flags = [x for k, v in zip("abcde", params.as_tuple()) for x in (f"--{k}", repr(v))]
    _, out, _ = run(capsys, "limiting", *flags, "--sojourn-mean", "2.5")
    ss = limiting_distribution(build_tpm(params))
    for row, pi in zip(csv_rows(out), ss.pi):
        assert float(row["pi"]) == pytest.approx(pi, rel=1e-11)


def test_transient(capsys):
    _, out, _ = run(capsys, "transient", "--a", "0.1", "--b", "0", "--c", "0", "--d", "0", "--e", "0",
                    "--steps", "1")
    assert [r["occupancy"] for r in csv_rows(out)][:2] == ["0.900000000000", "0.100000000000"]


def test_compose_single_member_echoes_tpm(capsys, tmp_path):
    members = tmp_path / "members.csv"
    members.write_text("node_id,a,b,c,d,e\nn1,0.1,0.2,0.05,0.05,0.3\n")
    code, out, _ = run(capsys, "compose", str(members))
    assert code == 0
    np.testing.assert_allclose(read_matrix_text(out, tmp_path), build_tpm(BehaviorParams(0.1, 0.2, 0.05, 0.05, 0.3)))


def read_matrix_text(text, tmp_path):
    path = tmp_path / "m.txt"
    path.write_text(text)
    return read_matrix(path)


def test_compose_two_members(capsys, tmp_path):
    members = tmp_path / "members.csv"
    members.write_text("node_id,a,b,c,d,e\nn1,0.1,0.2,0.05,0.05,0.3\nn2,0.1,0.2,0.05,0.05,0.3\n")
    _, out, _ = run(capsys, "compose", str(members))
    q = read_matrix_text(out, tmp_path)
    np.testing.assert_allclose(q[0], [0.977099, 0.015267, 0.003817, 0.003817], atol=1e-6)
    assert "# u = " in out and "# x = " in out
    _, deferred, _ = run(capsys, "compose", str(members), "--deferred-normalization")
    np.testing.assert_allclose(read_matrix_text(deferred, tmp_path), q, atol=1e-12)


def test_compose_degenerate_exit_code(capsys, tmp_path):
    members = tmp_path / "members.csv"
    members.write_text("node_id,a,b,c,d,e\nn1,0.1,0.2,0.05,0.05,1\nn2,0.1,0.2,0.05,0.05,0\n")
    code, _, err = run(capsys, "compose", str(members))
    assert code == 4
    assert "S3" in err and "position 1" in err


def test_compose_malformed_member_file(capsys, tmp_path):
    members = tmp_path / "members.csv"
    members.write_text("node_id,a,b,c,d,e\nn1,0.1,zero,0.05,0.05,1\n")
    code, _, err = run(capsys, "compose", str(members))
    assert code == 5 and "line 2" in err


def test_simulate_absorbing(capsys):
    _, out, _ = run(capsys, "simulate", "--a", "0", "--b", "0.2", "--c", "0", "--d", "0", "--e", "0.3",
                    "--trajectories", "5", "--horizon", "100")
    rows = csv_rows(out)
    assert [float(r["occupancy"]) for r in rows] == [1, 0, 0, 0]
    assert all(float(r["stderr"]) == 0 for r in rows)


def test_simulate_interior_accuracy(capsys):
    _, out, _ = run(capsys, "simulate", *EXAMPLE_FLAGS, "--trajectories", "100", "--horizon", "10000",
                    "--seed", "17")
    rows = csv_rows(out)
    assert list(rows[0]) == ["state", "occupancy", "stderr", "analytic_limiting", "abs_error"]
    assert max(float(r["abs_error"]) for r in rows) <= 0.02


def test_estimate_example_row(capsys, tmp_path):
    log = tmp_path / "log.csv"
    log.write_text(LOG_HEADER + "n1,0,80,100,100,2,200,4\nn2,0,50,50,100,2,200,\n")
    code, out, _ = run(capsys, "estimate", str(log))
    assert code == 0
    rows = {r["node_id"]: r for r in csv_rows(out)}
    assert rows["n1"]["b_raw"] == "0.800000000000"
    assert rows["n1"]["c_raw"] == "1.25000000000"
    assert "c_clamped" in rows["n1"]["flags"].split(";")
    assert rows["n2"]["e"] == "0.00000000000"
    assert "no_recovery_observed" in rows["n2"]["flags"]
    assert rows["n1"]["L_bar"] == "50.0000000000" and rows["n1"]["t_selfish"] == "45.0000000000"


def test_estimate_division_by_zero_is_not_fatal(capsys, tmp_path):
    log = tmp_path / "log.csv"
    log.write_text(LOG_HEADER + "n1,0,0,0,100,2,200,4\n")
    code, out, _ = run(capsys, "estimate", str(log))
    assert code == 0
    row = csv_rows(out)[0]
    assert "b_div_by_zero" in row["flags"] and row["status"] == "undefined"


def test_estimate_malformed_line(capsys, tmp_path):
    log = tmp_path / "log.csv"
    log.write_text(LOG_HEADER + "n1,0,80,100,100,2,200,4\nn2,0,abc,100,100,2,200,4\n")
    code, _, err = run(capsys, "estimate", str(log))
    assert code == 5 and "line 3" in err


def test_estimate_synthetic_round_trip(capsys, tmp_path):
    rng = np.random.default_rng(4)
    truth = []
    records = []
    for k in range(20):
        a, b, d, e = rng.uniform(0.01, 0.5, size=4)
        truth.append((a, b, 1 / b, d, e))
        records.append(synthetic_record(a, b, d, e, eta=10, node_id=f"n{k}"))
    log = tmp_path / "log.csv"
    log.write_text(format_log(records))
    assert len(read_log(log)) == 20
    _, out, _ = run(capsys, "estimate", str(log))
    for row, expected in zip(csv_rows(out), truth):
        got = [float(row[f"{k}_raw"]) for k in "abcde"]
        np.testing.assert_allclose(got, expected, rtol=1e-9)


def test_sweep_dropping_two_points(capsys, tmp_path):
    chart = tmp_path / "c.svg"
    code, out, _ = run(capsys, "sweep", "--scenario", "dropping", "--nodes", "1", "--grid", "2",
                       "--chart", str(chart))
    assert code == 0
    rows = csv_rows(out)
    assert len(rows) == 2 and rows[0]["surv_cluster"] == "1.00000000000"
    svg = chart.read_text()
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert "m=1 cluster" in svg and "survivability" in svg


def test_sweep_loss_default_nodes(capsys):
    _, out, _ = run(capsys, "sweep", "--scenario", "loss", "--nodes", "5,15,25,50")
    rows = csv_rows(out)
    assert len(rows) == 200
    assert list(rows[0]) == ["scenario", "m", "param_name", "param_value", "surv_cluster",
                             "surv_independent", "horizon_steps"]


def test_sweep_infeasible_exit_code(capsys):
    code, _, _ = run(capsys, "sweep", "--scenario", "injection", "--b", "1.0")
    assert code == 6


def test_csv_has_lf_endings(capsys, tmp_path):
    out_file = tmp_path / "s.csv"
    run(capsys, "sweep", "--scenario", "loss", "--nodes", "2", "--grid", "3", "--out", str(out_file))
    data = out_file.read_bytes()
    assert b"\r" not in data and data.endswith(b"\n")
