import numpy as np
import pytest
import yaml

from dmlab.errors import ConfigurationError
from dmlab.experiments import ExperimentKit, default_config
from dmlab.harness import (EvalReport, average_report, emit_results,
                           generate_dataset, load_config, run_experiment,
                           run_smoothing_sweep)


def tiny_config(**over):
    cfg = default_config("digital")
    cfg.update({"m": 16, "k": 2, "replications": 1, "seed": 7})
    cfg["train"].update({"epochs": 3, "batch_size": 8})
    cfg["eval_grid"]["n_points"] = 9
    cfg.update(over)
    return cfg


def write_yaml(path, data):
    with open(path, "w") as fh:
        yaml.safe_dump(data, fh)
    return path


def test_load_config_applies_defaults_and_overrides(tmp_path):
    path = write_yaml(tmp_path / "cfg.yaml", {
        "schema_version": 1,
        "experiment": "digital",
        "seed": 42,
        "train": {"epochs": 11},
    })
    cfg = load_config(path)
    assert cfg["seed"] == 42
    assert cfg["train"]["epochs"] == 11
    # Untouched defaults survive the merge.
    assert cfg["train"]["batch_size"] == 256
    assert cfg["payoff"]["strike"] == 100.0


def test_load_config_rejects_unknown_key(tmp_path):
    path = write_yaml(tmp_path / "cfg.yaml", {
        "schema_version": 1, "experiment": "digital", "mystery": 1})
    with pytest.raises(ConfigurationError):
        load_config(path)
    nested = write_yaml(tmp_path / "cfg2.yaml", {
        "schema_version": 1, "experiment": "digital",
        "train": {"momentum": 0.9}})
    with pytest.raises(ConfigurationError):
        load_config(nested)


def test_load_config_rejects_bad_schema_and_shape(tmp_path):
    path = write_yaml(tmp_path / "cfg.yaml", {
        "schema_version": 2, "experiment": "digital"})
    with pytest.raises(ConfigurationError):
        load_config(path)
    missing = write_yaml(tmp_path / "cfg2.yaml", {"schema_version": 1})
    with pytest.raises(ConfigurationError):
        load_config(missing)
    not_map = tmp_path / "cfg3.yaml"
    not_map.write_text("- just\n- a\n- list\n")
    with pytest.raises(ConfigurationError):
        load_config(not_map)
    scalar_over_map = write_yaml(tmp_path / "cfg4.yaml", {
        "schema_version": 1, "experiment": "digital", "train": 5})
    with pytest.raises(ConfigurationError):
        load_config(scalar_over_map)


def test_generate_dataset_deterministic_and_shared_paths():
    cfg = tiny_config()
    kit = ExperimentKit(cfg)
    a = generate_dataset(cfg, kit, "lrm", 0)
    b = generate_dataset(cfg, kit, "lrm", 0)
    for s, t in zip(a, b):
        assert np.array_equal(s.input, t.input)
        assert s.value_label == t.value_label
        assert np.array_equal(s.delta_label, t.delta_label)
    # A different method sees the same paths, so value labels match.
    c = generate_dataset(cfg, kit, "standard", 0)
    for s, t in zip(a, c):
        assert np.array_equal(s.input, t.input)
        assert s.value_label == t.value_label
        assert t.delta_label is None
    # A different replication draws different spots.
    d = generate_dataset(cfg, kit, "lrm", 1)
    assert not all(np.array_equal(s.input, t.input) for s, t in zip(a, d))


def test_run_experiment_reports_and_average():
    cfg = tiny_config(methods=["standard", "lrm"], replications=2)
    reports, failures = run_experiment(cfg)
    assert failures == []
    # Two methods, two replications each, plus one average per method.
    assert len(reports) == 6
    for method in ("standard", "lrm"):
        per_rep = [r for r in reports
                   if r.method == method and r.replication is not None]
        avg = [r for r in reports
               if r.method == method and r.replication is None]
        assert len(per_rep) == 2 and len(avg) == 1
        assert np.allclose(avg[0].pred_price,
                           np.mean([r.pred_price for r in per_rep], axis=0))
        # Averaging predictions never hurts the worst replication.
        assert avg[0].price_rmse <= max(r.price_rmse for r in per_rep) + 1e-12


def test_average_of_single_report_is_identity():
    cfg = tiny_config()
    reports, _ = run_experiment(cfg)
    single = [r for r in reports
              if r.replication == 0 and r.method == "standard"]
    avg = average_report(single)
    assert np.array_equal(avg.pred_price, single[0].pred_price)
    assert np.array_equal(avg.pred_delta, single[0].pred_delta)


def test_eval_report_rmse_zero_against_itself():
    grid = np.linspace(40.0, 160.0, 5)
    vals = np.linspace(0.0, 1.0, 5)
    rpt = EvalReport(experiment="digital", method="oracle", replication=0,
                     m=0, grid=grid, pred_price=vals, oracle_price=vals,
                     pred_delta=vals, oracle_delta=vals)
    assert rpt.price_rmse == 0.0
    assert rpt.delta_rmse == 0.0
    assert rpt.gamma_rmse is None
    assert rpt.price_rmse_pct == 0.0


def test_price_rmse_pct_definition():
    grid = np.array([1.0, 2.0])
    rpt = EvalReport(experiment="digital", method="x", replication=0, m=0,
                     grid=grid,
                     pred_price=np.array([1.1, 2.1]),
                     oracle_price=np.array([1.0, 2.0]),
                     pred_delta=np.zeros(2), oracle_delta=np.zeros(2))
    assert rpt.price_rmse_pct == pytest.approx(
        100.0 * rpt.price_rmse / 1.5, rel=1e-12)


def test_emit_results_round_trip_and_determinism(tmp_path):
    cfg = tiny_config()
    reports, failures = run_experiment(cfg)
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    paths1 = emit_results(reports, failures, cfg, out1)
    paths2 = emit_results(reports, failures, cfg, out2)
    assert [p.name for p in paths1] == [p.name for p in paths2]
    for p1, p2 in zip(paths1, paths2):
        assert p1.read_bytes() == p2.read_bytes()

    grid_files = [p for p in paths1 if p.name.endswith("_grid.csv")]
    assert grid_files
    rpt = reports[0]
    rows = grid_files[0].read_text().splitlines()
    header = rows[0].split(",")
    assert header[:3] == ["spot", "pred_price", "oracle_price"]
    parsed = np.array([[float(v) for v in line.split(",")]
                       for line in rows[1:]])
    assert parsed.shape[0] == rpt.grid.size
    # %.12g formatting round-trips to within one ulp for these scales.
    assert np.allclose(parsed[:, 0], rpt.grid, rtol=1e-11, atol=0)

    meta = yaml.safe_load((out1 / "metadata.yaml").read_text())
    assert meta["config"]["seed"] == cfg["seed"]
    assert meta["failures"] == []
    assert meta["artifact_version"].startswith("dmlab-")

    summary = (out1 / "summary.csv").read_text().splitlines()
    assert summary[0].split(",")[:3] == ["method", "m", "replication"]
    assert len(summary) == 1 + len(reports)


def test_run_smoothing_sweep_rows(tmp_path):
    cfg = default_config("smoothing_sweep")
    cfg.update({"m": 16, "k": 2, "replications": 1, "seed": 7,
                "eps_multipliers": [0.5, 2.0]})
    cfg["train"].update({"epochs": 3, "batch_size": 8})
    cfg["eval_grid"]["n_points"] = 9
    rows, reports, failures = run_smoothing_sweep(cfg)
    assert failures == []
    labels = [r["label"] for r in rows]
    assert labels == ["smoothed_eps_0.5", "smoothed_eps_2", "standard", "lrm"]
    assert rows[0]["eps_multiplier"] == 0.5
    assert rows[2]["eps_multiplier"] is None
    for row in rows:
        assert row["price_rmse"] > 0.0
        assert row["delta_rmse"] > 0.0
    paths = emit_results(reports, failures, cfg, tmp_path, sweep_rows=rows)
    sweep = [p for p in paths if p.name == "sweep.csv"]
    assert len(sweep) == 1
    lines = sweep[0].read_text().splitlines()
    assert lines[0].startswith("label,eps_multiplier")
    assert len(lines) == 1 + len(rows)
