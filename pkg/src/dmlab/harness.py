"""Experiment orchestration: dataset generation, training, evaluation,
replication, and result persistence."""

import copy
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from dmlab import __version__
from dmlab.errors import ConfigurationError
from dmlab.experiments import ExperimentKit, default_config, label_method, method_weights
from dmlab.labels import make_labeled_sample
from dmlab.network import NetworkConfig, TrainConfig, predict, train
from dmlab.rng import TAG_INNER, TAG_SPOTS, substream

SCHEMA_VERSION = 1


@dataclass
class EvalReport:
    """Grid predictions vs oracle values for one (method, replication)."""

    experiment: str
    method: str
    replication: int | None        # None for the replication-averaged report
    m: int
    grid: np.ndarray
    pred_price: np.ndarray
    oracle_price: np.ndarray
    pred_delta: np.ndarray
    oracle_delta: np.ndarray
    pred_gamma: np.ndarray | None = None
    oracle_gamma: np.ndarray | None = None

    @property
    def price_rmse(self) -> float:
        return float(np.sqrt(np.mean((self.pred_price - self.oracle_price) ** 2)))

    @property
    def delta_rmse(self) -> float:
        return float(np.sqrt(np.mean((self.pred_delta - self.oracle_delta) ** 2)))

    @property
    def gamma_rmse(self) -> float | None:
        if self.pred_gamma is None or self.oracle_gamma is None:
            return None
        return float(np.sqrt(np.mean((self.pred_gamma - self.oracle_gamma) ** 2)))

    @property
    def price_rmse_pct(self) -> float:
        scale = float(np.mean(np.abs(self.oracle_price)))
        return 100.0 * self.price_rmse / max(scale, 1e-300)


@dataclass
class RunFailure:
    method: str
    replication: int
    message: str


def _merge_strict(base: dict, override: dict, path=""):
    """Deep-merge override into base, rejecting keys base doesn't know."""
    out = copy.deepcopy(base)
    for key, val in override.items():
        here = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigurationError(f"unknown config key {here!r}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigurationError(f"config key {here!r} must be a mapping")
            out[key] = _merge_strict(base[key], val, here)
        else:
            out[key] = val
    return out


def load_config(path) -> dict:
    """Read a YAML experiment config, filling defaults and rejecting
    unknown keys."""
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigurationError(f"config file {path} is not a mapping")
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise ConfigurationError(
            f"config schema_version must be {SCHEMA_VERSION}")
    if "experiment" not in raw:
        raise ConfigurationError("config must name an experiment")
    base = default_config(raw["experiment"])
    return _merge_strict(base, raw)


def generate_dataset(cfg: dict, kit: ExperimentKit, method,
                     replication: int, spec=None, m=None):
    """Training set for one (method, replication) cell.

    The path substreams are keyed by (seed, replication, point) only, so
    different label methods see identical simulated paths.
    """

    m = cfg["m"] if m is None else m
    seed = cfg["seed"]
    if isinstance(method, str):
        method = label_method(method)
    spots = kit.train_spots(substream(seed, replication, 0, TAG_SPOTS), m)
    samples = []
    for i in range(m):
        x = spots[i] if kit.input_dim > 1 else float(spots[i, 0])
        point_spec = kit.spec_at(x) if spec is None else spec
        gen = substream(seed, replication, i, TAG_INNER)
        samples.append(make_labeled_sample(x, cfg["k"], method, kit.model,
                                           point_spec, gen))
    return samples


def evaluate_on_grid(params, norm, kit: ExperimentKit, grid, oracle,
                     method_name: str, replication, m: int) -> EvalReport:
    price, delta, gamma = predict(params, norm, kit.grid_inputs(grid),
                                  with_gamma=kit.has_gamma_oracle)
    o_price, o_delta, o_gamma = oracle
    return EvalReport(
        experiment=kit.name, method=method_name, replication=replication, m=m,
        grid=grid,
        pred_price=price, oracle_price=o_price,
        pred_delta=delta.mean(axis=1), oracle_delta=o_delta,
        pred_gamma=gamma, oracle_gamma=o_gamma)


def average_report(reports) -> EvalReport:
    """Replication-averaged predictions (the figures' averaging convention)."""
    first = reports[0]
    avg = EvalReport(
        experiment=first.experiment, method=first.method, replication=None,
        m=first.m, grid=first.grid,
        pred_price=np.mean([r.pred_price for r in reports], axis=0),
        oracle_price=first.oracle_price,
        pred_delta=np.mean([r.pred_delta for r in reports], axis=0),
        oracle_delta=first.oracle_delta,
        pred_gamma=(None if first.pred_gamma is None
                    else np.mean([r.pred_gamma for r in reports], axis=0)),
        oracle_gamma=first.oracle_gamma)
    return avg


def _train_config(cfg: dict, method_name: str, seed=None) -> TrainConfig:
    t = cfg["train"]
    return TrainConfig(loss_weights=method_weights(method_name),
                       epochs=int(t["epochs"]), batch_size=int(t["batch_size"]),
                       lr_max=float(t["lr_max"]), lr_min=float(t["lr_min"]),
                       seed=cfg["seed"] if seed is None else seed)


def run_cell(cfg, kit, grid, oracle, method_name, replication,
             spec=None, m=None, method=None) -> EvalReport:
    """One (method, replication): generate, train, evaluate."""
    m = cfg["m"] if m is None else m
    dataset = generate_dataset(cfg, kit, method or method_name, replication,
                               spec=spec, m=m)
    net_cfg = NetworkConfig(input_dim=kit.input_dim,
                            hidden_layers=int(cfg["network"]["hidden_layers"]),
                            hidden_units=int(cfg["network"]["hidden_units"]))
    params, norm = train(dataset, net_cfg, _train_config(cfg, method_name),
                         init_slot=replication)
    return evaluate_on_grid(params, norm, kit, grid, oracle, method_name,
                            replication, m)


def run_experiment(cfg: dict, m=None):
    """All (method, replication) cells plus replication-averaged reports.

    Returns (reports, failures); a failed cell is recorded and skipped
    rather than aborting the run.
    """

    kit = ExperimentKit(cfg)
    grid = kit.grid()
    oracle = kit.oracle_on_grid(grid)
    reports, failures = [], []
    for method_name in cfg["methods"]:
        per_rep = []
        for rep in range(int(cfg["replications"])):
            try:
                rpt = run_cell(cfg, kit, grid, oracle, method_name, rep, m=m)
                per_rep.append(rpt)
                reports.append(rpt)
            except Exception as exc:  # noqa: BLE001 - isolate cell failures
                failures.append(RunFailure(method_name, rep, str(exc)))
        if per_rep:
            reports.append(average_report(per_rep))
    return reports, failures


def run_smoothing_sweep(cfg: dict):
    """Smoothed-pathwise DML across ramp widths, with standard-ML and
    LRM-DML reference rows.

    Returns (rows, reports, failures); each row is a dict with the eps
    multiplier (None for references) and replication-mean RMSE stats.
    """

    kit = ExperimentKit(cfg)
    grid = kit.grid()
    oracle = kit.oracle_on_grid(grid)
    rows, reports, failures = [], [], []

    def sweep_rows(label, method_name, spec, eps_mult):
        method = label_method(method_name, smoothing_eps_multiplier=eps_mult)
        per_rep = []
        for rep in range(int(cfg["replications"])):
            try:
                rpt = run_cell(cfg, kit, grid, oracle, method_name, rep,
                               spec=spec, method=method)
                rpt.method = label
                per_rep.append(rpt)
                reports.append(rpt)
            except Exception as exc:  # noqa: BLE001
                failures.append(RunFailure(label, rep, str(exc)))
        if not per_rep:
            return
        rows.append({
            "label": label,
            "eps_multiplier": eps_mult,
            "price_rmse": float(np.mean([r.price_rmse for r in per_rep])),
            "price_rmse_pct": float(np.mean([r.price_rmse_pct for r in per_rep])),
            "delta_rmse": float(np.mean([r.delta_rmse for r in per_rep])),
        })

    for eps_mult in cfg["eps_multipliers"]:
        spec = kit.smoothing_spec(float(eps_mult))
        sweep_rows(f"smoothed_eps_{eps_mult:g}", "smoothed", spec,
                   float(eps_mult))
    sweep_rows("standard", "standard", None, None)
    sweep_rows("lrm", "lrm", None, None)
    return rows, reports, failures


def _fmt(v) -> str:
    if v is None:
        return ""
    return f"{v:.12g}"


def emit_results(reports, failures, cfg: dict, outdir, sweep_rows=None):
    """Write delimited result tables plus a metadata file; returns paths.

    Output is a pure function of (cfg, seed): no timestamps, fixed float
    formatting.
    """

    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {outdir}: {exc}") from exc
    paths = []

    has_gamma = any(r.pred_gamma is not None for r in reports)
    for rpt in reports:
        tag = "avg" if rpt.replication is None else f"rep{rpt.replication}"
        name = f"{rpt.method}_m{rpt.m}_{tag}_grid.csv"
        cols = ["spot", "pred_price", "oracle_price", "pred_delta",
                "oracle_delta"]
        data = [rpt.grid, rpt.pred_price, rpt.oracle_price, rpt.pred_delta,
                rpt.oracle_delta]
        if rpt.pred_gamma is not None:
            cols += ["pred_gamma", "oracle_gamma"]
            data += [rpt.pred_gamma, rpt.oracle_gamma]
        path = outdir / name
        with open(path, "w") as fh:
            fh.write(",".join(cols) + "\n")
            for row in zip(*data):
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        paths.append(path)

    summary = outdir / "summary.csv"
    with open(summary, "w") as fh:
        cols = ["method", "m", "replication", "price_rmse", "price_rmse_pct",
                "delta_rmse"]
        if has_gamma:
            cols.append("gamma_rmse")
        fh.write(",".join(cols) + "\n")
        for rpt in reports:
            rep = "avg" if rpt.replication is None else str(rpt.replication)
            row = [rpt.method, str(rpt.m), rep, _fmt(rpt.price_rmse),
                   _fmt(rpt.price_rmse_pct), _fmt(rpt.delta_rmse)]
            if has_gamma:
                row.append(_fmt(rpt.gamma_rmse))
            fh.write(",".join(row) + "\n")
    paths.append(summary)

    if sweep_rows is not None:
        sweep = outdir / "sweep.csv"
        with open(sweep, "w") as fh:
            fh.write("label,eps_multiplier,price_rmse,price_rmse_pct,delta_rmse\n")
            for row in sweep_rows:
                fh.write(",".join([
                    row["label"], _fmt(row["eps_multiplier"]),
                    _fmt(row["price_rmse"]), _fmt(row["price_rmse_pct"]),
                    _fmt(row["delta_rmse"])]) + "\n")
        paths.append(sweep)

    meta = outdir / "metadata.yaml"
    with open(meta, "w") as fh:
        yaml.safe_dump({
            "artifact_version": f"dmlab-{__version__}",
            "config": cfg,
            "failures": [{"method": f.method, "replication": f.replication,
                          "message": f.message} for f in failures],
        }, fh, sort_keys=True)
    paths.append(meta)
    return paths
