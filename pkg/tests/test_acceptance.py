"""Acceptance suite.

Each test prints one ``ACCEPTANCE nn PASS/FAIL`` line with the measured
numbers before asserting, so the verdicts survive in the captured output
of failing tests and in ``pytest -s`` runs.

Runtime knobs: the smoothing sweep runs 5 replications per point unless
DMLAB_FULL_SWEEP=1 is set, which restores the full 30.
"""

import os
import statistics
import sys
import time

import numpy as np
import yaml

from dmlab import checks
from dmlab.cli import main as cli_main
from dmlab.experiments import default_config
from dmlab.harness import run_experiment, run_smoothing_sweep
from dmlab.market_models import TwoStepGbmParams, draw_paths
from dmlab.oracles import (bachelier_basket_digital, barrier_price, bs_call,
                           bs_digital, portfolio_greeks)
from dmlab.payoffs import PayoffSpec, evaluate
from dmlab.rng import substream

SIG, T = 0.2, 1.0 / 3.0


def _report(criterion: int, passed: bool, detail: str):
    line = f"ACCEPTANCE {criterion:02d} {'PASS' if passed else 'FAIL'}: {detail}"
    print(line)
    print(line, file=sys.__stderr__)
    assert passed, line


def _median_rmse(reports, method, attr, m=None):
    vals = [getattr(r, attr) for r in reports
            if r.method == method and r.replication is not None
            and (m is None or r.m == m)]
    return statistics.median(vals)


def _avg_report(reports, method, m=None):
    picked = [r for r in reports
              if r.method == method and r.replication is None
              and (m is None or r.m == m)]
    assert len(picked) == 1
    return picked[0]


def test_criterion_01_unbiasedness_suite():
    start = time.perf_counter()
    results = checks.unbiasedness_checks(n_samples=1_000_000)
    elapsed = time.perf_counter() - start
    bad = [r.name for r in results if not r.passed]
    passed = not bad and elapsed < 60.0
    _report(1, passed,
            f"{len(results) - len(bad)}/{len(results)} estimator checks "
            f"within 3 SE at 1e6 samples in {elapsed:.1f}s"
            + (f"; failed: {bad}" if bad else ""))


def test_criterion_02_pathwise_bias_exhibit():
    results = checks.bias_exhibit_checks(n_samples=100_000)
    bad = [r.name for r in results if not r.passed]
    _report(2, not bad,
            "pathwise digital/basket labels identically zero on 1e5 draws "
            "while oracle deltas exceed 0.01 on the grid interior"
            + (f"; failed: {bad}" if bad else ""))


def test_criterion_03_network_gradient_suite():
    start = time.perf_counter()
    results = checks.gradient_checks(n_configs=100)
    elapsed = time.perf_counter() - start
    bad = [f"{r.name} ({r.detail})" for r in results if not r.passed]
    passed = not bad and elapsed < 30.0
    _report(3, passed,
            f"input gradient / second derivative / parameter gradient vs FD "
            f"over 100 random nets in {elapsed:.1f}s"
            + (f"; failed: {bad}" if bad else ""))


def test_criterion_04_digital_rmse_ratios():
    cfg = default_config("digital")
    cfg["replications"] = 5
    reports, failures = run_experiment(cfg)
    assert not failures, failures
    p_std = _median_rmse(reports, "standard", "price_rmse")
    p_pw = _median_rmse(reports, "pathwise", "price_rmse")
    p_lrm = _median_rmse(reports, "lrm", "price_rmse")
    d_pw = _median_rmse(reports, "pathwise", "delta_rmse")
    d_lrm = _median_rmse(reports, "lrm", "delta_rmse")
    ordering = p_lrm < p_std < p_pw
    r_pw, r_std, r_delta = p_pw / p_lrm, p_std / p_lrm, d_pw / d_lrm
    passed = ordering and r_pw >= 5.0 and r_std >= 2.0 and r_delta >= 5.0
    _report(4, passed,
            f"digital m=512 medians over 5 seeds: price pathwise/lrm "
            f"{r_pw:.2f} (>=5), standard/lrm {r_std:.2f} (>=2), delta "
            f"pathwise/lrm {r_delta:.2f} (>=5), ordering lrm<standard<pathwise "
            f"{ordering}")


def test_criterion_05_barrier_averaged_rmse():
    cfg = default_config("barrier")
    reports, failures = run_experiment(cfg)
    assert not failures, failures
    std = _avg_report(reports, "standard")
    pw = _avg_report(reports, "pathwise")
    lrm = _avg_report(reports, "lrm")
    r_pw = pw.price_rmse / lrm.price_rmse
    r_std = std.price_rmse / lrm.price_rmse
    delta_smallest = (lrm.delta_rmse < pw.delta_rmse
                      and lrm.delta_rmse < std.delta_rmse)
    passed = r_pw >= 5.0 and r_std >= 2.0 and delta_smallest
    _report(5, passed,
            f"barrier m=1024, 10 replications averaged: price pathwise/lrm "
            f"{r_pw:.2f} (>=5), standard/lrm {r_std:.2f} (>=2), lrm delta "
            f"RMSE smallest {delta_smallest} "
            f"({lrm.delta_rmse:.4f} vs pw {pw.delta_rmse:.4f}, "
            f"std {std.delta_rmse:.4f})")


def test_criterion_06_basket_rmse_ratios():
    cfg = default_config("basket_digital")
    cfg["replications"] = 5
    cfg["methods"] = ["pathwise", "lrm"]
    reports, failures = run_experiment(cfg)
    assert not failures, failures
    r_price = (_median_rmse(reports, "pathwise", "price_rmse")
               / _median_rmse(reports, "lrm", "price_rmse"))
    r_delta = (_median_rmse(reports, "pathwise", "delta_rmse")
               / _median_rmse(reports, "lrm", "delta_rmse"))
    passed = r_price >= 3.0 and r_delta >= 3.0
    _report(6, passed,
            f"basket d=20 medians over 5 seeds: price pathwise/lrm "
            f"{r_price:.2f} (>=3), delta pathwise/lrm {r_delta:.2f} (>=3)")


def test_criterion_07_smoothing_sweep_shape():
    cfg = default_config("smoothing_sweep")
    if os.environ.get("DMLAB_FULL_SWEEP") != "1":
        cfg["replications"] = 5
    rows, _, failures = run_smoothing_sweep(cfg)
    assert not failures, failures
    smoothed = [r for r in rows if r["eps_multiplier"] is not None]
    refs = {r["label"]: r["price_rmse"] for r in rows
            if r["eps_multiplier"] is None}
    vals = [r["price_rmse"] for r in smoothed]
    mults = [r["eps_multiplier"] for r in smoothed]
    k = int(np.argmin(vals))
    u_shape = (0 < k < len(vals) - 1
               and all(vals[i] > vals[i + 1] for i in range(k))
               and all(vals[i] < vals[i + 1] for i in range(k, len(vals) - 1)))
    above_lrm = all(v > refs["lrm"] for v in vals)
    endpoints_worse = (vals[0] > refs["standard"]
                       and vals[-1] > refs["standard"])
    passed = u_shape and above_lrm and endpoints_worse
    curve = ", ".join(f"eps {m:g}: {v:.4f}" for m, v in zip(mults, vals))
    _report(7, passed,
            f"sweep price RMSE [{curve}]; standard {refs['standard']:.4f}, "
            f"lrm {refs['lrm']:.4f}; U-shape with interior min {u_shape}, "
            f"all smoothed above lrm {above_lrm}, endpoints worse than "
            f"standard {endpoints_worse}")


def test_criterion_08_gamma_rmse_ordering():
    cfg = default_config("gamma_portfolio")
    cfg["replications"] = 5
    details, ok_all = [], True
    for m in cfg["sample_sizes"]:
        reports, failures = run_experiment(cfg, m=m)
        assert not failures, failures
        med = {name: _median_rmse(reports, name, "gamma_rmse", m=m)
               for name in cfg["methods"]}
        ok = (med["pw_lr"] < med["delta_pathwise"]
              and med["pw_lr"] < med["delta_lrm"]
              and med["delta_pathwise"] < med["standard"]
              and med["delta_lrm"] < med["standard"])
        ok_all = ok_all and ok
        details.append(
            f"m={m}: pw_lr {med['pw_lr']:.4f} < delta_pw "
            f"{med['delta_pathwise']:.4f}, delta_lrm {med['delta_lrm']:.4f} "
            f"< standard {med['standard']:.4f} -> {ok}")
    _report(8, ok_all, "gamma RMSE medians over 5 seeds; " + "; ".join(details))


def test_criterion_09_oracle_self_consistency():
    issues = []

    def fd_check(name, fn, x, delta, gamma, h, hg, tol_d=1e-6, tol_g=1e-5):
        fd_delta = (fn(x + h) - fn(x - h)) / (2 * h)
        rel_d = abs(fd_delta - delta) / abs(fd_delta)
        if rel_d >= tol_d:
            issues.append(f"{name} delta rel err {rel_d:.2e}")
        if gamma is not None:
            fd_gamma = (fn(x + hg) - 2 * fn(x) + fn(x - hg)) / hg ** 2
            rel_g = abs(fd_gamma - gamma) / abs(fd_gamma)
            if rel_g >= tol_g:
                issues.append(f"{name} gamma rel err {rel_g:.2e}")

    res = bs_call(105.0, 100.0, 0.02, SIG, T)
    fd_check("bs_call", lambda s: float(bs_call(s, 100.0, 0.02, SIG, T).price),
             105.0, float(res.delta), float(res.gamma), 1e-4, 1e-2)
    res = bs_digital(95.0, 100.0, 0.02, SIG, T)
    fd_check("bs_digital",
             lambda s: float(bs_digital(s, 100.0, 0.02, SIG, T).price),
             95.0, float(res.delta), float(res.gamma), 1e-4, 1e-2)
    res = portfolio_greeks(1.1, [1.0, -1.5, 0.75], [0.85, 0.90, 1.15],
                           0.0, SIG, T)
    fd_check("portfolio",
             lambda s: float(portfolio_greeks(
                 s, [1.0, -1.5, 0.75], [0.85, 0.90, 1.15], 0.0, SIG, T).price),
             1.1, float(res.delta), float(res.gamma), 1e-5, 1e-4)

    from dmlab.market_models import BachelierBasketParams
    d = 20
    basket = BachelierBasketParams(spots=np.full(d, 100.0),
                                   vols=np.full(d, 10.0),
                                   weights=np.full(d, 1.0 / d), maturity=T)
    res = bachelier_basket_digital(basket, 100.0, spots=np.full(d, 101.0))
    h = 1e-4

    def basket_price(s):
        return bachelier_basket_digital(basket, 100.0,
                                        spots=np.full(d, s)).price

    fd = (basket_price(101.0 + h) - basket_price(101.0 - h)) / (2 * h)
    rel = abs(fd - float(np.sum(res.delta))) / abs(fd)
    if rel >= 1e-6:
        issues.append(f"basket delta rel err {rel:.2e}")

    two = TwoStepGbmParams(spot=100.0, rate=0.0, vol=SIG, t1=1.0 / 6.0, t2=T)
    res = barrier_price(two, 85.0, 50.0)

    def barrier_p(s):
        return float(barrier_price(two, 85.0, 50.0, spot=s).price)

    fd = (barrier_p(100.0 + 0.05) - barrier_p(100.0 - 0.05)) / 0.1
    rel = abs(fd - float(res.delta)) / abs(fd)
    if rel >= 1e-5:
        issues.append(f"barrier delta rel err {rel:.2e}")

    n = 400_000
    spec = PayoffSpec(kind="barrier_call", strike=50.0, barrier=85.0,
                      rate=0.0, maturity=T)
    pay = evaluate(draw_paths(two, substream(909), n), spec)
    se = pay.std(ddof=1) / np.sqrt(n)
    z = abs(pay.mean() - float(res.price)) / se
    if z > 3.0:
        issues.append(f"barrier quadrature vs MC z = {z:.2f}")

    atm = float(bs_digital(100.0, 100.0, 0.0, SIG, T).price)
    if abs(atm - 0.47698) >= 5e-6:
        issues.append(f"ATM digital price {atm:.6f} != 0.47698")

    _report(9, not issues,
            "oracle FD self-consistency, barrier quadrature vs MC "
            f"(z = {z:.2f}), ATM digital {atm:.5f}"
            + (f"; issues: {issues}" if issues else ""))


def test_criterion_10_byte_identical_reruns(tmp_path):
    out = tmp_path / "run"
    cfg_data = {
        "schema_version": 1,
        "experiment": "digital",
        "seed": 100,
        "m": 64,
        "replications": 2,
        "methods": ["standard", "lrm"],
        "train": {"epochs": 60},
        "output": str(out),
    }
    cfg_path = tmp_path / "cfg.yaml"
    with open(cfg_path, "w") as fh:
        yaml.safe_dump(cfg_data, fh)
    rc1 = cli_main(["run", "--config", str(cfg_path), "--no-figures"])
    assert rc1 == 0
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    rc2 = cli_main(["run", "--config", str(cfg_path), "--no-figures"])
    assert rc2 == 0
    second = {p.name: p.read_bytes() for p in out.iterdir()}
    same_names = sorted(first) == sorted(second)
    diffs = [n for n in first if first[n] != second.get(n)]
    passed = same_names and not diffs
    _report(10, passed,
            f"two runs of the same config and seed produced "
            f"{len(first)} result files, byte-identical: {not diffs}"
            + (f"; differing: {diffs}" if diffs else ""))
