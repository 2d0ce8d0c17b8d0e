"""Statistical and numerical self-checks.

Shared by the CLI `selftest` subcommand and the acceptance test suite:
unbiasedness of every supported estimator against an independent oracle,
the pathwise-bias exhibit on digital payoffs, and finite-difference
validation of the network derivative computations.
"""

from dataclasses import dataclass

import numpy as np

from dmlab import labels, network
from dmlab.market_models import (BachelierBasketParams, GbmParams,
                                 TwoStepGbmParams, draw_paths,
                                 gbm_euler_params, simulate_euler_path)
from dmlab.oracles import (bachelier_basket_digital, barrier_price, bs_call,
                           bs_digital, portfolio_greeks)
from dmlab.payoffs import PayoffSpec
from dmlab.rng import standard_normals, substream

MATURITY = 1.0 / 3.0


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _z_check(name, estimates, target, max_z=3.0):
    """Sample-mean vs target in units of the standard error."""
    estimates = np.asarray(estimates, dtype=np.float64)
    n = estimates.shape[0]
    mean = estimates.mean(axis=0)
    se = estimates.std(axis=0, ddof=1) / np.sqrt(n)
    z = np.abs(mean - target) / np.maximum(se, 1e-300)
    worst = float(np.max(z))
    return CheckResult(name, worst <= max_z,
                       f"max |z| = {worst:.2f} (limit {max_z})")


def unbiasedness_checks(n_samples: int = 1_000_000, seed: int = 2024):
    """Every unbiased estimator's 10^6-sample mean vs its oracle."""
    results = []

    # Pathwise delta, vanilla call under GBM.
    g = GbmParams(spot=100.0, rate=0.0, vol=0.2, maturity=MATURITY)
    call = PayoffSpec(kind="vanilla_call", strike=100.0, rate=g.rate,
                      maturity=g.maturity)
    draw = draw_paths(g, substream(seed, tag=10), n_samples)
    est = labels.pathwise_delta(draw, call, g)[:, 0]
    results.append(_z_check("pathwise_call_delta", est,
                            float(bs_call(100, 100, g.rate, g.vol, g.maturity).delta)))

    # LRM delta, digital under GBM.
    digital = PayoffSpec(kind="digital", strike=100.0, rate=g.rate,
                         maturity=g.maturity)
    est = labels.lrm_delta(draw, digital, g)[:, 0]
    results.append(_z_check("lrm_digital_delta", est,
                            float(bs_digital(100, 100, g.rate, g.vol, g.maturity).delta)))

    # Zero-mean scores.
    results.append(_z_check("gbm_score_mean_zero",
                            labels.lrm_score_gbm(draw, g), 0.0))
    results.append(_z_check("gbm_gamma_score_mean_zero",
                            labels.lrm_gamma_score(draw, g), 0.0))

    # LRM componentwise deltas, 20-asset Bachelier basket digital.
    d = 20
    basket = BachelierBasketParams(spots=np.full(d, 100.0), vols=np.full(d, 10.0),
                                   weights=np.full(d, 1.0 / d), maturity=MATURITY)
    bspec = PayoffSpec(kind="basket_digital", strike=100.0, rate=0.0,
                       maturity=MATURITY)
    bdraw = draw_paths(basket, substream(seed, tag=11), n_samples)
    est = labels.lrm_delta(bdraw, bspec, basket)
    target = bachelier_basket_digital(basket, 100.0).delta
    # max |z| over 20 components, so allow the Bonferroni-adjusted limit.
    results.append(_z_check("lrm_basket_component_deltas", est, target,
                            max_z=3.6))

    # LRM delta, two-date barrier, vs finite difference of the quadrature price.
    two = TwoStepGbmParams(spot=100.0, rate=0.0, vol=0.2, t1=1.0 / 6.0, t2=MATURITY)
    barrier = PayoffSpec(kind="barrier_call", strike=100.0, barrier=85.0,
                         rate=two.rate, maturity=two.t2)
    tdraw = draw_paths(two, substream(seed, tag=12), n_samples)
    est = labels.lrm_delta(tdraw, barrier, two)[:, 0]
    results.append(_z_check("lrm_barrier_delta", est,
                            float(barrier_price(two, 85.0, 100.0).delta)))

    # PW-LR gamma on the three-leg call portfolio.
    gp = GbmParams(spot=1.0, rate=0.0, vol=0.2, maturity=MATURITY)
    port = PayoffSpec(kind="call_portfolio",
                      portfolio_weights=np.array([1.0, -1.5, 0.75]),
                      portfolio_strikes=np.array([0.85, 0.90, 1.15]),
                      rate=gp.rate, maturity=gp.maturity)
    pdraw = draw_paths(gp, substream(seed, tag=13), n_samples)
    est = labels.pw_lr_gamma(pdraw, port, gp)
    target = float(portfolio_greeks(1.0, [1.0, -1.5, 0.75], [0.85, 0.90, 1.15],
                                    gp.rate, gp.vol, gp.maturity).gamma)
    results.append(_z_check("pw_lr_portfolio_gamma", est, target))

    # LRM gamma on the digital, vs second central FD of the analytic price.
    est = labels.lrm_gamma(draw, digital, g)
    h = 0.1
    fd2 = (float(bs_digital(100 + h, 100, g.rate, g.vol, g.maturity).price)
           - 2.0 * float(bs_digital(100, 100, g.rate, g.vol, g.maturity).price)
           + float(bs_digital(100 - h, 100, g.rate, g.vol, g.maturity).price)) / h ** 2
    results.append(_z_check("lrm_digital_gamma", est, fd2))

    # Euler-discretized GBM: payoff * score vs pathwise delta on the same
    # scheme (both unbiased for the discretized model).
    ep = gbm_euler_params(g, n_steps=64)
    edraw = draw_paths(ep, substream(seed, tag=14), n_samples)
    x_n = edraw.terminals[:, -1]
    pay = np.exp(-g.rate * g.maturity) * np.maximum(x_n - 100.0, 0.0)
    lrm_est = pay * labels.euler_lrm_score(edraw, ep)
    pw_est = (x_n > 100.0) * np.exp(-g.rate * g.maturity) * x_n / ep.spot
    diff = lrm_est - pw_est
    results.append(_z_check("euler_gbm_call_delta_lrm_vs_pathwise", diff, 0.0))
    results.append(_z_check("euler_score_mean_zero",
                            labels.euler_lrm_score(edraw, ep), 0.0))

    return results


def bias_exhibit_checks(n_samples: int = 100_000, seed: int = 77):
    """Pathwise delta is exactly zero on digitals while the true delta isn't."""
    results = []
    g = GbmParams(spot=100.0, rate=0.0, vol=0.2, maturity=MATURITY)
    digital = PayoffSpec(kind="digital", strike=100.0, rate=g.rate,
                         maturity=g.maturity)
    draw = draw_paths(g, substream(seed, tag=20), n_samples)
    pw = labels.pathwise_delta(draw, digital, g)
    all_zero = bool(np.all(pw == 0.0))

    d = 20
    basket = BachelierBasketParams(spots=np.full(d, 100.0), vols=np.full(d, 10.0),
                                   weights=np.full(d, 1.0 / d), maturity=MATURITY)
    bspec = PayoffSpec(kind="basket_digital", strike=100.0, rate=0.0,
                       maturity=MATURITY)
    bdraw = draw_paths(basket, substream(seed, tag=21), n_samples)
    pw_b = labels.pathwise_delta(bdraw, bspec, basket)
    all_zero_b = bool(np.all(pw_b == 0.0))
    results.append(CheckResult(
        "pathwise_digital_labels_identically_zero", all_zero and all_zero_b,
        f"digital zero: {all_zero}, basket zero: {all_zero_b}"))

    # Meanwhile the true deltas are materially positive on the grid interior.
    grid = np.linspace(88.0, 112.0, 64)
    dig_delta = np.asarray(bs_digital(grid, 100, g.rate, g.vol, g.maturity).delta)
    bas_delta = np.array([
        float(np.mean(bachelier_basket_digital(
            basket, 100.0, spots=np.full(d, s)).delta))
        for s in np.linspace(99.0, 101.0, 16)])
    ok = bool(np.all(dig_delta > 0.01) and np.all(bas_delta > 0.01))
    results.append(CheckResult(
        "oracle_digital_delta_exceeds_0.01", ok,
        f"min digital {dig_delta.min():.4f}, min basket {bas_delta.min():.4f}"))
    return results


def gradient_checks(n_configs: int = 100, seed: int = 31):
    """Network derivative computations vs central finite differences."""
    gen = np.random.default_rng(seed)
    worst_grad = worst_second = worst_param = 0.0
    for _ in range(n_configs):
        layers = int(gen.integers(1, 4))
        units = int(gen.integers(2, 6))
        dim = int(gen.integers(1, 4))
        cfg = network.NetworkConfig(input_dim=dim, hidden_layers=layers,
                                    hidden_units=units)
        params = network.init_params(cfg, gen)
        # Nonzero biases so the checks don't run at a special point.
        for b in params.biases:
            b += gen.normal(scale=0.3, size=b.shape)
        x = gen.normal(size=(4, dim))

        _, pre = network.forward(params, x)
        grad = network.input_gradient(params, pre)
        h = 1e-4
        for j in range(dim):
            xp, xm = x.copy(), x.copy()
            xp[:, j] += h
            xm[:, j] -= h
            fd = (network.forward(params, xp)[0]
                  - network.forward(params, xm)[0])[:, 0] / (2 * h)
            rel = np.max(np.abs(fd - grad[:, j]) / (np.abs(fd) + 1e-8))
            worst_grad = max(worst_grad, float(rel))

        if dim == 1:
            second = network.input_second_derivative(params, x)
            h2 = 1e-3
            fd2 = (network.forward(params, x + h2)[0]
                   - 2 * network.forward(params, x)[0]
                   + network.forward(params, x - h2)[0])[:, 0] / h2 ** 2
            rel = np.max(np.abs(fd2 - second) / (np.abs(fd2) + 1e-6))
            worst_second = max(worst_second, float(rel))

        weights = (0.4, 0.4, 0.2) if dim == 1 else (0.5, 0.5, 0.0)
        batch = (x, gen.normal(size=4), gen.normal(size=(4, dim)),
                 gen.normal(size=4) if dim == 1 else None)
        gw, gb = network.parameter_gradient(params, batch, weights)
        eps = 1e-5
        for arrs, grads in ((params.weights, gw), (params.biases, gb)):
            for li, arr in enumerate(arrs):
                it = np.nditer(arr, flags=["multi_index"])
                for _ in it:
                    idx = it.multi_index
                    orig = arr[idx]
                    arr[idx] = orig + eps
                    lp = network.loss(params, batch, weights)
                    arr[idx] = orig - eps
                    lm = network.loss(params, batch, weights)
                    arr[idx] = orig
                    fd = (lp - lm) / (2 * eps)
                    rel = abs(fd - grads[li][idx]) / (abs(fd) + 1e-6)
                    worst_param = max(worst_param, float(rel))

    return [
        CheckResult("input_gradient_vs_fd", worst_grad < 1e-5,
                    f"max rel err {worst_grad:.2e} (tol 1e-5)"),
        CheckResult("input_second_derivative_vs_fd", worst_second < 1e-4,
                    f"max rel err {worst_second:.2e} (tol 1e-4)"),
        CheckResult("parameter_gradient_vs_fd", worst_param < 1e-4,
                    f"max rel err {worst_param:.2e} (tol 1e-4)"),
    ]
