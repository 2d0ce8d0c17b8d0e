import numpy as np

from dmlab.market_models import (BachelierBasketParams, GbmParams,
                                 TwoStepGbmParams, draw_paths,
                                 gbm_euler_params, simulate_gbm_terminal,
                                 simulate_gbm_two_step)
from dmlab.rng import standard_normals, substream

T = 1.0 / 3.0


def test_gbm_deterministic_drift():
    g = GbmParams(spot=100.0, rate=0.0, vol=0.2, maturity=T)
    draw = simulate_gbm_terminal(g, np.zeros(1))
    expected = 100.0 * np.exp(-0.5 * 0.2 ** 2 * T)
    assert abs(draw.terminals[0, 0] - expected) < 1e-12


def test_gbm_two_step_composition():
    two = TwoStepGbmParams(spot=100.0, rate=0.05, vol=0.3, t1=0.25, t2=0.75)
    xi1 = np.array([0.7])
    xi2 = np.array([-1.1])
    draw = simulate_gbm_two_step(two, xi1, xi2)
    s1 = simulate_gbm_terminal(
        GbmParams(spot=100.0, rate=0.05, vol=0.3, maturity=0.25),
        xi1).terminals[0, 0]
    s2 = simulate_gbm_terminal(
        GbmParams(spot=s1, rate=0.05, vol=0.3, maturity=0.5),
        xi2).terminals[0, 0]
    assert abs(draw.terminals[0, 0] - s1) < 1e-12
    assert abs(draw.terminals[0, 1] - s2) < 1e-12
    assert np.array_equal(draw.normals, np.column_stack([xi1, xi2]))


def test_gbm_martingale():
    g = GbmParams(spot=100.0, rate=0.03, vol=0.2, maturity=T)
    draw = draw_paths(g, substream(5), 400_000)
    s_t = draw.terminals[:, 0]
    target = 100.0 * np.exp(0.03 * T)
    se = s_t.std(ddof=1) / np.sqrt(s_t.size)
    assert abs(s_t.mean() - target) < 3.0 * se


def test_bachelier_basket_distribution():
    d = 4
    p = BachelierBasketParams(spots=np.array([90.0, 100.0, 110.0, 100.0]),
                              vols=np.full(d, 10.0),
                              weights=np.full(d, 0.25), maturity=T)
    assert p.dim == d
    draw = draw_paths(p, substream(9), 200_000)
    assert draw.terminals.shape == (200_000, d)
    std_t = 10.0 * np.sqrt(T)
    for i in range(d):
        col = draw.terminals[:, i]
        se = col.std(ddof=1) / np.sqrt(col.size)
        assert abs(col.mean() - p.spots[i]) < 3.0 * se
        assert abs(col.std() - std_t) < 0.01 * std_t


def test_euler_converges_to_gbm_moments():
    g = GbmParams(spot=100.0, rate=0.0, vol=0.2, maturity=T)
    ep = gbm_euler_params(g, n_steps=64)
    assert ep.n_steps == 64
    assert abs(ep.dt - T / 64) < 1e-15
    draw = draw_paths(ep, substream(13), 200_000)
    assert draw.terminals.shape == (200_000, 65)
    assert np.all(draw.terminals[:, 0] == 100.0)
    x_n = draw.terminals[:, -1]
    se = x_n.std(ddof=1) / np.sqrt(x_n.size)
    assert abs(x_n.mean() - 100.0) < 3.0 * se


def test_draw_paths_deterministic():
    g = GbmParams(spot=100.0, rate=0.0, vol=0.2, maturity=T)
    a = draw_paths(g, substream(3), 100).terminals
    b = draw_paths(g, substream(3), 100).terminals
    assert np.array_equal(a, b)


def test_draw_paths_keeps_normals():
    g = GbmParams(spot=100.0, rate=0.0, vol=0.2, maturity=T)
    gen = substream(21)
    draw = draw_paths(g, gen, 50)
    rebuilt = simulate_gbm_terminal(g, draw.normals[:, 0])
    assert np.array_equal(draw.terminals, rebuilt.terminals)


def test_normals_match_inverse_cdf():
    gen1 = substream(17)
    gen2 = substream(17)
    z = standard_normals(gen1, (16,))
    from dmlab.special import norm_ppf
    u = gen2.random((16,))
    assert np.max(np.abs(z - norm_ppf(u))) < 1e-12
