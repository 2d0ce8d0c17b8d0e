"""Closed-form and quadrature reference values.

These are the ground truth the experiments are scored against; none of
them participate in training.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from dmlab.errors import OracleError
from dmlab.market_models import BachelierBasketParams, TwoStepGbmParams
from dmlab.special import norm_cdf, norm_pdf


@dataclass(frozen=True)
class OracleResult:
    price: float | np.ndarray
    delta: float | np.ndarray
    gamma: float | np.ndarray | None = None


def bs_call(x, k, r, sigma, t) -> OracleResult:
    """Black-Scholes call price, delta, gamma."""
    x = np.asarray(x, dtype=np.float64)
    sq = sigma * np.sqrt(t)
    d1 = (np.log(x / k) + (r + 0.5 * sigma ** 2) * t) / sq
    d2 = d1 - sq
    price = x * norm_cdf(d1) - k * np.exp(-r * t) * norm_cdf(d2)
    delta = norm_cdf(d1)
    gamma = norm_pdf(d1) / (x * sq)
    return OracleResult(price=price, delta=delta, gamma=gamma)


def bs_digital(x, k, r, sigma, t) -> OracleResult:
    """Cash-or-nothing digital paying 1 if S_T > K."""
    x = np.asarray(x, dtype=np.float64)
    sq = sigma * np.sqrt(t)
    d = (np.log(x / k) + r * t) / sq - 0.5 * sq
    disc = np.exp(-r * t)
    price = disc * norm_cdf(d)
    delta = disc * norm_pdf(d) / (x * sq)
    gamma = -disc * norm_pdf(d) * (d / sq + 1.0) / (x ** 2 * sq)
    return OracleResult(price=price, delta=delta, gamma=gamma)


def bachelier_basket_digital(p: BachelierBasketParams, k, rate=0.0,
                             spots=None) -> OracleResult:
    """Digital on a weighted basket of uncorrelated Bachelier assets.

    The basket stays Gaussian, so the price is a single normal CDF.
    `spots` overrides p.spots (used when sweeping the evaluation grid);
    delta holds the per-asset vector.
    """

    spots = p.spots if spots is None else np.asarray(spots, dtype=np.float64)
    mean_b = float(np.dot(p.weights, spots))
    std_b = float(np.sqrt(p.maturity * np.sum(p.weights ** 2 * p.vols ** 2)))
    disc = np.exp(-rate * p.maturity)
    z = (mean_b - k) / std_b
    price = disc * norm_cdf(z)
    delta = disc * norm_pdf(z) * p.weights / std_b
    return OracleResult(price=float(price), delta=delta)


def _lognormal_quad_price(x, b, k, r, sigma, t1, t2):
    z_lo = (np.log(b / x) - (r - 0.5 * sigma ** 2) * t1) / (sigma * np.sqrt(t1))
    tau = t2 - t1

    def integrand(z):
        s = x * np.exp((r - 0.5 * sigma ** 2) * t1 + sigma * np.sqrt(t1) * z)
        return float(bs_call(s, k, r, sigma, tau).price) * float(norm_pdf(z))

    z_hi = max(z_lo + 1.0, 12.0)
    val, err = quad(integrand, z_lo, z_hi, epsabs=1e-10, epsrel=1e-10, limit=400)
    if err > 1e-8:
        raise OracleError(
            f"barrier quadrature error {err:.3e} exceeds tolerance at spot {x}")
    return np.exp(-r * t1) * val


def barrier_price(p: TwoStepGbmParams, b, k, spot=None) -> OracleResult:
    """Down-and-out call monitored at t1, expiring at t2.

    Price by one-dimensional quadrature over S_{t1}; delta by central
    finite differences with one Richardson extrapolation step.
    """

    x = p.spot if spot is None else float(spot)
    if x <= 0.0 or b < 0.0 or k <= 0.0:
        raise OracleError(
            f"barrier_price needs spot > 0, barrier >= 0, strike > 0; "
            f"got spot={x}, barrier={b}, strike={k}")
    price = _lognormal_quad_price(x, b, k, p.rate, p.vol, p.t1, p.t2)

    def f(s):
        return _lognormal_quad_price(s, b, k, p.rate, p.vol, p.t1, p.t2)

    h1 = 1e-3 * x
    h2 = 5e-4 * x
    d1 = (f(x + h1) - f(x - h1)) / (2.0 * h1)
    d2 = (f(x + h2) - f(x - h2)) / (2.0 * h2)
    delta = (4.0 * d2 - d1) / 3.0
    return OracleResult(price=price, delta=delta)


def portfolio_greeks(x, weights, strikes, r, sigma, t) -> OracleResult:
    """Price, delta, gamma of a weighted sum of calls."""
    weights = np.atleast_1d(np.asarray(weights, dtype=np.float64))
    strikes = np.atleast_1d(np.asarray(strikes, dtype=np.float64))
    if weights.shape != strikes.shape:
        raise ValueError("weights and strikes must have the same length")
    x = np.asarray(x, dtype=np.float64)
    price = np.zeros_like(x, dtype=np.float64)
    delta = np.zeros_like(price)
    gamma = np.zeros_like(price)
    for w, kk in zip(weights, strikes):
        leg = bs_call(x, kk, r, sigma, t)
        price = price + w * leg.price
        delta = delta + w * leg.delta
        gamma = gamma + w * leg.gamma
    return OracleResult(price=price, delta=delta, gamma=gamma)
