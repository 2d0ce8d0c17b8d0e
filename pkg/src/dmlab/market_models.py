"""Underlying-asset simulators.

All simulators are pure functions of (params, normals) and are vectorized
over a leading batch axis.  Each returns a PathDraw that retains the
driving normals so the likelihood-ratio estimators can reuse exactly the
xi that generated the path.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from dmlab.rng import standard_normals


@dataclass(frozen=True)
class GbmParams:
    """Single-date lognormal model: S_T = x exp((r - s^2/2)T + s sqrt(T) xi)."""

    spot: float
    rate: float
    vol: float
    maturity: float

    def __post_init__(self):
        if not (self.spot > 0 and self.vol > 0 and self.maturity > 0):
            raise ValueError("GbmParams requires spot, vol, maturity > 0")


@dataclass(frozen=True)
class TwoStepGbmParams:
    """Lognormal model observed at a monitoring date t1 and expiry t2."""

    spot: float
    rate: float
    vol: float
    t1: float
    t2: float

    def __post_init__(self):
        if not (0.0 < self.t1 < self.t2):
            raise ValueError("TwoStepGbmParams requires 0 < t1 < t2")
        if not (self.spot > 0 and self.vol > 0):
            raise ValueError("TwoStepGbmParams requires spot, vol > 0")


@dataclass(frozen=True)
class BachelierBasketParams:
    """Uncorrelated arithmetic Brownian assets: S_i = x_i + sigma_i sqrt(T) xi_i."""

    spots: np.ndarray
    vols: np.ndarray
    weights: np.ndarray
    maturity: float

    def __post_init__(self):
        object.__setattr__(self, "spots", np.atleast_1d(np.asarray(self.spots, float)))
        object.__setattr__(self, "vols", np.atleast_1d(np.asarray(self.vols, float)))
        object.__setattr__(self, "weights", np.atleast_1d(np.asarray(self.weights, float)))
        d = self.spots.shape[0]
        if d < 1 or self.vols.shape != (d,) or self.weights.shape != (d,):
            raise ValueError("spots, vols, weights must share one length >= 1")
        if not (np.all(self.vols > 0) and np.all(np.isfinite(self.weights))):
            raise ValueError("vols must be positive and weights finite")
        if not self.maturity > 0:
            raise ValueError("maturity must be positive")

    @property
    def dim(self):
        return self.spots.shape[0]


@dataclass(frozen=True)
class EulerParams:
    """Scalar SDE dX = mu(X) dt + sigma(X) dW discretized on n_steps of size dt.

    The coefficient derivatives feed the discretized score function.
    """

    spot: float
    drift_fn: Callable[[np.ndarray], np.ndarray]
    diff_fn: Callable[[np.ndarray], np.ndarray]
    drift_deriv_fn: Callable[[np.ndarray], np.ndarray]
    diff_deriv_fn: Callable[[np.ndarray], np.ndarray]
    n_steps: int
    dt: float

    def __post_init__(self):
        if self.n_steps < 1 or not self.dt > 0:
            raise ValueError("EulerParams requires n_steps >= 1 and dt > 0")


@dataclass(frozen=True)
class PathDraw:
    """Simulated states plus the normals that produced them.

    terminals: (n, n_dates) for date-indexed models, (n, d) for the basket,
    (n, n_steps + 1) full path for the Euler scheme.  normals: (n, consumed),
    in generation order.
    """

    terminals: np.ndarray
    normals: np.ndarray


def _column(xi):
    xi = np.asarray(xi, dtype=np.float64)
    if xi.ndim == 0:
        xi = xi[None]
    return xi


def simulate_gbm_terminal(p: GbmParams, xi) -> PathDraw:
    xi = _column(xi)
    drift = (p.rate - 0.5 * p.vol ** 2) * p.maturity
    s_t = p.spot * np.exp(drift + p.vol * np.sqrt(p.maturity) * xi)
    return PathDraw(terminals=s_t[:, None], normals=xi[:, None])


def simulate_gbm_two_step(p: TwoStepGbmParams, xi1, xi2) -> PathDraw:
    xi1, xi2 = _column(xi1), _column(xi2)
    if xi1.shape != xi2.shape:
        raise ValueError("xi1 and xi2 must have the same shape")
    v2 = 0.5 * p.vol ** 2
    s1 = p.spot * np.exp((p.rate - v2) * p.t1 + p.vol * np.sqrt(p.t1) * xi1)
    tau = p.t2 - p.t1
    s2 = s1 * np.exp((p.rate - v2) * tau + p.vol * np.sqrt(tau) * xi2)
    return PathDraw(terminals=np.stack([s1, s2], axis=1),
                    normals=np.stack([xi1, xi2], axis=1))


def simulate_bachelier_basket(p: BachelierBasketParams, xi) -> PathDraw:
    xi = np.asarray(xi, dtype=np.float64)
    if xi.ndim == 1:
        xi = xi[None, :]
    if xi.shape[-1] != p.dim:
        raise ValueError(f"expected {p.dim} normals per draw, got {xi.shape[-1]}")
    terminals = p.spots + p.vols * np.sqrt(p.maturity) * xi
    return PathDraw(terminals=terminals, normals=xi)


def simulate_euler_path(p: EulerParams, xi) -> PathDraw:
    xi = np.asarray(xi, dtype=np.float64)
    if xi.ndim == 1:
        xi = xi[None, :]
    if xi.shape[-1] != p.n_steps:
        raise ValueError(f"expected {p.n_steps} normals per path, got {xi.shape[-1]}")
    n = xi.shape[0]
    path = np.empty((n, p.n_steps + 1))
    path[:, 0] = p.spot
    sqrt_dt = np.sqrt(p.dt)
    for i in range(p.n_steps):
        x = path[:, i]
        path[:, i + 1] = x + p.drift_fn(x) * p.dt + p.diff_fn(x) * sqrt_dt * xi[:, i]
    return PathDraw(terminals=path, normals=xi)


def draw_paths(model, gen, n: int) -> PathDraw:
    """Simulate n paths under `model`, consuming normals from `gen`."""
    if isinstance(model, GbmParams):
        return simulate_gbm_terminal(model, standard_normals(gen, n))
    if isinstance(model, TwoStepGbmParams):
        xi = standard_normals(gen, (n, 2))
        return simulate_gbm_two_step(model, xi[:, 0], xi[:, 1])
    if isinstance(model, BachelierBasketParams):
        return simulate_bachelier_basket(model, standard_normals(gen, (n, model.dim)))
    if isinstance(model, EulerParams):
        return simulate_euler_path(model, standard_normals(gen, (n, model.n_steps)))
    raise TypeError(f"unknown model type {type(model).__name__}")


def gbm_euler_params(g: GbmParams, n_steps: int) -> EulerParams:
    """Euler discretization of the lognormal model, used as a cross-check."""
    r, sigma = g.rate, g.vol
    return EulerParams(
        spot=g.spot,
        drift_fn=lambda x: r * x,
        diff_fn=lambda x: sigma * x,
        drift_deriv_fn=lambda x: np.full_like(np.asarray(x, float), r),
        diff_deriv_fn=lambda x: np.full_like(np.asarray(x, float), sigma),
        n_steps=n_steps,
        dt=g.maturity / n_steps,
    )
