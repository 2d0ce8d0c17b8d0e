"""Discounted payoff functions evaluated on simulated paths."""

from dataclasses import dataclass

import numpy as np

from dmlab.errors import ConfigurationError
from dmlab.market_models import PathDraw

KINDS = ("vanilla_call", "digital", "smoothed_digital", "basket_digital",
         "barrier_call", "call_portfolio")


@dataclass(frozen=True)
class PayoffSpec:
    kind: str
    strike: float | None = None
    barrier: float | None = None
    smoothing_eps: float | None = None
    portfolio_weights: np.ndarray | None = None
    portfolio_strikes: np.ndarray | None = None
    rate: float = 0.0
    maturity: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown payoff kind {self.kind!r}")
        if self.kind == "call_portfolio":
            w = np.atleast_1d(np.asarray(self.portfolio_weights, float))
            k = np.atleast_1d(np.asarray(self.portfolio_strikes, float))
            if w.shape != k.shape:
                raise ConfigurationError("portfolio weights/strikes length mismatch")
            if np.any(k <= 0):
                raise ConfigurationError("strikes must be positive")
            object.__setattr__(self, "portfolio_weights", w)
            object.__setattr__(self, "portfolio_strikes", k)
        else:
            if self.strike is None or self.strike <= 0:
                raise ConfigurationError("strike must be positive")
        if self.kind == "smoothed_digital":
            if self.smoothing_eps is None or self.smoothing_eps <= 0:
                raise ConfigurationError("smoothing_eps must be positive")
        if self.kind == "barrier_call" and self.barrier is None:
            raise ConfigurationError("barrier_call requires a barrier level")
        if not self.maturity > 0:
            raise ConfigurationError("maturity must be positive for discounting")

    @property
    def discount(self) -> float:
        return float(np.exp(-self.rate * self.maturity))


def _single_terminal(draw: PathDraw) -> np.ndarray:
    if draw.terminals.shape[1] != 1:
        raise ValueError("payoff expects a single terminal per draw")
    return draw.terminals[:, 0]


def call_payoff(draw: PathDraw, spec: PayoffSpec) -> np.ndarray:
    s_t = _single_terminal(draw)
    return spec.discount * np.maximum(s_t - spec.strike, 0.0)


def digital_payoff(draw: PathDraw, spec: PayoffSpec) -> np.ndarray:
    s_t = _single_terminal(draw)
    return spec.discount * (s_t > spec.strike).astype(np.float64)


def smoothed_digital_payoff(draw: PathDraw, spec: PayoffSpec) -> np.ndarray:
    """Step at the strike replaced by a linear ramp of width smoothing_eps."""
    s_t = _single_terminal(draw)
    eps = spec.smoothing_eps
    ramp = np.clip((s_t - (spec.strike - 0.5 * eps)) / eps, 0.0, 1.0)
    return spec.discount * ramp


def basket_digital_payoff(draw: PathDraw, spec: PayoffSpec, weights) -> np.ndarray:
    basket = draw.terminals @ np.asarray(weights, dtype=np.float64)
    return spec.discount * (basket > spec.strike).astype(np.float64)


def barrier_call_payoff(draw: PathDraw, spec: PayoffSpec) -> np.ndarray:
    if draw.terminals.shape[1] != 2:
        raise ValueError("barrier payoff expects two monitoring dates")
    s1, s2 = draw.terminals[:, 0], draw.terminals[:, 1]
    alive = (s1 > spec.barrier).astype(np.float64)
    return spec.discount * alive * np.maximum(s2 - spec.strike, 0.0)


def portfolio_payoff(draw: PathDraw, spec: PayoffSpec) -> np.ndarray:
    s_t = _single_terminal(draw)
    payoff = np.zeros_like(s_t)
    for w, k in zip(spec.portfolio_weights, spec.portfolio_strikes):
        payoff += w * np.maximum(s_t - k, 0.0)
    return spec.discount * payoff


def evaluate(draw: PathDraw, spec: PayoffSpec, basket_weights=None) -> np.ndarray:
    """Dispatch on spec.kind; basket_weights required for basket_digital."""
    if spec.kind == "vanilla_call":
        return call_payoff(draw, spec)
    if spec.kind == "digital":
        return digital_payoff(draw, spec)
    if spec.kind == "smoothed_digital":
        return smoothed_digital_payoff(draw, spec)
    if spec.kind == "basket_digital":
        if basket_weights is None:
            raise ConfigurationError("basket_digital needs basket weights")
        return basket_digital_payoff(draw, spec, basket_weights)
    if spec.kind == "barrier_call":
        return barrier_call_payoff(draw, spec)
    if spec.kind == "call_portfolio":
        return portfolio_payoff(draw, spec)
    raise ConfigurationError(f"unknown payoff kind {spec.kind!r}")
