"""Delta and gamma label estimators and training-sample assembly.

Pathwise estimators differentiate the simulated payoff with the normals
held fixed; likelihood-ratio (LRM) estimators multiply the payoff by the
score of the transition density and stay unbiased across discontinuities.
The hybrid PW-LR gamma differentiates once pathwise and once by LRM.
"""

from dataclasses import dataclass, replace

import numpy as np

from dmlab import payoffs
from dmlab.errors import ConfigurationError
from dmlab.market_models import (BachelierBasketParams, EulerParams, GbmParams,
                                 PathDraw, TwoStepGbmParams, draw_paths)
from dmlab.payoffs import PayoffSpec

DELTA_KINDS = ("none", "pathwise", "pathwise_smoothed", "lrm")
GAMMA_KINDS = ("none", "pw_lr", "lrm")

# Payoffs continuous in the spot, for which pathwise gamma hybrids apply.
_CONTINUOUS = ("vanilla_call", "call_portfolio")


@dataclass(frozen=True)
class LabelMethod:
    delta_kind: str = "none"
    gamma_kind: str = "none"
    smoothing_eps_multiplier: float | None = None

    def __post_init__(self):
        if self.delta_kind not in DELTA_KINDS:
            raise ConfigurationError(f"unknown delta_kind {self.delta_kind!r}")
        if self.gamma_kind not in GAMMA_KINDS:
            raise ConfigurationError(f"unknown gamma_kind {self.gamma_kind!r}")


@dataclass(frozen=True)
class LabeledSample:
    input: np.ndarray          # spot vector, shape (d,)
    value_label: float         # average discounted payoff over k inner draws
    delta_label: np.ndarray | None = None   # shape (d,)
    gamma_label: float | None = None


def payoff_of(draw: PathDraw, spec: PayoffSpec, model) -> np.ndarray:
    weights = model.weights if isinstance(model, BachelierBasketParams) else None
    return payoffs.evaluate(draw, spec, basket_weights=weights)


def pathwise_delta(draw: PathDraw, spec: PayoffSpec, model) -> np.ndarray:
    """Per-draw pathwise delta, shape (n, input_dim).

    Identically zero for digital payoffs: the payoff is piecewise constant
    in the spot along every path, which is exactly the bias under study.
    """

    n = draw.terminals.shape[0]
    if spec.kind == "vanilla_call":
        s_t = draw.terminals[:, 0]
        d = (s_t > spec.strike) * spec.discount * s_t / model.spot
        return d[:, None]
    if spec.kind == "digital":
        return np.zeros((n, 1))
    if spec.kind == "basket_digital":
        return np.zeros((n, model.dim))
    if spec.kind == "barrier_call":
        s1, s2 = draw.terminals[:, 0], draw.terminals[:, 1]
        alive = (s1 > spec.barrier) & (s2 > spec.strike)
        d = alive * spec.discount * s2 / model.spot
        return d[:, None]
    if spec.kind == "call_portfolio":
        s_t = draw.terminals[:, 0]
        d = np.zeros(n)
        for w, k in zip(spec.portfolio_weights, spec.portfolio_strikes):
            d += w * (s_t > k)
        return (d * spec.discount * s_t / model.spot)[:, None]
    raise ConfigurationError(f"pathwise delta unsupported for {spec.kind!r}")


def pathwise_smoothed_delta(draw: PathDraw, spec: PayoffSpec, model) -> np.ndarray:
    """Pathwise delta of the ramped digital payoff, shape (n, 1)."""
    if spec.kind != "smoothed_digital":
        raise ConfigurationError("smoothed pathwise delta needs a smoothed_digital payoff")
    eps = spec.smoothing_eps
    if eps is None or eps <= 0:
        raise ConfigurationError("smoothing_eps must be positive")
    s_t = draw.terminals[:, 0]
    on_ramp = (s_t > spec.strike - 0.5 * eps) & (s_t < spec.strike + 0.5 * eps)
    d = spec.discount * on_ramp / eps * s_t / model.spot
    return d[:, None]


def lrm_score_gbm(draw: PathDraw, model: GbmParams) -> np.ndarray:
    """Spot-score of the lognormal transition density: xi / (x sigma sqrt(T))."""
    xi = draw.normals[:, 0]
    return xi / (model.spot * model.vol * np.sqrt(model.maturity))


def lrm_delta(draw: PathDraw, spec: PayoffSpec, model) -> np.ndarray:
    """Per-draw LRM delta = payoff * score, shape (n, input_dim).

    Basket: componentwise scores xi_i / (sigma_i sqrt(T)); the Bachelier
    score has no spot in the denominator.  Two-date barrier: only the
    first increment's normal enters, since the second transition does not
    depend on the spot.
    """

    pay = payoff_of(draw, spec, model)
    if isinstance(model, GbmParams):
        return (pay * lrm_score_gbm(draw, model))[:, None]
    if isinstance(model, BachelierBasketParams):
        scores = draw.normals / (model.vols * np.sqrt(model.maturity))
        return pay[:, None] * scores
    if isinstance(model, TwoStepGbmParams):
        score = draw.normals[:, 0] / (model.spot * model.vol * np.sqrt(model.t1))
        return (pay * score)[:, None]
    raise ConfigurationError(f"LRM delta unsupported for model {type(model).__name__}")


def pw_lr_gamma(draw: PathDraw, spec: PayoffSpec, model: GbmParams) -> np.ndarray:
    """Hybrid gamma: differentiate pathwise, then apply LRM, shape (n,)."""
    if spec.kind not in _CONTINUOUS:
        raise ConfigurationError("PW-LR gamma requires a payoff continuous in the spot")
    s_t = draw.terminals[:, 0]
    xi = draw.normals[:, 0]
    bracket = xi / (model.vol * np.sqrt(model.maturity)) - 1.0
    base = spec.discount * s_t / model.spot ** 2 * bracket
    if spec.kind == "vanilla_call":
        return (s_t > spec.strike) * base
    g = np.zeros_like(s_t)
    for w, k in zip(spec.portfolio_weights, spec.portfolio_strikes):
        g += w * (s_t > k)
    return g * base


def lrm_gamma_score(draw: PathDraw, model: GbmParams) -> np.ndarray:
    """Second-order spot score of the lognormal density.

    (d/dx log p)^2 + d^2/dx^2 log p
      = ((xi^2 - 1) / (sigma^2 T) - xi / (sigma sqrt(T))) / x^2,
    validated against finite differences of the digital price in the tests.
    """

    xi = draw.normals[:, 0]
    v = model.vol * np.sqrt(model.maturity)
    return ((xi ** 2 - 1.0) / v ** 2 - xi / v) / model.spot ** 2


def lrm_gamma(draw: PathDraw, spec: PayoffSpec, model: GbmParams) -> np.ndarray:
    return payoff_of(draw, spec, model) * lrm_gamma_score(draw, model)


def euler_lrm_score(draw: PathDraw, model: EulerParams) -> np.ndarray:
    """Spot-score of the Euler path density.

    Only the first Gaussian transition depends on the spot, so the score is
    d/dx log p(X_1 | x) with x entering both the mean and the variance:
      xi_1 (1 + mu'(x) dt) / (sigma(x) sqrt(dt)) + (sigma'(x)/sigma(x)) (xi_1^2 - 1).
    Validated against the pathwise estimator on the same scheme in the tests.
    """

    x = np.asarray(model.spot, dtype=np.float64)
    sig = float(np.asarray(model.diff_fn(x)))
    if sig == 0.0:
        raise ZeroDivisionError("singular diffusion at the spot")
    mu_p = float(np.asarray(model.drift_deriv_fn(x)))
    sig_p = float(np.asarray(model.diff_deriv_fn(x)))
    xi1 = draw.normals[:, 0]
    loc = xi1 * (1.0 + mu_p * model.dt) / (sig * np.sqrt(model.dt))
    scale = (sig_p / sig) * (xi1 ** 2 - 1.0)
    return loc + scale


def delta_labels(draw: PathDraw, spec: PayoffSpec, model, method: LabelMethod):
    if method.delta_kind == "none":
        return None
    if method.delta_kind == "pathwise":
        return pathwise_delta(draw, spec, model)
    if method.delta_kind == "pathwise_smoothed":
        return pathwise_smoothed_delta(draw, spec, model)
    if method.delta_kind == "lrm":
        d = lrm_delta(draw, spec, model)
        if isinstance(model, BachelierBasketParams):
            # Scalar average across assets is the training target; broadcast
            # it back so the label matches the input dimension.
            avg = d.mean(axis=1, keepdims=True)
            return np.broadcast_to(avg, d.shape).copy()
        return d
    raise ConfigurationError(f"unknown delta_kind {method.delta_kind!r}")


def gamma_labels(draw: PathDraw, spec: PayoffSpec, model, method: LabelMethod):
    if method.gamma_kind == "none":
        return None
    if method.gamma_kind == "pw_lr":
        return pw_lr_gamma(draw, spec, model)
    if method.gamma_kind == "lrm":
        return lrm_gamma(draw, spec, model)
    raise ConfigurationError(f"unknown gamma_kind {method.gamma_kind!r}")


def with_spot(model, x):
    """Copy of `model` re-anchored at spot(s) x."""
    if isinstance(model, BachelierBasketParams):
        return replace(model, spots=np.asarray(x, dtype=np.float64))
    return replace(model, spot=float(x))


def make_labeled_sample(x, k: int, method: LabelMethod, model, spec: PayoffSpec,
                        gen) -> LabeledSample:
    """One training record: k inner draws from spot(s) x, labels averaged."""
    if k < 1:
        raise ConfigurationError("k must be >= 1")
    m = with_spot(model, x)
    draw = draw_paths(m, gen, k)
    value = float(payoff_of(draw, spec, m).mean())
    d = delta_labels(draw, spec, m, method)
    g = gamma_labels(draw, spec, m, method)
    return LabeledSample(
        input=np.atleast_1d(np.asarray(x, dtype=np.float64)),
        value_label=value,
        delta_label=None if d is None else d.mean(axis=0),
        gamma_label=None if g is None else float(g.mean()),
    )
