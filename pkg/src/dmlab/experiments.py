"""Experiment definitions: models, payoffs, oracles, and default configs.

Each experiment maps a 1-D evaluation grid of spot levels to network
inputs (the basket places all assets at the grid level) and to oracle
price/delta/gamma values.
"""

import numpy as np

from dmlab.errors import ConfigurationError
from dmlab.labels import LabelMethod
from dmlab.market_models import BachelierBasketParams, GbmParams, TwoStepGbmParams
from dmlab.oracles import (bachelier_basket_digital, barrier_price, bs_digital,
                           portfolio_greeks)
from dmlab.payoffs import PayoffSpec

EXPERIMENTS = ("digital", "basket_digital", "smoothing_sweep", "barrier",
               "gamma_portfolio")

# Loss weights by method role: value-only, value+delta, value+delta+gamma.
_WEIGHTS = {
    "standard": (1.0, 0.0, 0.0),
    "pathwise": (0.5, 0.5, 0.0),
    "smoothed": (0.5, 0.5, 0.0),
    "lrm": (0.5, 0.5, 0.0),
    "delta_pathwise": (0.5, 0.5, 0.0),
    "delta_lrm": (0.5, 0.5, 0.0),
    "pw_lr": (0.4, 0.4, 0.2),
}


def method_weights(name: str):
    try:
        return _WEIGHTS[name]
    except KeyError:
        raise ConfigurationError(f"unknown method {name!r}") from None


def label_method(name: str, smoothing_eps_multiplier=None) -> LabelMethod:
    if name == "standard":
        return LabelMethod()
    if name in ("pathwise", "delta_pathwise"):
        return LabelMethod(delta_kind="pathwise")
    if name in ("lrm", "delta_lrm"):
        return LabelMethod(delta_kind="lrm")
    if name == "smoothed":
        if smoothing_eps_multiplier is None:
            raise ConfigurationError("smoothed method needs an eps multiplier")
        return LabelMethod(delta_kind="pathwise_smoothed",
                           smoothing_eps_multiplier=smoothing_eps_multiplier)
    if name == "pw_lr":
        return LabelMethod(delta_kind="pathwise", gamma_kind="pw_lr")
    raise ConfigurationError(f"unknown method {name!r}")


class ExperimentKit:
    """Model/payoff/oracle bundle for one experiment, built from a config."""

    def __init__(self, cfg: dict):
        self.cfg = cfg
        self.name = cfg["experiment"]
        if self.name not in EXPERIMENTS:
            raise ConfigurationError(f"unknown experiment {self.name!r}")
        m = cfg["model"]
        p = cfg["payoff"]
        if self.name in ("digital", "smoothing_sweep"):
            self.model = GbmParams(spot=m["spot"], rate=m["rate"], vol=m["vol"],
                                   maturity=m["maturity"])
            self.input_dim = 1
            self.spec = PayoffSpec(kind="digital", strike=p["strike"],
                                   rate=m["rate"], maturity=m["maturity"])
        elif self.name == "basket_digital":
            d = int(m["n_assets"])
            self.model = BachelierBasketParams(
                spots=np.full(d, float(m["spot"])),
                vols=np.full(d, float(m["vol"])),
                weights=np.full(d, 1.0 / d),
                maturity=m["maturity"])
            self.input_dim = d
            self.spec = PayoffSpec(kind="basket_digital", strike=p["strike"],
                                   rate=m["rate"], maturity=m["maturity"])
        elif self.name == "barrier":
            self.model = TwoStepGbmParams(spot=m["spot"], rate=m["rate"],
                                          vol=m["vol"], t1=m["t1"], t2=m["t2"])
            self.input_dim = 1
            self.barrier_mode = p.get("barrier_mode", "fixed")
            if self.barrier_mode not in ("fixed", "relative"):
                raise ConfigurationError(
                    f"barrier_mode must be fixed or relative, "
                    f"got {self.barrier_mode!r}")
            self.spec = PayoffSpec(kind="barrier_call", strike=p["strike"],
                                   barrier=p["barrier"], rate=m["rate"],
                                   maturity=m["t2"])
        elif self.name == "gamma_portfolio":
            self.model = GbmParams(spot=m["spot"], rate=m["rate"], vol=m["vol"],
                                   maturity=m["maturity"])
            self.input_dim = 1
            self.spec = PayoffSpec(
                kind="call_portfolio",
                portfolio_weights=np.asarray(p["weights"], float),
                portfolio_strikes=np.asarray(p["strikes"], float),
                rate=m["rate"], maturity=m["maturity"])
        self.rate = m["rate"]

    def _relative_barrier(self, x: float) -> float:
        p, m = self.cfg["payoff"], self.cfg["model"]
        return p["barrier"] * float(x) / m["spot"]

    def spec_at(self, x) -> PayoffSpec:
        """Payoff contract for a training point at spot level x.

        Identical to .spec except under the per-point barrier reading,
        where the barrier scales with the initial spot.
        """

        if self.name == "barrier" and self.barrier_mode == "relative":
            p = self.cfg["payoff"]
            return PayoffSpec(kind="barrier_call", strike=p["strike"],
                              barrier=self._relative_barrier(x),
                              rate=self.rate, maturity=self.cfg["model"]["t2"])
        return self.spec

    def smoothing_spec(self, eps_multiplier: float) -> PayoffSpec:
        """Digital payoff with the step replaced by a ramp of width
        eps_multiplier * sigma * sqrt(T) * reference spot."""
        m = self.cfg["model"]
        eps = eps_multiplier * m["vol"] * np.sqrt(m["maturity"]) * m["spot"]
        return PayoffSpec(kind="smoothed_digital", strike=self.cfg["payoff"]["strike"],
                          smoothing_eps=eps, rate=m["rate"], maturity=m["maturity"])

    def train_spots(self, gen, n: int) -> np.ndarray:
        """Training inputs of shape (n, input_dim)."""
        lo, hi = self.cfg["train_range"]["lo"], self.cfg["train_range"]["hi"]
        if self.name == "basket_digital":
            return gen.uniform(lo, hi, size=(n, self.input_dim))
        return gen.uniform(lo, hi, size=(n, 1))

    def grid(self) -> np.ndarray:
        g = self.cfg["eval_grid"]
        if g["n_points"] < 2:
            raise ConfigurationError("eval grid needs at least 2 points")
        return np.linspace(g["lo"], g["hi"], int(g["n_points"]))

    def grid_inputs(self, grid: np.ndarray) -> np.ndarray:
        if self.name == "basket_digital":
            return np.repeat(grid[:, None], self.input_dim, axis=1)
        return grid[:, None]

    @property
    def has_gamma_oracle(self) -> bool:
        return self.name == "gamma_portfolio"

    def oracle_on_grid(self, grid: np.ndarray):
        """(price, averaged delta, gamma-or-None) arrays over grid spots."""
        p = self.cfg["payoff"]
        m = self.cfg["model"]
        if self.name in ("digital", "smoothing_sweep"):
            res = bs_digital(grid, p["strike"], m["rate"], m["vol"], m["maturity"])
            return np.asarray(res.price), np.asarray(res.delta), None
        if self.name == "basket_digital":
            price = np.empty_like(grid)
            delta = np.empty_like(grid)
            for i, s in enumerate(grid):
                res = bachelier_basket_digital(
                    self.model, p["strike"], rate=m["rate"],
                    spots=np.full(self.input_dim, s))
                price[i] = res.price
                delta[i] = float(np.mean(res.delta))
            return price, delta, None
        if self.name == "barrier":
            price = np.empty_like(grid)
            delta = np.empty_like(grid)
            for i, s in enumerate(grid):
                if self.barrier_mode == "relative":
                    # The contract's barrier moves with the initial spot, so
                    # the target delta is the total derivative.
                    def g(u):
                        return float(barrier_price(
                            self.model, self._relative_barrier(u),
                            p["strike"], spot=u).price)
                    h = 1e-3 * s
                    price[i] = g(s)
                    delta[i] = (g(s + h) - g(s - h)) / (2.0 * h)
                else:
                    res = barrier_price(self.model, p["barrier"],
                                        p["strike"], spot=s)
                    price[i] = res.price
                    delta[i] = res.delta
            return price, delta, None
        if self.name == "gamma_portfolio":
            res = portfolio_greeks(grid, p["weights"], p["strikes"], m["rate"],
                                   m["vol"], m["maturity"])
            return (np.asarray(res.price), np.asarray(res.delta),
                    np.asarray(res.gamma))
        raise ConfigurationError(f"unknown experiment {self.name!r}")


def default_config(experiment: str) -> dict:
    """Fully resolved default config dict for one experiment."""
    maturity = 1.0 / 3.0
    common = {
        "schema_version": 1,
        "experiment": experiment,
        "seed": 100,
        "replications": 1,
        "m": 512,
        "k": 10,
        "network": {"hidden_layers": 4, "hidden_units": 20},
        "train": {"epochs": 600, "batch_size": 256,
                  "lr_max": 1e-3, "lr_min": 1e-6},
        "output": f"out/{experiment}",
    }
    if experiment == "digital":
        return {**common,
                "methods": ["standard", "pathwise", "lrm"],
                "model": {"spot": 100.0, "rate": 0.0, "vol": 0.2,
                          "maturity": maturity},
                "payoff": {"strike": 100.0},
                "train_range": {"lo": 40.0, "hi": 160.0},
                "eval_grid": {"lo": 40.0, "hi": 160.0, "n_points": 128}}
    if experiment == "smoothing_sweep":
        return {**common,
                "m": 1024,
                "replications": 30,
                "methods": ["standard", "lrm"],
                "eps_multipliers": [0.1, 0.25, 0.5, 1.0, 2.0, 4.0],
                "model": {"spot": 100.0, "rate": 0.0, "vol": 0.2,
                          "maturity": maturity},
                "payoff": {"strike": 100.0},
                "train_range": {"lo": 40.0, "hi": 160.0},
                "eval_grid": {"lo": 40.0, "hi": 160.0, "n_points": 128}}
    if experiment == "basket_digital":
        spot, vol = 100.0, 10.0
        width = float(3.0 * vol * np.sqrt(maturity))
        return {**common,
                "m": 4096,
                "k": 25,
                "methods": ["standard", "pathwise", "lrm"],
                "model": {"spot": spot, "rate": 0.0, "vol": vol,
                          "maturity": maturity, "n_assets": 20},
                "payoff": {"strike": 100.0},
                "train_range": {"lo": spot - width, "hi": spot + width},
                "eval_grid": {"lo": 95.0, "hi": 105.0, "n_points": 128}}
    if experiment == "barrier":
        return {**common,
                "m": 1024,
                "replications": 10,
                "methods": ["standard", "pathwise", "lrm"],
                "model": {"spot": 100.0, "rate": 0.0, "vol": 0.2,
                          "t1": 1.0 / 6.0, "t2": maturity},
                "payoff": {"strike": 50.0, "barrier": 85.0,
                           "barrier_mode": "fixed"},
                "train_range": {"lo": 40.0, "hi": 160.0},
                "eval_grid": {"lo": 40.0, "hi": 160.0, "n_points": 128}}
    if experiment == "gamma_portfolio":
        return {**common,
                "m": 1024,
                "methods": ["standard", "delta_pathwise", "delta_lrm", "pw_lr"],
                "sample_sizes": [1024, 4096],
                "model": {"spot": 1.0, "rate": 0.0, "vol": 0.2,
                          "maturity": maturity},
                "payoff": {"weights": [1.0, -1.5, 0.75],
                           "strikes": [0.85, 0.90, 1.15]},
                "train_range": {"lo": 0.3, "hi": 2.0},
                "eval_grid": {"lo": 0.3, "hi": 2.0, "n_points": 128}}
    raise ConfigurationError(f"unknown experiment {experiment!r}")
