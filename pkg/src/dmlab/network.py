"""Feedforward approximator with value, input-gradient, and second-derivative
outputs, trained jointly on value/delta/gamma labels.

The forward pass follows z_0 = x, z_l = g(z_{l-1}) W_l + b_l with softplus
activations; the input gradient comes from the mirrored backward recursion
zbar_L = 1, zbar_{l-1} = (zbar_l W_l^T) o g'(z_{l-1}).  For training, the
same recursions are rebuilt on the autodiff tape so the composite loss can
be reverse-differentiated with respect to every weight and bias.
"""

import json
from dataclasses import dataclass

import numpy as np

from dmlab import autodiff as ad
from dmlab.errors import ConfigurationError
from dmlab.rng import TAG_INIT, TAG_SHUFFLE, substream

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class NetworkConfig:
    input_dim: int
    hidden_layers: int = 4
    hidden_units: int = 20
    activation: str = "softplus"

    def __post_init__(self):
        if self.hidden_layers < 1 or self.hidden_units < 1 or self.input_dim < 1:
            raise ConfigurationError("network dimensions must be >= 1")
        if self.activation != "softplus":
            raise ConfigurationError("only softplus activation is supported")

    def layer_dims(self):
        return ([self.input_dim]
                + [self.hidden_units] * self.hidden_layers
                + [1])


@dataclass
class NetworkParams:
    weights: list   # W_l, shapes chaining input_dim -> hidden -> 1
    biases: list    # b_l, row vectors

    def copy(self):
        return NetworkParams([w.copy() for w in self.weights],
                             [b.copy() for b in self.biases])


@dataclass(frozen=True)
class TrainConfig:
    loss_weights: tuple = (1.0, 0.0, 0.0)   # (value, delta, gamma)
    epochs: int = 100
    batch_size: int = 256
    lr_max: float = 1e-3
    lr_min: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        wv, wd, wg = self.loss_weights
        if min(wv, wd, wg) < 0 or abs(wv + wd + wg - 1.0) > 1e-9:
            raise ConfigurationError("loss_weights must be nonnegative and sum to 1")
        if self.batch_size < 1 or not (self.lr_max >= self.lr_min > 0):
            raise ConfigurationError("invalid batch size or learning rates")


def init_params(config: NetworkConfig, gen) -> NetworkParams:
    """Uniform init scaled by fan-in/fan-out, zero biases."""
    dims = config.layer_dims()
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(gen.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros((1, fan_out)))
    return NetworkParams(weights, biases)


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def forward(params: NetworkParams, x):
    """Value and all pre-activations; x is (n, input_dim)."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != params.weights[0].shape[0]:
        raise ValueError("input dimension mismatch")
    pre = [x @ params.weights[0] + params.biases[0]]
    for w, b in zip(params.weights[1:], params.biases[1:]):
        pre.append(np.logaddexp(0.0, pre[-1]) @ w + b)
    return pre[-1], pre


def input_gradient(params: NetworkParams, pre):
    """Gradient of the output w.r.t. the input, shape (n, input_dim)."""
    n = pre[-1].shape[0]
    u = np.ones((n, 1))
    for i in range(len(params.weights) - 1, 0, -1):
        u = (u @ params.weights[i].T) * _sigmoid(pre[i - 1])
    return u @ params.weights[0].T


def input_second_derivative(params: NetworkParams, x):
    """d^2 f / dx^2 for scalar-input networks, shape (n,)."""
    if params.weights[0].shape[0] != 1:
        raise ConfigurationError("second derivative supported for 1-D input only")
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    _, pre = forward(params, x)
    n = x.shape[0]
    nl = len(params.weights)

    # Tangents t_i = d pre_i / dx alongside the forward pass.
    t = [np.ones((n, 1)) @ params.weights[0]]
    for i in range(1, nl):
        t.append((_sigmoid(pre[i - 1]) * t[i - 1]) @ params.weights[i])

    # u_i = dy/d pre_i, v_i = du_i/dx down the backward recursion.
    u = np.ones((n, 1))
    v = np.zeros((n, 1))
    for i in range(nl - 1, 0, -1):
        s = _sigmoid(pre[i - 1])
        uw = u @ params.weights[i].T
        v = (v @ params.weights[i].T) * s + uw * (s * (1.0 - s)) * t[i - 1]
        u = uw * s
    return (v @ params.weights[0].T)[:, 0]


def _tape_outputs(w_vars, b_vars, x, need_delta, need_gamma):
    """Composite (value, input-gradient, second-derivative) on the tape."""
    n = x.shape[0]
    nl = len(w_vars)
    x_var = ad.const(x)
    ones = ad.const(np.ones((n, 1)))

    pre = [ad.add(ad.matmul(x_var, w_vars[0]), b_vars[0])]
    for i in range(1, nl):
        pre.append(ad.add(ad.matmul(ad.softplus(pre[-1]), w_vars[i]), b_vars[i]))
    y = pre[-1]

    delta = None
    grad_u = None
    sigs = [None] * nl
    if need_delta or need_gamma:
        u = ones
        us = [None] * nl   # us[i] = u entering the step that consumes W_i
        for i in range(nl - 1, 0, -1):
            us[i] = u
            sigs[i - 1] = ad.sigmoid(pre[i - 1])
            u = ad.mul(ad.matmul(u, ad.transpose(w_vars[i])), sigs[i - 1])
        grad_u = (us, u)
        delta = ad.matmul(u, ad.transpose(w_vars[0]))

    second = None
    if need_gamma:
        us, _ = grad_u
        t = [ad.matmul(ones, w_vars[0])]
        for i in range(1, nl):
            t.append(ad.matmul(ad.mul(sigs[i - 1], t[i - 1]), w_vars[i]))
        one = ad.const(np.ones(1))
        v = ad.const(np.zeros((n, 1)))
        for i in range(nl - 1, 0, -1):
            s = sigs[i - 1]
            sp = ad.mul(s, ad.sub(one, s))
            uw = ad.matmul(us[i], ad.transpose(w_vars[i]))
            v = ad.add(ad.mul(ad.matmul(v, ad.transpose(w_vars[i])), s),
                       ad.mul(ad.mul(uw, sp), t[i - 1]))
        second = ad.matmul(v, ad.transpose(w_vars[0]))

    return y, delta, second


def _loss_graph(params: NetworkParams, batch, weights):
    """Tape graph of the weighted value/delta/gamma MSE on one batch."""
    x, y_lab, d_lab, g_lab = batch
    wv, wd, wg = weights
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    n = x.shape[0]
    need_delta = wd > 0
    need_gamma = wg > 0
    if need_delta and d_lab is None:
        raise ConfigurationError("delta loss weight set but batch has no delta labels")
    if need_gamma and g_lab is None:
        raise ConfigurationError("gamma loss weight set but batch has no gamma labels")
    if need_gamma and x.shape[1] != 1:
        raise ConfigurationError("gamma loss supported for 1-D input only")

    w_vars = [ad.Var(w) for w in params.weights]
    b_vars = [ad.Var(b) for b in params.biases]
    y, delta, second = _tape_outputs(w_vars, b_vars, x, need_delta, need_gamma)

    terms = []
    y_t = ad.const(np.asarray(y_lab, dtype=np.float64).reshape(n, 1))
    terms.append(ad.scale(ad.sum_all(ad.square(ad.sub(y, y_t))), wv / n))
    if need_delta:
        d_t = ad.const(np.asarray(d_lab, dtype=np.float64).reshape(n, x.shape[1]))
        terms.append(ad.scale(ad.sum_all(ad.square(ad.sub(delta, d_t))),
                              wd / (n * x.shape[1])))
    if need_gamma:
        g_t = ad.const(np.asarray(g_lab, dtype=np.float64).reshape(n, 1))
        terms.append(ad.scale(ad.sum_all(ad.square(ad.sub(second, g_t))), wg / n))

    total = terms[0]
    for t in terms[1:]:
        total = ad.add(total, t)
    return total, w_vars, b_vars


def loss(params: NetworkParams, batch, weights) -> float:
    total, _, _ = _loss_graph(params, batch, weights)
    return float(total.value)


def parameter_gradient(params: NetworkParams, batch, weights):
    """Exact gradient of `loss` w.r.t. every weight and bias."""
    total, w_vars, b_vars = _loss_graph(params, batch, weights)
    ad.backward(total)
    gw = [v.grad if v.grad is not None else np.zeros_like(v.value) for v in w_vars]
    gb = [v.grad if v.grad is not None else np.zeros_like(v.value) for v in b_vars]
    return gw, gb


@dataclass
class AdamState:
    m_w: list
    v_w: list
    m_b: list
    v_b: list
    step: int = 0

    @classmethod
    def zeros_like(cls, params: NetworkParams):
        return cls(m_w=[np.zeros_like(w) for w in params.weights],
                   v_w=[np.zeros_like(w) for w in params.weights],
                   m_b=[np.zeros_like(b) for b in params.biases],
                   v_b=[np.zeros_like(b) for b in params.biases])


def adam_step(params: NetworkParams, state: AdamState, grads, lr: float):
    """One bias-corrected Adam update; mutates params and state."""
    gw, gb = grads
    state.step += 1
    t = state.step
    c1 = 1.0 - ADAM_BETA1 ** t
    c2 = 1.0 - ADAM_BETA2 ** t
    for arrs, ms, vs, gs in ((params.weights, state.m_w, state.v_w, gw),
                             (params.biases, state.m_b, state.v_b, gb)):
        for i, g in enumerate(gs):
            ms[i] = ADAM_BETA1 * ms[i] + (1.0 - ADAM_BETA1) * g
            vs[i] = ADAM_BETA2 * vs[i] + (1.0 - ADAM_BETA2) * g * g
            arrs[i] = arrs[i] - lr * (ms[i] / c1) / (np.sqrt(vs[i] / c2) + ADAM_EPS)
    return params, state


def cosine_lr(step: int, total_steps: int, lr_max: float, lr_min: float) -> float:
    frac = step / max(total_steps, 1)
    return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + np.cos(np.pi * frac))


@dataclass(frozen=True)
class Normalizer:
    input_mean: np.ndarray
    input_std: np.ndarray
    value_mean: float
    value_std: float

    @property
    def delta_scale(self):
        return self.input_std / self.value_std

    @property
    def gamma_scale(self):
        return float(self.input_std[0] ** 2 / self.value_std)

    def norm_inputs(self, x):
        return (np.asarray(x, dtype=np.float64) - self.input_mean) / self.input_std

    def norm_values(self, y):
        return (np.asarray(y, dtype=np.float64) - self.value_mean) / self.value_std

    def norm_deltas(self, d):
        return np.asarray(d, dtype=np.float64) * self.delta_scale

    def norm_gammas(self, g):
        return np.asarray(g, dtype=np.float64) * self.gamma_scale

    def denorm_values(self, y):
        return np.asarray(y, dtype=np.float64) * self.value_std + self.value_mean

    def denorm_deltas(self, d):
        return np.asarray(d, dtype=np.float64) / self.delta_scale

    def denorm_gammas(self, g):
        return np.asarray(g, dtype=np.float64) / self.gamma_scale


def fit_normalizer(x, y) -> Normalizer:
    """Standardize inputs and value labels over the training set."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    std_x = np.maximum(x.std(axis=0), 1e-12)
    std_y = max(float(y.std()), 1e-12)
    return Normalizer(input_mean=x.mean(axis=0), input_std=std_x,
                      value_mean=float(y.mean()), value_std=std_y)


def stack_dataset(samples):
    """LabeledSamples -> (x, y, delta, gamma) arrays; absent labels -> None."""
    if not samples:
        raise ConfigurationError("empty dataset")
    x = np.stack([s.input for s in samples])
    y = np.array([s.value_label for s in samples])
    d = None
    if samples[0].delta_label is not None:
        d = np.stack([s.delta_label for s in samples])
    g = None
    if samples[0].gamma_label is not None:
        g = np.array([s.gamma_label for s in samples])
    return x, y, d, g


def train(dataset, net_config: NetworkConfig, train_config: TrainConfig,
          init_slot: int = 0):
    """Minibatch Adam with a cosine schedule; deterministic under the seed.

    `dataset` is a list of LabeledSamples or pre-stacked (x, y, d, g)
    arrays.  Returns (NetworkParams, Normalizer).
    """

    if isinstance(dataset, (list, tuple)) and dataset and not isinstance(
            dataset[0], np.ndarray):
        x, y, d, g = stack_dataset(list(dataset))
    else:
        x, y, d, g = dataset
        if x is None or len(x) == 0:
            raise ConfigurationError("empty dataset")
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    m = x.shape[0]

    norm = fit_normalizer(x, y)
    xn = norm.norm_inputs(x)
    yn = norm.norm_values(y)
    dn = None if d is None else norm.norm_deltas(d)
    gn = None if g is None else norm.norm_gammas(g)

    params = init_params(net_config,
                         substream(train_config.seed, index=init_slot, tag=TAG_INIT))
    state = AdamState.zeros_like(params)
    shuffler = substream(train_config.seed, index=init_slot, tag=TAG_SHUFFLE)

    bs = train_config.batch_size
    batches_per_epoch = int(np.ceil(m / bs))
    total_steps = train_config.epochs * batches_per_epoch
    step = 0
    for _ in range(train_config.epochs):
        perm = shuffler.permutation(m)
        for start in range(0, m, bs):
            idx = perm[start:start + bs]
            batch = (xn[idx], yn[idx],
                     None if dn is None else dn[idx],
                     None if gn is None else gn[idx])
            grads = parameter_gradient(params, batch, train_config.loss_weights)
            lr = cosine_lr(step, total_steps, train_config.lr_max,
                           train_config.lr_min)
            adam_step(params, state, grads, lr)
            step += 1
    return params, norm


def predict(params: NetworkParams, norm: Normalizer, x, with_gamma=False):
    """Denormalized price, delta, and optionally gamma on raw inputs."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    xn = norm.norm_inputs(x)
    yn, pre = forward(params, xn)
    price = norm.denorm_values(yn[:, 0])
    delta = norm.denorm_deltas(input_gradient(params, pre))
    gamma = None
    if with_gamma:
        gamma = norm.denorm_gammas(input_second_derivative(params, xn))
    return price, delta, gamma


def save_snapshot(path, net_config: NetworkConfig, params: NetworkParams,
                  norm: Normalizer):
    """Versioned .npz snapshot with exact float64 round-trip."""
    header = json.dumps({
        "snapshot_version": SNAPSHOT_VERSION,
        "input_dim": net_config.input_dim,
        "hidden_layers": net_config.hidden_layers,
        "hidden_units": net_config.hidden_units,
        "activation": net_config.activation,
        "n_layers": len(params.weights),
    })
    arrays = {"header": np.frombuffer(header.encode(), dtype=np.uint8)}
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        arrays[f"w{i}"] = w
        arrays[f"b{i}"] = b
    arrays["input_mean"] = norm.input_mean
    arrays["input_std"] = norm.input_std
    arrays["value_stats"] = np.array([norm.value_mean, norm.value_std])
    np.savez(path, **arrays)


def load_snapshot(path):
    data = np.load(path)
    header = json.loads(bytes(data["header"]).decode())
    if header["snapshot_version"] != SNAPSHOT_VERSION:
        raise ConfigurationError(
            f"unsupported snapshot version {header['snapshot_version']}")
    config = NetworkConfig(input_dim=header["input_dim"],
                           hidden_layers=header["hidden_layers"],
                           hidden_units=header["hidden_units"],
                           activation=header["activation"])
    n = header["n_layers"]
    params = NetworkParams([data[f"w{i}"] for i in range(n)],
                           [data[f"b{i}"] for i in range(n)])
    vm, vs = data["value_stats"]
    norm = Normalizer(input_mean=data["input_mean"], input_std=data["input_std"],
                      value_mean=float(vm), value_std=float(vs))
    return config, params, norm
