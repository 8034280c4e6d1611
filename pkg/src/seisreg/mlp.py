"""Single-hidden-layer perceptron (tanh hidden, logistic output) with
analytic backprop gradients, trained by scaled conjugate gradient.

The trainer follows Moller's published SCG ordering: curvature along the
search direction is estimated from a gradient difference (the Hessian is
never formed), an adaptive scale keeps the effective curvature positive
definite, and a comparison parameter accepts or rejects each step — no
line search and no user-tuned learning rate.  The only exposed knobs are
the two small positive constants sigma and lambda1 plus termination.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError, DivergenceError
from .resample import MinMaxStats, ZscoreStats


class DimensionMismatch(ConfigError):
    pass


class DivergedNonFinite(DivergenceError):
    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history


def logistic(v):
    return 1.0 / (1.0 + np.exp(-v))


@dataclass
class MlpModel:
    """Weights for [n_in] -> tanh[n_hidden] -> logistic[1], biases carried
    as weights from a fixed +1 input in each layer."""

    n_in: int
    n_hidden: int
    w_hidden: np.ndarray   # [n_hidden, n_in + 1], bias last
    w_out: np.ndarray      # [n_hidden + 1], bias last

    @property
    def layer_sizes(self):
        return [self.n_in, self.n_hidden, 1]

    @property
    def weight_count(self) -> int:
        return self.w_hidden.size + self.w_out.size

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.w_hidden.ravel(), self.w_out.ravel()])

    def with_flat(self, flat: np.ndarray) -> "MlpModel":
        nh = self.w_hidden.size
        return MlpModel(
            n_in=self.n_in,
            n_hidden=self.n_hidden,
            w_hidden=flat[:nh].reshape(self.w_hidden.shape).copy(),
            w_out=flat[nh:].copy(),
        )


def init_model(n_in: int, n_hidden: int, seed: int) -> MlpModel:
    """Seeded uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)] per layer."""
    if n_in < 1 or n_hidden < 1:
        raise ConfigError("n_in and n_hidden must be >= 1")
    rng = np.random.default_rng(seed)
    b1 = 1.0 / math.sqrt(n_in + 1)
    b2 = 1.0 / math.sqrt(n_hidden + 1)
    return MlpModel(
        n_in=n_in,
        n_hidden=n_hidden,
        w_hidden=rng.uniform(-b1, b1, size=(n_hidden, n_in + 1)),
        w_out=rng.uniform(-b2, b2, size=n_hidden + 1),
    )


def forward_batch(model: MlpModel, inputs: np.ndarray) -> np.ndarray:
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    if inputs.shape[1] != model.n_in:
        raise DimensionMismatch(
            f"input width {inputs.shape[1]} != n_in {model.n_in}"
        )
    hidden = np.tanh(inputs @ model.w_hidden[:, :-1].T + model.w_hidden[:, -1])
    return logistic(hidden @ model.w_out[:-1] + model.w_out[-1])


def forward(model: MlpModel, x) -> float:
    """Network output in (0, 1) for one input vector."""
    return float(forward_batch(model, np.asarray(x, dtype=np.float64)[None, :])[0])


def loss(model: MlpModel, inputs, targets) -> float:
    """Average error energy (1/2N) * sum of squared output errors."""
    targets = np.asarray(targets, dtype=np.float64)
    if len(targets) == 0:
        raise ConfigError("empty pattern set")
    out = forward_batch(model, inputs)
    err = targets - out
    return float(np.dot(err, err) / (2.0 * len(targets)))


def gradient(model: MlpModel, inputs, targets) -> np.ndarray:
    """Exact backprop gradient of the average error energy, flattened to
    match MlpModel.flatten()."""
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    targets = np.asarray(targets, dtype=np.float64)
    n = len(targets)
    if n == 0:
        raise ConfigError("empty pattern set")
    if inputs.shape[1] != model.n_in:
        raise DimensionMismatch(
            f"input width {inputs.shape[1]} != n_in {model.n_in}"
        )
    v1 = inputs @ model.w_hidden[:, :-1].T + model.w_hidden[:, -1]
    hidden = np.tanh(v1)
    out = logistic(hidden @ model.w_out[:-1] + model.w_out[-1])
    err = targets - out
    delta_out = -err * out * (1.0 - out) / n            # d(loss)/d(v2)
    grad_out = np.concatenate([hidden.T @ delta_out, [delta_out.sum()]])
    delta_hidden = np.outer(delta_out, model.w_out[:-1]) * (1.0 - hidden ** 2)
    grad_hidden = np.hstack([delta_hidden.T @ inputs,
                             delta_hidden.sum(axis=0)[:, None]])
    return np.concatenate([grad_hidden.ravel(), grad_out])


@dataclass
class ScgParams:
    sigma: float = 1e-4
    lambda1: float = 1e-4
    max_iters: int = 500
    target_loss: float = 0.0
    grad_tol: float = 1e-10

    def __post_init__(self):
        if not 0.0 < self.sigma <= 1e-4:
            raise ConfigError(f"sigma must be in (0, 1e-4], got {self.sigma}")
        if not 0.0 < self.lambda1 <= 1e-4:
            raise ConfigError(f"lambda1 must be in (0, 1e-4], got {self.lambda1}")
        if self.max_iters < 0:
            raise ConfigError("max_iters must be >= 0")


@dataclass
class ScgState:
    """Persistent state of one SCG iteration.

    `p` is the conjugate search direction and `r` the steepest-descent
    direction (the negated gradient); `lam`/`lam_bar` are the scale pair
    that stands in for an explicit Hessian.  `delta_raw` caches the
    gradient-difference curvature so rejected steps can re-scale it without
    recomputing second-order information.
    """

    w: np.ndarray
    p: np.ndarray
    r: np.ndarray
    lam: float
    lam_bar: float = 0.0
    success: bool = True
    k: int = 1
    delta_raw: float = 0.0


@dataclass
class TrainHistory:
    loss: list = field(default_factory=list)
    lambda_: list = field(default_factory=list)
    comparison: list = field(default_factory=list)   # Delta_k
    accepted: list = field(default_factory=list)
    curvature: list = field(default_factory=list)    # delta_k after repair
    restarted: list = field(default_factory=list)    # direction reset this step
    final_loss: float = math.nan
    iterations: int = 0
    stop_reason: str = ""


def scg_minimize(loss_fn, grad_fn, w0: np.ndarray, params: ScgParams):
    """Scaled conjugate gradient on an arbitrary objective.

    Returns (w, TrainHistory).  Raises DivergedNonFinite (history attached)
    if any scalar or iterate goes non-finite.
    """
    history = TrainHistory()
    w0 = np.asarray(w0, dtype=np.float64).copy()
    n_restart = len(w0)
    g = grad_fn(w0)
    st = ScgState(w=w0, p=-g, r=-g.copy(), lam=params.lambda1)
    e_w = loss_fn(st.w)

    def check_finite(*scalars):
        if not all(math.isfinite(s) for s in scalars):
            history.stop_reason = "diverged"
            raise DivergedNonFinite("non-finite value in SCG state", history)

    if params.max_iters == 0:
        history.final_loss = e_w
        history.stop_reason = "max_iters"
        return st.w, history
    if float(np.linalg.norm(st.r)) < params.grad_tol:
        history.final_loss = e_w
        history.stop_reason = "gradient_zero"
        return st.w, history

    while True:
        norm_p_sq = float(st.p @ st.p)
        if norm_p_sq == 0.0:
            history.stop_reason = "zero_direction"
            break
        if st.success:
            sigma_k = params.sigma / math.sqrt(norm_p_sq)
            s = (grad_fn(st.w + sigma_k * st.p) - g) / sigma_k
            st.delta_raw = float(st.p @ s)
        delta = st.delta_raw + (st.lam - st.lam_bar) * norm_p_sq
        if delta <= 0:  # make the effective curvature positive definite
            st.lam_bar = 2.0 * (st.lam - delta / norm_p_sq)
            delta = -delta + st.lam * norm_p_sq
            st.lam = st.lam_bar
        mu = float(st.p @ st.r)
        if mu == 0.0:
            st.p = st.r.copy()  # degenerate direction; restart along the gradient
            st.success = True
            continue
        alpha = mu / delta
        check_finite(delta, mu, alpha)
        w_try = st.w + alpha * st.p
        e_try = loss_fn(w_try)
        comparison = 2.0 * delta * (e_w - e_try) / mu ** 2
        check_finite(e_try, comparison)

        restarted = False
        if comparison >= 0:
            st.w = w_try
            e_w = e_try
            g = grad_fn(st.w)
            r_new = -g
            st.lam_bar = 0.0
            st.success = True
            if st.k % n_restart == 0:
                p_new = r_new.copy()
                restarted = True
            else:
                beta = (float(r_new @ r_new) - float(r_new @ st.r)) / mu
                p_new = r_new + beta * st.p
            if comparison >= 0.75:
                st.lam = 0.25 * st.lam
            accepted = True
        else:
            st.lam_bar = st.lam
            st.success = False
            p_new = st.p
            r_new = st.r
            accepted = False
        if comparison < 0.25:
            st.lam = st.lam + delta * (1.0 - comparison) / norm_p_sq
        check_finite(st.lam, st.lam_bar)

        history.loss.append(e_w)
        history.lambda_.append(st.lam)
        history.comparison.append(comparison)
        history.accepted.append(accepted)
        history.curvature.append(delta)
        history.restarted.append(restarted)

        st.r = r_new
        st.p = p_new
        if float(np.linalg.norm(st.r)) < params.grad_tol:
            history.stop_reason = "gradient_zero"
            break
        if e_w <= params.target_loss:
            history.stop_reason = "target_loss"
            break
        if st.k >= params.max_iters:
            history.stop_reason = "max_iters"
            break
        st.k += 1

    history.final_loss = e_w
    history.iterations = len(history.loss)
    return st.w, history


def scg_train(model: MlpModel, inputs, targets,
              params: ScgParams | None = None):
    """Train the model on a pattern set; returns (trained model, history)."""
    params = params or ScgParams()
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    targets = np.asarray(targets, dtype=np.float64)

    def loss_fn(w):
        return loss(model.with_flat(w), inputs, targets)

    def grad_fn(w):
        return gradient(model.with_flat(w), inputs, targets)

    w, history = scg_minimize(loss_fn, grad_fn, model.flatten(), params)
    return model.with_flat(w), history


@dataclass
class ModelBundle:
    """A trained model plus everything needed to apply it to raw data:
    the pooled z-score stats for the inputs, the min-max band map for the
    target, and the training seed."""

    model: MlpModel
    input_stats: ZscoreStats
    target_stats: MinMaxStats
    seed: int
    attribute_names: list = field(default_factory=lambda: ["imp", "amp", "freq"])

    def predict(self, raw_inputs: np.ndarray) -> np.ndarray:
        scored = self.input_stats.apply(np.atleast_2d(raw_inputs))
        return self.target_stats.invert(forward_batch(self.model, scored))

    def to_dict(self):
        return {
            "layer_sizes": self.model.layer_sizes,
            "weights": self.model.flatten().tolist(),
            "hidden_activation": "tanh",
            "output_activation": "logistic",
            "input_stats": self.input_stats.to_dict(),
            "target_stats": self.target_stats.to_dict(),
            "seed": self.seed,
            "attribute_names": list(self.attribute_names),
        }

    @classmethod
    def from_dict(cls, d):
        n_in, n_hidden, n_out = d["layer_sizes"]
        if n_out != 1:
            raise DataError("only single-output models are supported")
        if d.get("hidden_activation", "tanh") != "tanh" or \
                d.get("output_activation", "logistic") != "logistic":
            raise DataError("unsupported activation tags in model file")
        flat = np.asarray(d["weights"], dtype=np.float64)
        template = MlpModel(n_in=n_in, n_hidden=n_hidden,
                            w_hidden=np.zeros((n_hidden, n_in + 1)),
                            w_out=np.zeros(n_hidden + 1))
        if len(flat) != template.weight_count:
            raise DataError(
                f"{len(flat)} weights for layer sizes {d['layer_sizes']}"
            )
        return cls(
            model=template.with_flat(flat),
            input_stats=ZscoreStats.from_dict(d["input_stats"]),
            target_stats=MinMaxStats.from_dict(d["target_stats"]),
            seed=int(d.get("seed", 0)),
            attribute_names=list(d.get("attribute_names", ["imp", "amp", "freq"])),
        )


def save_model(path, bundle: ModelBundle) -> None:
    with open(path, "w") as fh:
        json.dump(bundle.to_dict(), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_model(path) -> ModelBundle:
    with open(path) as fh:
        return ModelBundle.from_dict(json.load(fh))
