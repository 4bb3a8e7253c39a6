"""
Dirichlet weight policy with a value head.

Two small tanh perceptrons share the 9-dim input: the policy net emits
log-concentrations for a Dirichlet over agent weights, the value net a scalar
baseline. Everything is plain numpy; gradients live in fusion/ppo.py.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from errors import NonFiniteActivation, PreconditionFailed
from fusion.weights import POLICY_INPUT_SIZE

ALPHA_FLOOR = 1e-3
WEIGHT_FLOOR = 1e-12
N_AGENTS = 3

PARAM_NAMES = ("W1", "b1", "W2", "b2", "V1", "c1", "v2", "c2")


@dataclass
class PolicyParams:
    W1: np.ndarray  # (hidden, 9)
    b1: np.ndarray  # (hidden,)
    W2: np.ndarray  # (3, hidden)
    b2: np.ndarray  # (3,)
    V1: np.ndarray  # (hidden, 9)
    c1: np.ndarray  # (hidden,)
    v2: np.ndarray  # (hidden,)
    c2: np.ndarray = field(default_factory=lambda: np.zeros(1))

    @classmethod
    def initialize(cls, seed: int = 0, hidden: int = 16, n_inputs: int = POLICY_INPUT_SIZE) -> "PolicyParams":
        rng = np.random.default_rng(seed)
        scale = 1.0 / np.sqrt(n_inputs)
        return cls(
            W1=rng.normal(0.0, scale, (hidden, n_inputs)),
            b1=np.zeros(hidden),
            W2=rng.normal(0.0, 0.01, (N_AGENTS, hidden)),
            b2=np.zeros(N_AGENTS),
            V1=rng.normal(0.0, scale, (hidden, n_inputs)),
            c1=np.zeros(hidden),
            v2=rng.normal(0.0, 0.01, hidden),
            c2=np.zeros(1),
        )

    def arrays(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def copy(self) -> "PolicyParams":
        return PolicyParams(**{name: arr.copy() for name, arr in self.arrays().items()})

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(arr)) for arr in self.arrays().values())


@dataclass
class Forward:
    """Intermediate activations kept for backpropagation."""
    h: np.ndarray       # policy hidden, (n, hidden)
    logits: np.ndarray  # (n, 3)
    alpha: np.ndarray   # (n, 3)
    g: np.ndarray       # value hidden, (n, hidden)
    value: np.ndarray   # (n,)


def _as_batch(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != POLICY_INPUT_SIZE:
        raise PreconditionFailed(f"policy input must have {POLICY_INPUT_SIZE} values, got {x.shape[1]}")
    if not np.all(np.isfinite(x)):
        raise PreconditionFailed("policy input is not finite")
    return x


def forward(params: PolicyParams, x) -> Forward:
    X = _as_batch(x)
    with np.errstate(over="ignore", invalid="ignore"):
        h = np.tanh(X @ params.W1.T + params.b1)
        logits = h @ params.W2.T + params.b2
        alpha = np.exp(logits) + ALPHA_FLOOR
        g = np.tanh(X @ params.V1.T + params.c1)
        value = g @ params.v2 + params.c2[0]
    if not (np.all(np.isfinite(alpha)) and np.all(np.isfinite(value))):
        raise NonFiniteActivation("policy forward pass produced a non-finite value")
    return Forward(h=h, logits=logits, alpha=alpha, g=g, value=value)


def dirichlet_log_prob(alpha, w) -> np.ndarray:
    """Exact Dirichlet log-density, row-wise for 2-D input."""
    alpha = np.asarray(alpha, dtype=float)
    w = np.asarray(w, dtype=float)
    return (gammaln(alpha.sum(axis=-1)) - gammaln(alpha).sum(axis=-1)
            + ((alpha - 1.0) * np.log(w)).sum(axis=-1))


def log_prob(params: PolicyParams, x, w) -> np.ndarray:
    return dirichlet_log_prob(forward(params, x).alpha, np.atleast_2d(w))


def policy_sample(params: PolicyParams, x, rng: np.random.Generator) -> tuple[np.ndarray, float]:
    """Draw one weight vector and its log-density under the current policy."""
    alpha = forward(params, x).alpha[0]
    w = rng.dirichlet(alpha)
    w = np.maximum(w, WEIGHT_FLOOR)
    w = w / w.sum()
    return w, float(dirichlet_log_prob(alpha, w))


def policy_mean(params: PolicyParams, x) -> np.ndarray:
    alpha = forward(params, x).alpha
    mean = alpha / alpha.sum(axis=1, keepdims=True)
    return mean[0] if np.asarray(x).ndim == 1 else mean


def value(params: PolicyParams, x) -> np.ndarray:
    return forward(params, x).value
