"""
Clipped-surrogate PPO for one-step (contextual bandit) episodes.

Objective maximised per batch:
    L(θ) = mean(min(r·A, clip(r, 1−ε, 1+ε)·A)) − c·mean((V(x) − R)²)
with r = exp(log π_θ(w|x) − log π_old(w|x)). Gradients are analytic.
"""
import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import digamma

from config import PpoConfig
from errors import NonFiniteGradient, PreconditionFailed
from fusion.policy import PARAM_NAMES, PolicyParams, dirichlet_log_prob, forward

logger = logging.getLogger(__name__)

ADVANTAGE_NORMALIZE_MIN = 8


@dataclass(frozen=True)
class Episode:
    x: np.ndarray
    w: np.ndarray
    log_prob_old: float
    reward: float
    advantage: float = 0.0


@dataclass(frozen=True)
class PpoDiagnostics:
    mean_objective: float
    mean_ratio: float
    clip_fraction: float
    value_loss: float

    def as_dict(self) -> dict:
        return {
            "mean_objective": self.mean_objective,
            "mean_ratio": self.mean_ratio,
            "clip_fraction": self.clip_fraction,
            "value_loss": self.value_loss,
        }


def compute_advantages(params: PolicyParams, episodes: list[Episode]) -> list[Episode]:
    """A = reward − V(x), normalized to zero mean / unit variance for batches of 8 or more."""
    if not episodes:
        return []
    X = np.stack([e.x for e in episodes])
    rewards = np.array([e.reward for e in episodes])
    adv = rewards - forward(params, X).value
    if len(episodes) >= ADVANTAGE_NORMALIZE_MIN:
        adv = adv - adv.mean()
        std = adv.std()
        if std > 1e-12:
            adv = adv / std
    return [replace(e, advantage=float(a)) for e, a in zip(episodes, adv)]


def surrogate_terms(ratio, advantage, epsilon: float) -> np.ndarray:
    ratio = np.asarray(ratio, dtype=float)
    advantage = np.asarray(advantage, dtype=float)
    clipped = np.clip(ratio, 1.0 - epsilon, 1.0 + epsilon)
    return np.minimum(ratio * advantage, clipped * advantage)


@dataclass
class _Batch:
    X: np.ndarray
    W: np.ndarray
    logp_old: np.ndarray
    adv: np.ndarray
    returns: np.ndarray


def _batch(episodes: list[Episode]) -> _Batch:
    if not episodes:
        raise PreconditionFailed("PPO update needs a non-empty batch")
    return _Batch(
        X=np.stack([e.x for e in episodes]),
        W=np.stack([e.w for e in episodes]),
        logp_old=np.array([e.log_prob_old for e in episodes]),
        adv=np.array([e.advantage for e in episodes]),
        returns=np.array([e.reward for e in episodes]),
    )


def objective_and_gradient(params: PolicyParams, batch: _Batch, epsilon: float, value_coef: float):
    """Return (objective, gradient dict, ratios)."""
    n = batch.X.shape[0]
    fw = forward(params, batch.X)
    logp = dirichlet_log_prob(fw.alpha, batch.W)
    ratio = np.exp(logp - batch.logp_old)

    unclipped = ratio * batch.adv
    clipped = np.clip(ratio, 1.0 - epsilon, 1.0 + epsilon) * batch.adv
    surrogate = np.minimum(unclipped, clipped)
    value_err = fw.value - batch.returns
    objective = float(surrogate.mean() - value_coef * np.mean(value_err ** 2))

    # policy head: only the unclipped branch carries gradient
    active = (unclipped <= clipped).astype(float)
    g_logp = batch.adv * ratio * active / n
    total = fw.alpha.sum(axis=1, keepdims=True)
    dlogp_dalpha = digamma(total) - digamma(fw.alpha) + np.log(batch.W)
    g_logits = g_logp[:, None] * dlogp_dalpha * (fw.alpha - 1e-3)
    g_pre_h = (g_logits @ params.W2) * (1.0 - fw.h ** 2)

    # value head
    g_value = -2.0 * value_coef * value_err / n
    g_pre_g = np.outer(g_value, params.v2) * (1.0 - fw.g ** 2)

    grads = {
        "W1": g_pre_h.T @ batch.X,
        "b1": g_pre_h.sum(axis=0),
        "W2": g_logits.T @ fw.h,
        "b2": g_logits.sum(axis=0),
        "V1": g_pre_g.T @ batch.X,
        "c1": g_pre_g.sum(axis=0),
        "v2": fw.g.T @ g_value,
        "c2": np.array([g_value.sum()]),
    }
    return objective, grads, ratio


def surrogate_objective(params: PolicyParams, episodes: list[Episode], epsilon: float,
                        value_coef: float = 0.5) -> float:
    objective, _, _ = objective_and_gradient(params, _batch(episodes), epsilon, value_coef)
    return objective


# ── Optimizer ─────────────────────────────────────────────────────────────────

class AdamOptimizer:
    """Adam in ascent form; state is checkpointable."""

    def __init__(self, learning_rate: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, params: PolicyParams, grads: dict[str, np.ndarray]) -> PolicyParams:
        self.t += 1
        updated = {}
        for name in PARAM_NAMES:
            g = grads[name]
            m = self.beta1 * self.m.get(name, np.zeros_like(g)) + (1 - self.beta1) * g
            v = self.beta2 * self.v.get(name, np.zeros_like(g)) + (1 - self.beta2) * g * g
            self.m[name], self.v[name] = m, v
            m_hat = m / (1 - self.beta1 ** self.t)
            v_hat = v / (1 - self.beta2 ** self.t)
            updated[name] = getattr(params, name) + self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)
        return PolicyParams(**updated)

    def state(self) -> dict:
        return {"t": self.t, "m": self.m, "v": self.v}

    def load_state(self, state: dict):
        self.t = int(state.get("t", 0))
        self.m = {k: np.asarray(v, dtype=float) for k, v in state.get("m", {}).items()}
        self.v = {k: np.asarray(v, dtype=float) for k, v in state.get("v", {}).items()}


# ── Update ────────────────────────────────────────────────────────────────────

def ppo_update(params: PolicyParams, episodes: list[Episode], cfg: PpoConfig,
               optimizer: AdamOptimizer | None = None) -> tuple[PolicyParams, PpoDiagnostics]:
    """
    Run cfg.epochs_per_batch gradient-ascent passes over one batch.
    Diagnostics are measured before each step and averaged over epochs.
    """
    batch = _batch(episodes)
    optimizer = optimizer or AdamOptimizer(cfg.learning_rate)
    current = params.copy()
    objectives, ratios, clip_fractions, value_losses = [], [], [], []

    for _ in range(cfg.epochs_per_batch):
        objective, grads, ratio = objective_and_gradient(current, batch, cfg.epsilon, cfg.value_coef)
        if not all(np.all(np.isfinite(g)) for g in grads.values()):
            raise NonFiniteGradient(
                f"non-finite gradient (objective={objective}, mean ratio={float(np.mean(ratio))})",
                objective=objective)
        objectives.append(objective)
        ratios.append(float(ratio.mean()))
        clip_fractions.append(float(np.mean(np.abs(ratio - 1.0) > cfg.epsilon)))
        value_losses.append(float(np.mean((forward(current, batch.X).value - batch.returns) ** 2)))
        current = optimizer.step(current, grads)

    if not current.is_finite():
        raise NonFiniteGradient("parameters became non-finite after the update")

    diagnostics = PpoDiagnostics(
        mean_objective=float(np.mean(objectives)),
        mean_ratio=float(np.mean(ratios)),
        clip_fraction=float(np.mean(clip_fractions)),
        value_loss=float(np.mean(value_losses)),
    )
    return current, diagnostics
