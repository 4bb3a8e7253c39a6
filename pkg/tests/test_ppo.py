import numpy as np
import pytest

from config import PpoConfig
from fusion import FusionInput, PolicyParams, compute_advantages, policy_mean, ppo_update, surrogate_terms
from fusion.policy import PARAM_NAMES, dirichlet_log_prob, forward
from fusion.ppo import Episode, _Batch, objective_and_gradient
from fusion.trainer import FusionSample, mean_weights, train_on_samples
from parsing.models import EmailFeatures, Label


def _episodes(params, n=12, seed=0, noise=0.05):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 9))
    W = rng.dirichlet(np.ones(3), size=n)
    logp = dirichlet_log_prob(forward(params, X).alpha, W)
    jitter = np.clip(rng.normal(0.0, noise, n), -0.1, 0.1) if noise else np.zeros(n)
    rewards = rng.integers(2, size=n).astype(float)
    return [Episode(x=X[i], w=W[i], log_prob_old=float(logp[i] + jitter[i]), reward=float(rewards[i]))
            for i in range(n)]


def _as_batch(episodes, advantages):
    return _Batch(
        X=np.stack([e.x for e in episodes]),
        W=np.stack([e.w for e in episodes]),
        logp_old=np.array([e.log_prob_old for e in episodes]),
        adv=np.asarray(advantages, dtype=float),
        returns=np.array([e.reward for e in episodes]),
    )


# ── Surrogate ─────────────────────────────────────────────────────────────────

def test_surrogate_clips_in_the_advantage_direction():
    terms = surrogate_terms([1.5, 0.5, 1.5, 0.5], [1.0, 1.0, -1.0, -1.0], 0.2)
    assert terms.tolist() == pytest.approx([1.2, 0.5, -1.5, -0.8])


@pytest.mark.parametrize("seed", range(20))
def test_gradient_matches_finite_differences(seed):
    params = PolicyParams.initialize(seed=seed, hidden=5)
    episodes = _episodes(params, seed=100 + seed)
    batch = _as_batch(episodes, np.random.default_rng(seed).normal(size=len(episodes)))
    _, grads, _ = objective_and_gradient(params, batch, 0.2, 0.5)

    h = 1e-5
    for name in PARAM_NAMES:
        base = getattr(params, name)
        numeric = np.zeros_like(base)
        for idx in np.ndindex(base.shape):
            plus, minus = params.copy(), params.copy()
            getattr(plus, name)[idx] += h
            getattr(minus, name)[idx] -= h
            f_plus, _, _ = objective_and_gradient(plus, batch, 0.2, 0.5)
            f_minus, _, _ = objective_and_gradient(minus, batch, 0.2, 0.5)
            numeric[idx] = (f_plus - f_minus) / (2 * h)
        assert np.allclose(grads[name], numeric, rtol=1e-4, atol=1e-6), (seed, name)


def test_zero_learning_rate_keeps_ratio_at_one():
    params = PolicyParams.initialize(seed=2)
    episodes = compute_advantages(params, _episodes(params, n=16, noise=0.0))
    cfg = PpoConfig(learning_rate=0.0, epochs_per_batch=3)
    updated, diagnostics = ppo_update(params, episodes, cfg)
    assert abs(diagnostics.mean_ratio - 1.0) <= 1e-9
    assert diagnostics.clip_fraction == 0.0
    for name in PARAM_NAMES:
        assert np.array_equal(getattr(updated, name), getattr(params, name))


def test_advantages_are_normalized_for_full_batches():
    params = PolicyParams.initialize(seed=0)
    episodes = compute_advantages(params, _episodes(params, n=10))
    adv = np.array([e.advantage for e in episodes])
    assert adv.mean() == pytest.approx(0.0, abs=1e-12)
    assert adv.std() == pytest.approx(1.0)

    small = compute_advantages(params, _episodes(params, n=3))
    raw = [e.reward - float(forward(params, e.x).value[0]) for e in small]
    assert [e.advantage for e in small] == pytest.approx(raw)


# ── Bandit ────────────────────────────────────────────────────────────────────

def _bandit_samples(n=2000, seed=0):
    """Agent 0 always knows the answer; agents 1 and 2 are coin flips."""
    rng = np.random.default_rng(seed)
    samples = []
    for i in range(n):
        p0 = float(rng.integers(2))
        u1, u2 = rng.random(2)
        fusion = FusionInput(features=EmailFeatures(), probs=(p0, float(u1), float(u2)),
                             confidences=(1.0, float(max(u1, 1 - u1)), float(max(u2, 1 - u2))))
        label = Label.PHISHING if p0 == 1.0 else Label.LEGITIMATE
        samples.append(FusionSample(source_id=f"b{i}", fusion=fusion, label=label))
    return samples


def _accuracy(weights, samples):
    P = np.array([s.fusion.probs for s in samples])
    truth = np.array([s.label is Label.PHISHING for s in samples])
    y = (np.asarray(weights) * P).sum(axis=1)
    return float(np.mean((y >= 0.5) == truth))


def test_policy_learns_to_trust_the_oracle_agent():
    samples = _bandit_samples()
    static = _accuracy(np.array([0.3, 0.4, 0.3]), samples)

    cfg = PpoConfig()
    result = train_on_samples(samples, cfg)

    w = mean_weights(result.params, samples)
    assert w[0] > 0.6
    assert w[0] > w[1] and w[0] > w[2]

    per_sample = np.stack([s.fusion.x for s in samples])
    learned = _accuracy(policy_mean(result.params, per_sample), samples)
    assert learned >= static + 0.10
    assert result.batch_counter == int(np.ceil(2000 / cfg.batch_size))
    assert all(np.isfinite(entry["mean_objective"]) for entry in result.log)
