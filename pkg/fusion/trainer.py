"""
PPO training driver — gather agent reports once, then sweep shuffled minibatches.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict

from agent.dispatch import gather_reports
from agent.verdict import DETECTION_ROLES
from config import PpoConfig
from data import Resources
from errors import EmptyCorpus, PreconditionFailed
from fusion.checkpoint import Checkpoint, save_checkpoint
from fusion.policy import PolicyParams, policy_mean, policy_sample
from fusion.ppo import AdamOptimizer, Episode, compute_advantages, ppo_update
from fusion.weights import FusionInput, ablation_mask, apply_mask, classify, fuse, fusion_input
from parsing import extract_features, parse_eml
from parsing.models import Label, ParsedEmail, RawEmail

logger = logging.getLogger(__name__)


class FusionSample(BaseModel):
    model_config = ConfigDict(frozen=True)

    source_id: str
    fusion: FusionInput
    label: Label
    corpus: str = ""


@dataclass
class TrainingResult:
    params: PolicyParams
    optimizer: AdamOptimizer
    batch_counter: int
    log: list[dict] = field(default_factory=list)
    checkpoints: list[Path] = field(default_factory=list)


# ── Sample collection ─────────────────────────────────────────────────────────

def samples_from_reports(emails: list[ParsedEmail], labels: list[Label], reports, resources: Resources,
                         corpora: list[str] | None = None) -> list[FusionSample]:
    samples = []
    for i, (email, label) in enumerate(zip(emails, labels)):
        features = extract_features(email, resources.lexicon, resources.reputation)
        samples.append(FusionSample(
            source_id=email.source_id,
            fusion=fusion_input(features, reports[i]),
            label=label,
            corpus=corpora[i] if corpora else "",
        ))
    return samples


def collect_samples(corpus: list[RawEmail], backend, resources: Resources,
                    roles=DETECTION_ROLES, jobs: int = 4) -> list[FusionSample]:
    if not corpus:
        raise EmptyCorpus("training corpus has no emails")
    unlabeled = [raw.source_id for raw in corpus if raw.corpus_label is Label.UNLABELED]
    if unlabeled:
        raise PreconditionFailed(f"{len(unlabeled)} training emails are unlabeled (first: {unlabeled[0]})")
    parsed = [parse_eml(raw) for raw in corpus]
    reports = gather_reports(backend, parsed, roles, jobs)
    return samples_from_reports(parsed, [raw.corpus_label for raw in corpus], reports, resources,
                                [raw.corpus for raw in corpus])


# ── Training ──────────────────────────────────────────────────────────────────

def _episode(params: PolicyParams, sample: FusionSample, rng, mask, threshold: float) -> Episode:
    x = sample.fusion.x
    w, log_prob = policy_sample(params, x, rng)
    y = fuse(apply_mask(w, mask), sample.fusion.probs)
    reward = 1.0 if classify(y, threshold) is sample.label else 0.0
    return Episode(x=x, w=w, log_prob_old=log_prob, reward=reward)


def mean_weights(params: PolicyParams, samples: list[FusionSample], mask=None) -> np.ndarray:
    X = np.stack([s.fusion.x for s in samples])
    means = policy_mean(params, X)
    if mask is not None:
        means = np.stack([apply_mask(m, mask) for m in means])
    return means.mean(axis=0)


def train_on_samples(samples: list[FusionSample], cfg: PpoConfig, *, mask=None, threshold: float = 0.5,
                     params: PolicyParams | None = None, optimizer: AdamOptimizer | None = None,
                     batch_counter: int = 0, checkpoint_dir=None,
                     checkpoint_name: str = "policy") -> TrainingResult:
    """
    Sweep cfg.passes shuffled passes of cfg.batch_size episodes. One PPO update per batch;
    a checkpoint every cfg.checkpoint_every batches and one at the end.
    """
    if not samples:
        raise EmptyCorpus("no fusion samples to train on")
    params = params.copy() if params is not None else PolicyParams.initialize(cfg.seed, cfg.hidden)
    optimizer = optimizer or AdamOptimizer(cfg.learning_rate)
    rng = np.random.default_rng([cfg.seed, batch_counter])
    result = TrainingResult(params=params, optimizer=optimizer, batch_counter=batch_counter)
    checkpoint_dir = Path(checkpoint_dir) if checkpoint_dir else None

    for sweep in range(cfg.passes):
        order = rng.permutation(len(samples))
        for start in range(0, len(order), cfg.batch_size):
            batch = [samples[i] for i in order[start:start + cfg.batch_size]]
            episodes = [_episode(result.params, s, rng, mask, threshold) for s in batch]
            episodes = compute_advantages(result.params, episodes)
            result.params, diagnostics = ppo_update(result.params, episodes, cfg, optimizer)
            result.batch_counter += 1

            entry = {
                "batch": result.batch_counter,
                "pass": sweep + 1,
                "size": len(episodes),
                "mean_reward": float(np.mean([e.reward for e in episodes])),
                **diagnostics.as_dict(),
            }
            result.log.append(entry)
            logger.info("batch %d pass %d reward=%.3f objective=%.4f ratio=%.4f clip=%.3f",
                        entry["batch"], entry["pass"], entry["mean_reward"], entry["mean_objective"],
                        entry["mean_ratio"], entry["clip_fraction"])

            if checkpoint_dir and result.batch_counter % cfg.checkpoint_every == 0:
                path = checkpoint_dir / f"{checkpoint_name}-{result.batch_counter:05d}.json"
                result.checkpoints.append(
                    save_checkpoint(path, result.params, optimizer, cfg, result.batch_counter))

    if checkpoint_dir:
        final = checkpoint_dir / f"{checkpoint_name}.json"
        result.checkpoints.append(save_checkpoint(final, result.params, optimizer, cfg, result.batch_counter))
    return result


def train(corpus: list[RawEmail], backend, cfg: PpoConfig, *, resources: Resources,
          threshold: float = 0.5, enabled_roles=DETECTION_ROLES, jobs: int = 4,
          resume: Checkpoint | None = None, checkpoint_dir=None,
          checkpoint_name: str = "policy") -> tuple[TrainingResult, list[FusionSample]]:
    """Collect reports for a labeled corpus and train the fusion policy on them."""
    samples = collect_samples(corpus, backend, resources, enabled_roles, jobs)
    mask = ablation_mask(enabled_roles)
    logger.info("Training on %d emails (%d phishing), passes=%d batch=%d lr=%g eps=%g",
                len(samples), sum(s.label is Label.PHISHING for s in samples),
                cfg.passes, cfg.batch_size, cfg.learning_rate, cfg.epsilon)
    result = train_on_samples(
        samples, cfg, mask=mask, threshold=threshold,
        params=resume.params if resume else None,
        optimizer=resume.optimizer if resume else None,
        batch_counter=resume.batch_counter if resume else 0,
        checkpoint_dir=checkpoint_dir, checkpoint_name=checkpoint_name,
    )
    return result, samples
