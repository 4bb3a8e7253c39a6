"""
Generate → detect → retrain feedback loop.

Each round samples both classes from the original pool, builds variants, runs
the current detector on them, admits evading variants (capped) into the
training pool and retrains the fusion policy when anything was admitted.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict

from adversarial.generator import (
    AdversarialVariant, FeedbackRecord, generate_llm_variant, rule_based_variant, variant_to_raw,
)
from adversarial.transforms import TransformKind
from artifacts import write_jsonl
from config import GeneratorKind, RunConfig
from data import Resources
from errors import PreconditionFailed
from fusion.inference import DetectionResult, Detector
from fusion.policy import PolicyParams
from fusion.ppo import AdamOptimizer
from fusion.trainer import FusionSample, collect_samples, train_on_samples
from fusion.weights import ablation_mask, fusion_input
from parsing import parse_eml
from parsing.models import Label, ParsedEmail, RawEmail

logger = logging.getLogger(__name__)

RULE_KINDS_BY_LABEL = {
    Label.PHISHING: (TransformKind.SYNONYM_SUB, TransformKind.CONTENT_MOD, TransformKind.HOMOGLYPH),
    Label.LEGITIMATE: (TransformKind.SYNONYM_SUB, TransformKind.CONTENT_MOD),
}


class RoundReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    round: int
    intensity: float
    generated: int
    evaded: int
    evasion_rate: float
    admitted: int
    pool_size: int
    retrained: bool
    evading_kinds: tuple[TransformKind, ...] = ()


@dataclass
class LoopResult:
    pool: list[RawEmail]
    params: PolicyParams | None
    rounds: list[RoundReport] = field(default_factory=list)
    variants: list[AdversarialVariant] = field(default_factory=list)
    feedback: list[FeedbackRecord] = field(default_factory=list)
    optimizer: AdamOptimizer | None = None
    batch_counter: int = 0


def round_intensity(cfg: RunConfig, k: int) -> float:
    adv = cfg.adversarial
    return min(1.0, adv.base_intensity + adv.intensity_step * (k - 1))


def sample_sources(corpus: list[RawEmail], fraction: float, rng: np.random.Generator) -> list[int]:
    """⌈fraction · n⌉ indices per class, returned in corpus order."""
    chosen = []
    for label in (Label.PHISHING, Label.LEGITIMATE):
        members = [i for i, raw in enumerate(corpus) if raw.corpus_label is label]
        if not members:
            continue
        count = min(len(members), math.ceil(fraction * len(members)))
        chosen.extend(rng.choice(members, size=count, replace=False).tolist())
    return sorted(chosen)


def _variant_seed(seed: int, k: int, index: int, v: int) -> int:
    return (seed * 1_000_003 + k * 10_007 + index * 101 + v) % (2 ** 32)


def _generate(backend, email: ParsedEmail, raw: RawEmail, cfg: RunConfig, resources: Resources,
              k: int, index: int, v: int, intensity: float, emphasis) -> AdversarialVariant:
    label = raw.corpus_label
    if cfg.adversarial.generator is GeneratorKind.LLM:
        return generate_llm_variant(backend, email, label, emphasis, round=k, index=v, corpus=raw.corpus)
    return rule_based_variant(email, label, RULE_KINDS_BY_LABEL[label], _variant_seed(cfg.seed, k, index, v),
                              resources, intensity=intensity, round=k, index=v, corpus=raw.corpus)


def _samples_from_results(results: list[DetectionResult], raws: list[RawEmail]) -> list[FusionSample]:
    samples = []
    for result, raw in zip(results, raws):
        reports = {r.role: r for r in result.reports}
        samples.append(FusionSample(source_id=raw.source_id, fusion=fusion_input(result.features, reports),
                                    label=raw.corpus_label, corpus=raw.corpus))
    return samples


def adversarial_loop(corpus: list[RawEmail], backend, params: PolicyParams | None, rounds: int,
                     cfg: RunConfig, resources: Resources, output_dir, *,
                     optimizer: AdamOptimizer | None = None, batch_counter: int = 0,
                     protected=()) -> LoopResult:
    if rounds < 1:
        raise PreconditionFailed(f"adversarial loop needs at least one round, got {rounds}")
    if any(raw.corpus_label is Label.UNLABELED for raw in corpus):
        raise PreconditionFailed("adversarial loop needs a fully labeled corpus")
    learned = cfg.fusion_mode.kind == "learned"
    if learned and params is None:
        raise PreconditionFailed("learned fusion needs trained policy parameters")

    output_dir = Path(output_dir)
    roles = cfg.enabled_roles()
    mask = ablation_mask(roles)
    parsed = [parse_eml(raw) for raw in corpus]
    pool = list(corpus)
    pool_samples = collect_samples(corpus, backend, resources, roles, cfg.jobs) if learned else []
    optimizer = optimizer or AdamOptimizer(cfg.ppo.learning_rate)
    result = LoopResult(pool=pool, params=params, optimizer=optimizer, batch_counter=batch_counter)
    cap = math.floor(cfg.adversarial.admission_cap * len(corpus))
    emphasis: tuple[TransformKind, ...] = ()

    for k in range(1, rounds + 1):
        intensity = round_intensity(cfg, k)
        rng = np.random.default_rng([cfg.seed, k])
        sources = sample_sources(corpus, cfg.adversarial.sample_fraction, rng)
        jobs = [(i, v) for i in sources for v in range(cfg.adversarial.variants_per_email)]

        with ThreadPoolExecutor(max_workers=max(1, cfg.jobs)) as pool_exec:
            futures = [pool_exec.submit(_generate, backend, parsed[i], corpus[i], cfg, resources,
                                        k, i, v, intensity, emphasis) for i, v in jobs]
            variants = [f.result() for f in futures]

        detector = Detector(result.params, cfg.fusion_mode, cfg.threshold, roles)
        variant_raws = [variant_to_raw(v) for v in variants]
        detections = detector.detect_many([parse_eml(r) for r in variant_raws], backend, resources, cfg.jobs)

        feedback = [
            FeedbackRecord(variant_id=v.variant_id, score=d.score, detector_label=d.label,
                           intended_label=v.intended_label, evaded=d.label is not v.intended_label,
                           transforms=v.transforms)
            for v, d in zip(variants, detections)
        ]
        evading = [i for i, fb in enumerate(feedback) if fb.evaded]
        admitted = evading[:cap]
        if len(evading) > cap:
            logger.warning("Round %d: %d evading variants, admission capped at %d", k, len(evading), cap)

        pool.extend(variant_raws[i] for i in admitted)
        retrained = False
        if admitted and learned:
            pool_samples.extend(_samples_from_results([detections[i] for i in admitted],
                                                      [variant_raws[i] for i in admitted]))
            training = train_on_samples(pool_samples, cfg.ppo, mask=mask, threshold=cfg.threshold,
                                        params=result.params, optimizer=optimizer, batch_counter=batch_counter)
            result.params = training.params
            batch_counter = training.batch_counter
            result.batch_counter = batch_counter
            retrained = True

        kinds = sorted({kind for i in evading for kind in variants[i].transforms}, key=lambda t: t.value)
        report = RoundReport(
            round=k,
            intensity=intensity,
            generated=len(variants),
            evaded=len(evading),
            evasion_rate=len(evading) / len(variants) if variants else 0.0,
            admitted=len(admitted),
            pool_size=len(pool),
            retrained=retrained,
            evading_kinds=tuple(kinds),
        )
        logger.info("Round %d: intensity=%.2f evasion=%d/%d (%.3f) admitted=%d pool=%d",
                    k, intensity, report.evaded, report.generated, report.evasion_rate,
                    report.admitted, report.pool_size)

        round_dir = output_dir / f"round_{k}"
        write_jsonl(round_dir / "variants.jsonl", variants, run_dir=output_dir, protected=protected)
        write_jsonl(round_dir / "feedback.jsonl", feedback, run_dir=output_dir, protected=protected)

        result.rounds.append(report)
        result.variants.extend(variants)
        result.feedback.extend(feedback)
        emphasis = tuple(kinds)

    return result
