"""
Adversarial variant generators — LLM-driven and deterministic rule-based.
"""
import logging
import re
from typing import Iterable

from pydantic import BaseModel, ConfigDict, Field

from adversarial.transforms import (
    RULE_KINDS, RULE_ORDER, TransformKind,
    brand_tokens, homoglyph_replace, insert_neutral_sentence, synonym_substitute,
)
from agent.loop import complete_with_retry
from agent.prompts import build_prompt
from agent.verdict import AgentRole
from config import GeneratorKind
from data import Resources
from errors import EmptyVariant, PreconditionFailed
from parsing.eml import render_eml
from parsing.models import Label, ParsedEmail, RawEmail

logger = logging.getLogger(__name__)

_SUBJECT_LINE = re.compile(r"^(Subject:[ \t]*)(.*)$", re.MULTILINE | re.IGNORECASE)
_HEADER_START = re.compile(r"^[!-9;-~]+:")
_FROM_HOST = re.compile(r"^From:.*?@([\w.-]+)", re.MULTILINE | re.IGNORECASE)

# Strategies each prompt branch asks the LLM to use.
LLM_BRANCH_KINDS = {
    Label.PHISHING: tuple(TransformKind),
    Label.LEGITIMATE: (TransformKind.SYNONYM_SUB, TransformKind.SENTENCE_REWRITE,
                       TransformKind.CONTENT_MOD, TransformKind.POLYMORPHIC),
}


class AdversarialVariant(BaseModel):
    model_config = ConfigDict(frozen=True)

    variant_id: str
    source_id: str
    intended_label: Label
    text: str = Field(min_length=1)
    transforms: tuple[TransformKind, ...]
    generator: GeneratorKind
    round: int = 1
    corpus: str = ""
    generated: bool = True


class FeedbackRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    variant_id: str
    score: float
    detector_label: Label
    intended_label: Label
    evaded: bool
    transforms: tuple[TransformKind, ...] = ()


def variant_to_raw(variant: AdversarialVariant) -> RawEmail:
    return RawEmail(
        source_id=variant.variant_id,
        data=variant.text.encode("utf-8"),
        corpus_label=variant.intended_label,
        corpus=variant.corpus,
        generated=True,
    )


def _check_label(label) -> Label:
    label = Label.coerce(label)
    if label is Label.UNLABELED:
        raise PreconditionFailed("adversarial variants need a phishing or legitimate source label")
    return label


# ── Rule-based ────────────────────────────────────────────────────────────────

def _split_message(text: str) -> tuple[str, str]:
    head, sep, body = text.partition("\n\n")
    if not sep:
        return "", text
    return head, body


def rewrite_message_text(text: str, kinds: Iterable[TransformKind], seed: int, resources: Resources,
                         intensity: float = 0.5) -> tuple[str, list[TransformKind]]:
    """
    Apply the requested rule transforms to a rendered message in fixed order.
    Synonyms touch the subject and body, the rest only the body. Returns the
    new text and the transforms that changed something.
    """
    kinds = set(kinds)
    unsupported = kinds - RULE_KINDS
    if unsupported:
        names = ", ".join(sorted(k.value for k in unsupported))
        raise PreconditionFailed(f"rule-based generation cannot apply {names}")

    head, body = _split_message(text)
    sender = _FROM_HOST.search(head)
    brands = brand_tokens(resources.reputation, sender.group(1) if sender else None)
    applied: list[TransformKind] = []
    for step, kind in enumerate(RULE_ORDER):
        if kind not in kinds:
            continue
        step_seed = seed + step
        new_head, new_body = head, body
        if kind is TransformKind.SYNONYM_SUB:
            new_head = _SUBJECT_LINE.sub(
                lambda m: m.group(1) + synonym_substitute(m.group(2), resources.synonyms, step_seed), head)
            new_body = synonym_substitute(body, resources.synonyms, step_seed)
        elif kind is TransformKind.CONTENT_MOD:
            new_body = insert_neutral_sentence(body, resources.neutral_sentences, step_seed)
        else:
            new_body = homoglyph_replace(body, intensity, step_seed, resources.confusables, brands)
        if (new_head, new_body) != (head, body):
            applied.append(kind)
            head, body = new_head, new_body

    if not applied:
        # keep variants distinct from their source
        body = insert_neutral_sentence(body, resources.neutral_sentences, seed)
        applied.append(TransformKind.CONTENT_MOD)

    rendered = f"{head}\n\n{body}" if head else body
    return rendered, applied


def rule_based_variant(email: ParsedEmail, label, kinds: Iterable[TransformKind], seed: int,
                       resources: Resources, intensity: float = 0.5, round: int = 1,
                       index: int = 0, corpus: str = "") -> AdversarialVariant:
    label = _check_label(label)
    text, applied = rewrite_message_text(render_eml(email), kinds, seed, resources, intensity)
    return AdversarialVariant(
        variant_id=f"{email.source_id}#r{round}v{index}",
        source_id=email.source_id,
        intended_label=label,
        text=text,
        transforms=tuple(applied),
        generator=GeneratorKind.RULE_BASED,
        round=round,
        corpus=corpus,
    )


# ── LLM ───────────────────────────────────────────────────────────────────────

def generate_llm_variant(backend, email: ParsedEmail, label, emphasis: Iterable[TransformKind] = (),
                         round: int = 1, index: int = 0, corpus: str = "") -> AdversarialVariant:
    label = _check_label(label)
    source_text = render_eml(email)
    messages = build_prompt(AgentRole.ADVERSARIAL, email,
                            {"label": label, "emphasis": list(emphasis), "text": source_text})
    text = complete_with_retry(backend, AgentRole.ADVERSARIAL, messages).strip()
    if not text:
        raise EmptyVariant(f"{email.source_id}: generator returned a blank variant", source_id=email.source_id)
    if text == source_text.strip():
        raise EmptyVariant(f"{email.source_id}: generator returned the source unchanged", source_id=email.source_id)

    if not _HEADER_START.match(text):
        # body-only answer: keep the source headers
        text = render_eml(email, body=text).rstrip("\n")

    logger.debug("LLM variant for %s (%s, %d chars)", email.source_id, label.value, len(text))
    return AdversarialVariant(
        variant_id=f"{email.source_id}#r{round}v{index}",
        source_id=email.source_id,
        intended_label=label,
        text=text + "\n",
        transforms=LLM_BRANCH_KINDS[label],
        generator=GeneratorKind.LLM,
        round=round,
        corpus=corpus,
    )
