import json

import numpy as np
import pytest

from adversarial import (
    TransformKind, adversarial_loop, brand_tokens, generate_llm_variant, homoglyph_replace, insert_neutral_sentence,
    rewrite_message_text, rule_based_variant, synonym_substitute, variant_to_raw,
)
from adversarial.loop import round_intensity, sample_sources
from config import AdversarialConfig, ChatBackendConfig, FusionMode, GeneratorKind, RunConfig
from errors import EmptyVariant, PreconditionFailed
from fusion import PolicyParams
from parsing import parse_eml
from parsing.confusables import skeleton
from parsing.eml import render_eml
from parsing.models import Label
from tests.helpers import make_message, raw, unanimous_corpus


# ── Transforms ────────────────────────────────────────────────────────────────

def test_homoglyph_keeps_skeleton(resources):
    text = "Sign in at https://paypal.com/login or visit github.com today."
    swapped = homoglyph_replace(text, 1.0, seed=3, confusables=resources.confusables)
    assert swapped != text
    assert skeleton(swapped) == text
    assert "Sign in at" in swapped


def test_homoglyph_edges(resources):
    assert homoglyph_replace("no hosts here", 0.5, confusables=resources.confusables) == "no hosts here"
    with pytest.raises(PreconditionFailed):
        homoglyph_replace("paypal.com", 0.0)


def test_homoglyph_brand_tokens(resources):
    swapped = homoglyph_replace("Your PayPal invoice", 1.0, confusables=resources.confusables, brands=("paypal",))
    assert swapped != "Your PayPal invoice"
    assert swapped.startswith("Your ")
    assert swapped.endswith(" invoice")
    assert skeleton(swapped) == "Your PayPal invoice"
    assert homoglyph_replace("Your PayPal invoice", 1.0, confusables=resources.confusables) == "Your PayPal invoice"


def test_synonym_substitute_preserves_case():
    lexicon = {"important": ["vital"], "validation": ["confirmation"]}
    assert synonym_substitute("Important Password Validation", lexicon) == "Vital Password Confirmation"
    assert synonym_substitute("IMPORTANT notice", lexicon) == "VITAL notice"
    assert synonym_substitute("unimportant", lexicon) == "unimportant"
    with pytest.raises(PreconditionFailed):
        synonym_substitute("x", {})


def test_insert_neutral_sentence():
    assert insert_neutral_sentence("One line.", ["Filler."]) == "Filler.\n\nOne line."
    assert insert_neutral_sentence("Hi,\nBody text.", ["Filler."]) == "Hi,\n\nFiller.\nBody text."
    assert insert_neutral_sentence("", ["Filler."]) == "Filler."


# ── Generators ────────────────────────────────────────────────────────────────

def test_rewrite_rejects_llm_only_kinds(resources):
    with pytest.raises(PreconditionFailed):
        rewrite_message_text("Subject: x\n\nbody", [TransformKind.POLYMORPHIC], 0, resources)


def test_rewrite_always_changes_something(resources):
    text, applied = rewrite_message_text("Subject: plain\n\nnothing to swap", [TransformKind.HOMOGLYPH], 0, resources)
    assert applied == [TransformKind.CONTENT_MOD]
    assert text != "Subject: plain\n\nnothing to swap"


def test_brand_tokens_from_allowlist_and_sender():
    assert brand_tokens({"paypal.com": 1.0, "bad.com": -1.0, "x.io": 1.0}, "mail.example.org") == ("paypal", "example")
    assert brand_tokens({}, None) == ()


def test_rule_based_variant_preserves_label(resources):
    email = parse_eml(raw("p1", make_message(subject="Important Validation",
                                             body="Please verify your PayPal account at https://paypal.com/x")))
    variant = rule_based_variant(email, Label.PHISHING, [TransformKind.SYNONYM_SUB, TransformKind.HOMOGLYPH],
                                 seed=1, resources=resources, intensity=1.0, round=2, index=1)
    assert variant.variant_id == "p1#r2v1"
    assert variant.intended_label is Label.PHISHING
    assert variant.generator is GeneratorKind.RULE_BASED
    assert set(variant.transforms) == {TransformKind.SYNONYM_SUB, TransformKind.HOMOGLYPH}
    reparsed = parse_eml(variant_to_raw(variant))
    assert reparsed.subject == "Vital Confirmation"
    assert reparsed.urls[0].homoglyph_suspect
    assert "PayPal" not in reparsed.body_text
    assert "PayPal" in skeleton(reparsed.body_text)
    assert variant_to_raw(variant).corpus_label is Label.PHISHING

    with pytest.raises(PreconditionFailed):
        rule_based_variant(email, Label.UNLABELED, [TransformKind.SYNONYM_SUB], 0, resources)


def test_llm_variant_with_mock(mock_backend):
    email = parse_eml(raw("l1", make_message(body="Please verify your account.")))
    variant = generate_llm_variant(mock_backend, email, Label.LEGITIMATE)
    assert variant.generator is GeneratorKind.LLM
    assert variant.intended_label is Label.LEGITIMATE
    assert TransformKind.HOMOGLYPH not in variant.transforms
    assert parse_eml(variant_to_raw(variant)).from_addr == "alice@example.org"


class _Echo:
    config = ChatBackendConfig(backoff_initial=0.0)

    def __init__(self, reply):
        self.reply = reply

    def complete(self, role, messages):
        return self.reply


def test_llm_variant_blank_or_unchanged():
    email = parse_eml(raw("l2", make_message()))
    with pytest.raises(EmptyVariant):
        generate_llm_variant(_Echo("   "), email, Label.PHISHING)
    with pytest.raises(EmptyVariant):
        generate_llm_variant(_Echo(render_eml(email)), email, Label.PHISHING)


def test_llm_variant_body_only_answer_keeps_headers():
    email = parse_eml(raw("l3", make_message(subject="Keep me")))
    variant = generate_llm_variant(_Echo("A brand new body."), email, Label.PHISHING)
    reparsed = parse_eml(variant_to_raw(variant))
    assert reparsed.subject == "Keep me"
    assert reparsed.body_text.strip() == "A brand new body."


# ── Loop ──────────────────────────────────────────────────────────────────────

def test_round_intensity_and_sampling():
    cfg = RunConfig()
    assert round_intensity(cfg, 1) == pytest.approx(0.34)
    assert round_intensity(cfg, 3) == 1.0
    corpus = unanimous_corpus(40)
    chosen = sample_sources(corpus, 0.25, np.random.default_rng(0))
    assert len(chosen) == 10
    assert chosen == sorted(chosen)
    assert sum(corpus[i].corpus_label is Label.PHISHING for i in chosen) == 5


def test_learned_loop_does_not_regress(tmp_path, mock_backend, resources):
    cfg = RunConfig(jobs=4)
    result = adversarial_loop(unanimous_corpus(200), mock_backend, PolicyParams.initialize(0, cfg.ppo.hidden),
                              2, cfg, resources, tmp_path)
    first, second = result.rounds
    assert second.evasion_rate <= first.evasion_rate
    by_source = {r.source_id: r.corpus_label for r in unanimous_corpus(200)}
    assert all(v.intended_label is by_source[v.source_id] for v in result.variants)
    assert (tmp_path / "round_1" / "variants.jsonl").exists()
    assert (tmp_path / "round_2" / "feedback.jsonl").exists()


def test_static_loop_caps_admission(tmp_path, mock_backend, resources):
    # threshold 0 labels everything phishing, so every legitimate variant evades
    cfg = RunConfig(fusion_mode=FusionMode.parse("static"), threshold=0.0, jobs=2,
                    adversarial=AdversarialConfig(admission_cap=0.05))
    corpus = unanimous_corpus(40)
    result = adversarial_loop(corpus, mock_backend, None, 2, cfg, resources, tmp_path)

    first, second = result.rounds
    assert first.generated == 10
    assert first.evaded == 5
    assert first.evasion_rate == 0.5
    assert first.admitted == 2
    assert first.pool_size == 42
    assert second.pool_size == 44
    assert not first.retrained
    assert len(result.pool) == 44

    feedback = [json.loads(line) for line in (tmp_path / "round_1" / "feedback.jsonl").read_text().splitlines()]
    assert sum(row["evaded"] for row in feedback) == 5


def test_loop_preconditions(tmp_path, mock_backend, resources):
    with pytest.raises(PreconditionFailed):
        adversarial_loop(unanimous_corpus(4), mock_backend, None, 1, RunConfig(), resources, tmp_path)
    with pytest.raises(PreconditionFailed):
        adversarial_loop([raw("u", make_message())], mock_backend, None, 1,
                         RunConfig(fusion_mode=FusionMode.parse("static")), resources, tmp_path)
    with pytest.raises(PreconditionFailed):
        adversarial_loop(unanimous_corpus(4), mock_backend, None, 0,
                         RunConfig(fusion_mode=FusionMode.parse("static")), resources, tmp_path)
