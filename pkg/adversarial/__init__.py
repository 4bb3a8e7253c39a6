from adversarial.transforms import (
    TransformKind, brand_tokens, homoglyph_replace, synonym_substitute, insert_neutral_sentence,
)
from adversarial.generator import (
    AdversarialVariant, FeedbackRecord,
    rule_based_variant, generate_llm_variant, rewrite_message_text, variant_to_raw,
)
from adversarial.loop import RoundReport, LoopResult, adversarial_loop
