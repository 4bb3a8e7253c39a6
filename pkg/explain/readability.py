"""
Flesch Reading Ease and the word / sentence / syllable counters behind it.
"""
import re

from errors import ZeroDenominator

_SENTENCE_END = re.compile(r"[.!?]+")
_VOWEL_GROUP = re.compile(r"[aeiouy]+")
_EDGE_PUNCT = re.compile(r"^[\W_]+|[\W_]+$")


def count_syllables(word: str) -> int:
    word = word.lower()
    count = len(_VOWEL_GROUP.findall(word))
    if word.endswith("e") and count > 1:
        count -= 1
    return max(count, 1)


def _words(text: str) -> list[str]:
    words = []
    for token in text.split():
        token = _EDGE_PUNCT.sub("", token)
        if token:
            words.append(token)
    return words


def count_text_stats(text: str) -> tuple[int, int, int]:
    """
    (words, sentences, syllables). A sentence is any non-blank run between
    terminal punctuation, so a trailing fragment without a full stop counts;
    sentences is at least 1.
    """
    words = _words(text or "")
    sentences = len([s for s in _SENTENCE_END.split(text or "") if s.strip()])
    sentences = max(sentences, 1)
    syllables = sum(count_syllables(w) for w in words)
    return len(words), sentences, syllables


def fres(word_count: int, sentence_count: int, syllable_count: int) -> float:
    if word_count < 1 or sentence_count < 1:
        raise ZeroDenominator(f"FRES needs at least one word and sentence "
                              f"(words={word_count}, sentences={sentence_count})")
    return 206.835 - 1.015 * (word_count / sentence_count) - 84.6 * (syllable_count / word_count)


def text_fres(text: str) -> float:
    return fres(*count_text_stats(text))
