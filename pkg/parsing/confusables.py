"""
Visual skeletons for homoglyph detection.

The skeleton of a string maps every known confusable codepoint back to the ASCII
letter it imitates, so two strings that render alike share a skeleton.
"""
import unicodedata
from functools import lru_cache

from data import load_confusables


@lru_cache(maxsize=4)
def _reverse_table(items: tuple) -> dict[str, str]:
    reverse = {}
    for source, replacements in items:
        for replacement in replacements:
            reverse.setdefault(replacement, source)
    return reverse


@lru_cache(maxsize=1)
def _bundled_items() -> tuple:
    return tuple(sorted(load_confusables().items()))


def skeleton_map(confusables: dict | None = None) -> dict[str, str]:
    items = _bundled_items() if confusables is None else tuple(sorted(confusables.items()))
    return _reverse_table(items)


def skeleton_char(ch: str, confusables: dict | None = None) -> str:
    if ch.isascii():
        return ch
    mapped = skeleton_map(confusables).get(ch)
    if mapped is not None:
        return mapped
    # Accented Latin letters decompose to their ASCII base.
    base = unicodedata.normalize("NFKD", ch)[:1]
    if base.isascii() and base.isalpha():
        return base.lower() if ch.islower() else base
    return ch


def skeleton(text: str, confusables: dict | None = None) -> str:
    return "".join(skeleton_char(ch, confusables) for ch in text)


def is_homoglyph_suspect(host: str, confusables: dict | None = None) -> bool:
    """True iff the host has a non-ASCII codepoint whose skeleton is an ASCII letter."""
    for ch in host:
        if ch.isascii():
            continue
        mapped = skeleton_char(ch, confusables)
        if mapped.isascii() and mapped.isalpha():
            return True
    return False
