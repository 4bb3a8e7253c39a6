"""
Token overlap metrics: ROUGE-1 recall and cosine similarity over TF vectors.

Tokenization is shared by every rationale metric: lowercase, whitespace split,
punctuation stripped from both ends.
"""
import re
from collections import Counter

import numpy as np

from errors import DimensionMismatch, EmptyReference, ZeroVector

_EDGE_PUNCT = re.compile(r"^[\W_]+|[\W_]+$")


def tokenize(text: str) -> list[str]:
    tokens = []
    for raw in (text or "").lower().split():
        token = _EDGE_PUNCT.sub("", raw)
        if token:
            tokens.append(token)
    return tokens


def _as_tokens(value) -> list[str]:
    return tokenize(value) if isinstance(value, str) else [t.lower() for t in value]


def rouge1_recall(candidate, reference) -> float:
    """Clipped unigram recall of `reference` by `candidate` (texts or token lists)."""
    ref = Counter(_as_tokens(reference))
    if not ref:
        raise EmptyReference("ROUGE-1 reference has no tokens")
    cand = Counter(_as_tokens(candidate))
    overlap = sum(min(count, cand[token]) for token, count in ref.items())
    return overlap / sum(ref.values())


def cosine_sim(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"vectors have shapes {a.shape} and {b.shape}")
    sq_a, sq_b = float(np.dot(a, a)), float(np.dot(b, b))
    if sq_a == 0 or sq_b == 0:
        raise ZeroVector("cosine similarity of a zero vector")
    value = float(np.clip(np.dot(a, b) / np.sqrt(sq_a * sq_b), -1.0, 1.0))
    # parallel vectors score exactly +-1
    if abs(abs(value) - 1.0) <= 1e-12:
        return float(np.sign(value))
    return value


def shared_vocabulary(*texts: str) -> list[str]:
    vocab = []
    seen = set()
    for text in texts:
        for token in tokenize(text):
            if token not in seen:
                seen.add(token)
                vocab.append(token)
    return vocab


def embed_text(text: str, vocab) -> np.ndarray:
    """Term-frequency vector of `text` over `vocab`."""
    counts = Counter(tokenize(text))
    return np.array([counts[token] for token in vocab], dtype=float)


def text_cosine(a: str, b: str) -> float:
    """Cosine between the TF vectors of two texts over their shared vocabulary."""
    vocab = shared_vocabulary(a, b)
    return cosine_sim(embed_text(a, vocab), embed_text(b, vocab))
