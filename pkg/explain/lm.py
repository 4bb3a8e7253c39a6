"""
Smoothed unigram language model for perplexity.
"""
import math
from collections import Counter
from typing import Iterable

from pydantic import BaseModel, ConfigDict

from errors import EmptyText, PreconditionFailed
from explain.overlap import tokenize


class UnigramModel(BaseModel):
    """Token → probability, plus the mass given to any unseen token."""
    model_config = ConfigDict(frozen=True)

    probs: dict[str, float]
    unknown_prob: float = 0.0

    @classmethod
    def train(cls, documents: Iterable[str]) -> "UnigramModel":
        """Add-one smoothing over the training vocabulary plus one unknown bucket."""
        counts = Counter()
        for doc in documents:
            counts.update(tokenize(doc))
        total = sum(counts.values())
        denom = total + len(counts) + 1
        return cls(probs={t: (c + 1) / denom for t, c in counts.items()}, unknown_prob=1 / denom)

    @classmethod
    def uniform(cls, vocabulary: Iterable[str]) -> "UnigramModel":
        vocab = sorted(set(vocabulary))
        if not vocab:
            raise PreconditionFailed("uniform model needs a vocabulary")
        return cls(probs={t: 1 / len(vocab) for t in vocab})

    def prob(self, token: str) -> float:
        return self.probs.get(token, self.unknown_prob)


def perplexity(text, lm: UnigramModel) -> float:
    """exp of the mean negative log-probability of the tokens of `text`."""
    tokens = tokenize(text) if isinstance(text, str) else list(text)
    if not tokens:
        raise EmptyText("perplexity of an empty text")
    total = 0.0
    for token in tokens:
        p = lm.prob(token)
        if p <= 0:
            raise PreconditionFailed(f"model gives token {token!r} zero probability")
        total -= math.log(p)
    return math.exp(total / len(tokens))


def perplexity_from_logprobs(logprobs: list[float]) -> float:
    if not logprobs:
        raise EmptyText("perplexity of an empty text")
    return math.exp(-sum(logprobs) / len(logprobs))
