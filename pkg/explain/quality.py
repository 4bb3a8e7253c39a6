"""
Rationale quality scoring — one TextQualityReport per explanation plus a corpus summary.

External scorers (services/scoring_client.py) are used when configured; on any
scorer failure the offline unigram / TF implementations take over.
"""
import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict

from config import QualityConfig
from data import load_reference_corpus
from errors import PreconditionFailed
from explain.coherence import topic_coherence
from explain.lm import UnigramModel, perplexity, perplexity_from_logprobs
from explain.overlap import cosine_sim, rouge1_recall, text_cosine
from explain.readability import text_fres
from services import scoring_client
from services.scoring_client import ScorerError

logger = logging.getLogger(__name__)

METRICS = ("perplexity", "topic_coherence", "fres", "rouge1_recall", "cosine")


class TextQualityReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str
    perplexity: float
    topic_coherence: float
    fres: float
    rouge1_recall: float
    cosine: float


class QualitySummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    summary: bool = True
    count: int
    topic_coherence: float
    means: dict[str, float]


class QualityScorer:
    def __init__(self, cfg: QualityConfig | None = None, lm: UnigramModel | None = None, seed: int = 0):
        self.cfg = cfg or QualityConfig()
        self.seed = seed
        self.lm = lm or UnigramModel.train(load_reference_corpus(self.cfg.reference_corpus))
        self._use_lm_service = scoring_client.lm_url() is not None
        self._use_embed_service = scoring_client.embed_url() is not None

    def perplexity(self, text: str) -> float:
        if self._use_lm_service:
            try:
                return perplexity_from_logprobs(scoring_client.token_logprobs(text))
            except ScorerError as e:
                logger.warning("LM scorer failed, falling back to the unigram model: %s", e)
                self._use_lm_service = False
        return perplexity(text, self.lm)

    def cosine(self, candidate: str, reference: str) -> float:
        if self._use_embed_service:
            try:
                a, b = scoring_client.embed([candidate, reference])
                return cosine_sim(a, b)
            except ScorerError as e:
                logger.warning("Embedding scorer failed, falling back to TF vectors: %s", e)
                self._use_embed_service = False
        return text_cosine(candidate, reference)

    def score(self, items: list[tuple[str, str, str]]) -> tuple[list[TextQualityReport], QualitySummary]:
        """items: (id, explanation, reference) triples."""
        if not items:
            raise PreconditionFailed("no explanations to score")
        explanations = [text for _, text, _ in items]
        topics = min(self.cfg.topics, len(explanations))
        if topics < self.cfg.topics:
            logger.warning("Only %d explanations; topic count lowered from %d", len(explanations), self.cfg.topics)
        coherence = topic_coherence(explanations, topics=topics, top_k=self.cfg.top_k, seed=self.seed)

        rows = []
        for item_id, text, reference in items:
            rows.append(TextQualityReport(
                id=item_id,
                perplexity=self.perplexity(text),
                topic_coherence=coherence,
                fres=text_fres(text),
                rouge1_recall=rouge1_recall(text, reference),
                cosine=self.cosine(text, reference),
            ))
        means = {m: float(np.mean([getattr(r, m) for r in rows])) for m in METRICS}
        for name, value in means.items():
            if not math.isfinite(value):
                raise PreconditionFailed(f"mean {name} is not finite")
        return rows, QualitySummary(count=len(rows), topic_coherence=coherence, means=means)
