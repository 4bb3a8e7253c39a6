"""
Topic coherence of an explanation corpus.

Documents are clustered on binary term vectors; each cluster's top-k terms by
document frequency form a topic. Coherence is the mean NPMI over all term pairs
of all topics, with document co-occurrence probabilities add-one smoothed.
"""
import itertools
import logging
import math

import numpy as np
from sklearn.cluster import KMeans
from sklearn.feature_extraction.text import CountVectorizer

from errors import CorpusTooSmall
from explain.overlap import tokenize

logger = logging.getLogger(__name__)


def npmi(df_i: int, df_j: int, df_ij: int, n_docs: int) -> float:
    p_i = (df_i + 1) / (n_docs + 1)
    p_j = (df_j + 1) / (n_docs + 1)
    p_ij = (df_ij + 1) / (n_docs + 1)
    if p_ij >= 1.0:
        return 1.0
    return math.log(p_ij / (p_i * p_j)) / -math.log(p_ij)


def extract_topics(documents: list[str], topics: int = 5, top_k: int = 10, seed: int = 0):
    """Return (binary doc-term matrix, vocabulary, list of term-index lists)."""
    vectorizer = CountVectorizer(tokenizer=tokenize, lowercase=False, token_pattern=None, binary=True)
    try:
        X = vectorizer.fit_transform(documents).astype(float)
    except ValueError:
        raise CorpusTooSmall("explanation corpus has no terms")
    vocab = vectorizer.get_feature_names_out()

    if topics > 1:
        labels = KMeans(n_clusters=topics, random_state=seed, n_init=10).fit_predict(X)
    else:
        labels = np.zeros(X.shape[0], dtype=int)

    topic_terms = []
    for cluster in range(topics):
        rows = X[labels == cluster]
        if rows.shape[0] == 0:
            continue
        df = np.asarray(rows.sum(axis=0)).ravel()
        ranked = sorted((i for i in range(len(vocab)) if df[i] > 0), key=lambda i: (-df[i], vocab[i]))
        topic_terms.append(ranked[:top_k])
    return X, vocab, topic_terms


def topic_coherence(explanations: list[str], topics: int = 5, top_k: int = 10, seed: int = 0) -> float:
    documents = list(explanations)
    if len(documents) < topics:
        raise CorpusTooSmall(f"{len(documents)} documents cannot form {topics} topics")
    X, _, topic_terms = extract_topics(documents, topics, top_k, seed)

    used = sorted({t for terms in topic_terms for t in terms})
    position = {t: k for k, t in enumerate(used)}
    sub = X.tocsc()[:, used]
    df = np.asarray(sub.sum(axis=0)).ravel()
    co = (sub.T @ sub).toarray()
    n_docs = X.shape[0]

    scores = []
    for terms in topic_terms:
        for i, j in itertools.combinations(terms, 2):
            a, b = position[i], position[j]
            scores.append(npmi(int(df[a]), int(df[b]), int(co[a, b]), n_docs))
    if not scores:
        raise CorpusTooSmall("no topic has two or more terms")
    coherence = float(np.mean(scores))
    logger.debug("Topic coherence %.4f over %d pairs in %d topics", coherence, len(scores), len(topic_terms))
    return coherence
