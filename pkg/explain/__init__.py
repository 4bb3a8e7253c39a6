from explain.simplifier import SimplifiedExplanation, simplify
from explain.readability import count_text_stats, count_syllables, fres, text_fres
from explain.overlap import tokenize, rouge1_recall, cosine_sim, embed_text, text_cosine
from explain.lm import UnigramModel, perplexity
from explain.coherence import topic_coherence, npmi
from explain.quality import TextQualityReport, QualitySummary, QualityScorer
