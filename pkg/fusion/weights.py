"""
Weighted fusion of the three detection agents.

Every probability, confidence and weight vector is ordered like DETECTION_ROLES
(text, url, metadata).
"""
import math

import numpy as np
from pydantic import BaseModel, ConfigDict

from agent.verdict import AgentReport, AgentRole, AgentVerdict, DETECTION_ROLES, Verdict
from errors import DimensionMismatch, PreconditionFailed
from parsing.models import EmailFeatures, Label

SIMPLEX_TOL = 1e-9
POLICY_INPUT_SIZE = 9


def agent_prob(verdict: AgentVerdict) -> float:
    """Phishing probability implied by a verdict and its confidence."""
    if verdict.verdict is Verdict.PHISHING:
        return float(verdict.confidence)
    return 1.0 - float(verdict.confidence)


def check_simplex(w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or not np.all(np.isfinite(w)) or np.any(w < 0) or abs(w.sum() - 1.0) > SIMPLEX_TOL:
        raise PreconditionFailed(f"weights {w.tolist()} are not on the simplex")
    return w


def fuse(w, p) -> float:
    w = np.asarray(w, dtype=float)
    p = np.asarray(p, dtype=float)
    if w.shape != p.shape:
        raise DimensionMismatch(f"weights have {w.size} entries, probabilities {p.size}")
    check_simplex(w)
    return float(min(1.0, max(0.0, float(np.dot(w, p)))))


def classify(y: float, threshold: float = 0.5) -> Label:
    return Label.PHISHING if y >= threshold else Label.LEGITIMATE


def clip(r: float, epsilon: float) -> float:
    return min(max(r, 1.0 - epsilon), 1.0 + epsilon)


# ── Ablation ──────────────────────────────────────────────────────────────────

def ablation_mask(enabled_roles=DETECTION_ROLES) -> np.ndarray:
    enabled = set(enabled_roles)
    mask = np.array([1.0 if role in enabled else 0.0 for role in DETECTION_ROLES])
    if not mask.any():
        raise PreconditionFailed("at least one detection agent must stay enabled")
    return mask


def apply_mask(w, mask) -> np.ndarray:
    """Zero disabled agents and renormalize the rest onto the simplex."""
    w = np.asarray(w, dtype=float)
    if mask is None or np.all(mask == 1.0):
        return w
    masked = w * mask
    total = masked.sum()
    if total <= 0:
        # all remaining mass sat on disabled agents: spread evenly over the enabled ones
        return mask / mask.sum()
    return masked / total


# ── Policy input ──────────────────────────────────────────────────────────────

def _squash(count: int) -> float:
    return math.log1p(count) / 5.0


def policy_input(features: EmailFeatures, confidences) -> np.ndarray:
    confidences = [float(c) for c in confidences]
    if len(confidences) != len(DETECTION_ROLES):
        raise DimensionMismatch(f"expected {len(DETECTION_ROLES)} confidences, got {len(confidences)}")
    x = np.array([
        _squash(features.url_count),
        _squash(features.keyword_hits),
        features.domain_reputation,
        features.spf_code,
        features.dkim_code,
        features.dmarc_code,
        *confidences,
    ], dtype=float)
    if not np.all(np.isfinite(x)):
        raise PreconditionFailed("policy input is not finite")
    return x


class FusionInput(BaseModel):
    model_config = ConfigDict(frozen=True)

    features: EmailFeatures
    probs: tuple[float, float, float]
    confidences: tuple[float, float, float]

    @property
    def x(self) -> np.ndarray:
        return policy_input(self.features, self.confidences)


def fusion_input(features: EmailFeatures, reports: dict[AgentRole, AgentReport]) -> FusionInput:
    """Disabled agents contribute p = 0.5 and confidence 0; their weight is masked anyway."""
    probs, confidences = [], []
    for role in DETECTION_ROLES:
        report = reports.get(role)
        if report is None:
            probs.append(0.5)
            confidences.append(0.0)
        else:
            probs.append(agent_prob(report.verdict))
            confidences.append(float(report.verdict.confidence))
    return FusionInput(features=features, probs=tuple(probs), confidences=tuple(confidences))
