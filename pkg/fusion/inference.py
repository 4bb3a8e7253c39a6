"""
Inference with frozen fusion weights — Dirichlet mean for the learned policy,
fixed vector for static mode.
"""
import logging

import numpy as np
from pydantic import BaseModel, ConfigDict

from agent.dispatch import gather_reports
from agent.verdict import AgentReport, AgentRole, DETECTION_ROLES
from config import FusionMode
from data import Resources
from errors import PreconditionFailed
from fusion.policy import PolicyParams, policy_mean
from fusion.weights import FusionInput, ablation_mask, apply_mask, classify, fuse, fusion_input
from parsing import extract_features
from parsing.models import EmailFeatures, Label, ParsedEmail

logger = logging.getLogger(__name__)


class DetectionResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    source_id: str
    label: Label
    score: float
    weights: tuple[float, float, float]
    reports: tuple[AgentReport, ...]
    features: EmailFeatures

    def report(self, role: AgentRole) -> AgentReport | None:
        return next((r for r in self.reports if r.role is role), None)


class Detector:
    """Turns agent reports into a fused decision. Read-only after construction."""

    def __init__(self, params: PolicyParams | None, fusion_mode: FusionMode | None = None,
                 threshold: float = 0.5, enabled_roles=DETECTION_ROLES):
        self.fusion_mode = fusion_mode or FusionMode()
        if self.fusion_mode.kind == "learned":
            if params is None:
                raise PreconditionFailed("learned fusion needs policy parameters")
            if not params.is_finite():
                raise PreconditionFailed("policy parameters are not finite")
        self.params = params
        self.threshold = threshold
        self.enabled_roles = tuple(r for r in DETECTION_ROLES if r in set(enabled_roles))
        self.mask = ablation_mask(self.enabled_roles)

    @property
    def is_learned(self) -> bool:
        return self.fusion_mode.kind == "learned"

    def weights_for(self, fusion: FusionInput) -> np.ndarray:
        if self.is_learned:
            w = policy_mean(self.params, fusion.x)
        else:
            w = np.asarray(self.fusion_mode.weights, dtype=float)
        return apply_mask(w, self.mask)

    def decide(self, source_id: str, fusion: FusionInput, reports: dict[AgentRole, AgentReport]) -> DetectionResult:
        w = self.weights_for(fusion)
        y = fuse(w, fusion.probs)
        return DetectionResult(
            source_id=source_id,
            label=classify(y, self.threshold),
            score=y,
            weights=tuple(float(v) for v in w),
            reports=tuple(reports[r] for r in DETECTION_ROLES if r in reports),
            features=fusion.features,
        )

    def detect_many(self, emails: list[ParsedEmail], backend, resources: Resources,
                    jobs: int = 4) -> list[DetectionResult]:
        all_reports = gather_reports(backend, emails, self.enabled_roles, jobs)
        results = []
        for email, reports in zip(emails, all_reports):
            features = extract_features(email, resources.lexicon, resources.reputation)
            results.append(self.decide(email.source_id, fusion_input(features, reports), reports))
        return results


def infer(params: PolicyParams | None, email: ParsedEmail, backend, threshold: float = 0.5, *,
          resources: Resources, fusion_mode: FusionMode | None = None,
          enabled_roles=DETECTION_ROLES) -> DetectionResult:
    detector = Detector(params, fusion_mode, threshold, enabled_roles)
    return detector.detect_many([email], backend, resources, jobs=1)[0]
