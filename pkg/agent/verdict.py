"""
Agent roles, verdict records and the JSON verdict contract.
"""
import ast
import json
import logging
import math
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field

from errors import ConfidenceOutOfRange, VerdictUnparseable

logger = logging.getLogger(__name__)


class AgentRole(str, Enum):
    TEXT = "text"
    URL = "url"
    METADATA = "metadata"
    SIMPLIFIER = "simplifier"
    ADVERSARIAL = "adversarial"


# Fusion order: index i of every probability / weight vector is DETECTION_ROLES[i].
DETECTION_ROLES = (AgentRole.TEXT, AgentRole.URL, AgentRole.METADATA)


class Verdict(str, Enum):
    PHISHING = "Phishing"
    LEGITIMATE = "Legitimate"


class AgentVerdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    verdict: Verdict
    confidence: float = Field(ge=0.0, le=1.0)
    reasons: str = Field(min_length=1)


class AgentReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    source_id: str
    role: AgentRole
    verdict: AgentVerdict
    raw_response: str
    latency_ms: float = 0.0
    attempts: int = Field(1, ge=1)

    @property
    def report_id(self) -> str:
        return f"{self.source_id}:{self.role.value}"


# ── Contract encode / decode ──────────────────────────────────────────────────

_REASON_KEYS = ("reasons", "rationale", "reason", "explanation")


def render_verdict_json(verdict: AgentVerdict) -> str:
    return json.dumps({
        "verdict": verdict.verdict.value,
        "confidence": verdict.confidence,
        "reasons": verdict.reasons,
    }, ensure_ascii=False)


def _balanced_objects(text: str):
    """Yield every top-level {...} span, honouring quoted strings."""
    start = text.find("{")
    while start != -1:
        depth, quote, escaped = 0, None, False
        end = None
        for i in range(start, len(text)):
            ch = text[i]
            if quote:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == quote:
                    quote = None
                continue
            if ch in ("\"", "'"):
                quote = ch
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    end = i + 1
                    break
        if end is None:
            # unbalanced: retry from the next opening brace
            start = text.find("{", start + 1)
            continue
        yield text[start:end]
        start = text.find("{", end)


def _decode(candidate: str) -> dict | None:
    try:
        value = json.loads(candidate, strict=False)
    except ValueError:
        try:
            value = ast.literal_eval(candidate)
        except (ValueError, SyntaxError, MemoryError, RecursionError):
            return None
    return value if isinstance(value, dict) else None


def parse_verdict_json(text: str) -> AgentVerdict:
    """
    Decode {verdict, confidence, reasons} from a model response. Surrounding prose
    is tolerated; the first balanced object carrying a verdict key is used.
    """
    text = text or ""
    obj = None
    for candidate in _balanced_objects(text):
        decoded = _decode(candidate)
        if decoded and any(str(k).lower() == "verdict" for k in decoded):
            obj = {str(k).lower(): v for k, v in decoded.items()}
            break
    if obj is None:
        raise VerdictUnparseable("no verdict object found in response", raw_response=text)

    label = str(obj.get("verdict", "")).strip().lower()
    if label not in ("phishing", "legitimate"):
        raise VerdictUnparseable(f"unknown verdict {obj.get('verdict')!r}", raw_response=text)

    try:
        confidence = float(obj.get("confidence"))
    except (TypeError, ValueError):
        raise VerdictUnparseable("confidence is not a number", raw_response=text)
    if not math.isfinite(confidence) or not 0.0 <= confidence <= 1.0:
        raise ConfidenceOutOfRange(f"confidence {confidence} outside [0, 1]", raw_response=text[:500])

    reasons = next((obj[k] for k in _REASON_KEYS if obj.get(k)), "")
    if isinstance(reasons, (list, tuple)):
        reasons = "; ".join(str(r) for r in reasons)
    reasons = str(reasons).strip()
    if not reasons:
        raise VerdictUnparseable("verdict has no reasons", raw_response=text)

    return AgentVerdict(
        verdict=Verdict.PHISHING if label == "phishing" else Verdict.LEGITIMATE,
        confidence=confidence,
        reasons=reasons,
    )
