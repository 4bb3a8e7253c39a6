"""
Explanation simplifier — merges the three agent rationales into one explanation.
"""
import logging

from pydantic import BaseModel, ConfigDict, Field

from agent.loop import complete_with_retry
from agent.prompts import build_prompt
from agent.verdict import AgentReport, AgentRole, DETECTION_ROLES
from config import ExplainMode
from errors import EmptyExplanation, MissingInput, PreconditionFailed

logger = logging.getLogger(__name__)


class SimplifiedExplanation(BaseModel):
    model_config = ConfigDict(frozen=True)

    text: str = Field(min_length=1)
    mode: ExplainMode
    sources: tuple[str, str, str]


def simplify(backend, reports: list[AgentReport], mode: ExplainMode = ExplainMode.PLAIN) -> SimplifiedExplanation:
    mode = ExplainMode(mode)
    if mode is ExplainMode.NONE:
        raise PreconditionFailed("simplify needs mode plain or expert")
    if len(reports) != 3 or {r.role for r in reports} != set(DETECTION_ROLES):
        raise MissingInput(f"simplifier needs one report from each detection agent, got {len(reports)}")

    ordered = sorted(reports, key=lambda r: DETECTION_ROLES.index(r.role))
    messages = build_prompt(AgentRole.SIMPLIFIER, None, {"reports": ordered, "mode": mode.value})
    text = complete_with_retry(backend, AgentRole.SIMPLIFIER, messages).strip()
    if not text:
        raise EmptyExplanation(f"simplifier returned nothing for {ordered[0].source_id}",
                               source_id=ordered[0].source_id)
    return SimplifiedExplanation(text=text, mode=mode, sources=tuple(r.report_id for r in ordered))
