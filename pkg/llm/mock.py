"""
Deterministic offline backend.

Every response is a pure function of (role, rendered prompt): the mock re-derives
what it needs (keyword hits, URL hosts, auth verdicts) from the prompt text itself.
"""
import hashlib
import logging
import re

from agent.prompts import (
    ADVERSARIAL_LEGITIMATE_BRANCH, ADVERSARIAL_PHISHING_BRANCH, EXPERT_MODE_MARKER,
)
from agent.verdict import AgentRole, AgentVerdict, Verdict, render_verdict_json
from config import ChatBackendConfig
from data import Resources
from parsing.auth import scan_auth_headers
from parsing.features import count_keyword_hits, lookup_reputation
from parsing.models import Label, address_host
from parsing.urls import url_record

logger = logging.getLogger(__name__)

_BLOCK = re.compile(r"<<<\n(.*)\n>>>", re.DOTALL)
_REPORT_LINE = re.compile(
    r"^- (?P<title>[^:]+): (?P<verdict>Phishing|Legitimate) \(confidence (?P<conf>[\d.]+)\)\. "
    r"Reasons: (?P<reasons>.*)$", re.MULTILINE)


def _block(prompt: str) -> str:
    match = _BLOCK.search(prompt)
    return match.group(1) if match else ""


def _section(prompt: str, heading: str) -> list[str]:
    """Non-empty lines following `heading` up to the end of the prompt."""
    idx = prompt.rfind(heading)
    if idx == -1:
        return []
    return [line for line in prompt[idx + len(heading):].splitlines() if line.strip()]


def _verdict(verdict: Verdict, confidence: float, reasons: str) -> str:
    return render_verdict_json(AgentVerdict(verdict=verdict, confidence=round(confidence, 4), reasons=reasons))


# ── Role rules ────────────────────────────────────────────────────────────────

def _text_rule(prompt: str, resources: Resources) -> str:
    body = _block(prompt)
    hits = count_keyword_hits(body, resources.lexicon)
    confidence = min(max(0.5 + 0.12 * hits, 0.0), 0.99)
    verdict = Verdict.PHISHING if confidence >= 0.5 else Verdict.LEGITIMATE
    if hits:
        reasons = f"The body contains {hits} phishing keyword occurrence(s) typical of credential lures."
    else:
        reasons = "The body contains no typical phishing keywords."
    return _verdict(verdict, confidence, reasons)


def _url_rule(prompt: str, resources: Resources) -> str:
    flagged = []
    for line in _section(prompt, "URLs:\n"):
        if not line.startswith("- "):
            continue
        raw = line[2:].split(" (link text: ", 1)[0].strip()
        record = url_record(raw)
        if record.homoglyph_suspect:
            flagged.append(f"{record.host} uses look-alike characters")
        elif lookup_reputation(record.host, resources.reputation) < 0:
            flagged.append(f"{record.host} has a bad reputation")
    if flagged:
        return _verdict(Verdict.PHISHING, 0.95, "Suspicious link: " + "; ".join(flagged) + ".")
    return _verdict(Verdict.LEGITIMATE, 0.8, "No suspicious links were found.")


def _metadata_rule(prompt: str) -> str:
    lines = _section(prompt, "Headers:\n")
    values = {}
    auth_values = []
    for line in lines:
        name, _, value = line.partition(": ")
        if name == "Authentication-Results":
            auth_values.append(value)
        else:
            values.setdefault(name, value)

    auth, _ = scan_auth_headers(auth_values)
    code_sum = auth.spf.code + auth.dkim.code + auth.dmarc.code

    from_host = address_host(_angle(values.get("From")))
    reply_host = address_host(_angle(values.get("Reply-To")))
    mismatch = reply_host is not None and reply_host != from_host

    problems = []
    if code_sum <= -1:
        problems.append(f"sender authentication failed (spf={auth.spf.value}, dkim={auth.dkim.value}, "
                        f"dmarc={auth.dmarc.value})")
    if mismatch:
        problems.append(f"reply-to domain {reply_host} differs from sender domain {from_host}")
    if problems:
        return _verdict(Verdict.PHISHING, 0.9, "Header anomalies: " + "; ".join(problems) + ".")
    return _verdict(Verdict.LEGITIMATE, 0.75, "Sender headers look consistent.")


def _angle(value: str | None) -> str | None:
    if not value:
        return None
    match = re.search(r"<([^>]+)>", value)
    return match.group(1) if match else value.strip()


def _simplifier_rule(prompt: str) -> str:
    findings = [m.groupdict() for m in _REPORT_LINE.finditer(prompt)]
    phishing = sum(1 for f in findings if f["verdict"] == "Phishing")
    if EXPERT_MODE_MARKER in prompt:
        lines = ["Expert analysis: " + ("likely phishing." if phishing >= 2 else "likely legitimate.")]
        lines.append("Indicators:")
        lines.extend(f"- {f['title']} ({f['verdict']}, {float(f['conf']):.2f}): {f['reasons']}" for f in findings)
        header = next((f["reasons"] for f in findings if f["title"].startswith("Metadata")), "")
        lines.append(f"Header analysis: {header}")
        return "\n".join(lines)
    opening = ("This email looks like a phishing attempt." if phishing >= 2
               else "This email looks safe.")
    reasons = " ".join(f["reasons"].rstrip(".") + "." for f in findings)
    return f"{opening} {reasons}"


def _adversarial_rule(prompt: str, resources: Resources) -> str:
    from adversarial.generator import rewrite_message_text  # adversarial imports the agent layer
    from adversarial.transforms import TransformKind

    if ADVERSARIAL_PHISHING_BRANCH in prompt:
        label = Label.PHISHING
        kinds = {TransformKind.SYNONYM_SUB, TransformKind.CONTENT_MOD, TransformKind.HOMOGLYPH}
    elif ADVERSARIAL_LEGITIMATE_BRANCH in prompt:
        label = Label.LEGITIMATE
        kinds = {TransformKind.SYNONYM_SUB, TransformKind.CONTENT_MOD}
    else:
        return ""
    seed = int(hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:8], 16)
    text, _ = rewrite_message_text(_block(prompt), kinds, seed, resources, intensity=0.5)
    logger.debug("Mock adversarial variant for %s email (%d chars)", label.value, len(text))
    return text


def mock_respond(role: AgentRole, prompt: str, resources: Resources) -> str:
    if role is AgentRole.TEXT:
        return _text_rule(prompt, resources)
    if role is AgentRole.URL:
        return _url_rule(prompt, resources)
    if role is AgentRole.METADATA:
        return _metadata_rule(prompt)
    if role is AgentRole.SIMPLIFIER:
        return _simplifier_rule(prompt)
    return _adversarial_rule(prompt, resources)


class MockChatBackend:
    def __init__(self, resources: Resources, config: ChatBackendConfig | None = None):
        self.resources = resources
        self.config = config or ChatBackendConfig()
        logger.info("Mock backend (lexicon %s, %d reputation entries)",
                    resources.lexicon.version, len(resources.reputation))

    def complete(self, role: AgentRole, messages: list[dict]) -> str:
        prompt = "\n\n".join(m["content"] for m in messages)
        return mock_respond(role, prompt, self.resources)
