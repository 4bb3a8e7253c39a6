"""
Prompt templates for the five PhishGuard agents.

Each detection agent sees exactly one modality: the text agent the body, the URL
agent the extracted links, the metadata agent the header fields.
"""
from pydantic import BaseModel, ConfigDict

from agent.verdict import AgentReport, AgentRole
from errors import MissingInput, PreconditionFailed
from parsing.eml import render_eml
from parsing.models import Label, ParsedEmail

_OUTPUT_CONTRACT = (
    "Provide your judgment on whether the email is 'Phishing' or 'Legitimate', along with a "
    "confidence score between 0 and 1 and a clear, concise explanation of your reasoning. "
    "Output your result in JSON format as: "
    "{\"verdict\": \"Phishing\" or \"Legitimate\", \"confidence\": 0-1, \"reasons\": \"...\"}"
)

TEXT_SYSTEM_PROMPT = (
    "You are a cybersecurity expert specializing in phishing, with a particular focus on the "
    "text content of emails. Examine only the email body for phishing cues such as pressure "
    "tactics, requests for credentials or payment, unusual wording and impersonation. "
    "Do not analyze URLs or metadata, only focus on the email text. " + _OUTPUT_CONTRACT
)

URL_SYSTEM_PROMPT = (
    "You are a cybersecurity expert specializing in phishing, with a particular focus on the "
    "URLs inside emails. Check every link for obfuscation, look-alike or unknown domains, raw "
    "IP hosts, shorteners and mismatches between link text and target. "
    "Do not analyze the email text or metadata, only focus on the URLs. " + _OUTPUT_CONTRACT
)

METADATA_SYSTEM_PROMPT = (
    "You are a cybersecurity expert specializing in phishing, with a particular focus on email "
    "metadata. Inspect the subject, sender address, reply-to, return-path, received chain and "
    "authentication results for forgery, spoofing or inconsistencies. "
    "Do not analyze the email text or URLs, only focus on the metadata. " + _OUTPUT_CONTRACT
)

SIMPLIFIER_SYSTEM_PROMPT = (
    "You are an expert in cybersecurity with deep expertise in phishing. You receive the "
    "technical findings of three specialist agents (text, URL and metadata) about one email. "
    "Combine them into a single explanation in plain, everyday language that says whether the "
    "email is phishing or legitimate and why. Use only facts stated in the findings and do not "
    "include any fabricated details. Avoid jargon and keep the reasons short and clear. "
    "Reply with the explanation text only, no JSON."
)

EXPERT_SIMPLIFIER_SYSTEM_PROMPT = (
    "You are an expert in cybersecurity with deep expertise in phishing, writing in Expert Mode "
    "for security analysts. You receive the findings of three specialist agents (text, URL and "
    "metadata) about one email. Produce one consolidated analysis that keeps technical terms, "
    "lists the concrete indicators of compromise (domains, authentication results, header "
    "anomalies, suspicious phrases) and includes a short header analysis. Use only facts stated "
    "in the findings and do not include any fabricated details. "
    "Reply with the analysis text only, no JSON."
)

_ADVERSARIAL_HEADER = (
    "You are an expert adversarial email generator. Produce a variant of the provided email that "
    "keeps its meaning and structure but carries subtle changes meant to slip past phishing "
    "detectors."
)

ADVERSARIAL_PHISHING_BRANCH = (
    "For phishing emails:\n"
    "1. Synonym Substitution: replace keywords with synonyms (verify -> confirm, account -> "
    "profile, free -> no money is needed) so the wording changes but the meaning stays.\n"
    "2. Sentence Rewriting: restructure sentences without changing the message, add decoy lines "
    "about customer support, tone down overt threats while keeping urgency.\n"
    "3. Content Modification: add or drop words and phrases, for example a neutral line such as "
    "\"We hope this email serves you well\".\n"
    "4. Homoglyph Replacement: swap characters for look-alikes, e.g. a Cyrillic a in paypal.com.\n"
    "5. Polymorphic Variation: vary the subject line, sender display name or layout.\n"
    "The variant must keep the malicious intent and the targeted brand."
)

ADVERSARIAL_LEGITIMATE_BRANCH = (
    "For legitimate emails:\n"
    "1. Subtle Suspicious Modifications: make the email slightly more ambiguous, e.g. mildly "
    "urgent wording or an edited subject line, without changing its benign purpose.\n"
    "2. Synonym Substitution and Sentence Rewriting: as for phishing, but keep the message "
    "authentic and professional.\n"
    "3. Content Enhancement: optionally add phrases that resemble phishing cues while the email "
    "stays legitimate.\n"
    "4. Polymorphic Variation: adjust layout or minor style details.\n"
    "The variant must remain clearly benign and professional."
)

_ADVERSARIAL_OUTPUT = (
    "Provide only the final modified email text, including its header lines, and do not "
    "disclose the modification details."
)

EXPERT_MODE_MARKER = "Expert Mode"


class PromptTemplate(BaseModel):
    model_config = ConfigDict(frozen=True)

    role: AgentRole
    system_text: str
    user_template: str


TEMPLATES = {
    AgentRole.TEXT: PromptTemplate(
        role=AgentRole.TEXT, system_text=TEXT_SYSTEM_PROMPT,
        user_template="Analyze the following email text.\n\nEmail text:\n<<<\n{body}\n>>>",
    ),
    AgentRole.URL: PromptTemplate(
        role=AgentRole.URL, system_text=URL_SYSTEM_PROMPT,
        user_template="Analyze the following URLs extracted from an email.\n\nURLs:\n{urls}",
    ),
    AgentRole.METADATA: PromptTemplate(
        role=AgentRole.METADATA, system_text=METADATA_SYSTEM_PROMPT,
        user_template="Analyze the following email header fields.\n\nHeaders:\n{headers}",
    ),
    AgentRole.SIMPLIFIER: PromptTemplate(
        role=AgentRole.SIMPLIFIER, system_text=SIMPLIFIER_SYSTEM_PROMPT,
        user_template="Agent findings:\n{reports}",
    ),
    AgentRole.ADVERSARIAL: PromptTemplate(
        role=AgentRole.ADVERSARIAL, system_text=_ADVERSARIAL_HEADER,
        user_template="Original email:\n<<<\n{email}\n>>>",
    ),
}

_ROLE_TITLES = {
    AgentRole.TEXT: "Text agent",
    AgentRole.URL: "URL agent",
    AgentRole.METADATA: "Metadata agent",
}


# ── Renderers ─────────────────────────────────────────────────────────────────

def render_urls(email: ParsedEmail) -> str:
    if not email.urls:
        return "(no URLs found)"
    lines = []
    for url in email.urls:
        line = f"- {url.raw}"
        if url.display_text and url.display_text != url.raw:
            line += f" (link text: {url.display_text})"
        lines.append(line)
    return "\n".join(lines)


def render_headers(email: ParsedEmail) -> str:
    lines = [f"Subject: {email.subject}"]
    for name in ("From", "Reply-To", "Return-Path"):
        value = email.header(name)
        if value:
            lines.append(f"{name}: {value}")
    for hop in email.received_chain:
        lines.append(f"Received: {hop}")
    for value in email.header_all("Authentication-Results"):
        lines.append(f"Authentication-Results: {value}")
    return "\n".join(lines)


def render_reports(reports: list[AgentReport]) -> str:
    lines = []
    for report in reports:
        title = _ROLE_TITLES.get(report.role, report.role.value)
        v = report.verdict
        lines.append(f"- {title}: {v.verdict.value} (confidence {v.confidence:.2f}). Reasons: {v.reasons}")
    return "\n".join(lines)


def _adversarial_system(label: Label, emphasis) -> str:
    if label is Label.PHISHING:
        branch = ADVERSARIAL_PHISHING_BRANCH
    elif label is Label.LEGITIMATE:
        branch = ADVERSARIAL_LEGITIMATE_BRANCH
    else:
        raise PreconditionFailed("adversarial generation needs a phishing or legitimate label")
    parts = [_ADVERSARIAL_HEADER, branch]
    if emphasis:
        names = ", ".join(sorted(k.value if hasattr(k, "value") else str(k) for k in emphasis))
        parts.append(f"Last round, these strategies evaded the detector most often: {names}. "
                     "Lean on them more heavily this time.")
    parts.append(_ADVERSARIAL_OUTPUT)
    return "\n\n".join(parts)


def build_prompt(role: AgentRole, email: ParsedEmail | None, extra=None) -> list[dict]:
    """
    Render the system + user messages for one agent call.

    extra: Simplifier — list of three AgentReports (plus optional "mode");
           Adversarial — {"label": Label, "emphasis": [TransformKind]}.
    """
    template = TEMPLATES[role]
    system = template.system_text

    if role is AgentRole.TEXT:
        user = template.user_template.format(body=email.body_text)
    elif role is AgentRole.URL:
        user = template.user_template.format(urls=render_urls(email))
    elif role is AgentRole.METADATA:
        user = template.user_template.format(headers=render_headers(email))
    elif role is AgentRole.SIMPLIFIER:
        if isinstance(extra, (list, tuple)):
            extra = {"reports": extra}
        extra = extra or {}
        reports = list(extra.get("reports", []))
        if len(reports) != 3:
            raise MissingInput(f"simplifier needs three agent reports, got {len(reports)}")
        if extra.get("mode") == "expert":
            system = EXPERT_SIMPLIFIER_SYSTEM_PROMPT
        user = template.user_template.format(reports=render_reports(reports))
    else:
        extra = extra or {}
        label = extra.get("label")
        if label is None:
            raise MissingInput("adversarial prompt needs the email label")
        system = _adversarial_system(Label.coerce(label), extra.get("emphasis"))
        text = extra.get("text") or render_eml(email)
        user = template.user_template.format(email=text.rstrip("\n"))

    return [
        {"role": "system", "content": system},
        {"role": "user", "content": user},
    ]
