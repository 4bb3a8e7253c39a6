import threading

import numpy as np
import pytest

from agent.dispatch import gather_reports
from agent.loop import complete_with_retry, run_agent
from agent.prompts import build_prompt, render_urls
from agent.verdict import AgentRole, AgentVerdict, DETECTION_ROLES, Verdict, parse_verdict_json, render_verdict_json
from config import ChatBackendConfig
from errors import (
    BackendUnavailable, ConfidenceOutOfRange, MissingInput, PreconditionFailed,
    TransportError, VerdictUnparseable,
)
from parsing import parse_eml
from tests.helpers import make_message, raw


class ScriptedBackend:
    """Replays queued responses (strings or exceptions) per call."""

    def __init__(self, responses, max_retries=3):
        self.config = ChatBackendConfig(max_retries=max_retries, backoff_initial=0.0)
        self.responses = list(responses)
        self.calls = 0
        self._lock = threading.Lock()

    def complete(self, role, messages):
        with self._lock:
            self.calls += 1
            item = self.responses.pop(0) if len(self.responses) > 1 else self.responses[0]
        if isinstance(item, Exception):
            raise item
        return item


GOOD = '{"verdict": "Phishing", "confidence": 0.9, "reasons": "Credential lure."}'


@pytest.fixture
def email():
    return parse_eml(raw("e1", make_message(subject="Verify", body="Please verify https://bad.example.net/x")))


# ── Verdict contract ──────────────────────────────────────────────────────────

def test_parse_plain_json():
    v = parse_verdict_json(GOOD)
    assert v.verdict is Verdict.PHISHING
    assert v.confidence == 0.9
    assert v.reasons == "Credential lure."


def test_parse_tolerates_prose_and_fences():
    text = "Here is my answer:\n```json\n{\"verdict\": \"legitimate\", \"confidence\": 0.3, " \
           "\"reasons\": \"Looks fine {really}.\"}\n```"
    v = parse_verdict_json(text)
    assert v.verdict is Verdict.LEGITIMATE
    assert v.reasons == "Looks fine {really}."


def test_parse_accepts_rationale_alias_and_python_literal():
    v = parse_verdict_json("{'verdict': 'Phishing', 'confidence': 1, 'rationale': 'Spoofed sender.'}")
    assert v.verdict is Verdict.PHISHING
    assert v.confidence == 1.0
    assert v.reasons == "Spoofed sender."


@pytest.mark.parametrize("text", [
    "no json here",
    '{"verdict": "Maybe", "confidence": 0.5, "reasons": "x"}',
    '{"verdict": "Phishing", "confidence": "high", "reasons": "x"}',
    '{"verdict": "Phishing", "confidence": 0.5, "reasons": ""}',
])
def test_parse_rejects_bad_objects(text):
    with pytest.raises(VerdictUnparseable) as info:
        parse_verdict_json(text)
    assert info.value.raw_response == text


def test_parse_confidence_out_of_range():
    with pytest.raises(ConfidenceOutOfRange):
        parse_verdict_json('{"verdict": "Phishing", "confidence": 1.5, "reasons": "x"}')


_REASON_WORDS = ["Spoofed", "sender", "{braces}", '"quoted"', "naïve", "pаypal", "it's", "100%", "\\path", "a\tb"]


@pytest.mark.parametrize("seed", range(20))
def test_render_then_parse_is_identity(seed):
    rng = np.random.default_rng(seed)
    reasons = " ".join(str(w) for w in rng.choice(_REASON_WORDS, size=int(rng.integers(1, 6))))
    verdict = AgentVerdict(verdict=Verdict.PHISHING if rng.integers(2) else Verdict.LEGITIMATE,
                           confidence=float(rng.choice([0.0, 1.0, rng.random()])), reasons=reasons)
    assert parse_verdict_json(render_verdict_json(verdict)) == verdict


# ── Prompts ───────────────────────────────────────────────────────────────────

def test_prompts_are_modality_scoped(email):
    text_user = build_prompt(AgentRole.TEXT, email)[1]["content"]
    url_user = build_prompt(AgentRole.URL, email)[1]["content"]
    meta_user = build_prompt(AgentRole.METADATA, email)[1]["content"]
    assert "Please verify" in text_user
    assert "- https://bad.example.net/x" in url_user
    assert "Please verify" not in url_user
    assert "Subject: Verify" in meta_user
    assert "Please verify" not in meta_user


def test_render_urls_without_links():
    assert render_urls(parse_eml(raw("n", make_message(body="no links")))) == "(no URLs found)"


def test_simplifier_prompt_needs_three_reports(email):
    with pytest.raises(MissingInput):
        build_prompt(AgentRole.SIMPLIFIER, None, {"reports": []})


# ── Runner ────────────────────────────────────────────────────────────────────

def test_run_agent_success(email):
    report = run_agent(ScriptedBackend([GOOD]), AgentRole.TEXT, email)
    assert report.report_id == "e1:text"
    assert report.attempts == 1
    assert report.raw_response == GOOD


def test_run_agent_retries_transport_then_succeeds(email):
    backend = ScriptedBackend([TransportError("reset"), TransportError("reset"), GOOD])
    report = run_agent(backend, AgentRole.URL, email)
    assert report.attempts == 3
    assert backend.calls == 3


def test_run_agent_retries_unparseable(email):
    backend = ScriptedBackend(["garbage", GOOD])
    assert run_agent(backend, AgentRole.METADATA, email).attempts == 2


def test_run_agent_gives_up_as_backend_unavailable(email):
    backend = ScriptedBackend([TransportError("down")], max_retries=2)
    with pytest.raises(BackendUnavailable):
        run_agent(backend, AgentRole.TEXT, email)
    assert backend.calls == 3


def test_run_agent_keeps_last_raw_response(email):
    backend = ScriptedBackend(["still garbage"], max_retries=1)
    with pytest.raises(VerdictUnparseable) as info:
        run_agent(backend, AgentRole.TEXT, email)
    assert info.value.raw_response == "still garbage"


def test_confidence_out_of_range_is_not_retried(email):
    backend = ScriptedBackend(['{"verdict": "Phishing", "confidence": 2, "reasons": "x"}'])
    with pytest.raises(ConfidenceOutOfRange):
        run_agent(backend, AgentRole.TEXT, email)
    assert backend.calls == 1


def test_run_agent_rejects_non_detection_role(email):
    with pytest.raises(PreconditionFailed):
        run_agent(ScriptedBackend([GOOD]), AgentRole.SIMPLIFIER, email)


def test_complete_with_retry_only_retries_transport():
    backend = ScriptedBackend([TransportError("x"), "free text"])
    assert complete_with_retry(backend, AgentRole.SIMPLIFIER, []) == "free text"


# ── Dispatch ──────────────────────────────────────────────────────────────────

def test_gather_reports_keeps_input_order(mock_backend):
    emails = [parse_eml(raw(f"m{i}", make_message(subject=f"s{i}"))) for i in range(7)]
    reports = gather_reports(mock_backend, emails, DETECTION_ROLES, jobs=3)
    assert [r[AgentRole.TEXT].source_id for r in reports] == [e.source_id for e in emails]
    assert all(set(r) == set(DETECTION_ROLES) for r in reports)


def test_gather_reports_only_enabled_roles(mock_backend):
    emails = [parse_eml(raw("m", make_message()))]
    reports = gather_reports(mock_backend, emails, (AgentRole.TEXT,), jobs=1)
    assert set(reports[0]) == {AgentRole.TEXT}


def test_gather_reports_empty(mock_backend):
    assert gather_reports(mock_backend, []) == []
