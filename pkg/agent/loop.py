"""
Single-shot agent runner — render prompt → call backend → parse verdict, with retries.
"""
import logging
import time

from tenacity import Retrying, retry_if_exception_type, stop_after_attempt, wait_exponential_jitter

from agent.prompts import build_prompt
from agent.verdict import AgentReport, AgentRole, DETECTION_ROLES, parse_verdict_json
from errors import BackendUnavailable, PreconditionFailed, TransportError, VerdictUnparseable
from parsing.models import ParsedEmail

logger = logging.getLogger(__name__)


def _retrying(backend, retry_on) -> Retrying:
    config = backend.config
    return Retrying(
        stop=stop_after_attempt(config.max_retries + 1),
        wait=wait_exponential_jitter(initial=config.backoff_initial, jitter=config.backoff_initial),
        retry=retry_if_exception_type(retry_on),
        before_sleep=_log_retry,
        reraise=True,
    )


def _log_retry(retry_state):
    error = retry_state.outcome.exception()
    logger.warning("Attempt %d failed (%s: %s), retrying",
                   retry_state.attempt_number, type(error).__name__, error)


def run_agent(backend, role: AgentRole, email: ParsedEmail, extra=None) -> AgentReport:
    """
    Run one detection agent on one email. Transport failures and unparseable
    verdicts are retried up to backend.config.max_retries times.
    """
    if role not in DETECTION_ROLES:
        raise PreconditionFailed(f"{role.value} is not a detection role")
    messages = build_prompt(role, email, extra)
    attempts = 0
    started = time.perf_counter()

    try:
        for attempt in _retrying(backend, (TransportError, VerdictUnparseable)):
            with attempt:
                attempts = attempt.retry_state.attempt_number
                raw = backend.complete(role, messages)
                verdict = parse_verdict_json(raw)
    except TransportError as e:
        raise BackendUnavailable(f"{role.value} agent gave up on {email.source_id} after {attempts} "
                                 f"attempts: {e}", source_id=email.source_id, role=role.value)
    except VerdictUnparseable as e:
        logger.error("%s agent returned no usable verdict for %s after %d attempts",
                     role.value, email.source_id, attempts)
        raise VerdictUnparseable(f"{role.value} agent: {e}", raw_response=e.raw_response,
                                 source_id=email.source_id, role=role.value)

    latency_ms = (time.perf_counter() - started) * 1000.0
    return AgentReport(
        source_id=email.source_id,
        role=role,
        verdict=verdict,
        raw_response=raw,
        latency_ms=latency_ms,
        attempts=attempts,
    )


def complete_with_retry(backend, role: AgentRole, messages: list[dict]) -> str:
    """Free-text completion (simplifier, generator); only transport failures are retried."""
    try:
        for attempt in _retrying(backend, TransportError):
            with attempt:
                return backend.complete(role, messages)
    except TransportError as e:
        raise BackendUnavailable(f"{role.value} agent gave up: {e}", role=role.value)
