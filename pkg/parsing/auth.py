"""
Authentication-Results scanning (SPF / DKIM / DMARC verdicts).
"""
import logging
import re

from parsing.models import AuthResults, AuthVerdict, ParsedEmail

logger = logging.getLogger(__name__)

MECHANISMS = ("spf", "dkim", "dmarc")

_TOKEN = re.compile(r"\b(spf|dkim|dmarc)\s*=\s*([A-Za-z]+)", re.IGNORECASE)

_VERDICTS = {
    "pass": AuthVerdict.PASS,
    "fail": AuthVerdict.FAIL,
    "softfail": AuthVerdict.FAIL,
    "hardfail": AuthVerdict.FAIL,
    "none": AuthVerdict.NONE,
    "neutral": AuthVerdict.NONE,
}


def scan_auth_headers(values: list[str]) -> tuple[AuthResults, list[str]]:
    """
    Scan Authentication-Results header values in order. The first verdict seen for
    a mechanism wins; unknown verdict strings map to None and add a diagnostic.
    """
    if not values:
        return AuthResults(), []

    found: dict[str, AuthVerdict] = {}
    diagnostics: list[str] = []
    for value in values:
        for mechanism, token in _TOKEN.findall(value):
            mechanism = mechanism.lower()
            if mechanism in found:
                continue
            verdict = _VERDICTS.get(token.lower())
            if verdict is None:
                diagnostics.append(f"unknown {mechanism} verdict {token!r}; treated as none")
                verdict = AuthVerdict.NONE
            found[mechanism] = verdict

    # The header exists, so a mechanism it never mentions reports nothing rather than missing.
    results = AuthResults(**{m: found.get(m, AuthVerdict.NONE) for m in MECHANISMS})
    return results, diagnostics


def parse_auth_results(parsed: ParsedEmail) -> AuthResults:
    results, diagnostics = scan_auth_headers(parsed.header_all("Authentication-Results"))
    for note in diagnostics:
        logger.warning("%s: %s", parsed.source_id, note)
    return results
