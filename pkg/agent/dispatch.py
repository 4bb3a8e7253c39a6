"""
Agent dispatcher — fans (email, role) pairs out over a thread pool.
"""
import logging
from concurrent.futures import ThreadPoolExecutor

from agent.loop import run_agent
from agent.verdict import AgentReport, AgentRole, DETECTION_ROLES
from parsing.models import ParsedEmail

logger = logging.getLogger(__name__)


def gather_reports(backend, emails: list[ParsedEmail], roles=DETECTION_ROLES,
                   jobs: int = 4) -> list[dict[AgentRole, AgentReport]]:
    """
    Run every requested detection agent on every email.
    The result list is aligned with `emails`; each entry maps role → report.
    """
    roles = tuple(roles)
    if not emails:
        return []
    pairs = [(i, role) for i in range(len(emails)) for role in roles]
    workers = max(1, min(len(pairs), jobs * len(roles)))

    results: list[dict[AgentRole, AgentReport]] = [{} for _ in emails]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [(i, role, pool.submit(run_agent, backend, role, emails[i])) for i, role in pairs]
        for i, role, future in futures:
            results[i][role] = future.result()

    logger.info("Gathered %d agent reports for %d emails (%d workers)", len(pairs), len(emails), workers)
    return results
