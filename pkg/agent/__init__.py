from agent.verdict import (
    AgentRole, AgentVerdict, AgentReport, Verdict, DETECTION_ROLES,
    parse_verdict_json, render_verdict_json,
)
