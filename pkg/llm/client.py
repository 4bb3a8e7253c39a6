"""
Chat backend clients — OpenAI-compatible remote endpoint and backend factory.

A backend exposes `complete(role, messages) -> str`. It is shared by all agent
threads; pacing is enforced by one RateLimiter per backend.
"""
import logging
from typing import Protocol

from openai import (
    OpenAI, APIConnectionError, APITimeoutError, AuthenticationError,
    InternalServerError, PermissionDeniedError, RateLimitError,
)

from agent.verdict import AgentRole, DETECTION_ROLES
from config import BackendKind, ChatBackendConfig
from data import Resources
from errors import BackendUnavailable, TransportError
from llm.provider import api_key, preview_key
from llm.ratelimit import RateLimiter

logger = logging.getLogger(__name__)


class ChatBackend(Protocol):
    config: ChatBackendConfig

    def complete(self, role: AgentRole, messages: list[dict]) -> str: ...


class RemoteChatBackend:
    """Chat-completions over HTTP. Retries are owned by the agent runner, not the SDK."""

    def __init__(self, config: ChatBackendConfig, client: OpenAI | None = None):
        self.config = config
        self.limiter = RateLimiter(config.rate_limit)
        key = api_key()
        if client is None:
            if not key:
                raise BackendUnavailable("PHISHGUARD_API_KEY is not configured.")
            client = OpenAI(api_key=key, base_url=config.base_url,
                            timeout=config.timeout, max_retries=0)
        self._client = client
        logger.info("Remote backend %s model=%s temperature=%s key=%s",
                    config.base_url, config.model_name, config.temperature, preview_key(key))

    def complete(self, role: AgentRole, messages: list[dict]) -> str:
        self.limiter.acquire()
        kwargs = dict(
            model=self.config.model_name,
            messages=messages,
            temperature=self.config.temperature,
        )
        if role in DETECTION_ROLES:
            kwargs["response_format"] = {"type": "json_object"}
        try:
            resp = self._client.chat.completions.create(**kwargs)
        except (AuthenticationError, PermissionDeniedError) as e:
            raise BackendUnavailable(f"backend rejected credentials: {e}")
        except (APIConnectionError, APITimeoutError, RateLimitError, InternalServerError) as e:
            raise TransportError(f"{type(e).__name__}: {e}")
        if not resp.choices:
            raise TransportError("response carried no choices")
        return resp.choices[0].message.content or ""


def make_backend(config: ChatBackendConfig, resources: Resources) -> ChatBackend:
    if config.kind is BackendKind.MOCK:
        from llm.mock import MockChatBackend  # local import keeps the remote path light
        return MockChatBackend(resources, config)
    return RemoteChatBackend(config)
