"""
Chat backend resolution — builds a ChatBackendConfig from flags and environment.

Environment:
  PHISHGUARD_API_KEY   — bearer key for the OpenAI-compatible endpoint
  PHISHGUARD_BASE_URL  — endpoint root, e.g. https://api.openai.com/v1 or a local server
  PHISHGUARD_MODEL     — model name (default gpt-4o)
"""
import os

from config import BackendKind, ChatBackendConfig

DEFAULT_MODEL = "gpt-4o"


def resolve_backend_config(kind: str | None = None, model: str | None = None,
                           base: ChatBackendConfig | None = None) -> ChatBackendConfig:
    """
    Merge CLI choices over a configured backend, filling remote fields from env.
    An explicit `kind` wins; otherwise the configured kind is kept.
    """
    base = base or ChatBackendConfig()
    data = base.model_dump()
    if kind:
        data["kind"] = BackendKind(kind.replace("-", "_"))
    if data["kind"] == BackendKind.REMOTE_HTTP:
        data["base_url"] = data.get("base_url") or os.getenv("PHISHGUARD_BASE_URL", "").strip() or None
        env_model = os.getenv("PHISHGUARD_MODEL", "").strip()
        if not model and env_model and data["model_name"] == DEFAULT_MODEL:
            data["model_name"] = env_model
    if model:
        data["model_name"] = model
    return ChatBackendConfig.model_validate(data)


def api_key() -> str:
    return os.getenv("PHISHGUARD_API_KEY", "").strip()


def preview_key(key: str) -> str:
    if not key:
        return "(none)"
    if len(key) <= 12:
        return key[:2] + "..."
    return f"{key[:8]}...{key[-4:]}"
