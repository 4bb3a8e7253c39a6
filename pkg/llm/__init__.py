from llm.provider import resolve_backend_config, api_key, preview_key
from llm.ratelimit import RateLimiter
