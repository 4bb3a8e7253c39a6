"""
Optional external scorers for rationale metrics — sentence embeddings and LM
token log-probabilities served over HTTP.

Environment:
  PHISHGUARD_EMBED_URL   — POST {"input": [text, ...]} → {"embeddings": [[float, ...], ...]}
  PHISHGUARD_LM_URL      — POST {"text": text} → {"logprobs": [float, ...]}
  PHISHGUARD_SCORER_KEY  — optional bearer token for both
"""
import math
import os

import requests
from requests import RequestException


class ScorerError(Exception):
    """Raised when an external scorer call fails or returns an unusable payload."""


def embed_url() -> str | None:
    return os.getenv("PHISHGUARD_EMBED_URL", "").strip() or None


def lm_url() -> str | None:
    return os.getenv("PHISHGUARD_LM_URL", "").strip() or None


def _headers() -> dict:
    headers = {"Content-Type": "application/json"}
    key = os.getenv("PHISHGUARD_SCORER_KEY", "").strip()
    if key:
        headers["Authorization"] = f"Bearer {key}"
    return headers


def _post_json(url: str, payload: dict, timeout: int) -> dict:
    try:
        response = requests.post(url, headers=_headers(), json=payload, timeout=timeout)
    except RequestException as e:
        raise ScorerError(f"cannot reach scorer {url}: {e}")
    if response.status_code >= 400:
        raise ScorerError(f"scorer error at {url} ({response.status_code}): {response.text[:300]}")
    try:
        return response.json()
    except ValueError:
        raise ScorerError(f"scorer returned non-JSON response at {url}: {response.text[:300]}")


def _floats(values, what: str) -> list[float]:
    try:
        out = [float(v) for v in values]
    except (TypeError, ValueError):
        raise ScorerError(f"scorer {what} are not numbers")
    if not all(math.isfinite(v) for v in out):
        raise ScorerError(f"scorer {what} are not finite")
    return out


def embed(texts: list[str], timeout: int = 30) -> list[list[float]]:
    url = embed_url()
    if not url:
        raise ScorerError("PHISHGUARD_EMBED_URL is not configured.")
    data = _post_json(url, {"input": list(texts)}, timeout)
    vectors = data.get("embeddings")
    if vectors is None and isinstance(data.get("data"), list):
        vectors = [item.get("embedding") for item in data["data"]]
    if not isinstance(vectors, list) or len(vectors) != len(texts):
        raise ScorerError("embedding response does not match the request")
    return [_floats(v, "embeddings") for v in vectors]


def token_logprobs(text: str, timeout: int = 30) -> list[float]:
    url = lm_url()
    if not url:
        raise ScorerError("PHISHGUARD_LM_URL is not configured.")
    data = _post_json(url, {"text": text}, timeout)
    if "logprobs" not in data:
        raise ScorerError("LM response missing logprobs.")
    return _floats(data["logprobs"], "log-probabilities")
