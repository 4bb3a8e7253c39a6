"""
Typed run configuration.

A RunConfig can be loaded from a JSON file and then overridden from CLI flags.
Its hash ignores where a run writes and how many threads it uses, so identical
runs in different directories share a hash.
"""
import hashlib
import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from agent.verdict import AgentRole, DETECTION_ROLES
from errors import IoFailure, PreconditionFailed
from parsing.corpus import CorpusFormat
from parsing.models import Label

logger = logging.getLogger(__name__)

STATIC_WEIGHTS = (0.3, 0.4, 0.3)


class BackendKind(str, Enum):
    REMOTE_HTTP = "remote_http"
    MOCK = "mock"


class ChatBackendConfig(BaseModel):
    kind: BackendKind = BackendKind.MOCK
    base_url: str | None = None
    model_name: str = "gpt-4o"
    timeout: float = Field(30.0, gt=0)
    max_retries: int = Field(3, ge=0)
    rate_limit: float = Field(0.0, ge=0)       # requests per second, 0 = unlimited
    temperature: float = Field(0.0, ge=0)      # deterministic-most setting by default
    backoff_initial: float = Field(0.5, ge=0)  # seconds before the first retry

    @model_validator(mode="after")
    def _remote_needs_url(self):
        if self.kind is BackendKind.REMOTE_HTTP and not self.base_url:
            raise ValueError("remote_http backend requires base_url")
        return self


class PpoConfig(BaseModel):
    epsilon: float = Field(0.2, gt=0, lt=1)
    learning_rate: float = Field(3e-3, ge=0)
    epochs_per_batch: int = Field(4, ge=1)
    batch_size: int = Field(64, ge=1)
    seed: int = 0
    value_coef: float = Field(0.5, ge=0)
    hidden: int = Field(16, ge=1)
    passes: int = Field(1, ge=1)
    checkpoint_every: int = Field(10, ge=1)


class FusionMode(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["learned", "static"] = "learned"
    weights: tuple[float, float, float] | None = None

    @model_validator(mode="after")
    def _check_weights(self):
        if self.kind == "static":
            if self.weights is None:
                raise ValueError("static fusion needs three weights")
            if any(w < 0 or not math.isfinite(w) for w in self.weights) or abs(sum(self.weights) - 1.0) > 1e-9:
                raise ValueError(f"static weights {self.weights} are not on the simplex")
        return self

    @classmethod
    def parse(cls, text: str) -> "FusionMode":
        """`learned` or `static:a,b,c` (bare `static` means 0.3,0.4,0.3)."""
        text = (text or "learned").strip().lower()
        if text == "learned":
            return cls(kind="learned")
        if text == "static":
            return cls(kind="static", weights=STATIC_WEIGHTS)
        if text.startswith("static:"):
            try:
                weights = tuple(float(v) for v in text.split(":", 1)[1].split(","))
            except ValueError:
                raise PreconditionFailed(f"bad static weights in {text!r}")
            if len(weights) != 3:
                raise PreconditionFailed(f"static fusion needs 3 weights, got {len(weights)}")
            try:
                return cls(kind="static", weights=weights)
            except ValidationError as e:
                raise PreconditionFailed(str(e.errors()[0]["msg"]))
        raise PreconditionFailed(f"unknown fusion mode {text!r}")

    def describe(self) -> str:
        if self.kind == "learned":
            return "learned"
        return "static:" + ",".join(f"{w:g}" for w in self.weights)


class CorpusSpec(BaseModel):
    path: str
    format: CorpusFormat = CorpusFormat.EML_DIR
    label: Label | None = None
    name: str | None = None
    columns: dict[str, str] = Field(default_factory=dict)

    @classmethod
    def parse(cls, text: str) -> "CorpusSpec":
        """`path[:format[:label[:name]]]`, e.g. `data/nazario.mbox:mbox:phishing`."""
        parts = text.split(":")
        path, rest = parts[0], parts[1:]
        try:
            return cls(
                path=path,
                format=CorpusFormat(rest[0]) if len(rest) > 0 and rest[0] else CorpusFormat.EML_DIR,
                label=Label.coerce(rest[1]) if len(rest) > 1 and rest[1] else None,
                name=rest[2] if len(rest) > 2 and rest[2] else None,
            )
        except ValueError as e:
            raise PreconditionFailed(f"bad corpus spec {text!r}: {e}")


class GeneratorKind(str, Enum):
    LLM = "llm"
    RULE_BASED = "rule_based"


class AdversarialConfig(BaseModel):
    rounds: int = Field(2, ge=1)
    sample_fraction: float = Field(0.25, gt=0, le=1)
    variants_per_email: int = Field(1, ge=1)
    admission_cap: float = Field(0.2, ge=0, le=1)
    base_intensity: float = Field(0.34, gt=0, le=1)
    intensity_step: float = Field(0.33, ge=0)
    generator: GeneratorKind = GeneratorKind.RULE_BASED


class ExplainMode(str, Enum):
    NONE = "none"
    PLAIN = "plain"
    EXPERT = "expert"


class QualityConfig(BaseModel):
    topics: int = Field(5, ge=1)
    top_k: int = Field(10, ge=2)
    reference_corpus: str | None = None


class RunConfig(BaseModel):
    backend: ChatBackendConfig = Field(default_factory=ChatBackendConfig)
    corpora: list[CorpusSpec] = Field(default_factory=list)
    ppo: PpoConfig = Field(default_factory=PpoConfig)
    threshold: float = Field(0.5, ge=0, le=1)
    fusion_mode: FusionMode = Field(default_factory=FusionMode)
    seed: int = 0
    output_dir: str = "runs/latest"
    jobs: int = Field(4, ge=1)
    explain: ExplainMode = ExplainMode.NONE
    ablate: list[AgentRole] = Field(default_factory=list)
    adversarial: AdversarialConfig = Field(default_factory=AdversarialConfig)
    quality: QualityConfig = Field(default_factory=QualityConfig)
    lexicon_path: str | None = None
    reputation_path: str | None = None
    per_corpus: bool = False

    @field_validator("ablate")
    @classmethod
    def _ablate_detection_only(cls, roles):
        for role in roles:
            if role not in (AgentRole.URL, AgentRole.METADATA):
                raise ValueError(f"only the url and metadata agents can be ablated, not {role.value}")
        if len(set(roles)) >= len(DETECTION_ROLES):
            raise ValueError("at least one detection agent must stay enabled")
        return sorted(set(roles), key=lambda r: r.value)

    def snapshot(self) -> dict:
        return self.model_dump(mode="json")

    def config_hash(self) -> str:
        payload = self.model_dump(mode="json", exclude={"output_dir", "jobs"})
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def enabled_roles(self) -> tuple[AgentRole, ...]:
        return tuple(r for r in DETECTION_ROLES if r not in self.ablate)


def load_run_config(path=None, **overrides) -> RunConfig:
    """Read a JSON RunConfig (if given) and apply non-None overrides on top."""
    data = {}
    if path:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as e:
            raise IoFailure(f"cannot read config {path}: {e}", path=str(path))
        except ValueError as e:
            raise PreconditionFailed(f"config {path} is not valid JSON: {e}")
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(value, BaseModel):
            value = value.model_dump(mode="json")
        if isinstance(value, dict) and isinstance(data.get(key), dict):
            data[key] = {**data[key], **value}
        else:
            data[key] = value
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first.get("loc", ()))
        raise PreconditionFailed(f"invalid configuration at {where or 'root'}: {first['msg']}")
