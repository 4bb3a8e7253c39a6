"""
Normalized email model shared by every PhishGuard stage.
"""
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field

from errors import PreconditionFailed


class Label(str, Enum):
    PHISHING = "phishing"
    LEGITIMATE = "legitimate"
    UNLABELED = "unlabeled"

    @classmethod
    def coerce(cls, value) -> "Label":
        """Accept enum members, enum values and the usual corpus spellings."""
        if isinstance(value, Label):
            return value
        key = str(value).strip().lower()
        if key in _LABEL_ALIASES:
            return _LABEL_ALIASES[key]
        raise PreconditionFailed(f"unknown label {value!r}")


_LABEL_ALIASES = {
    "phishing": Label.PHISHING, "phish": Label.PHISHING, "spam": Label.PHISHING,
    "malicious": Label.PHISHING, "1": Label.PHISHING, "true": Label.PHISHING,
    "legitimate": Label.LEGITIMATE, "legit": Label.LEGITIMATE, "ham": Label.LEGITIMATE,
    "benign": Label.LEGITIMATE, "0": Label.LEGITIMATE, "false": Label.LEGITIMATE,
    "unlabeled": Label.UNLABELED, "": Label.UNLABELED, "unknown": Label.UNLABELED,
}


class AuthVerdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    NONE = "none"
    MISSING = "missing"

    @property
    def code(self) -> float:
        if self is AuthVerdict.PASS:
            return 1.0
        if self is AuthVerdict.FAIL:
            return -1.0
        return 0.0


class RawEmail(BaseModel):
    model_config = ConfigDict(frozen=True)

    source_id: str
    data: bytes
    corpus_label: Label = Label.UNLABELED
    corpus: str = ""          # group key used by evaluation
    generated: bool = False   # adversarial variants never leave the run directory


class UrlRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    raw: str
    display_text: str | None = None
    host: str
    is_ip_host: bool = False
    path_length: int = 0
    homoglyph_suspect: bool = False


class AuthResults(BaseModel):
    model_config = ConfigDict(frozen=True)

    spf: AuthVerdict = AuthVerdict.MISSING
    dkim: AuthVerdict = AuthVerdict.MISSING
    dmarc: AuthVerdict = AuthVerdict.MISSING


class ParsedEmail(BaseModel):
    model_config = ConfigDict(frozen=True)

    source_id: str
    headers: tuple[tuple[str, str], ...] = ()
    subject: str = ""
    from_addr: str | None = None
    reply_to: str | None = None
    return_path: str | None = None
    received_chain: tuple[str, ...] = ()
    body_text: str = ""
    body_html: str | None = None
    urls: tuple[UrlRecord, ...] = ()
    auth: AuthResults = Field(default_factory=AuthResults)
    diagnostics: tuple[str, ...] = ()

    def header(self, name: str) -> str | None:
        """First value of a header, matched case-insensitively."""
        wanted = name.lower()
        for key, value in self.headers:
            if key.lower() == wanted:
                return value
        return None

    def header_all(self, name: str) -> list[str]:
        wanted = name.lower()
        return [value for key, value in self.headers if key.lower() == wanted]

    @property
    def from_host(self) -> str | None:
        return address_host(self.from_addr)

    @property
    def reply_to_host(self) -> str | None:
        return address_host(self.reply_to)


class EmailFeatures(BaseModel):
    model_config = ConfigDict(frozen=True)

    url_count: int = 0
    keyword_hits: int = 0
    domain_reputation: float = Field(0.0, ge=-1.0, le=1.0)
    spf_code: float = 0.0
    dkim_code: float = 0.0
    dmarc_code: float = 0.0

    def as_tuple(self) -> tuple:
        return (self.url_count, self.keyword_hits, self.domain_reputation,
                self.spf_code, self.dkim_code, self.dmarc_code)


def address_host(address: str | None) -> str | None:
    if not address or "@" not in address:
        return None
    return address.rsplit("@", 1)[1].strip().strip(">").lower() or None
