"""
URL extraction: plain-text matches plus HTML href targets, in document order.
"""
import ipaddress
import logging
import re

from bs4 import BeautifulSoup
from bs4.element import NavigableString, PreformattedString, Tag

from parsing.confusables import is_homoglyph_suspect
from parsing.models import ParsedEmail, UrlRecord

logger = logging.getLogger(__name__)

# "https:" without slashes occurs in real phishing mail and is still followed by browsers.
URL_PATTERN = re.compile(r"""(?:https?:(?://)?|www\.)[^\s<>"'\[\]{}|\\^`]+""", re.IGNORECASE)

_SCHEME = re.compile(r"^https?:(?://)?", re.IGNORECASE)
_TRAILING = ".,;:!?)]}'\""


def _trim(raw: str) -> str:
    while raw and raw[-1] in _TRAILING:
        # keep a closing paren that balances one inside the URL
        if raw[-1] == ")" and raw.count("(") >= raw.count(")"):
            break
        raw = raw[:-1]
    return raw


def _split(raw: str) -> tuple[str, str]:
    """Return (host, path) for a URL-looking string."""
    rest = _SCHEME.sub("", raw.strip())
    end = len(rest)
    for sep in "/?#":
        idx = rest.find(sep)
        if idx != -1:
            end = min(end, idx)
    authority, remainder = rest[:end], rest[end:]
    if "@" in authority:
        authority = authority.rsplit("@", 1)[1]
    host = authority
    if host.startswith("["):
        host = host[1:].split("]", 1)[0]
    elif host.count(":") == 1:
        host = host.split(":", 1)[0]
    path = remainder
    for sep in "?#":
        path = path.split(sep, 1)[0]
    return host.lower().rstrip("."), path


def _decode_idna(host: str) -> str:
    if "xn--" not in host:
        return host
    try:
        return host.encode("ascii").decode("idna")
    except (UnicodeError, ValueError):
        return host


def _is_ip(host: str) -> bool:
    try:
        ipaddress.ip_address(host)
        return True
    except ValueError:
        return False


def url_record(raw: str, display_text: str | None = None) -> UrlRecord:
    host, path = _split(raw)
    return UrlRecord(
        raw=raw,
        display_text=display_text or None,
        host=host,
        is_ip_host=_is_ip(host),
        path_length=len(path.strip("/")),
        homoglyph_suspect=is_homoglyph_suspect(_decode_idna(host)),
    )


def find_url_strings(text: str) -> list[str]:
    """Plain-text URL occurrences in order, trailing punctuation trimmed."""
    found = []
    for match in URL_PATTERN.finditer(text or ""):
        raw = _trim(match.group(0))
        if _SCHEME.sub("", raw) and raw.lower() not in ("www.",):
            found.append(raw)
    return found


def _html_url_stream(html: str) -> list[tuple[str, str | None]]:
    """Hrefs and text-node URLs interleaved in document order."""
    soup = BeautifulSoup(html, "html.parser")
    for tag in soup(["script", "style"]):
        tag.decompose()
    found = []
    for node in soup.descendants:
        if isinstance(node, Tag):
            if node.name == "a" and node.has_attr("href"):
                href = node["href"].strip()
                if _SCHEME.match(href) or href.lower().startswith("www."):
                    found.append((href, node.get_text(" ", strip=True) or None))
        elif isinstance(node, NavigableString) and not isinstance(node, PreformattedString):
            found.extend((raw, None) for raw in find_url_strings(str(node)))
    return found


def extract_urls(parsed: ParsedEmail) -> list[UrlRecord]:
    """
    Union of plain-text URL matches and HTML href targets, deduplicated by raw
    string and kept in order of first appearance. With an HTML body, hrefs and
    text URLs are read together in document order; URLs only present in
    body_text follow.
    """
    seen: set[str] = set()
    records: list[UrlRecord] = []

    stream = _html_url_stream(parsed.body_html) if parsed.body_html else []
    stream += [(raw, None) for raw in find_url_strings(parsed.body_text)]
    for raw, display in stream:
        if raw not in seen:
            seen.add(raw)
            records.append(url_record(raw, display))

    return records
