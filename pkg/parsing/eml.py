"""
RFC-5322 / MIME parsing into ParsedEmail.
"""
import logging
import re
from email import policy
from email.message import EmailMessage
from email.parser import BytesParser
from email.utils import getaddresses

from bs4 import BeautifulSoup

from errors import UnparseableMessage
from parsing.auth import scan_auth_headers
from parsing.models import ParsedEmail, RawEmail
from parsing.urls import extract_urls

logger = logging.getLogger(__name__)

_HEADER_LINE = re.compile(rb"^[!-9;-~]+:")
_MBOX_FROM = re.compile(rb"^From \S+")

# Header lines a rendered message carries (order preserved on output).
RENDERED_HEADERS = (
    "From", "To", "Reply-To", "Return-Path", "Date", "Subject",
    "Message-ID", "Authentication-Results", "Received",
)


def _first_line(data: bytes) -> bytes:
    return data.lstrip(b"\r\n").split(b"\n", 1)[0].rstrip(b"\r")


def _strip_mbox_line(data: bytes) -> bytes:
    stripped = data.lstrip(b"\r\n")
    if _MBOX_FROM.match(stripped) and not _HEADER_LINE.match(stripped):
        return stripped.split(b"\n", 1)[1] if b"\n" in stripped else b""
    return data


def _clean(text: str) -> str:
    # raw 8-bit headers arrive as surrogate escapes; recover UTF-8 where it decodes
    try:
        text = text.encode("utf-8", "surrogateescape").decode("utf-8", "replace")
    except UnicodeEncodeError:
        text = text.encode("utf-8", "replace").decode("utf-8")
    return " ".join(text.split())


def _header_str(msg: EmailMessage, name: str, raw_value, diagnostics: list[str]) -> str:
    try:
        return _clean(str(msg.policy.header_fetch_parse(name, raw_value)))
    except Exception as e:  # malformed encoded-words
        diagnostics.append(f"header {name} could not be decoded: {e}")
        return _clean(str(raw_value))


def _address(value: str | None) -> str | None:
    if not value:
        return None
    pairs = getaddresses([value])
    for _, addr in pairs:
        if addr:
            return addr.strip("<>").strip()
    return None


def _part_text(part, diagnostics: list[str]) -> str:
    if part.get_param("charset") is None:
        payload = part.get_payload(decode=True) or b""
        try:
            return payload.decode("utf-8")
        except UnicodeDecodeError as e:
            diagnostics.append(f"{part.get_content_type()} part has no charset and is not UTF-8; "
                               f"decoded lossily: {e}")
            return payload.decode("utf-8", errors="replace")
    try:
        content = part.get_content()
    except (LookupError, UnicodeError) as e:
        diagnostics.append(f"{part.get_content_type()} part decoded lossily: {e}")
        payload = part.get_payload(decode=True) or b""
        return payload.decode("utf-8", errors="replace")
    if isinstance(content, bytes):
        return content.decode("utf-8", errors="replace")
    return content


def _bodies(msg: EmailMessage, diagnostics: list[str]) -> tuple[list[str], list[str]]:
    plain, html = [], []
    for part in msg.walk():
        if part.is_multipart():
            continue
        if part.get_content_disposition() == "attachment":
            continue
        ctype = part.get_content_type()
        if ctype == "text/plain":
            plain.append(_part_text(part, diagnostics))
        elif ctype == "text/html":
            html.append(_part_text(part, diagnostics))
    return plain, html


def _normalize_text(text: str) -> str:
    return text.replace("\r\n", "\n").replace("\r", "\n").rstrip()


def html_to_text(html: str) -> str:
    soup = BeautifulSoup(html, "html.parser")
    for tag in soup(["script", "style"]):
        tag.decompose()
    lines = (line.strip() for line in soup.get_text("\n").splitlines())
    return "\n".join(line for line in lines if line)


def parse_eml(raw: RawEmail) -> ParsedEmail:
    """
    Parse one message. Recoverable defects are kept in ParsedEmail.diagnostics;
    a message without a header block raises UnparseableMessage.
    """
    data = _strip_mbox_line(raw.data or b"")
    if not data.strip():
        raise UnparseableMessage(f"{raw.source_id}: empty message", source_id=raw.source_id)
    if not _HEADER_LINE.match(_first_line(data)):
        raise UnparseableMessage(f"{raw.source_id}: no header block found", source_id=raw.source_id)

    msg = BytesParser(policy=policy.default).parsebytes(data)
    diagnostics = [f"defect: {type(d).__name__}" for d in msg.defects]

    headers = []
    for name, raw_value in msg.raw_items():
        headers.append((name, _header_str(msg, name, raw_value, diagnostics)))

    def first(name):
        for key, value in headers:
            if key.lower() == name.lower():
                return value
        return None

    plain, html = _bodies(msg, diagnostics)
    body_html = _normalize_text("\n".join(html)) if html else None
    if plain:
        body_text = _normalize_text("\n".join(plain))
    elif body_html:
        body_text = html_to_text(body_html)
    else:
        body_text = ""
        if not msg.is_multipart():
            diagnostics.append(f"no text body (content type {msg.get_content_type()})")

    auth, auth_notes = scan_auth_headers(
        [value for key, value in headers if key.lower() == "authentication-results"])
    diagnostics.extend(auth_notes)

    parsed = ParsedEmail(
        source_id=raw.source_id,
        headers=tuple(headers),
        subject=first("Subject") or "",
        from_addr=_address(first("From")),
        reply_to=_address(first("Reply-To")),
        return_path=_address(first("Return-Path")),
        received_chain=tuple(v for k, v in headers if k.lower() == "received"),
        body_text=body_text,
        body_html=body_html,
        auth=auth,
        diagnostics=tuple(diagnostics),
    )
    parsed = parsed.model_copy(update={"urls": tuple(extract_urls(parsed))})

    for note in diagnostics:
        logger.warning("%s: %s", raw.source_id, note)
    return parsed


def render_eml(parsed: ParsedEmail, subject: str | None = None, body: str | None = None,
               from_header: str | None = None) -> str:
    """
    Render a message back to RFC-5322 text, optionally swapping subject, body or From.
    Only the headers the agents look at are kept; the body is declared UTF-8.
    """
    lines = []
    for key, value in parsed.headers:
        canonical = next((h for h in RENDERED_HEADERS if h.lower() == key.lower()), None)
        if canonical is None:
            continue
        if canonical == "Subject" and subject is not None:
            value = subject
        if canonical == "From" and from_header is not None:
            value = from_header
        lines.append(f"{canonical}: {value}")
    if subject is not None and parsed.header("Subject") is None:
        lines.append(f"Subject: {subject}")
    lines += ["MIME-Version: 1.0", "Content-Type: text/plain; charset=utf-8", "Content-Transfer-Encoding: 8bit"]
    text = body if body is not None else parsed.body_text
    return "\n".join(lines) + "\n\n" + text + "\n"
