"""
Message builders for synthetic corpora.
"""
import numpy as np

from parsing.models import Label, RawEmail

BAD_HOSTS = ("secure-login-verify.com", "account-update-center.net", "creditloiuse.com")
GOOD_HOSTS = ("paypal.com", "github.com", "python.org")

PHISH_LINES = (
    "Please verify your password immediately.",
    "Your account is locked, login to confirm.",
    "Urgent: update your credentials today.",
)
NEUTRAL_LINES = (
    "The quarterly meeting moved to Thursday afternoon.",
    "Lunch is on the third floor this week.",
    "Here are the notes from our call.",
)


def make_message(subject="Hello", body="Hi there.", from_addr="alice@example.org", to="bob@example.org",
                 reply_to=None, auth=None, date="Mon, 01 Jan 2024 10:00:00 +0000") -> bytes:
    lines = [f"From: {from_addr}", f"To: {to}"]
    if reply_to:
        lines.append(f"Reply-To: {reply_to}")
    lines += [f"Date: {date}", f"Subject: {subject}"]
    if auth:
        lines.append(f"Authentication-Results: mx.example.org; {auth}")
    lines += ["MIME-Version: 1.0", "Content-Type: text/plain; charset=utf-8", "", body, ""]
    return "\n".join(lines).encode("utf-8")


def raw(source_id, data: bytes, label=Label.UNLABELED, corpus="synthetic") -> RawEmail:
    return RawEmail(source_id=source_id, data=data, corpus_label=label, corpus=corpus)


def auth_line(passing: bool) -> str:
    verdict = "pass" if passing else "fail"
    return f"spf={verdict} smtp.mailfrom=example.org; dkim={verdict}; dmarc={verdict}"


def url_oracle_corpus(n=200, seed=0) -> list[RawEmail]:
    """
    Only the URL agent is informative: phishing links to a denylisted host,
    legitimate mail has no link or an allowlisted one. Keyword hits and
    authentication are drawn independently of the label.
    """
    rng = np.random.default_rng(seed)
    emails = []
    for i in range(n):
        label = Label.PHISHING if i % 2 == 0 else Label.LEGITIMATE
        text = PHISH_LINES[rng.integers(3)] if rng.random() < 0.5 else NEUTRAL_LINES[rng.integers(3)]
        if label is Label.PHISHING:
            link = f"https://{BAD_HOSTS[rng.integers(3)]}/session/{i}"
        elif rng.random() < 0.5:
            link = f"https://{GOOD_HOSTS[rng.integers(3)]}/docs/{i}"
        else:
            link = ""
        body = text + ("\n\n" + link if link else "")
        data = make_message(subject=f"Message {i}", body=body, auth=auth_line(rng.random() < 0.5))
        emails.append(raw(f"oracle:{i:03d}", data, label, "oracle"))
    return emails


def unanimous_corpus(n=200) -> list[RawEmail]:
    """Every agent agrees with the label."""
    emails = []
    for i in range(n):
        if i % 2 == 0:
            data = make_message(
                subject="Account security alert",
                body=f"{PHISH_LINES[i % 3]}\n\nhttps://{BAD_HOSTS[i % 3]}/verify/{i}",
                auth=auth_line(False),
            )
            emails.append(raw(f"unanimous:{i:03d}", data, Label.PHISHING, "unanimous"))
        else:
            data = make_message(subject=f"Notes {i}", body=NEUTRAL_LINES[i % 3], auth=auth_line(True))
            emails.append(raw(f"unanimous:{i:03d}", data, Label.LEGITIMATE, "unanimous"))
    return emails
