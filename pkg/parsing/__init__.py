from parsing.models import (
    Label, AuthVerdict, RawEmail, UrlRecord, AuthResults, ParsedEmail, EmailFeatures,
)
from parsing.eml import parse_eml, render_eml
from parsing.urls import extract_urls
from parsing.auth import parse_auth_results
from parsing.features import extract_features, count_keyword_hits, lookup_reputation
from parsing.corpus import CorpusFormat, load_corpus
