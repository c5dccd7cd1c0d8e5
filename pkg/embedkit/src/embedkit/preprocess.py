"""Text cleanup applied before encoding.

Defaults match the export pipeline: HTML stripping and lowercasing on,
stopword removal and lemmatization off (transformer tokenizers do better
on raw text; the extra passes exist for bag-of-words style encoders and
for callers that want them).
"""

from __future__ import annotations

import html
import re
from dataclasses import dataclass

_TAG_RE = re.compile(r"<[^>]*>")
_WS_RE = re.compile(r"\s+")
_TOKEN_RE = re.compile(r"[A-Za-z0-9']+")

# compact English stopword list; enough for topic-style titles
STOPWORDS = frozenset(
    """a about above after again all am an and any are as at be because been
    before being below between both but by could did do does doing down during
    each few for from further had has have having he her here hers him his how
    i if in into is it its just me more most my no nor not of off on once only
    or other our ours out over own same she so some such than that the their
    them then there these they this those through to too under until up very
    was we were what when where which while who whom why will with you your
    yours""".split()
)

# irregular forms the suffix rules below would mangle
_IRREGULAR = {
    "children": "child",
    "feet": "foot",
    "geese": "goose",
    "men": "man",
    "mice": "mouse",
    "people": "person",
    "teeth": "tooth",
    "women": "woman",
    "better": "good",
    "best": "good",
    "worse": "bad",
    "worst": "bad",
}


def lemmatize_token(token: str) -> str:
    """Rule-based lemma: irregular lookup, then common suffix stripping."""
    word = token.lower()
    if word in _IRREGULAR:
        return _IRREGULAR[word]
    if len(word) > 4 and word.endswith("ies"):
        return word[:-3] + "y"
    if len(word) > 3 and word.endswith("sses"):
        return word[:-2]
    if len(word) > 3 and word.endswith("es") and not word.endswith("ss"):
        return word[:-2]
    if len(word) > 3 and word.endswith("s") and not word.endswith("ss"):
        return word[:-1]
    if len(word) > 5 and word.endswith("ing"):
        stem = word[:-3]
        return stem + "e" if stem.endswith(("at", "iz", "is")) else stem
    if len(word) > 4 and word.endswith("ed"):
        return word[:-2]
    return word


@dataclass
class TextPreprocessor:
    """Configurable cleanup pipeline; deterministic for a fixed config."""

    strip_html: bool = True
    lowercase: bool = True
    remove_stopwords: bool = False
    lemmatize: bool = False

    def __call__(self, text: str) -> str:
        out = text
        if self.strip_html:
            out = html.unescape(out)
            out = _TAG_RE.sub(" ", out)
        if self.lowercase:
            out = out.lower()
        if self.remove_stopwords or self.lemmatize:
            tokens = _TOKEN_RE.findall(out)
            if self.remove_stopwords:
                tokens = [t for t in tokens if t.lower() not in STOPWORDS]
            if self.lemmatize:
                tokens = [lemmatize_token(t) for t in tokens]
            out = " ".join(tokens)
        return _WS_RE.sub(" ", out).strip()


def tokenize(text: str) -> list[str]:
    """Word tokens as used by the hashing encoder."""
    return _TOKEN_RE.findall(text)
