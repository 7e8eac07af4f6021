"""The evaluator's text-unit rules, re-implemented from the embedding file
format specification.

The output file must carry, per sentence, exactly the non-stopword tokens
the evaluator's own preprocessing produces (lowercased maximal alphanumeric
runs, underscore excluded), in order, or its strict loader rejects the file.
This module deliberately duplicates those rules instead of importing the
evaluator package: the file format is the only coupling between the two
sides.
"""

import re
from importlib import resources

_TOKEN_RE = re.compile(r"[^\W_]+")
_BOUNDARY_RE = re.compile(
    r"([.!?]+[\)\]\"'”’]*)(\s+)(?=[A-Z0-9\"'“‘(\[])"
)

_STOPWORDS = None
_ABBREVIATIONS = None


def _load_wordlist(name):
    text = resources.files("supertkit_exporter.data").joinpath(name).read_text("utf-8")
    return frozenset(
        line.strip() for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    )


def stopwords():
    global _STOPWORDS
    if _STOPWORDS is None:
        _STOPWORDS = _load_wordlist("stopwords.txt")
    return _STOPWORDS


def abbreviations():
    global _ABBREVIATIONS
    if _ABBREVIATIONS is None:
        _ABBREVIATIONS = _load_wordlist("abbreviations.txt")
    return _ABBREVIATIONS


def segment_sentences(text: str) -> list:
    """Terminator-based splitting with the shared abbreviation list."""
    sentences = []
    start = 0
    for match in _BOUNDARY_RE.finditer(text):
        end = match.end(1)
        chunk = text[start:end]
        if match.group(1).startswith("."):
            head = chunk.rsplit(None, 1)
            last_word = head[-1] if head else ""
            last_word = last_word.rstrip("\"'”’)]")
            if last_word.endswith("."):
                bare = last_word[:-1].lstrip("\"'“‘([").lower()
                if bare in abbreviations():
                    continue
        piece = chunk.strip()
        if piece:
            sentences.append(piece)
        start = match.end(2)
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def token_spans(sentence: str) -> list:
    """(lowercased surface, start, end) for every alphanumeric run."""
    return [
        (m.group(0).lower(), m.start(), m.end())
        for m in _TOKEN_RE.finditer(sentence)
    ]


def retained_token_spans(sentence: str) -> list:
    """Spans of the non-stopword tokens, in order (the exported token list)."""
    stop = stopwords()
    return [t for t in token_spans(sentence) if t[0] not in stop]
