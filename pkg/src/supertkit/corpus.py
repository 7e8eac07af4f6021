"""Topic ingestion: sentence segmentation, tokenization, stemming, corpus I/O.

A corpus is a list of topics; each topic bundles source documents with the
candidate summaries to be rated (and their optional human ratings). All text
preprocessing lives here so every other module sees the same token stream.
"""

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional

from .errors import CorpusFormatError, ValidationError
from .porter import porter_stem

_TOKEN_RE = re.compile(r"[^\W_]+")

# Candidate sentence boundary: terminator run (plus closing quotes/brackets),
# whitespace, then an uppercase letter, an opening quote/bracket or a digit.
_BOUNDARY_RE = re.compile(
    r"([.!?]+[\)\]\"'”’]*)(\s+)(?=[A-Z0-9\"'“‘(\[])"
)


def _load_wordlist(name: str) -> frozenset:
    text = resources.files("supertkit.data").joinpath(name).read_text("utf-8")
    words = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.append(line)
    return frozenset(words)


_STOPWORDS = None
_ABBREVIATIONS = None


def default_stopwords() -> frozenset:
    """The stopword list shipped with the package (lowercase surface forms)."""
    global _STOPWORDS
    if _STOPWORDS is None:
        _STOPWORDS = _load_wordlist("stopwords.txt")
    return _STOPWORDS


def abbreviations() -> frozenset:
    global _ABBREVIATIONS
    if _ABBREVIATIONS is None:
        _ABBREVIATIONS = _load_wordlist("abbreviations.txt")
    return _ABBREVIATIONS


@dataclass(frozen=True)
class TokenRecord:
    surface: str            # lowercased alphanumeric run
    stem: str               # Porter stem of surface
    is_stopword: bool


@dataclass(frozen=True)
class SentenceRecord:
    sent_idx: int
    raw_text: str
    tokens: tuple           # of TokenRecord
    word_count: int         # whitespace-delimited words of raw_text

    @property
    def all_filtered(self) -> bool:
        """True when tokenization produced nothing (punctuation-only text)."""
        return len(self.tokens) == 0

    def content_tokens(self) -> tuple:
        return tuple(t for t in self.tokens if not t.is_stopword)


@dataclass(frozen=True)
class Document:
    doc_id: str
    raw_text: str
    sentences: tuple        # of SentenceRecord, position order


@dataclass(frozen=True)
class CandidateSummary:
    summary_id: str
    text: str
    sentences: tuple
    human_rating: Optional[float] = None


@dataclass(frozen=True)
class Topic:
    topic_id: str
    documents: tuple
    summaries: tuple
    # Reference summaries are an optional extension used only by the ROUGE
    # tables of the RL command; nothing else reads them.
    references: tuple = field(default=())

    def document(self, doc_id: str) -> Document:
        for d in self.documents:
            if d.doc_id == doc_id:
                return d
        raise KeyError(doc_id)

    def source_sentence_count(self) -> int:
        return sum(len(d.sentences) for d in self.documents)


def segment_sentences(text: str) -> list:
    """Split text into sentences with a deterministic terminator rule.

    A boundary is a run of . ! ? (optionally followed by closing quotes or
    brackets), then whitespace, then a capital/quote/digit -- unless the word
    before a '.' is a known abbreviation. Joining the result with single
    spaces reproduces the input modulo whitespace.
    """
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


def preprocess(sentence: str, stopword_list=None, sent_idx: int = 0) -> SentenceRecord:
    """Tokenize one sentence into lowercased alphanumeric runs and stem them.

    Stopword membership is checked on the lowercased surface form before
    stemming. An input with no alphanumeric content yields an empty token
    tuple (the sentence is kept, flagged via ``all_filtered``).
    """
    if stopword_list is None:
        stopword_list = default_stopwords()
    tokens = []
    for surface in _TOKEN_RE.findall(sentence.lower()):
        tokens.append(
            TokenRecord(
                surface=surface,
                stem=porter_stem(surface),
                is_stopword=surface in stopword_list,
            )
        )
    return SentenceRecord(
        sent_idx=sent_idx,
        raw_text=sentence,
        tokens=tuple(tokens),
        word_count=len(sentence.split()),
    )


def build_document(doc_id: str, text: str, stopword_list=None) -> Document:
    sentences = tuple(
        preprocess(s, stopword_list, sent_idx=i)
        for i, s in enumerate(segment_sentences(text))
    )
    return Document(doc_id=doc_id, raw_text=text, sentences=sentences)


def build_summary(summary_id, text, rating=None, stopword_list=None) -> CandidateSummary:
    sentences = tuple(
        preprocess(s, stopword_list, sent_idx=i)
        for i, s in enumerate(segment_sentences(text))
    )
    return CandidateSummary(
        summary_id=summary_id, text=text, sentences=sentences, human_rating=rating
    )


def build_topic(topic_id, docs, summaries, ratings=None, references=None,
                stopword_list=None) -> Topic:
    """Assemble a topic from raw texts.

    ``docs`` and ``summaries`` are mappings id -> text; ``ratings`` maps
    summary_id -> float. Ids are sorted so construction is deterministic.
    """
    ratings = ratings or {}
    references = references or {}
    unknown = set(ratings) - set(summaries)
    if unknown:
        raise ValidationError(
            f"topic {topic_id!r}: ratings for unknown summaries {sorted(unknown)}"
        )
    documents = tuple(
        build_document(doc_id, docs[doc_id], stopword_list) for doc_id in sorted(docs)
    )
    if not documents:
        raise ValidationError(f"topic {topic_id!r} has no documents")
    summs = tuple(
        build_summary(sid, summaries[sid], ratings.get(sid), stopword_list)
        for sid in sorted(summaries)
    )
    refs = tuple(
        build_summary(rid, references[rid], None, stopword_list)
        for rid in sorted(references)
    )
    return Topic(topic_id=topic_id, documents=documents, summaries=summs,
                 references=refs)


def _read_text(path: Path) -> str:
    return path.read_text(encoding="utf-8")


def _load_ratings(path: Path) -> dict:
    ratings = {}
    for lineno, line in enumerate(_read_text(path).splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise CorpusFormatError(
                "expected two tab-separated columns", path=str(path), line=lineno
            )
        sid, value = parts[0].strip(), parts[1].strip()
        try:
            rating = float(value)
        except ValueError:
            raise CorpusFormatError(
                f"rating {value!r} is not a decimal", path=str(path), line=lineno
            ) from None
        if sid in ratings:
            raise ValidationError(f"duplicate rating for summary {sid!r} in {path}")
        ratings[sid] = rating
    return ratings


def _collect_texts(directory: Path, kind: str, topic_id: str) -> dict:
    texts = {}
    for path in sorted(directory.glob("*.txt")):
        unit_id = path.stem
        if unit_id in texts:
            raise ValidationError(
                f"duplicate {kind} id {unit_id!r} in topic {topic_id!r}"
            )
        texts[unit_id] = _read_text(path)
    return texts


def _load_plain_dirs(root: Path, stopword_list) -> list:
    topics = []
    for topic_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        topic_id = topic_dir.name
        docs_dir = topic_dir / "docs"
        if not docs_dir.is_dir():
            raise CorpusFormatError(
                f"topic {topic_id!r} has no docs/ directory", path=str(topic_dir)
            )
        docs = _collect_texts(docs_dir, "document", topic_id)
        summaries_dir = topic_dir / "summaries"
        summaries = (
            _collect_texts(summaries_dir, "summary", topic_id)
            if summaries_dir.is_dir()
            else {}
        )
        refs_dir = topic_dir / "refs"
        references = (
            _collect_texts(refs_dir, "reference", topic_id)
            if refs_dir.is_dir()
            else {}
        )
        ratings_path = topic_dir / "ratings.tsv"
        ratings = _load_ratings(ratings_path) if ratings_path.is_file() else {}
        topics.append(
            build_topic(topic_id, docs, summaries, ratings, references, stopword_list)
        )
    return topics


def _load_jsonl(path: Path, stopword_list) -> list:
    per_topic = {}
    for lineno, line in enumerate(_read_text(path).splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(
                f"invalid JSON: {exc.msg}", path=str(path), line=lineno
            ) from None
        try:
            topic_id = record["topic_id"]
            unit_id = record["doc_id"]
            kind = record["kind"]
            text = record["text"]
        except KeyError as exc:
            raise CorpusFormatError(
                f"missing field {exc.args[0]!r}", path=str(path), line=lineno
            ) from None
        if kind not in ("doc", "summary", "ref"):
            raise CorpusFormatError(
                f"unknown kind {kind!r}", path=str(path), line=lineno
            )
        bucket = per_topic.setdefault(
            topic_id, {"doc": {}, "summary": {}, "ref": {}, "rating": {}}
        )
        if unit_id in bucket[kind]:
            raise ValidationError(
                f"duplicate {kind} id {unit_id!r} in topic {topic_id!r} ({path}:{lineno})"
            )
        bucket[kind][unit_id] = text
        if record.get("rating") is not None:
            if kind != "summary":
                raise CorpusFormatError(
                    "rating only allowed on summaries", path=str(path), line=lineno
                )
            bucket["rating"][unit_id] = float(record["rating"])
    return [
        build_topic(
            topic_id,
            bucket["doc"],
            bucket["summary"],
            bucket["rating"],
            bucket["ref"],
            stopword_list,
        )
        for topic_id, bucket in sorted(per_topic.items())
    ]


def load_corpus(root_path, format: str = "plain_dirs", stopword_list=None) -> list:
    """Load a corpus; topics/documents/summaries come back sorted by id."""
    root = Path(root_path)
    if not root.exists():
        raise FileNotFoundError(f"corpus path does not exist: {root}")
    if format == "plain_dirs":
        if not root.is_dir():
            raise FileNotFoundError(f"not a directory: {root}")
        return _load_plain_dirs(root, stopword_list)
    if format == "jsonl":
        if not root.is_file():
            raise FileNotFoundError(f"not a file: {root}")
        return _load_jsonl(root, stopword_list)
    raise ValidationError(f"unknown corpus format {format!r}")


def corpus_to_jsonl(topics: Iterable) -> str:
    """Serialize topics to the jsonl corpus format (deterministic order)."""
    lines = []
    for topic in topics:
        for doc in topic.documents:
            lines.append(
                json.dumps(
                    {
                        "topic_id": topic.topic_id,
                        "doc_id": doc.doc_id,
                        "kind": "doc",
                        "text": doc.raw_text,
                    },
                    sort_keys=True,
                    ensure_ascii=False,
                )
            )
        for summ in topic.summaries:
            record = {
                "topic_id": topic.topic_id,
                "doc_id": summ.summary_id,
                "kind": "summary",
                "text": summ.text,
            }
            if summ.human_rating is not None:
                record["rating"] = summ.human_rating
            lines.append(json.dumps(record, sort_keys=True, ensure_ascii=False))
        for ref in topic.references:
            lines.append(
                json.dumps(
                    {
                        "topic_id": topic.topic_id,
                        "doc_id": ref.summary_id,
                        "kind": "ref",
                        "text": ref.text,
                    },
                    sort_keys=True,
                    ensure_ascii=False,
                )
            )
    return "\n".join(lines) + ("\n" if lines else "")


def save_corpus_jsonl(topics, path) -> None:
    Path(path).write_text(corpus_to_jsonl(topics), encoding="utf-8")
