"""Embedding backends: file-backed stores, a deterministic fallback encoder,
pooling and idf weighting.

Both backends expose the same two lookups so downstream code never knows
which one it is talking to:

    token_vectors(topic_id, unit_id, sentence)  -> (k, dim) array for the
        sentence's non-stopword tokens, or None when the sentence has none
    sentence_vector(topic_id, unit_id, sentence) -> (dim,) array or None
"""

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CorpusFormatError, CoverageError, DegenerateInputError, ValidationError

_MASK64 = 0xFFFFFFFFFFFFFFFF


def _gaussian_stream(key: int, count: int) -> list:
    """Counter-mode SHA-256 -> uniform 53-bit doubles -> Box-Muller normals.

    Fully pinned: no dependence on any library RNG, so the stream can never
    drift between releases.
    """
    key_bytes = (key & _MASK64).to_bytes(8, "little")
    values = []
    counter = 0
    while len(values) < count:
        block = hashlib.sha256(key_bytes + counter.to_bytes(8, "little")).digest()
        for offset in (0, 16):
            x1 = int.from_bytes(block[offset:offset + 8], "little")
            x2 = int.from_bytes(block[offset + 8:offset + 16], "little")
            u1 = ((x1 >> 11) + 1) * 2.0 ** -53     # (0, 1]
            u2 = (x2 >> 11) * 2.0 ** -53           # [0, 1)
            radius = math.sqrt(-2.0 * math.log(u1))
            values.append(radius * math.cos(2.0 * math.pi * u2))
            values.append(radius * math.sin(2.0 * math.pi * u2))
        counter += 1
    return values[:count]


def fallback_encode(token, dimension: int, seed: int = 0) -> np.ndarray:
    """Unit-norm pseudo-random Gaussian vector keyed by the token's stem.

    Identical stems always map to identical vectors; distinct stems get
    near-orthogonal directions once the dimension is a few dozen.
    """
    return encode_stem(token.stem, dimension, seed)


def encode_stem(stem: str, dimension: int, seed: int = 0) -> np.ndarray:
    if dimension < 2:
        raise ValidationError(f"embedding dimension must be >= 2, got {dimension}")
    digest = hashlib.sha256(stem.encode("utf-8")).digest()
    key = int.from_bytes(digest[:8], "little") ^ (seed & _MASK64)
    vec = np.array(_gaussian_stream(key, dimension), dtype=np.float64)
    norm = float(np.linalg.norm(vec))
    if norm < 1e-12:
        vec = np.zeros(dimension)
        vec[0] = 1.0
        return vec
    return vec / norm


def pool_sentence(token_vectors) -> np.ndarray:
    """Component-wise mean of token vectors."""
    mat = np.asarray(token_vectors, dtype=np.float64)
    if mat.size == 0:
        raise DegenerateInputError("cannot pool an empty vector list")
    return mat.mean(axis=0)


def pool_document(sentence_vectors) -> np.ndarray:
    """Component-wise mean of sentence vectors."""
    return pool_sentence(sentence_vectors)


@dataclass(frozen=True)
class IdfTable:
    """Sentence-level document frequencies over one topic's source documents."""

    doc_freq: dict          # stem -> number of source sentences containing it
    n_units: int            # number of source sentences

    def value(self, stem: str) -> float:
        df = self.doc_freq.get(stem, 0)
        return math.log((self.n_units + 1) / (df + 1)) + 1.0


def build_idf(topic) -> IdfTable:
    """Count, per stem, the source sentences of the topic that contain it."""
    doc_freq = {}
    n_units = 0
    for doc in topic.documents:
        for sent in doc.sentences:
            n_units += 1
            for stem in {t.stem for t in sent.tokens}:
                doc_freq[stem] = doc_freq.get(stem, 0) + 1
    for stem, df in doc_freq.items():
        if not (0 <= df <= n_units):
            raise ValidationError(f"doc_freq[{stem!r}]={df} outside [0, {n_units}]")
    return IdfTable(doc_freq=doc_freq, n_units=n_units)


class FallbackEncoder:
    """Deterministic test backend; derives every vector from stems alone."""

    def __init__(self, dimension: int, seed: int = 0):
        if dimension < 2:
            raise ValidationError(f"embedding dimension must be >= 2, got {dimension}")
        self.dimension = dimension
        self.seed = seed
        self._cache = {}

    def _stem_vector(self, stem: str) -> np.ndarray:
        vec = self._cache.get(stem)
        if vec is None:
            vec = encode_stem(stem, self.dimension, self.seed)
            vec.setflags(write=False)
            self._cache[stem] = vec
        return vec

    def token_vectors(self, topic_id, unit_id, sentence):
        stems = [t.stem for t in sentence.tokens if not t.is_stopword]
        if not stems:
            return None
        return np.stack([self._stem_vector(s) for s in stems])

    def all_token_vectors(self, sentence):
        """Vectors for every token, stopwords included (fallback-only path)."""
        if not sentence.tokens:
            return None
        return np.stack([self._stem_vector(t.stem) for t in sentence.tokens])

    def sentence_vector(self, topic_id, unit_id, sentence):
        mat = self.token_vectors(topic_id, unit_id, sentence)
        if mat is None:
            return None
        return mat.mean(axis=0)


class EmbeddingStore:
    """Immutable map from (topic_id, unit_id, sent_idx) to precomputed vectors."""

    def __init__(self, dimension: int, token_vectors: dict, sentence_vectors: dict):
        self.dimension = dimension
        self._token_vectors = token_vectors
        self._sentence_vectors = sentence_vectors

    def __len__(self):
        return len(self._sentence_vectors)

    def token_vectors(self, topic_id, unit_id, sentence):
        key = (topic_id, unit_id, sentence.sent_idx)
        mat = self._token_vectors.get(key)
        if mat is None or mat.shape[0] == 0:
            return None
        return mat

    def sentence_vector(self, topic_id, unit_id, sentence):
        key = (topic_id, unit_id, sentence.sent_idx)
        return self._sentence_vectors.get(key)


def _retained_surfaces(sentence) -> list:
    return [t.surface for t in sentence.tokens if not t.is_stopword]


def _corpus_sentence_index(corpus) -> dict:
    index = {}
    for topic in corpus:
        doc_ids = {d.doc_id for d in topic.documents}
        summ_ids = {s.summary_id for s in topic.summaries}
        clash = doc_ids & summ_ids
        if clash:
            raise ValidationError(
                f"topic {topic.topic_id!r}: ids {sorted(clash)} name both a document "
                "and a summary; embedding keys would be ambiguous"
            )
        for doc in topic.documents:
            for sent in doc.sentences:
                index[(topic.topic_id, doc.doc_id, sent.sent_idx)] = sent
        for summ in topic.summaries:
            for sent in summ.sentences:
                index[(topic.topic_id, summ.summary_id, sent.sent_idx)] = sent
    return index


def load_embeddings(path, corpus) -> EmbeddingStore:
    """Read an embedding jsonl file and validate it strictly against a corpus.

    Every document and summary sentence must be present exactly once, with a
    constant dimension, finite components, and token lists that match the
    corpus tokenization (non-stopword surfaces, in order).
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"embedding file does not exist: {path}")
    index = _corpus_sentence_index(corpus)
    token_vectors = {}
    sentence_vectors = {}
    dimension = None
    for lineno, line in enumerate(path.read_text("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(
                f"invalid JSON: {exc.msg}", path=str(path), line=lineno
            ) from None
        try:
            key = (record["topic_id"], record["unit_id"], int(record["sent_idx"]))
            dim = int(record["dim"])
            sent_vec = record["sentence_vector"]
            tokens = record["tokens"]
            tok_vecs = record["token_vectors"]
        except KeyError as exc:
            raise CorpusFormatError(
                f"missing field {exc.args[0]!r}", path=str(path), line=lineno
            ) from None
        if dimension is None:
            dimension = dim
        elif dim != dimension:
            raise ValidationError(
                f"{path}:{lineno}: dim changed from {dimension} to {dim}"
            )
        sent = index.get(key)
        if sent is None:
            raise ValidationError(f"{path}:{lineno}: unknown sentence key {key}")
        if key in sentence_vectors:
            raise ValidationError(f"{path}:{lineno}: duplicate sentence key {key}")
        expected_tokens = _retained_surfaces(sent)
        if list(tokens) != expected_tokens:
            raise ValidationError(
                f"{path}:{lineno}: token list {tokens!r} does not match corpus "
                f"tokenization {expected_tokens!r} for {key}"
            )
        if len(tok_vecs) != len(expected_tokens):
            raise ValidationError(
                f"{path}:{lineno}: {len(tok_vecs)} token vectors for "
                f"{len(expected_tokens)} retained tokens at {key}"
            )
        svec = np.asarray(sent_vec, dtype=np.float64)
        if svec.shape != (dimension,) or not np.all(np.isfinite(svec)):
            raise ValidationError(
                f"{path}:{lineno}: sentence vector must be {dimension} finite floats"
            )
        mat = (
            np.asarray(tok_vecs, dtype=np.float64)
            if tok_vecs
            else np.zeros((0, dimension))
        )
        if mat.shape != (len(tok_vecs), dimension) or not np.all(np.isfinite(mat)):
            raise ValidationError(
                f"{path}:{lineno}: token vectors must each be {dimension} finite floats"
            )
        svec.setflags(write=False)
        mat.setflags(write=False)
        # A zero sentence vector means "nothing usable here"; normalize that
        # to None so both backends signal degeneracy the same way.
        sentence_vectors[key] = svec if float(np.linalg.norm(svec)) > 0.0 else None
        token_vectors[key] = mat
    missing = [key for key in index if key not in sentence_vectors]
    if missing:
        missing.sort()
        shown = ", ".join(map(str, missing[:10]))
        raise CoverageError(
            f"embedding file misses {len(missing)} corpus sentences "
            f"(first {min(10, len(missing))}: {shown})",
            missing_keys=missing,
        )
    if dimension is None:
        raise ValidationError(f"{path}: no records")
    return EmbeddingStore(dimension, token_vectors, sentence_vectors)


def _vector_list(array) -> list:
    return [float(x) for x in array]


def write_embeddings(path, corpus, backend) -> int:
    """Write the embedding jsonl format for a corpus from any backend.

    Degenerate sentences (no retained tokens) get an empty token list and a
    zero sentence vector so the file still covers every key. Returns the
    record count.
    """
    lines = []
    for topic in sorted(corpus, key=lambda t: t.topic_id):
        units = [(d.doc_id, d.sentences) for d in topic.documents]
        units += [(s.summary_id, s.sentences) for s in topic.summaries]
        for unit_id, sentences in sorted(units):
            for sent in sentences:
                mat = backend.token_vectors(topic.topic_id, unit_id, sent)
                svec = backend.sentence_vector(topic.topic_id, unit_id, sent)
                if svec is None:
                    svec = np.zeros(backend.dimension)
                record = {
                    "topic_id": topic.topic_id,
                    "unit_id": unit_id,
                    "sent_idx": sent.sent_idx,
                    "dim": backend.dimension,
                    "sentence_vector": _vector_list(svec),
                    "tokens": _retained_surfaces(sent),
                    "token_vectors": [] if mat is None else [_vector_list(r) for r in mat],
                }
                lines.append(json.dumps(record, sort_keys=True))
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    return len(lines)
