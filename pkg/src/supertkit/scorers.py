"""Summary scoring: soft token alignment over embeddings plus the lexical
baselines. All scorers return "higher is better" so the evaluation harness
and the RL reward never need to know which metric they carry.

Degenerate summaries (nothing left after preprocessing) never raise out of
the scoring entry points; they get the metric's worst-possible sentinel so a
batch evaluation cannot abort on one bad summary.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .embed import build_idf, pool_document
from .errors import DegenerateInputError, ValidationError
from .pseudoref import StrategySpec, build, reseeded
from .simgraph import cosine
from .transport import solve_transport

log = logging.getLogger(__name__)

WORST_WMD_SCORE = -2.0          # cost-matrix maximum: 1 - cosine <= 2
WORST_COSINE_SCORE = -1.0
WORST_JS_SCORE = -math.log(2.0)
AUTO_EXACT_CELL_LIMIT = 10_000


@dataclass(frozen=True)
class WeightedTokenBag:
    stems: tuple
    vectors: np.ndarray         # (k, dim)
    weights: np.ndarray         # (k,), positive, sums to 1

    def __len__(self):
        return len(self.stems)

    @property
    def dimension(self):
        return self.vectors.shape[1]

    def validate(self):
        if len(self.stems) == 0:
            raise ValidationError("token bag is empty")
        if self.vectors.shape != (len(self.stems), self.vectors.shape[1]):
            raise ValidationError("bag vectors shape mismatch")
        if self.weights.shape != (len(self.stems),) or np.any(self.weights <= 0):
            raise ValidationError("bag weights must be positive")
        if abs(float(self.weights.sum()) - 1.0) > 1e-9:
            raise ValidationError("bag weights must sum to 1")
        return self


@dataclass(frozen=True)
class TransportPlan:
    flows: np.ndarray           # (m, n), >= 0
    cost: float


def make_bag(addressed, backend, idf=None, filter_stopwords: bool = True) -> WeightedTokenBag:
    """Build a weighted token bag from (topic_id, unit_id, sentence) triples.

    One entry per retained token occurrence; weights proportional to the
    stem's idf when a table is given, uniform otherwise.
    """
    stems, rows = [], []
    for topic_id, unit_id, sent in addressed:
        if filter_stopwords:
            toks = [t for t in sent.tokens if not t.is_stopword]
            mat = backend.token_vectors(topic_id, unit_id, sent)
        else:
            toks = list(sent.tokens)
            all_vectors = getattr(backend, "all_token_vectors", None)
            if all_vectors is None:
                raise ValidationError(
                    "this backend stores vectors for non-stopword tokens only; "
                    "cannot build an unfiltered bag"
                )
            mat = all_vectors(sent)
        if not toks:
            continue
        if mat is None or mat.shape[0] != len(toks):
            raise ValidationError(
                f"backend returned {0 if mat is None else mat.shape[0]} vectors "
                f"for {len(toks)} tokens in ({topic_id}, {unit_id}, {sent.sent_idx})"
            )
        stems.extend(t.stem for t in toks)
        rows.append(mat)
    if not stems:
        raise DegenerateInputError("no retained tokens for bag")
    vectors = np.concatenate(rows, axis=0)
    if idf is not None:
        weights = np.array([idf.value(s) for s in stems], dtype=np.float64)
    else:
        weights = np.ones(len(stems))
    weights = weights / weights.sum()
    return WeightedTokenBag(tuple(stems), vectors, weights).validate()


def _cost_matrix(a: WeightedTokenBag, b: WeightedTokenBag) -> np.ndarray:
    if a.dimension != b.dimension:
        raise ValidationError(
            f"bag dimensions differ: {a.dimension} vs {b.dimension}"
        )
    na = np.linalg.norm(a.vectors, axis=1)
    nb = np.linalg.norm(b.vectors, axis=1)
    if np.any(na == 0.0) or np.any(nb == 0.0):
        raise DegenerateInputError("zero-norm token vector in bag")
    sims = np.clip((a.vectors / na[:, None]) @ (b.vectors / nb[:, None]).T, -1.0, 1.0)
    return 1.0 - sims


def exact_wmd(a: WeightedTokenBag, b: WeightedTokenBag) -> TransportPlan:
    """Minimum-cost transport between two bags under 1 - cosine."""
    costs = _cost_matrix(a, b)
    flows, total, _u, _v = solve_transport(costs, a.weights, b.weights)
    return TransportPlan(flows=flows, cost=total)


def relaxed_wmd(a: WeightedTokenBag, b: WeightedTokenBag) -> float:
    """Greedy lower bound: each side ships all mass to its nearest neighbor."""
    costs = _cost_matrix(a, b)
    lower_a = float(np.dot(a.weights, costs.min(axis=1)))
    lower_b = float(np.dot(b.weights, costs.min(axis=0)))
    return max(lower_a, lower_b)


def wmd_cost(a: WeightedTokenBag, b: WeightedTokenBag, mode: str = "auto") -> float:
    if mode not in ("exact", "relaxed", "auto"):
        raise ValidationError(f"unknown wmd mode {mode!r}")
    if mode == "exact" or (mode == "auto" and len(a) * len(b) <= AUTO_EXACT_CELL_LIMIT):
        return exact_wmd(a, b).cost
    return relaxed_wmd(a, b)


def summary_addressed(topic, summary):
    return [(topic.topic_id, summary.summary_id, s) for s in summary.sentences]


def source_addressed(topic):
    return [
        (topic.topic_id, doc.doc_id, sent)
        for doc in topic.documents
        for sent in doc.sentences
    ]


def score_summary(summary, reference: WeightedTokenBag, backend, topic,
                  idf=None, mode: str = "auto",
                  filter_stopwords: bool = True) -> float:
    """Negated transport cost between the reference bag and the summary bag."""
    try:
        bag = make_bag(summary_addressed(topic, summary), backend, idf, filter_stopwords)
    except DegenerateInputError:
        log.info("summary %s/%s has no scorable tokens; worst score assigned",
                 topic.topic_id, summary.summary_id)
        return WORST_WMD_SCORE
    return -wmd_cost(reference, bag, mode)


def _pooled(addressed, backend):
    vectors = []
    for topic_id, unit_id, sent in addressed:
        vec = backend.sentence_vector(topic_id, unit_id, sent)
        if vec is not None:
            vectors.append(vec)
    if not vectors:
        return None
    return pool_document(vectors)


def score_cosine_pooled(summary, reference_addressed, backend, topic) -> float:
    """Cosine of the two average-pooled representations."""
    summary_vec = _pooled(summary_addressed(topic, summary), backend)
    reference_vec = _pooled(reference_addressed, backend)
    if summary_vec is None or reference_vec is None:
        return WORST_COSINE_SCORE
    try:
        return cosine(summary_vec, reference_vec)
    except DegenerateInputError:
        return WORST_COSINE_SCORE


def _stem_counts(sentences) -> Counter:
    counts = Counter()
    for sent in sentences:
        counts.update(t.stem for t in sent.tokens if not t.is_stopword)
    return counts


def _source_sentences(topic):
    return [sent for doc in topic.documents for sent in doc.sentences]


def score_tfidf(summary, topic, idf=None) -> float:
    """Cosine between tf-idf stem vectors of the summary and the whole source."""
    if idf is None:
        idf = build_idf(topic)
    source = _stem_counts(_source_sentences(topic))
    target = _stem_counts(summary.sentences)
    if not source or not target:
        return 0.0
    dot = 0.0
    for stem, tf in target.items():
        if stem in source:
            dot += (tf * idf.value(stem)) * (source[stem] * idf.value(stem))
    if dot == 0.0:
        return 0.0
    norm_t = math.sqrt(sum((tf * idf.value(s)) ** 2 for s, tf in target.items()))
    norm_s = math.sqrt(sum((tf * idf.value(s)) ** 2 for s, tf in source.items()))
    return dot / (norm_t * norm_s)


def score_js(summary, topic) -> float:
    """Negated Jensen-Shannon divergence between stem distributions (natural log)."""
    source = _stem_counts(_source_sentences(topic))
    target = _stem_counts(summary.sentences)
    if not source or not target:
        return WORST_JS_SCORE
    total_p = sum(source.values())
    total_q = sum(target.values())
    js = 0.0
    for stem in set(source) | set(target):
        p = source.get(stem, 0) / total_p
        q = target.get(stem, 0) / total_q
        m = 0.5 * (p + q)
        if p > 0:
            js += 0.5 * p * math.log(p / m)
        if q > 0:
            js += 0.5 * q * math.log(q / m)
    return -js


class SupertScorer:
    """Soft-alignment scorer against a pseudo reference (or the full source).

    ``strategy=None`` uses every source sentence as the reference, i.e. the
    plain document-level soft-alignment variant.
    """

    def __init__(self, backend, strategy: StrategySpec = None, use_idf: bool = True,
                 mode: str = "auto", filter_stopwords: bool = True):
        if strategy is not None:
            strategy.validate()
        self.backend = backend
        self.strategy = strategy
        self.use_idf = use_idf
        self.mode = mode
        self.filter_stopwords = filter_stopwords

    @property
    def name(self) -> str:
        return f"supert_{self.strategy.label}" if self.strategy else "supert_full"

    @property
    def seeded(self) -> bool:
        return self.strategy is not None and self.strategy.kind == "random_n"

    def reseeded(self, seed: int) -> "SupertScorer":
        if not self.seeded:
            return self
        return SupertScorer(self.backend, reseeded(self.strategy, seed),
                            self.use_idf, self.mode, self.filter_stopwords)

    def reference_addressed(self, topic):
        if self.strategy is None:
            return source_addressed(topic)
        return build(topic, self.strategy, self.backend).sentences(topic)

    def score_topic(self, topic) -> dict:
        idf = build_idf(topic) if self.use_idf else None
        try:
            reference = make_bag(self.reference_addressed(topic), self.backend,
                                 idf, self.filter_stopwords)
        except DegenerateInputError:
            log.warning("topic %s: pseudo reference has no scorable tokens",
                        topic.topic_id)
            return {s.summary_id: WORST_WMD_SCORE for s in topic.summaries}
        return {
            s.summary_id: score_summary(s, reference, self.backend, topic,
                                        idf, self.mode, self.filter_stopwords)
            for s in topic.summaries
        }


class CosineScorer:
    """Pooled-embedding cosine scorer (full source or a pseudo reference)."""

    def __init__(self, backend, strategy: StrategySpec = None):
        if strategy is not None:
            strategy.validate()
        self.backend = backend
        self.strategy = strategy

    @property
    def name(self) -> str:
        return f"cosine_{self.strategy.label}" if self.strategy else "cosine_full"

    @property
    def seeded(self) -> bool:
        return self.strategy is not None and self.strategy.kind == "random_n"

    def reseeded(self, seed: int) -> "CosineScorer":
        if not self.seeded:
            return self
        return CosineScorer(self.backend, reseeded(self.strategy, seed))

    def score_topic(self, topic) -> dict:
        if self.strategy is None:
            reference = source_addressed(topic)
        else:
            reference = build(topic, self.strategy, self.backend).sentences(topic)
        return {
            s.summary_id: score_cosine_pooled(s, reference, self.backend, topic)
            for s in topic.summaries
        }


class TfidfScorer:
    name = "tfidf"
    seeded = False

    def reseeded(self, seed: int):
        return self

    def score_topic(self, topic) -> dict:
        idf = build_idf(topic)
        return {s.summary_id: score_tfidf(s, topic, idf) for s in topic.summaries}


class JsScorer:
    name = "js"
    seeded = False

    def reseeded(self, seed: int):
        return self

    def score_topic(self, topic) -> dict:
        return {s.summary_id: score_js(s, topic) for s in topic.summaries}
