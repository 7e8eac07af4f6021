"""Pseudo-reference construction: pick salient source sentences to stand in
for a human-written reference summary.

Eight strategies: seeded random and lead-sentence baselines, LexRank and
affinity-propagation and positional-contrast graphs (each per-document or
topic-global), and the lead+clique combination. Every strategy emits picks
in (document order, position) order, so outputs are reproducible
byte-for-byte given the same configuration.
"""

import json
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import ValidationError
from .simgraph import (
    affinity_propagation,
    connected_components,
    cosine,
    lexrank,
    maximal_cliques,
    pacsum_scores,
    similarity_matrix,
)

KINDS = ("random_n", "top_n", "slr", "sc", "sps", "tc")
SCOPES = ("individual", "global")
_SCOPED_KINDS = ("slr", "sc", "sps")


@dataclass(frozen=True)
class StrategySpec:
    kind: str
    scope: str = "individual"
    n: int = 10
    k: int = 10
    m: int = 90
    threshold: float = 0.75
    seed: Optional[int] = None

    def validate(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown strategy kind {self.kind!r}")
        if self.scope not in SCOPES:
            raise ValidationError(f"unknown scope {self.scope!r}")
        if self.kind in ("random_n", "top_n", "tc") and self.n < 1:
            raise ValidationError(f"{self.kind} needs n >= 1, got {self.n}")
        if self.k < 1 or self.m < 1:
            raise ValidationError("k and m must be >= 1")
        if not (0.0 < self.threshold < 1.0):
            raise ValidationError(f"threshold must be in (0, 1), got {self.threshold}")
        return self

    @property
    def label(self) -> str:
        if self.kind == "random_n":
            return f"random{self.n}"
        if self.kind == "top_n":
            return f"top{self.n}"
        if self.kind == "tc":
            return f"tc{self.n}"
        return f"{self.kind}_{self.scope[0]}"

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.kind in _SCOPED_KINDS:
            out["scope"] = self.scope
        if self.kind in ("random_n", "top_n", "tc"):
            out["n"] = self.n
        if self.kind in ("slr", "sps"):
            out["k"] = self.k
            out["m"] = self.m
        if self.kind == "tc":
            out["threshold"] = self.threshold
        if self.seed is not None:
            out["seed"] = self.seed
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "StrategySpec":
        allowed = {"kind", "scope", "n", "k", "m", "threshold", "seed"}
        unknown = set(data) - allowed
        if unknown:
            raise ValidationError(f"unknown strategy fields {sorted(unknown)}")
        if "kind" not in data:
            raise ValidationError("strategy needs a 'kind'")
        return cls(**data).validate()


@dataclass(frozen=True)
class PseudoReference:
    topic_id: str
    picks: tuple                # of (doc_id, sent_idx)
    strategy: StrategySpec

    def validate(self, topic=None):
        if len(set(self.picks)) != len(self.picks):
            raise ValidationError(f"duplicate picks in pseudo reference for {self.topic_id}")
        if topic is not None:
            for doc_id, sent_idx in self.picks:
                doc = topic.document(doc_id)
                if not (0 <= sent_idx < len(doc.sentences)):
                    raise ValidationError(
                        f"pick ({doc_id}, {sent_idx}) outside document"
                    )
        return self

    def sentences(self, topic):
        """Resolve picks to (topic_id, doc_id, SentenceRecord) triples."""
        resolved = []
        for doc_id, sent_idx in self.picks:
            doc = topic.document(doc_id)
            resolved.append((topic.topic_id, doc_id, doc.sentences[sent_idx]))
        return resolved

    def to_jsonl_line(self) -> str:
        return json.dumps(
            {
                "topic_id": self.topic_id,
                "strategy": self.strategy.to_dict(),
                "picks": [[d, s] for d, s in self.picks],
            },
            sort_keys=True,
        )


def parse_pseudoref_line(line: str) -> PseudoReference:
    data = json.loads(line)
    return PseudoReference(
        topic_id=data["topic_id"],
        picks=tuple((d, int(s)) for d, s in data["picks"]),
        strategy=StrategySpec.from_dict(data["strategy"]),
    )


def _canonical(topic, picks) -> tuple:
    order = {d.doc_id: i for i, d in enumerate(topic.documents)}
    return tuple(sorted(set(picks), key=lambda p: (order[p[0]], p[1])))


def _doc_vectors(topic, doc, backend):
    """Sentence indices and stacked vectors, skipping unvectorizable sentences."""
    indices, vectors = [], []
    for sent in doc.sentences:
        vec = backend.sentence_vector(topic.topic_id, doc.doc_id, sent)
        if vec is not None:
            indices.append(sent.sent_idx)
            vectors.append(vec)
    return indices, vectors


def build_random(topic, n: int, seed: int) -> PseudoReference:
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    picks = []
    for doc in topic.documents:
        count = min(n, len(doc.sentences))
        if count == 0:
            continue
        chosen = rng.choice(len(doc.sentences), size=count, replace=False)
        picks.extend((doc.doc_id, int(s)) for s in chosen)
    spec = StrategySpec(kind="random_n", n=n, seed=seed)
    return PseudoReference(topic.topic_id, _canonical(topic, picks), spec).validate(topic)


def build_top_n(topic, n: int) -> PseudoReference:
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    picks = []
    for doc in topic.documents:
        picks.extend((doc.doc_id, s.sent_idx) for s in doc.sentences[:n])
    spec = StrategySpec(kind="top_n", n=n)
    return PseudoReference(topic.topic_id, _canonical(topic, picks), spec).validate(topic)


def _take_top(scored, limit):
    """scored: list of (score, doc_order, sent_idx, doc_id); stable tie-break."""
    ranked = sorted(scored, key=lambda t: (-t[0], t[1], t[2]))
    return [(t[3], t[2]) for t in ranked[:limit]]


def build_lexrank(topic, backend, scope: str = "individual", k: int = 10,
                  m: int = 90, damping: float = 0.85) -> PseudoReference:
    spec = StrategySpec(kind="slr", scope=scope, k=k, m=m).validate()
    picks = []
    if scope == "individual":
        for order, doc in enumerate(topic.documents):
            indices, vectors = _doc_vectors(topic, doc, backend)
            if not indices:
                continue
            scores = lexrank(similarity_matrix(vectors), damping=damping).scores
            scored = [
                (float(scores[pos]), order, idx, doc.doc_id)
                for pos, idx in enumerate(indices)
            ]
            picks.extend(_take_top(scored, k))
    else:
        scored_all = []
        vectors = []
        for order, doc in enumerate(topic.documents):
            indices, vecs = _doc_vectors(topic, doc, backend)
            for idx, vec in zip(indices, vecs):
                scored_all.append((order, idx, doc.doc_id))
                vectors.append(vec)
        if vectors:
            scores = lexrank(similarity_matrix(vectors), damping=damping).scores
            scored = [
                (float(scores[pos]), order, idx, doc_id)
                for pos, (order, idx, doc_id) in enumerate(scored_all)
            ]
            picks.extend(_take_top(scored, m))
    return PseudoReference(topic.topic_id, _canonical(topic, picks), spec).validate(topic)


def build_affinity(topic, backend, scope: str = "individual",
                   preference="median", damping: float = 0.5) -> PseudoReference:
    spec = StrategySpec(kind="sc", scope=scope).validate()
    picks = []
    if scope == "individual":
        for doc in topic.documents:
            indices, vectors = _doc_vectors(topic, doc, backend)
            if not indices:
                continue
            clustering = affinity_propagation(
                similarity_matrix(vectors), preference=preference, damping=damping
            )
            picks.extend((doc.doc_id, indices[e]) for e in clustering.exemplars)
    else:
        keys, vectors = [], []
        for doc in topic.documents:
            indices, vecs = _doc_vectors(topic, doc, backend)
            keys.extend((doc.doc_id, idx) for idx in indices)
            vectors.extend(vecs)
        if vectors:
            clustering = affinity_propagation(
                similarity_matrix(vectors), preference=preference, damping=damping
            )
            picks.extend(keys[e] for e in clustering.exemplars)
    return PseudoReference(topic.topic_id, _canonical(topic, picks), spec).validate(topic)


def build_pacsum(topic, backend, scope: str = "individual", k: int = 10,
                 m: int = 90, lambda_succ: float = 1.0,
                 lambda_prec: float = 1.0) -> PseudoReference:
    """Positional-contrast ranking.

    Scores are always computed inside one document (the preceding/succeeding
    notion needs a position order); the global variant only moves the top-M
    cut to the whole topic.
    """
    spec = StrategySpec(kind="sps", scope=scope, k=k, m=m).validate()
    scored_per_doc = []
    for order, doc in enumerate(topic.documents):
        indices, vectors = _doc_vectors(topic, doc, backend)
        if not indices:
            continue
        scores = pacsum_scores(
            similarity_matrix(vectors), lambda_succ=lambda_succ, lambda_prec=lambda_prec
        ).scores
        scored_per_doc.append(
            [
                (float(scores[pos]), order, idx, doc.doc_id)
                for pos, idx in enumerate(indices)
            ]
        )
    picks = []
    if scope == "individual":
        for scored in scored_per_doc:
            picks.extend(_take_top(scored, k))
    else:
        merged = [entry for scored in scored_per_doc for entry in scored]
        picks.extend(_take_top(merged, m))
    return PseudoReference(topic.topic_id, _canonical(topic, picks), spec).validate(topic)


def build_top_clique(topic, backend, n: int = 10, threshold: float = 0.75,
                     grouping: str = "cliques") -> PseudoReference:
    """Lead sentences plus centers of high-similarity cliques among the rest.

    (i) the first n sentences of each document are salient; (ii) the
    remaining sentences form a topic-wide graph with edges where cosine >=
    threshold; (iii) each maximal clique nominates its most central member
    (singletons nominate nothing); (iv) a nominee survives only if its
    cosine to every lead sentence stays below the threshold.

    ``grouping="components"`` swaps step (iii)'s maximal cliques for
    connected components, a coarser alternative.
    """
    if grouping not in ("cliques", "components"):
        raise ValidationError(f"unknown grouping {grouping!r}")
    spec = StrategySpec(kind="tc", n=n, threshold=threshold).validate()
    top_picks = []
    top_vectors = []
    rest = []                   # (doc_id, sent_idx, vector)
    for doc in topic.documents:
        for sent in doc.sentences:
            vec = backend.sentence_vector(topic.topic_id, doc.doc_id, sent)
            if sent.sent_idx < n:
                top_picks.append((doc.doc_id, sent.sent_idx))
                if vec is not None:
                    top_vectors.append(vec)
            elif vec is not None:
                rest.append((doc.doc_id, sent.sent_idx, vec))

    kept = []
    if rest:
        mat = np.stack([r[2] for r in rest])
        sim = similarity_matrix(mat).values
        adjacency = sim >= threshold
        np.fill_diagonal(adjacency, False)
        group_fn = maximal_cliques if grouping == "cliques" else connected_components
        cliques, _singletons = group_fn(adjacency)
        nominees = []
        for clique in cliques:
            members = sorted(clique)
            best = None
            for i in members:
                avg = float(np.mean([sim[i, j] for j in members if j != i]))
                key = (-avg, rest[i][0], rest[i][1])
                if best is None or key < best[0]:
                    best = (key, i)
            nominees.append(best[1])
        for i in sorted(set(nominees)):
            vec = rest[i][2]
            if all(cosine(vec, t) < threshold for t in top_vectors):
                kept.append((rest[i][0], rest[i][1]))

    picks = top_picks + kept
    return PseudoReference(topic.topic_id, _canonical(topic, picks), spec).validate(topic)


def build(topic, spec: StrategySpec, backend=None) -> PseudoReference:
    """Dispatch a strategy spec; graph strategies require a backend."""
    spec.validate()
    if spec.kind == "random_n":
        seed = spec.seed if spec.seed is not None else 0
        return build_random(topic, spec.n, seed)
    if spec.kind == "top_n":
        return build_top_n(topic, spec.n)
    if backend is None:
        raise ValidationError(f"strategy {spec.kind!r} needs an embedding backend")
    if spec.kind == "slr":
        return build_lexrank(topic, backend, spec.scope, spec.k, spec.m)
    if spec.kind == "sc":
        return build_affinity(topic, backend, spec.scope)
    if spec.kind == "sps":
        return build_pacsum(topic, backend, spec.scope, spec.k, spec.m)
    return build_top_clique(topic, backend, spec.n, spec.threshold)


def reseeded(spec: StrategySpec, seed: int) -> StrategySpec:
    return replace(spec, seed=seed)
