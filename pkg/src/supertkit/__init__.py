"""Reference-free evaluation of multi-document summaries.

The toolkit extracts pseudo-reference summaries from source documents,
scores candidate summaries by soft token alignment over contextual
embeddings (with lexical baselines for comparison), meta-evaluates metrics
by summary-level correlation with human ratings, and reuses the metric as a
terminal reward for an extractive TD-learning summarizer.
"""

__version__ = "0.1.0"

from .corpus import (
    CandidateSummary,
    Document,
    SentenceRecord,
    TokenRecord,
    Topic,
    build_topic,
    load_corpus,
    preprocess,
    save_corpus_jsonl,
    segment_sentences,
)
from .embed import (
    EmbeddingStore,
    FallbackEncoder,
    IdfTable,
    build_idf,
    fallback_encode,
    load_embeddings,
    pool_document,
    pool_sentence,
    write_embeddings,
)
from .evalharness import (
    HarnessOptions,
    MetricReport,
    evaluate_metric,
    kendall,
    pearson,
    spearman,
)
from .pseudoref import PseudoReference, StrategySpec
from .scorers import (
    JsScorer,
    SupertScorer,
    CosineScorer,
    TfidfScorer,
    TransportPlan,
    WeightedTokenBag,
    exact_wmd,
    make_bag,
    relaxed_wmd,
    score_cosine_pooled,
    score_js,
    score_summary,
    score_tfidf,
)
from .rlsum import ExtractState, RewardSpec, ValueFunction, rollout, rouge, step, train
