"""Meta-evaluation: correlate metric scores with human ratings per topic and
average across topics.

The three correlation coefficients are implemented here directly (the test
suite checks them against brute-force oracles). Topics where a coefficient
is undefined -- fewer than three rated summaries, or zero variance on either
side -- are skipped and reported, never silently zeroed.
"""

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateInputError, SupertkitError, ValidationError

MIN_RATED_SUMMARIES = 3


def _as_arrays(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("inputs must be 1-d and of equal length")
    if len(x) < MIN_RATED_SUMMARIES:
        raise DegenerateInputError(f"need at least {MIN_RATED_SUMMARIES} points")
    return x, y


def pearson(x, y) -> float:
    x, y = _as_arrays(x, y)
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(np.sqrt((dx * dx).sum()))
    sy = float(np.sqrt((dy * dy).sum()))
    if sx == 0.0 or sy == 0.0:
        raise DegenerateInputError("zero variance input")
    return float(np.dot(dx, dy) / (sx * sy))


def _average_ranks(x) -> np.ndarray:
    order = np.argsort(x, kind="stable")
    ranks = np.empty(len(x))
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and x[order[j + 1]] == x[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> float:
    x, y = _as_arrays(x, y)
    return pearson(_average_ranks(x), _average_ranks(y))


def kendall(x, y) -> float:
    """Tau-b: pair counting with the standard tie corrections."""
    x, y = _as_arrays(x, y)
    n = len(x)
    concordant = discordant = 0
    ties_x = ties_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            a = x[i] - x[j]
            b = y[i] - y[j]
            if a == 0.0 and b == 0.0:
                continue
            if a == 0.0:
                ties_x += 1
            elif b == 0.0:
                ties_y += 1
            elif a * b > 0:
                concordant += 1
            else:
                discordant += 1
    n0 = n * (n - 1) // 2
    tx = n0 - concordant - discordant - ties_y
    ty = n0 - concordant - discordant - ties_x
    denom = math.sqrt((n0 - tx) * (n0 - ty))
    if denom == 0.0:
        raise DegenerateInputError("all pairs tied")
    return (concordant - discordant) / denom


@dataclass(frozen=True)
class TopicCorrelation:
    pearson: float
    spearman: float
    kendall: float
    n_summaries: int
    p_values: Optional[tuple] = None    # (pearson, spearman, kendall)


@dataclass(frozen=True)
class MetricReport:
    metric_name: str
    per_topic: dict                     # topic_id -> TopicCorrelation
    averages: tuple                     # (pearson, spearman, kendall)
    skipped_topics: tuple               # of (topic_id, reason)
    significant_fraction: Optional[tuple] = None

    def to_dict(self) -> dict:
        out = {
            "metric_name": self.metric_name,
            "averages": {
                "pearson": self.averages[0],
                "spearman": self.averages[1],
                "kendall": self.averages[2],
            },
            "per_topic": {
                tid: {
                    "pearson": tc.pearson,
                    "spearman": tc.spearman,
                    "kendall": tc.kendall,
                    "n_summaries": tc.n_summaries,
                    **(
                        {
                            "p_pearson": tc.p_values[0],
                            "p_spearman": tc.p_values[1],
                            "p_kendall": tc.p_values[2],
                        }
                        if tc.p_values is not None
                        else {}
                    ),
                }
                for tid, tc in sorted(self.per_topic.items())
            },
            "skipped_topics": [
                {"topic_id": tid, "reason": reason}
                for tid, reason in self.skipped_topics
            ],
        }
        if self.significant_fraction is not None:
            out["significant_fraction"] = {
                "pearson": self.significant_fraction[0],
                "spearman": self.significant_fraction[1],
                "kendall": self.significant_fraction[2],
            }
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_tsv(self) -> str:
        lines = ["topic_id\tpearson\tspearman\tkendall\tn_summaries"]
        for tid, tc in sorted(self.per_topic.items()):
            lines.append(
                f"{tid}\t{tc.pearson:.6f}\t{tc.spearman:.6f}\t{tc.kendall:.6f}\t{tc.n_summaries}"
            )
        lines.append(
            "AVERAGE\t{:.6f}\t{:.6f}\t{:.6f}\t{}".format(
                self.averages[0], self.averages[1], self.averages[2],
                len(self.per_topic),
            )
        )
        for tid, reason in self.skipped_topics:
            lines.append(f"# skipped {tid}: {reason}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class HarnessOptions:
    seeds: tuple = tuple(range(10))     # used only by seeded (random) scorers
    significance: bool = False
    permutations: int = 1000
    min_rated: int = MIN_RATED_SUMMARIES
    jobs: int = 1


def _permutation_p_values(scores, ratings, observed, permutations, seed):
    rng = np.random.default_rng(seed)
    ratings = np.asarray(ratings, dtype=np.float64)
    hits = [0, 0, 0]
    valid = [0, 0, 0]
    for _ in range(permutations):
        shuffled = rng.permutation(ratings)
        for slot, fn in enumerate((pearson, spearman, kendall)):
            try:
                value = fn(scores, shuffled)
            except DegenerateInputError:
                continue
            valid[slot] += 1
            if abs(value) >= abs(observed[slot]) - 1e-12:
                hits[slot] += 1
    return tuple(
        (hits[i] + 1) / (valid[i] + 1) if valid[i] else 1.0 for i in range(3)
    )


def _topic_seed(topic_id: str) -> int:
    return sum((i + 1) * b for i, b in enumerate(topic_id.encode("utf-8"))) % (2**31)


def _evaluate_topic(topic, scorer, options):
    rated = [s for s in topic.summaries if s.human_rating is not None]
    if len(rated) < options.min_rated:
        return None, f"only {len(rated)} rated summaries (need {options.min_rated})"
    score_map = scorer.score_topic(topic)
    missing = [s.summary_id for s in rated if s.summary_id not in score_map]
    if missing:
        raise ValidationError(
            f"scorer {scorer.name} returned no score for {missing} in {topic.topic_id}"
        )
    scores = [score_map[s.summary_id] for s in rated]
    ratings = [s.human_rating for s in rated]
    try:
        observed = (pearson(scores, ratings), spearman(scores, ratings),
                    kendall(scores, ratings))
    except DegenerateInputError as exc:
        return None, str(exc)
    p_values = None
    if options.significance:
        p_values = _permutation_p_values(
            scores, ratings, observed, options.permutations, _topic_seed(topic.topic_id)
        )
    return TopicCorrelation(observed[0], observed[1], observed[2],
                            len(rated), p_values), None


def _single_run(corpus, scorer, options) -> MetricReport:
    ordered = sorted(corpus, key=lambda t: t.topic_id)
    if options.jobs > 1:
        with ThreadPoolExecutor(max_workers=options.jobs) as pool:
            results = list(pool.map(
                lambda t: _evaluate_topic(t, scorer, options), ordered
            ))
    else:
        results = [_evaluate_topic(t, scorer, options) for t in ordered]
    per_topic = {}
    skipped = []
    for topic, (correlation, reason) in zip(ordered, results):
        if correlation is None:
            skipped.append((topic.topic_id, reason))
        else:
            per_topic[topic.topic_id] = correlation
    if not per_topic:
        raise SupertkitError(
            f"metric {scorer.name}: no usable topics "
            f"({len(skipped)} skipped)"
        )
    averages = tuple(
        float(np.mean([getattr(tc, coef) for tc in per_topic.values()]))
        for coef in ("pearson", "spearman", "kendall")
    )
    significant = None
    if options.significance:
        counts = [0, 0, 0]
        for tc in per_topic.values():
            for slot in range(3):
                if tc.p_values[slot] < 0.05:
                    counts[slot] += 1
        significant = tuple(c / len(per_topic) for c in counts)
    return MetricReport(
        metric_name=scorer.name,
        per_topic=per_topic,
        averages=averages,
        skipped_topics=tuple(skipped),
        significant_fraction=significant,
    )


def _average_reports(reports, metric_name) -> MetricReport:
    common = set(reports[0].per_topic)
    for report in reports[1:]:
        common &= set(report.per_topic)
    skipped = {}
    for report in reports:
        for tid, reason in report.skipped_topics:
            skipped.setdefault(tid, reason)
    for report in reports:
        for tid in report.per_topic:
            if tid not in common:
                skipped.setdefault(tid, "skipped in at least one seeded run")
    per_topic = {}
    for tid in common:
        entries = [r.per_topic[tid] for r in reports]
        per_topic[tid] = TopicCorrelation(
            pearson=float(np.mean([e.pearson for e in entries])),
            spearman=float(np.mean([e.spearman for e in entries])),
            kendall=float(np.mean([e.kendall for e in entries])),
            n_summaries=entries[0].n_summaries,
        )
    if not per_topic:
        raise SupertkitError(f"metric {metric_name}: no usable topics across seeds")
    averages = tuple(
        float(np.mean([r.averages[slot] for r in reports])) for slot in range(3)
    )
    significant = None
    if reports[0].significant_fraction is not None:
        significant = tuple(
            float(np.mean([r.significant_fraction[slot] for r in reports]))
            for slot in range(3)
        )
    return MetricReport(
        metric_name=metric_name,
        per_topic=per_topic,
        averages=averages,
        skipped_topics=tuple(sorted(skipped.items())),
        significant_fraction=significant,
    )


def evaluate_metric(corpus, scorer, options: HarnessOptions = None) -> MetricReport:
    """Score every rated summary, correlate per topic, average over topics.

    Seeded scorers (random pseudo references) are run once per configured
    seed and the resulting reports are averaged.
    """
    options = options or HarnessOptions()
    if not corpus:
        raise SupertkitError("empty corpus")
    if scorer.seeded and len(options.seeds) > 0:
        reports = [
            _single_run(corpus, scorer.reseeded(seed), options)
            for seed in options.seeds
        ]
        return _average_reports(reports, scorer.name)
    return _single_run(corpus, scorer, options)
