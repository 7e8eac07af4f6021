"""Command-line pipelines: corpus validation, embedding management, scoring,
metric evaluation, and summarizer-training experiments.

Conventions: machine-readable results go to files under --out (or stdout for
single-result commands); logs go to stderr; outputs are written atomically
(temp file + rename) and contain nothing nondeterministic, so identical
configurations produce byte-identical result files. Exit codes: 0 success,
2 configuration/validation failure, 3 runtime failure.
"""

import argparse
import hashlib
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import load_corpus
from .embed import FallbackEncoder, load_embeddings, write_embeddings
from .errors import SupertkitError, ValidationError
from .evalharness import HarnessOptions, evaluate_metric
from .pseudoref import StrategySpec
from .rlsum import (
    RewardSpec,
    TerminalReward,
    rollout,
    rouge,
    rouge_stems,
    selected_sentences,
    train,
)
from .scorers import CosineScorer, JsScorer, SupertScorer, TfidfScorer

log = logging.getLogger("supertkit")

SCORER_NAMES = ("supert", "supert_full", "cosine", "cosine_full", "tfidf", "js")


@dataclass
class RunConfig:
    corpus_path: str
    corpus_format: str = "plain_dirs"
    embeddings: dict = field(default_factory=lambda: {"kind": "fallback", "dim": 64, "seed": 0})
    strategies: list = field(default_factory=list)
    scorers: list = field(default_factory=list)
    harness: dict = field(default_factory=dict)
    rl: dict = field(default_factory=dict)
    out_dir: str = "out"

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text("utf-8"))
        except OSError as exc:
            raise ValidationError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config {path} is not valid JSON: {exc}") from None
        known = {
            "corpus_path", "corpus_format", "embeddings", "strategies",
            "scorers", "harness", "rl", "out_dir",
        }
        unknown = set(raw) - known
        if unknown:
            raise ValidationError(f"unknown config keys {sorted(unknown)}")
        if "corpus_path" not in raw:
            raise ValidationError("config needs 'corpus_path'")
        return cls(**raw)

    def canonical_json(self) -> str:
        return json.dumps(self.__dict__, sort_keys=True)

    def validate_for_evaluate(self):
        if not Path(self.corpus_path).exists():
            raise ValidationError(f"corpus path does not exist: {self.corpus_path}")
        if self.embeddings.get("kind") == "file":
            if not Path(self.embeddings.get("path", "")).is_file():
                raise ValidationError(
                    f"embedding file does not exist: {self.embeddings.get('path')}"
                )
        elif self.embeddings.get("kind") != "fallback":
            raise ValidationError(f"unknown embeddings kind {self.embeddings.get('kind')!r}")
        if not self.scorers:
            raise ValidationError("need at least one scorer")
        for name in self.scorers:
            if name not in SCORER_NAMES:
                raise ValidationError(f"unknown scorer {name!r} (choose from {SCORER_NAMES})")
        needs_strategy = {"supert", "cosine"} & set(self.scorers)
        if needs_strategy and not self.strategies:
            raise ValidationError("scorers " + str(sorted(needs_strategy)) + " need at least one strategy")
        for spec in self.strategies:
            StrategySpec.from_dict(spec)
        return self


def _atomic_write(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _input_checksums(config: RunConfig) -> dict:
    checksums = {}
    corpus = Path(config.corpus_path)
    if corpus.is_file():
        checksums[str(corpus)] = _sha256_file(corpus)
    else:
        for path in sorted(corpus.rglob("*")):
            if path.is_file():
                checksums[str(path.relative_to(corpus))] = _sha256_file(path)
    if config.embeddings.get("kind") == "file":
        emb = Path(config.embeddings["path"])
        checksums[str(emb)] = _sha256_file(emb)
    return checksums


def _load_backend(config: RunConfig, corpus):
    emb = config.embeddings
    if emb.get("kind") == "file":
        return load_embeddings(emb["path"], corpus)
    return FallbackEncoder(dimension=int(emb.get("dim", 64)), seed=int(emb.get("seed", 0)))


def _build_scorers(config: RunConfig, backend) -> list:
    scorers = []
    strategies = [StrategySpec.from_dict(s) for s in config.strategies]
    for name in config.scorers:
        if name == "supert":
            scorers.extend(SupertScorer(backend, s) for s in strategies)
        elif name == "supert_full":
            scorers.append(SupertScorer(backend))
        elif name == "cosine":
            scorers.extend(CosineScorer(backend, s) for s in strategies)
        elif name == "cosine_full":
            scorers.append(CosineScorer(backend))
        elif name == "tfidf":
            scorers.append(TfidfScorer())
        elif name == "js":
            scorers.append(JsScorer())
    return scorers


def _harness_options(config: RunConfig) -> HarnessOptions:
    h = config.harness
    return HarnessOptions(
        seeds=tuple(h.get("seeds", range(10))),
        significance=bool(h.get("significance", False)),
        permutations=int(h.get("permutations", 1000)),
        min_rated=int(h.get("min_rated", 3)),
        jobs=int(h.get("jobs", 1)),
    )


def _scores_tsv(scorer, corpus) -> str:
    lines = ["topic_id\tsummary_id\tmetric_name\tscore"]
    for topic in sorted(corpus, key=lambda t: t.topic_id):
        score_map = scorer.score_topic(topic)
        for summary_id in sorted(score_map):
            lines.append(
                f"{topic.topic_id}\t{summary_id}\t{scorer.name}\t{score_map[summary_id]:.10f}"
            )
    return "\n".join(lines) + "\n"


def _write_manifest(out_dir: Path, config: RunConfig, command: str) -> None:
    manifest = {
        "command": command,
        "config": json.loads(config.canonical_json()),
        "config_sha256": hashlib.sha256(config.canonical_json().encode()).hexdigest(),
        "toolkit_version": __version__,
        "input_checksums": _input_checksums(config),
    }
    _atomic_write(out_dir / "manifest.json", json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def cmd_evaluate(config: RunConfig) -> int:
    try:
        config.validate_for_evaluate()
    except (ValidationError, OSError) as exc:
        log.error("invalid configuration: %s", exc)
        return 2
    try:
        corpus = load_corpus(config.corpus_path, config.corpus_format)
        backend = _load_backend(config, corpus)
    except (SupertkitError, OSError) as exc:
        log.error("cannot load inputs: %s", exc)
        return 2
    out_dir = Path(config.out_dir)
    options = _harness_options(config)
    try:
        for scorer in _build_scorers(config, backend):
            log.info("evaluating %s", scorer.name)
            report = evaluate_metric(corpus, scorer, options)
            _atomic_write(out_dir / f"{scorer.name}.report.json", report.to_json())
            _atomic_write(out_dir / f"{scorer.name}.report.tsv", report.to_tsv())
            dump_scorer = scorer.reseeded(options.seeds[0]) if scorer.seeded and options.seeds else scorer
            _atomic_write(out_dir / f"{scorer.name}.scores.tsv", _scores_tsv(dump_scorer, corpus))
        _write_manifest(out_dir, config, "evaluate")
    except SupertkitError as exc:
        log.error("evaluation failed: %s", exc)
        return 3
    log.info("reports written to %s", out_dir)
    return 0


def cmd_score(config: RunConfig) -> int:
    try:
        config.validate_for_evaluate()
        corpus = load_corpus(config.corpus_path, config.corpus_format)
        backend = _load_backend(config, corpus)
    except (SupertkitError, OSError) as exc:
        log.error("invalid inputs: %s", exc)
        return 2
    out_dir = Path(config.out_dir)
    try:
        for scorer in _build_scorers(config, backend):
            _atomic_write(out_dir / f"{scorer.name}.scores.tsv", _scores_tsv(scorer, corpus))
        _write_manifest(out_dir, config, "score")
    except SupertkitError as exc:
        log.error("scoring failed: %s", exc)
        return 3
    return 0


def cmd_rl(config: RunConfig) -> int:
    rl = config.rl
    try:
        if not Path(config.corpus_path).exists():
            raise ValidationError(f"corpus path does not exist: {config.corpus_path}")
        corpus = load_corpus(config.corpus_path, config.corpus_format)
        backend = _load_backend(config, corpus)
        reward_kind = rl.get("reward", "supert")
        strategy = StrategySpec.from_dict(rl.get("strategy", {"kind": "top_n", "n": 10}))
        reward = RewardSpec(kind=reward_kind, strategy=strategy).validate()
        episodes = int(rl.get("episodes", 3000))
        runs = int(rl.get("runs", 10))
        budget = int(rl.get("budget", 100))
        learning_rate = float(rl.get("learning_rate", 0.001))
        rouge_stat = rl.get("rouge_stat", "f1")
        if rouge_stat not in ("recall", "precision", "f1"):
            raise ValidationError(f"unknown rouge_stat {rouge_stat!r}")
        missing_refs = [t.topic_id for t in corpus if not t.references]
        if missing_refs:
            raise ValidationError(
                f"rl command needs reference summaries for ROUGE; missing in topics {missing_refs[:5]}"
            )
    except (SupertkitError, OSError) as exc:
        log.error("invalid configuration: %s", exc)
        return 2

    stat_slot = ("recall", "precision", "f1").index(rouge_stat)
    out_dir = Path(config.out_dir)
    run_rows = []
    all_scores = {"r1": [], "r2": [], "rl": []}
    try:
        for topic in sorted(corpus, key=lambda t: t.topic_id):
            refs = [rouge_stems(r.sentences) for r in topic.references]
            reward_fn = TerminalReward(topic, reward, backend)
            for run in range(runs):
                vf = train(topic, reward, backend, episodes=episodes, seed=run,
                           budget=budget, learning_rate=learning_rate)
                final = rollout(topic, vf, backend)
                stems = rouge_stems(
                    [s for _, _, s in selected_sentences(final, topic)]
                )
                row = {"topic_id": topic.topic_id, "run": run,
                       "reward_value": reward_fn(final)}
                for variant in ("r1", "r2", "rl"):
                    value = rouge(stems, refs, variant)[stat_slot]
                    row[variant] = value
                    all_scores[variant].append(value)
                run_rows.append(row)
                log.info("topic %s run %d: reward %.4f r1 %.4f",
                         topic.topic_id, run, row["reward_value"], row["r1"])
        lines = ["topic_id\trun\treward\tr1\tr2\trl"]
        for row in run_rows:
            lines.append(
                "{topic_id}\t{run}\t{reward_value:.6f}\t{r1:.6f}\t{r2:.6f}\t{rl:.6f}".format(**row)
            )
        _atomic_write(out_dir / "rl_runs.tsv", "\n".join(lines) + "\n")
        summary = "reward\tr1\tr2\trl\n{}\t{:.6f}\t{:.6f}\t{:.6f}\n".format(
            reward.kind,
            float(np.mean(all_scores["r1"])),
            float(np.mean(all_scores["r2"])),
            float(np.mean(all_scores["rl"])),
        )
        _atomic_write(out_dir / "rl_summary.tsv", summary)
        _write_manifest(out_dir, config, "rl")
    except SupertkitError as exc:
        log.error("rl experiment failed: %s", exc)
        return 3
    return 0


def cmd_validate_corpus(args) -> int:
    try:
        corpus = load_corpus(args.corpus, args.format)
    except (SupertkitError, OSError) as exc:
        log.error("corpus validation failed: %s", exc)
        return 2
    stats = {
        "topics": len(corpus),
        "documents": sum(len(t.documents) for t in corpus),
        "summaries": sum(len(t.summaries) for t in corpus),
        "source_sentences": sum(t.source_sentence_count() for t in corpus),
        "rated_summaries": sum(
            1 for t in corpus for s in t.summaries if s.human_rating is not None
        ),
    }
    print(json.dumps(stats, sort_keys=True))
    return 0


def cmd_embed_fallback(args) -> int:
    try:
        corpus = load_corpus(args.corpus, args.format)
        backend = FallbackEncoder(dimension=args.dim, seed=args.seed)
    except (SupertkitError, OSError) as exc:
        log.error("%s", exc)
        return 2
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    count = write_embeddings(out, corpus, backend)
    print(json.dumps({"records": count, "dim": args.dim, "path": str(out)}))
    return 0


def cmd_report(args) -> int:
    reports = []
    for path in sorted(Path(args.reports).glob("*.report.json")):
        data = json.loads(path.read_text("utf-8"))
        reports.append(data)
    if not reports:
        log.error("no *.report.json files under %s", args.reports)
        return 2
    width = max(len(r["metric_name"]) for r in reports) + 2
    print(f"{'metric':<{width}}{'pearson':>10}{'spearman':>10}{'kendall':>10}  topics")
    for data in reports:
        avg = data["averages"]
        print(
            f"{data['metric_name']:<{width}}"
            f"{avg['pearson']:>10.3f}{avg['spearman']:>10.3f}{avg['kendall']:>10.3f}"
            f"  {len(data['per_topic'])}"
        )
    return 0


def _config_from_args(args) -> RunConfig:
    if getattr(args, "config", None):
        config = RunConfig.from_file(args.config)
    else:
        config = RunConfig(corpus_path=getattr(args, "corpus", None) or "")
    # flag overrides win over the config file
    if getattr(args, "corpus", None):
        config.corpus_path = args.corpus
    if getattr(args, "format", None):
        config.corpus_format = args.format
    if getattr(args, "out", None):
        config.out_dir = args.out
    if getattr(args, "embeddings", None):
        config.embeddings = {"kind": "file", "path": args.embeddings}
    if getattr(args, "jobs", None):
        config.harness["jobs"] = args.jobs
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="supertkit",
        description="Reference-free multi-document summary evaluation toolkit",
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-corpus", help="load a corpus and print stats")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=("plain_dirs", "jsonl"), default="plain_dirs")

    p = sub.add_parser("embed-fallback", help="write deterministic test embeddings")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=("plain_dirs", "jsonl"), default="plain_dirs")
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    for name, help_text in (
        ("score", "dump raw metric scores"),
        ("evaluate", "correlate metrics with human ratings"),
        ("rl", "train the extractive summarizer and report ROUGE"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--corpus")
        p.add_argument("--format", choices=("plain_dirs", "jsonl"))
        p.add_argument("--embeddings", help="embedding jsonl file")
        p.add_argument("--out")
        p.add_argument("--jobs", type=int)

    p = sub.add_parser("report", help="print saved reports as a grid")
    p.add_argument("--reports", required=True, help="directory with *.report.json")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "validate-corpus":
            return cmd_validate_corpus(args)
        if args.command == "embed-fallback":
            return cmd_embed_fallback(args)
        if args.command == "report":
            return cmd_report(args)
        config = _config_from_args(args)
        if args.command == "evaluate":
            return cmd_evaluate(config)
        if args.command == "score":
            return cmd_score(config)
        if args.command == "rl":
            return cmd_rl(config)
    except ValidationError as exc:
        log.error("%s", exc)
        return 2
    except SupertkitError as exc:
        log.error("%s", exc)
        return 3
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
