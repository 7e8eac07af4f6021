"""Minimal corpus reading: just the unit texts, in the evaluator's
deterministic order (topics and units sorted by id, sentences by position)."""

import json
from pathlib import Path

from .rules import segment_sentences


class ReaderError(Exception):
    pass


def _plain_dirs_units(root: Path):
    for topic_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        units = {}
        docs_dir = topic_dir / "docs"
        if not docs_dir.is_dir():
            raise ReaderError(f"topic {topic_dir.name!r} has no docs/ directory")
        for sub in ("docs", "summaries"):
            sub_dir = topic_dir / sub
            if not sub_dir.is_dir():
                continue
            for path in sorted(sub_dir.glob("*.txt")):
                if path.stem in units:
                    raise ReaderError(
                        f"unit id {path.stem!r} appears twice in topic {topic_dir.name!r}"
                    )
                units[path.stem] = path.read_text("utf-8")
        for unit_id in sorted(units):
            yield topic_dir.name, unit_id, units[unit_id]


def _jsonl_units(path: Path):
    per_topic = {}
    for lineno, line in enumerate(path.read_text("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            topic_id = record["topic_id"]
            unit_id = record["doc_id"]
            kind = record["kind"]
            text = record["text"]
        except (json.JSONDecodeError, KeyError) as exc:
            raise ReaderError(f"{path}:{lineno}: bad record ({exc})") from None
        if kind not in ("doc", "summary"):
            continue        # reference summaries are not embedded
        units = per_topic.setdefault(topic_id, {})
        if unit_id in units:
            raise ReaderError(
                f"{path}:{lineno}: unit id {unit_id!r} appears twice in topic {topic_id!r}"
            )
        units[unit_id] = text
    for topic_id in sorted(per_topic):
        for unit_id in sorted(per_topic[topic_id]):
            yield topic_id, unit_id, per_topic[topic_id][unit_id]


def read_units(corpus_path, corpus_format: str):
    """Yield (topic_id, unit_id, [sentence texts]) deterministically."""
    root = Path(corpus_path)
    if not root.exists():
        raise ReaderError(f"corpus path does not exist: {root}")
    if corpus_format == "plain_dirs":
        source = _plain_dirs_units(root)
    elif corpus_format == "jsonl":
        source = _jsonl_units(root)
    else:
        raise ReaderError(f"unknown corpus format {corpus_format!r}")
    for topic_id, unit_id, text in source:
        yield topic_id, unit_id, segment_sentences(text)
