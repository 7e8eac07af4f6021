"""Batched transformer inference producing the embedding jsonl format.

Sentence vectors are attention-masked means over the final hidden layer
(the mean-tokens pooling convention). Token vectors mean-pool the word
pieces overlapping each retained token's character span; tokens that fall
entirely past the encoder's truncation window get zero vectors and a logged
warning, keeping the record aligned with the full token list.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .reader import read_units
from .rules import retained_token_spans

log = logging.getLogger("supertkit_exporter")

DEFAULT_CHECKPOINT = "sentence-transformers/bert-large-nli-stsb-mean-tokens"


class ExportError(Exception):
    pass


@dataclass
class ExportJob:
    corpus_path: str
    corpus_format: str
    model_name_or_path: str = DEFAULT_CHECKPOINT
    out_path: str = "embeddings.jsonl"
    batch_size: int = 16
    device: str = "cpu"
    max_length: Optional[int] = None


class Encoder:
    def __init__(self, model_name_or_path: str, device: str = "cpu",
                 max_length: Optional[int] = None):
        import torch
        from transformers import AutoModel, AutoTokenizer

        try:
            self.tokenizer = AutoTokenizer.from_pretrained(model_name_or_path)
            self.model = AutoModel.from_pretrained(model_name_or_path)
        except Exception as exc:
            raise ExportError(
                f"cannot resolve encoder checkpoint {model_name_or_path!r}: {exc}"
            ) from None
        if not self.tokenizer.is_fast:
            raise ExportError(
                "a fast tokenizer (offset mappings) is required for token alignment"
            )
        self.torch = torch
        self.device = device
        self.model.to(device)
        self.model.eval()
        limit = getattr(self.model.config, "max_position_embeddings", 512)
        tokenizer_limit = self.tokenizer.model_max_length
        if tokenizer_limit and tokenizer_limit < 10**6:
            limit = min(limit, tokenizer_limit)
        self.max_length = min(max_length, limit) if max_length else limit
        self.dimension = int(self.model.config.hidden_size)

    def encode_batch(self, sentences: list):
        """Per sentence: (sentence_vector, list of (start, end, piece_vector))."""
        enc = self.tokenizer(
            sentences,
            return_tensors="pt",
            padding=True,
            truncation=True,
            max_length=self.max_length,
            return_offsets_mapping=True,
            return_special_tokens_mask=True,
        )
        offsets = enc.pop("offset_mapping")
        special = enc.pop("special_tokens_mask")
        enc = {k: v.to(self.device) for k, v in enc.items()}
        with self.torch.no_grad():
            hidden = self.model(**enc).last_hidden_state.cpu().numpy()
        attention = enc["attention_mask"].cpu().numpy()
        results = []
        for row in range(len(sentences)):
            mask = attention[row].astype(bool)
            states = hidden[row]
            sent_vec = states[mask].mean(axis=0)
            pieces = []
            for col in np.nonzero(mask)[0]:
                if special[row, col]:
                    continue
                start, end = int(offsets[row, col, 0]), int(offsets[row, col, 1])
                if end > start:
                    pieces.append((start, end, states[col]))
            results.append((sent_vec, pieces))
        return results


def _token_vectors(sentence, pieces, dimension):
    spans = retained_token_spans(sentence)
    tokens = [s[0] for s in spans]
    vectors = []
    missing = 0
    for _, start, end in spans:
        hits = [vec for ps, pe, vec in pieces if ps < end and pe > start]
        if hits:
            vectors.append(np.mean(hits, axis=0))
        else:
            vectors.append(np.zeros(dimension))
            missing += 1
    return tokens, vectors, missing


def export(job: ExportJob) -> int:
    """Run the export; returns the number of records written."""
    encoder = Encoder(job.model_name_or_path, job.device, job.max_length)
    units = list(read_units(job.corpus_path, job.corpus_format))
    tasks = []
    for topic_id, unit_id, sentences in units:
        for sent_idx, sentence in enumerate(sentences):
            tasks.append((topic_id, unit_id, sent_idx, sentence))

    lines = []
    truncated = 0
    for base in range(0, len(tasks), job.batch_size):
        batch = tasks[base:base + job.batch_size]
        encoded = encoder.encode_batch([t[3] for t in batch])
        for (topic_id, unit_id, sent_idx, sentence), (sent_vec, pieces) in zip(batch, encoded):
            tokens, vectors, missing = _token_vectors(sentence, pieces, encoder.dimension)
            if missing:
                truncated += 1
                log.warning(
                    "sentence (%s, %s, %d) exceeds the encoder window; "
                    "%d token vector(s) zero-filled",
                    topic_id, unit_id, sent_idx, missing,
                )
            lines.append(json.dumps({
                "topic_id": topic_id,
                "unit_id": unit_id,
                "sent_idx": sent_idx,
                "dim": encoder.dimension,
                "sentence_vector": [float(x) for x in sent_vec],
                "tokens": tokens,
                "token_vectors": [[float(x) for x in vec] for vec in vectors],
            }, sort_keys=True))
    out = Path(job.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    if truncated:
        log.warning("%d sentence(s) were truncated", truncated)
    return len(lines)
