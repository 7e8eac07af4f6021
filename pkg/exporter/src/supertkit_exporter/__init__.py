"""Embedding exporter for the supertkit evaluator.

Runs a pretrained transformer encoder over a corpus and emits one jsonl
record per sentence (sentence vector plus per-token vectors), in the file
format the evaluator's ``load_embeddings`` validates strictly.
"""

__version__ = "0.1.0"

from .encode import DEFAULT_CHECKPOINT, Encoder, ExportError, ExportJob, export
