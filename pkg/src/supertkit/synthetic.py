"""Synthetic corpora with planted summary quality.

Documents open with sentences drawn from a topic-specific "lead" vocabulary
and continue with "tail"-vocabulary sentences; candidate summaries copy a
controlled mix of lead and tail sentences and are rated by their lead
fraction. Because both vocabularies occur in the source, distribution-based
baselines see little difference between good and bad summaries, while
lead-anchored pseudo references separate them cleanly. Every topic also
carries the concatenated lead sentences as a planted reference summary.
"""

import numpy as np

from .corpus import build_topic

_CONSONANTS = "bdfgklmnprstvz"
_VOWELS = "aeiou"


def _pseudo_word(rng) -> str:
    return "".join(
        _CONSONANTS[int(rng.integers(len(_CONSONANTS)))]
        + _VOWELS[int(rng.integers(len(_VOWELS)))]
        for _ in range(3)
    )


def _vocabulary(rng, size: int, taken: set) -> list:
    from .porter import porter_stem

    words = []
    while len(words) < size:
        word = _pseudo_word(rng)
        stem = porter_stem(word)
        if stem in taken:
            continue
        taken.add(stem)
        words.append(word)
    return words


def _sentence(rng, vocab, words_per_sentence: int) -> str:
    picked = [vocab[int(rng.integers(len(vocab)))] for _ in range(words_per_sentence)]
    return picked[0].capitalize() + " " + " ".join(picked[1:]) + "."


def synthetic_topic(topic_id: str, rng, n_docs: int = 5, lead: int = 4,
                    tail: int = 8, words_per_sentence: int = 7,
                    n_summaries: int = 10, summary_sentences: int = 9,
                    vocab_lead: int = 40, vocab_tail: int = 120):
    taken = set()
    lead_vocab = _vocabulary(rng, vocab_lead, taken)
    tail_vocab = _vocabulary(rng, vocab_tail, taken)

    docs = {}
    lead_pool = []          # raw sentence texts drawn from the lead sections
    tail_pool = []
    for d in range(n_docs):
        lead_sents = [_sentence(rng, lead_vocab, words_per_sentence) for _ in range(lead)]
        tail_sents = [_sentence(rng, tail_vocab, words_per_sentence) for _ in range(tail)]
        docs[f"d{d:02d}"] = " ".join(lead_sents + tail_sents)
        lead_pool.extend(lead_sents)
        tail_pool.extend(tail_sents)

    if summary_sentences > min(len(lead_pool), len(tail_pool)):
        raise ValueError(
            f"summary_sentences={summary_sentences} exceeds the lead pool "
            f"({len(lead_pool)}) or tail pool ({len(tail_pool)})"
        )
    summaries = {}
    ratings = {}
    for i in range(n_summaries):
        n_lead = round(i * summary_sentences / (n_summaries - 1)) if n_summaries > 1 else summary_sentences
        lead_idx = rng.choice(len(lead_pool), size=n_lead, replace=False)
        tail_idx = rng.choice(len(tail_pool), size=summary_sentences - n_lead, replace=False)
        picked = [lead_pool[j] for j in lead_idx] + [tail_pool[j] for j in tail_idx]
        sid = f"s{i:02d}"
        summaries[sid] = " ".join(picked)
        ratings[sid] = n_lead / summary_sentences

    references = {"ref0": " ".join(lead_pool)}
    return build_topic(topic_id, docs, summaries, ratings, references)


def synthetic_corpus(n_topics: int = 20, seed: int = 7, **topic_kwargs) -> list:
    rng = np.random.default_rng(seed)
    return [
        synthetic_topic(f"t{i:03d}", rng, **topic_kwargs) for i in range(n_topics)
    ]


def synthetic_rl_topic(topic_id: str = "rl000", seed: int = 11, n_docs: int = 3,
                       lead: int = 2, tail: int = 6,
                       words_per_sentence: int = 8):
    """Small planted topic for summarizer training: the uniquely best
    selection under a lead-anchored reward is the set of lead sentences."""
    rng = np.random.default_rng(seed)
    return synthetic_topic(
        topic_id, rng, n_docs=n_docs, lead=lead, tail=tail,
        words_per_sentence=words_per_sentence, n_summaries=4,
        summary_sentences=4, vocab_lead=25, vocab_tail=60,
    )
