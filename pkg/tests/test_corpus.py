import json

import pytest

from supertkit.corpus import (
    build_topic,
    corpus_to_jsonl,
    default_stopwords,
    load_corpus,
    preprocess,
    save_corpus_jsonl,
    segment_sentences,
)
from supertkit.errors import CorpusFormatError, ValidationError


class TestSegmentSentences:
    def test_one_terminator_per_sentence(self):
        assert segment_sentences("A. B? C!") == ["A.", "B?", "C!"]

    def test_empty_input(self):
        assert segment_sentences("") == []
        assert segment_sentences("   \n ") == []

    def test_abbreviation_not_split(self):
        assert segment_sentences("Dr. Smith left. He returned.") == [
            "Dr. Smith left.",
            "He returned.",
        ]

    def test_no_terminator(self):
        assert segment_sentences("no terminator here") == ["no terminator here"]

    def test_lowercase_continuation_not_split(self):
        assert segment_sentences("He paid $3.50 for it. then what") == [
            "He paid $3.50 for it. then what"
        ]

    def test_quote_after_terminator(self):
        got = segment_sentences('She said "stop." Then she left.')
        assert got == ['She said "stop."', "Then she left."]

    def test_concatenation_preserved_modulo_whitespace(self):
        text = "Dr. Smith left!   He returned. Mr. Jones\nwaved. Done."
        joined = " ".join(segment_sentences(text))
        assert joined.split() == text.split()

    def test_multiline(self):
        text = "First line ends.\nSecond starts here! Third?"
        assert segment_sentences(text) == [
            "First line ends.",
            "Second starts here!",
            "Third?",
        ]


class TestPreprocess:
    def test_stopword_and_stemming(self):
        rec = preprocess("The cats ran", {"the"})
        assert [t.surface for t in rec.tokens] == ["the", "cats", "ran"]
        assert [t.is_stopword for t in rec.tokens] == [True, False, False]
        assert [t.stem for t in rec.tokens] == ["the", "cat", "ran"]

    def test_empty_sentence_flagged(self):
        rec = preprocess("", set())
        assert rec.tokens == ()
        assert rec.all_filtered

    def test_punctuation_only_flagged(self):
        rec = preprocess("?! -- ...", set())
        assert rec.all_filtered
        assert rec.word_count == 3  # raw whitespace words still counted

    def test_case_folding_gives_identical_stems(self):
        rec = preprocess("CATS cats", set())
        assert rec.tokens[0].stem == rec.tokens[1].stem == "cat"

    def test_word_count_is_surface_words(self):
        rec = preprocess("don't stop me now", set())
        assert rec.word_count == 4
        # apostrophe splits into two alphanumeric runs
        assert [t.surface for t in rec.tokens] == ["don", "t", "stop", "me", "now"]

    def test_default_stopwords_are_lowercase(self):
        for word in default_stopwords():
            assert word == word.lower()


def _write_plain_corpus(root, topics):
    """topics: dict topic_id -> (docs, summaries, ratings)"""
    for topic_id, (docs, summaries, ratings) in topics.items():
        docs_dir = root / topic_id / "docs"
        docs_dir.mkdir(parents=True)
        for doc_id, text in docs.items():
            (docs_dir / f"{doc_id}.txt").write_text(text, encoding="utf-8")
        summ_dir = root / topic_id / "summaries"
        summ_dir.mkdir(parents=True)
        for sid, text in summaries.items():
            (summ_dir / f"{sid}.txt").write_text(text, encoding="utf-8")
        if ratings:
            lines = "".join(f"{sid}\t{val}\n" for sid, val in ratings.items())
            (root / topic_id / "ratings.tsv").write_text(lines, encoding="utf-8")


class TestLoadCorpus:
    def test_plain_dirs_structure(self, tmp_path):
        _write_plain_corpus(
            tmp_path,
            {
                "t1": (
                    {"d1": "One sentence. Two here.", "d2": "Only one."},
                    {"s1": "A summary.", "s2": "Another.", "s3": "Third."},
                    {"s1": 0.5, "s2": 0.25},
                )
            },
        )
        topics = load_corpus(tmp_path, "plain_dirs")
        assert len(topics) == 1
        topic = topics[0]
        assert [d.doc_id for d in topic.documents] == ["d1", "d2"]
        assert [s.summary_id for s in topic.summaries] == ["s1", "s2", "s3"]
        assert topic.summaries[0].human_rating == 0.5
        assert topic.summaries[2].human_rating is None
        assert len(topic.documents[0].sentences) == 2

    def test_empty_directory_is_empty_corpus(self, tmp_path):
        assert load_corpus(tmp_path, "plain_dirs") == []

    def test_missing_path_raises(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_corpus(tmp_path / "nope", "plain_dirs")

    def test_bad_rating_names_file_and_line(self, tmp_path):
        _write_plain_corpus(
            tmp_path, {"t1": ({"d1": "Text."}, {"s1": "S."}, {})}
        )
        (tmp_path / "t1" / "ratings.tsv").write_text("s1\tnot-a-number\n")
        with pytest.raises(CorpusFormatError) as err:
            load_corpus(tmp_path, "plain_dirs")
        assert "ratings.tsv" in str(err.value)
        assert ":1" in str(err.value)

    def test_rating_for_unknown_summary(self, tmp_path):
        _write_plain_corpus(
            tmp_path, {"t1": ({"d1": "Text."}, {"s1": "S."}, {"ghost": 1.0})}
        )
        with pytest.raises(ValidationError):
            load_corpus(tmp_path, "plain_dirs")

    def test_jsonl_duplicate_summary_id(self, tmp_path):
        lines = [
            {"topic_id": "t", "doc_id": "d1", "kind": "doc", "text": "X."},
            {"topic_id": "t", "doc_id": "s1", "kind": "summary", "text": "A."},
            {"topic_id": "t", "doc_id": "s1", "kind": "summary", "text": "B."},
        ]
        path = tmp_path / "c.jsonl"
        path.write_text("\n".join(json.dumps(r) for r in lines))
        with pytest.raises(ValidationError):
            load_corpus(path, "jsonl")

    def test_jsonl_parse_error_has_location(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"topic_id": "t"\n')
        with pytest.raises(CorpusFormatError) as err:
            load_corpus(path, "jsonl")
        assert ":1" in str(err.value)

    def test_positions_are_contiguous(self, toy_topic):
        for doc in toy_topic.documents:
            assert [s.sent_idx for s in doc.sentences] == list(range(len(doc.sentences)))
        for summ in toy_topic.summaries:
            assert [s.sent_idx for s in summ.sentences] == list(range(len(summ.sentences)))

    def test_topic_needs_documents(self):
        with pytest.raises(ValidationError):
            build_topic("t", {}, {"s1": "text"})


class TestRoundTrip:
    def test_plain_to_jsonl_round_trip(self, tmp_path):
        _write_plain_corpus(
            tmp_path / "plain",
            {
                "t1": (
                    {"d1": "Dr. Who arrived. He left again.", "d2": "Short one."},
                    {"s1": "He came and went.", "s2": "Brief."},
                    {"s1": 1.0},
                ),
                "t2": ({"d9": "Another topic."}, {"sx": "Said summary."}, {}),
            },
        )
        topics = load_corpus(tmp_path / "plain", "plain_dirs")
        jsonl_path = tmp_path / "corpus.jsonl"
        save_corpus_jsonl(topics, jsonl_path)
        reloaded = load_corpus(jsonl_path, "jsonl")
        assert reloaded == topics

    def test_double_load_serializes_identically(self, tmp_path):
        _write_plain_corpus(
            tmp_path, {"t1": ({"d1": "Alpha beta. Gamma delta."}, {"s1": "Alpha."}, {})}
        )
        first = corpus_to_jsonl(load_corpus(tmp_path, "plain_dirs"))
        second = corpus_to_jsonl(load_corpus(tmp_path, "plain_dirs"))
        assert first == second
