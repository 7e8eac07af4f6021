import pytest


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory):
    """Randomly initialized miniature encoder saved locally; the character
    wordpiece vocabulary can encode any ASCII sentence."""
    import torch
    from transformers import BertConfig, BertModel, BertTokenizerFast

    directory = tmp_path_factory.mktemp("tinybert")
    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    chars = "abcdefghijklmnopqrstuvwxyz0123456789.,!?'\"-$"
    vocab += list(chars) + ["##" + c for c in chars]
    # whole-word entries so corpus words get distinct, non-UNK pieces
    vocab += sorted({
        "the", "cats", "ran", "fast", "dogs", "chased", "after", "dark",
        "rivers", "flow", "to", "sea", "is", "vast", "and", "deep",
        "dr", "smith", "studied", "storms", "he", "wrote", "a", "report",
        "storm", "research", "was", "reported",
    })
    (directory / "vocab.txt").write_text("\n".join(vocab))
    tokenizer = BertTokenizerFast(vocab_file=str(directory / "vocab.txt"),
                                  do_lower_case=True)
    config = BertConfig(
        vocab_size=len(vocab), hidden_size=32, num_hidden_layers=2,
        num_attention_heads=2, intermediate_size=64,
        max_position_embeddings=256,
    )
    torch.manual_seed(0)
    model = BertModel(config)
    model.save_pretrained(directory)
    tokenizer.save_pretrained(directory)
    return str(directory)


@pytest.fixture(scope="session")
def toy_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    topics = {
        "t1": (
            {
                "d1": "The cats ran fast. Dogs chased the cats after dark.",
                "d2": "Rivers flow to the sea. The sea is vast.",
            },
            {
                "s1": "Cats ran and dogs chased.",
                "s2": "The sea is deep and vast.",
            },
        ),
        "t2": (
            {"d1": "Dr. Smith studied storms. He wrote a report."},
            {"s1": "Storm research was reported."},
        ),
    }
    for topic_id, (docs, summaries) in topics.items():
        for sub, units in (("docs", docs), ("summaries", summaries)):
            directory = root / topic_id / sub
            directory.mkdir(parents=True)
            for unit_id, text in units.items():
                (directory / f"{unit_id}.txt").write_text(text, encoding="utf-8")
    return str(root)
