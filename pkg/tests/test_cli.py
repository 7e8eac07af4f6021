import json

import pytest

from supertkit.cli import main
from supertkit.corpus import save_corpus_jsonl
from supertkit.synthetic import synthetic_corpus


@pytest.fixture(scope="module")
def small_corpus_path(tmp_path_factory):
    corpus = synthetic_corpus(
        n_topics=3, seed=3, n_docs=2, lead=2, tail=3, words_per_sentence=5,
        n_summaries=5, summary_sentences=4, vocab_lead=15, vocab_tail=40,
    )
    path = tmp_path_factory.mktemp("corpus") / "corpus.jsonl"
    save_corpus_jsonl(corpus, path)
    return path


def eval_config(tmp_path, corpus_path, out_name="out", **overrides):
    config = {
        "corpus_path": str(corpus_path),
        "corpus_format": "jsonl",
        "embeddings": {"kind": "fallback", "dim": 32, "seed": 0},
        "strategies": [{"kind": "top_n", "n": 2}],
        "scorers": ["supert", "js"],
        "harness": {"seeds": [0, 1]},
        "out_dir": str(tmp_path / out_name),
    }
    config.update(overrides)
    path = tmp_path / f"{out_name}.config.json"
    path.write_text(json.dumps(config))
    return path, tmp_path / out_name


class TestValidateCorpus:
    def test_valid_corpus_prints_stats(self, small_corpus_path, capsys):
        code = main(["validate-corpus", "--corpus", str(small_corpus_path),
                     "--format", "jsonl"])
        assert code == 0
        stats = json.loads(capsys.readouterr().out)
        assert stats["topics"] == 3
        assert stats["summaries"] == 15

    def test_missing_corpus_exits_two(self, tmp_path):
        code = main(["validate-corpus", "--corpus", str(tmp_path / "nope")])
        assert code == 2


class TestEmbedFallback:
    def test_writes_loadable_file(self, small_corpus_path, tmp_path, capsys):
        out = tmp_path / "emb.jsonl"
        code = main([
            "embed-fallback", "--corpus", str(small_corpus_path),
            "--format", "jsonl", "--dim", "16", "--seed", "1",
            "--out", str(out),
        ])
        assert code == 0
        info = json.loads(capsys.readouterr().out)
        assert info["dim"] == 16
        from supertkit.corpus import load_corpus
        from supertkit.embed import load_embeddings

        corpus = load_corpus(small_corpus_path, "jsonl")
        store = load_embeddings(out, corpus)
        assert store.dimension == 16


class TestEvaluate:
    def test_reports_written_and_sane(self, small_corpus_path, tmp_path):
        config_path, out_dir = eval_config(tmp_path, small_corpus_path)
        assert main(["evaluate", "--config", str(config_path)]) == 0
        for name in ("supert_top2", "js"):
            report = json.loads((out_dir / f"{name}.report.json").read_text())
            for coef in report["averages"].values():
                assert -1.0 <= coef <= 1.0
            assert (out_dir / f"{name}.scores.tsv").exists()
            assert (out_dir / f"{name}.report.tsv").exists()
        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert manifest["toolkit_version"]
        assert manifest["config_sha256"]
        assert manifest["input_checksums"]

    def test_missing_embedding_file_exits_two(self, small_corpus_path, tmp_path, caplog):
        config_path, _ = eval_config(
            tmp_path, small_corpus_path, out_name="bad",
            embeddings={"kind": "file", "path": str(tmp_path / "ghost.jsonl")},
        )
        assert main(["evaluate", "--config", str(config_path)]) == 2
        assert "ghost.jsonl" in caplog.text

    def test_no_scorers_exits_two(self, small_corpus_path, tmp_path):
        config_path, _ = eval_config(tmp_path, small_corpus_path, out_name="none",
                                     scorers=[])
        assert main(["evaluate", "--config", str(config_path)]) == 2

    def test_byte_identical_reruns(self, small_corpus_path, tmp_path):
        config_path, out_dir = eval_config(tmp_path, small_corpus_path, out_name="det")
        assert main(["evaluate", "--config", str(config_path)]) == 0
        first = {
            p.name: p.read_bytes() for p in sorted(out_dir.iterdir())
        }
        assert main(["evaluate", "--config", str(config_path)]) == 0
        second = {
            p.name: p.read_bytes() for p in sorted(out_dir.iterdir())
        }
        assert first == second

    def test_flag_overrides_config(self, small_corpus_path, tmp_path):
        config_path, _ = eval_config(tmp_path, small_corpus_path, out_name="o1")
        override_out = tmp_path / "flag-out"
        assert main([
            "evaluate", "--config", str(config_path), "--out", str(override_out)
        ]) == 0
        assert (override_out / "manifest.json").exists()

    def test_inputs_not_mutated(self, small_corpus_path, tmp_path):
        before = small_corpus_path.read_bytes()
        config_path, _ = eval_config(tmp_path, small_corpus_path, out_name="ro")
        assert main(["evaluate", "--config", str(config_path)]) == 0
        assert small_corpus_path.read_bytes() == before


class TestRl:
    def test_structural_output(self, small_corpus_path, tmp_path):
        one_topic = tmp_path / "one.jsonl"
        lines = [
            line for line in small_corpus_path.read_text().splitlines()
            if json.loads(line)["topic_id"] == "t000"
        ]
        one_topic.write_text("\n".join(lines) + "\n")
        config = {
            "corpus_path": str(one_topic),
            "corpus_format": "jsonl",
            "embeddings": {"kind": "fallback", "dim": 16, "seed": 0},
            "rl": {"reward": "supert", "strategy": {"kind": "top_n", "n": 2},
                   "episodes": 10, "runs": 2, "budget": 40},
            "out_dir": str(tmp_path / "rl-out"),
        }
        config_path = tmp_path / "rl.config.json"
        config_path.write_text(json.dumps(config))
        assert main(["rl", "--config", str(config_path)]) == 0
        runs = (tmp_path / "rl-out" / "rl_runs.tsv").read_text().splitlines()
        assert len(runs) == 3              # header + 2 runs
        summary = (tmp_path / "rl-out" / "rl_summary.tsv").read_text().splitlines()
        assert summary[0] == "reward\tr1\tr2\trl"
        assert summary[1].startswith("supert\t")
        # identical seeds -> identical tables
        first = (tmp_path / "rl-out" / "rl_runs.tsv").read_bytes()
        assert main(["rl", "--config", str(config_path)]) == 0
        assert (tmp_path / "rl-out" / "rl_runs.tsv").read_bytes() == first

    def test_js_reward_smoke(self, small_corpus_path, tmp_path):
        config = {
            "corpus_path": str(small_corpus_path),
            "corpus_format": "jsonl",
            "embeddings": {"kind": "fallback", "dim": 16, "seed": 0},
            "rl": {"reward": "js", "episodes": 5, "runs": 1, "budget": 30},
            "out_dir": str(tmp_path / "rl-js"),
        }
        config_path = tmp_path / "rljs.config.json"
        config_path.write_text(json.dumps(config))
        assert main(["rl", "--config", str(config_path)]) == 0

    def test_missing_references_exit_two(self, tmp_path):
        from supertkit.corpus import build_topic

        topic = build_topic("t", {"d": "Alpha beta. Gamma delta."}, {"s": "Alpha."})
        path = tmp_path / "norefs.jsonl"
        save_corpus_jsonl([topic], path)
        config = {
            "corpus_path": str(path),
            "corpus_format": "jsonl",
            "rl": {"reward": "js", "episodes": 2, "runs": 1},
            "out_dir": str(tmp_path / "rl-bad"),
        }
        config_path = tmp_path / "bad.config.json"
        config_path.write_text(json.dumps(config))
        assert main(["rl", "--config", str(config_path)]) == 2


class TestReport:
    def test_grid_output(self, small_corpus_path, tmp_path, capsys):
        config_path, out_dir = eval_config(tmp_path, small_corpus_path, out_name="grid")
        assert main(["evaluate", "--config", str(config_path)]) == 0
        capsys.readouterr()
        assert main(["report", "--reports", str(out_dir)]) == 0
        printed = capsys.readouterr().out
        assert "supert_top2" in printed
        assert "kendall" in printed

    def test_empty_directory_exits_two(self, tmp_path):
        assert main(["report", "--reports", str(tmp_path)]) == 2
