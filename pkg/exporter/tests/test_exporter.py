import json

import pytest

from ppxfuse_exporter import ConfigError, CorpusError, ExportJob, export
from ppxfuse_exporter.cli import main

from conftest import write_corpus


class TestJobValidation:
    def test_batch_size_floor(self, tmp_path):
        with pytest.raises(ConfigError):
            ExportJob("ckpt", tmp_path / "c.jsonl", tmp_path / "out", batch_size=0)

    def test_max_length_floor(self, tmp_path):
        with pytest.raises(ConfigError):
            ExportJob("ckpt", tmp_path / "c.jsonl", tmp_path / "out", max_length=4)

    def test_model_name_defaults_to_checkpoint_basename(self, tmp_path):
        job = ExportJob("/models/roberta-base", tmp_path / "c.jsonl", tmp_path / "out")
        assert job.resolved_model_name == "roberta-base"


class TestCorpusReading:
    def test_cardinality_preserved(self, tmp_path, tiny_checkpoint):
        corpus = write_corpus(tmp_path / "c.jsonl", 3)
        job = ExportJob(str(tiny_checkpoint), corpus, tmp_path / "out", max_length=32)
        _, rows_path = export(job)
        rows = [json.loads(line) for line in rows_path.read_text().splitlines()]
        assert [row["id"] for row in rows] == ["rec00000", "rec00001", "rec00002"]
        assert all(len(row["logits"]) == 2 for row in rows)

    def test_malformed_corpus_line(self, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"id":"a","text":"w00"}\nnot json\n')
        from ppxfuse_exporter.exporter import read_corpus_texts

        with pytest.raises(CorpusError, match="line 2"):
            read_corpus_texts(bad)

    def test_duplicate_ids_rejected(self, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"id":"a","text":"w00"}\n{"id":"a","text":"w01"}\n')
        from ppxfuse_exporter.exporter import read_corpus_texts

        with pytest.raises(CorpusError, match="lines 1 and 2"):
            read_corpus_texts(bad)


class TestExportBehavior:
    def test_rows_deterministic_across_runs(self, tmp_path, tiny_checkpoint):
        corpus = write_corpus(tmp_path / "c.jsonl", 12)
        job1 = ExportJob(str(tiny_checkpoint), corpus, tmp_path / "a", max_length=32)
        job2 = ExportJob(str(tiny_checkpoint), corpus, tmp_path / "b", max_length=32)
        _, rows1 = export(job1)
        _, rows2 = export(job2)
        assert rows1.read_bytes() == rows2.read_bytes()

    def test_manifest_labels_from_config(self, tmp_path, tiny_checkpoint):
        corpus = write_corpus(tmp_path / "c.jsonl", 3)
        manifest_path, _ = export(
            ExportJob(str(tiny_checkpoint), corpus, tmp_path / "out", max_length=32)
        )
        manifest = json.loads(manifest_path.read_text())
        assert manifest["label_order"] == ["human", "machine"]
        assert manifest["n_rows"] == 3
        assert manifest["source_checkpoint"] == str(tiny_checkpoint)

    def test_label_count_mismatch_is_config_error(self, tmp_path, tiny_checkpoint):
        corpus = write_corpus(tmp_path / "c.jsonl", 3)
        job = ExportJob(
            str(tiny_checkpoint), corpus, tmp_path / "out", max_length=32,
            expected_labels=("a", "b", "c"),
        )
        with pytest.raises(ConfigError, match="3 labels"):
            export(job)

    def test_long_texts_are_truncated(self, tmp_path, tiny_checkpoint):
        corpus = write_corpus(tmp_path / "c.jsonl", 4, max_words=200)
        _, rows_path = export(
            ExportJob(str(tiny_checkpoint), corpus, tmp_path / "out", max_length=16)
        )
        assert len(rows_path.read_text().splitlines()) == 4

    def test_batch_plan_changes_compute_order_not_output(self, tmp_path, tiny_checkpoint):
        corpus = write_corpus(tmp_path / "c.jsonl", 10)
        ids = [json.loads(l)["id"] for l in corpus.read_text().splitlines()]
        plan = tmp_path / "plan.jsonl"
        reordered = list(reversed(ids))
        plan.write_text(
            json.dumps(reordered[:5]) + "\n" + json.dumps(reordered[5:]) + "\n"
            + json.dumps({"batch_size": 5, "n_batches": 2,
                          "length_metric": "whitespace_words", "padding_waste": 0.0}) + "\n"
        )
        _, rows_plain = export(
            ExportJob(str(tiny_checkpoint), corpus, tmp_path / "plain", max_length=32)
        )
        _, rows_planned = export(
            ExportJob(str(tiny_checkpoint), corpus, tmp_path / "planned", max_length=32,
                      batch_plan_path=plan)
        )
        plain = [json.loads(l) for l in rows_plain.read_text().splitlines()]
        planned = [json.loads(l) for l in rows_planned.read_text().splitlines()]
        assert [r["id"] for r in planned] == [r["id"] for r in plain] == ids
        for a, b in zip(plain, planned):
            assert max(abs(x - y) for x, y in zip(a["logits"], b["logits"])) <= 1e-4

    def test_batch_plan_must_partition_corpus(self, tmp_path, tiny_checkpoint):
        corpus = write_corpus(tmp_path / "c.jsonl", 4)
        plan = tmp_path / "plan.jsonl"
        plan.write_text('["rec00000"]\n{"batch_size":1,"n_batches":1,"padding_waste":0.0}\n')
        job = ExportJob(str(tiny_checkpoint), corpus, tmp_path / "out", max_length=32,
                        batch_plan_path=plan)
        with pytest.raises(CorpusError, match="partition"):
            export(job)


class TestCli:
    def test_cli_round_trip(self, tmp_path, tiny_checkpoint, capsys):
        corpus = write_corpus(tmp_path / "c.jsonl", 5)
        code = main([
            "--checkpoint", str(tiny_checkpoint), "--corpus", str(corpus),
            "--out", str(tmp_path / "run"), "--max-length", "32", "--batch-size", "4",
        ])
        assert code == 0
        assert (tmp_path / "run.manifest.json").exists()
        assert (tmp_path / "run.rows.jsonl").exists()
        assert "exported" in capsys.readouterr().out

    def test_cli_label_mismatch_exit_2(self, tmp_path, tiny_checkpoint, capsys):
        corpus = write_corpus(tmp_path / "c.jsonl", 2)
        code = main([
            "--checkpoint", str(tiny_checkpoint), "--corpus", str(corpus),
            "--out", str(tmp_path / "run"), "--max-length", "32",
            "--labels", "a", "b", "c",
        ])
        assert code == 2
        assert "labels" in capsys.readouterr().err

    def test_cli_missing_corpus_exit_2(self, tmp_path, tiny_checkpoint):
        code = main([
            "--checkpoint", str(tiny_checkpoint), "--corpus", str(tmp_path / "nope.jsonl"),
            "--out", str(tmp_path / "run"),
        ])
        assert code == 2
