"""
Tests for the command-line interface.

Runs every subcommand on a small synthetic page directory with tiny model
dimensions.
"""

import json

import pandas as pd
import pytest
from src import __version__
from src.checkpoint import FORMAT_VERSION, load_checkpoint
from src.cli import SYSTEM_ORDER, build_parser, resolve_config, run
from src.config import MANIFEST_NAME, read_run_manifest
from src.corpus import load_records, save_records, split_dataset
from src.data_generator import SyntheticCorpusGenerator

TINY = ["--embedding-dim", "8", "--hidden-dim", "10", "--attention-dim", "10", "--batch", "4",
        "--max-steps", "8", "--eval-interval", "4", "--patience", "2"]
FAST_DECODE = ["--beam", "2", "--min-len", "1", "--max-len", "5"]


@pytest.fixture(scope="module")
def pages(tmp_path_factory):
    """Forty synthetic pages with a titles manifest."""
    out = tmp_path_factory.mktemp("pages")
    generator = SyntheticCorpusGenerator(seed=11)
    generator.write_html_pages(generator.generate_corpus(40), str(out))
    return out


def _pipeline(pages, workdir):
    return run(["pipeline", "--input", str(pages), "--workdir", str(workdir), "--seed", "7"] + TINY + FAST_DECODE)


class TestArguments:
    """Test parsing and configuration resolution."""

    def test_version(self, capsys):
        assert run(["--version"]) == 0
        assert capsys.readouterr().out.strip() == f"tabletitles {__version__} (checkpoint format {FORMAT_VERSION})"

    def test_unknown_flag_is_usage_error(self):
        assert run(["train", "--data", "x.jsonl", "--out", "model", "--dropout", "0.3"]) == 2

    def test_missing_subcommand(self):
        assert run([]) == 2

    def test_short_and_long_hyper_flags(self):
        """--lr/--clip/--batch and their long spellings set the same settings."""
        short = build_parser().parse_args(["train", "--data", "d", "--out", "o", "--lr", "0.1", "--clip", "1.5",
                                           "--batch", "16"])
        long = build_parser().parse_args(["train", "--input", "d", "--out", "o", "--learning-rate", "0.1",
                                          "--gradient-clip", "1.5", "--batch-size", "16"])

        assert resolve_config(short) == resolve_config(long)
        assert resolve_config(short).hyper.batch_size == 16

    def test_flags_override_config_file(self, tmp_path):
        """Defaults, then the config file, then flags."""
        path = tmp_path / "config.yaml"
        path.write_text("hyper.hidden_dim: 64\nhyper.batch_size: 16\ndecode.beam_size: 4\n")
        args = build_parser().parse_args(["pipeline", "--input", "p", "--workdir", "w", "--config", str(path),
                                          "--hidden-dim", "32", "--include-prefix-suffix", "--allow-repeats"])

        config = resolve_config(args)

        assert config.hyper.hidden_dim == 32
        assert config.hyper.batch_size == 16
        assert config.decode.beam_size == 4
        assert config.decode.no_repeat is False
        assert config.fields.prefix_text and config.fields.suffix_text
        assert config.hyper.embedding_dim == 128

    def test_bad_config_key(self, tmp_path, capsys):
        path = tmp_path / "config.yaml"
        path.write_text("hyper.dropout: 0.3\n")

        code = run(["pipeline", "--input", "p", "--workdir", str(tmp_path), "--config", str(path)])

        assert code == 1
        assert "error: ConfigError:" in capsys.readouterr().err


class TestCommands:
    """Test individual subcommands chained by hand."""

    def test_step_by_step(self, pages, tmp_path):
        records = str(tmp_path / "records.jsonl")
        aggregated = str(tmp_path / "aggregated.jsonl")
        dataset = str(tmp_path / "dataset.jsonl")
        vocab = str(tmp_path / "vocab.txt")
        encoded = str(tmp_path / "encoded.jsonl")
        model_dir = tmp_path / "model"
        model = str(model_dir / "model.ckpt")
        predictions = str(tmp_path / "preds" / "copy_generate.jsonl")
        report = str(tmp_path / "report.tsv")

        assert run(["extract", "--input", str(pages), "--output", records]) == 0
        assert run(["dataset", "aggregate", "--input", records, "--output", aggregated]) == 0
        assert run(["dataset", "split", "--input", aggregated, "--output", dataset, "--seed", "3"]) == 0
        assert run(["dataset", "build-vocab", "--input", dataset, "--output", vocab]) == 0
        assert run(["dataset", "encode", "--input", dataset, "--vocab", vocab, "--output", encoded]) == 0
        assert run(["train", "--data", dataset, "--vocab", vocab, "--out", str(model_dir),
                    "--seed", "1"] + TINY) == 0
        assert run(["generate", "--checkpoint", model, "--input", dataset, "--output", predictions,
                    "--split", "test"] + FAST_DECODE) == 0
        assert run(["evaluate", "--predictions", predictions, "--references", dataset, "--split", "test",
                    "--out", report]) == 0

        labelled = load_records(dataset)
        assert [r.split for r in labelled].count("test") == 4
        assert len(open(encoded).read().splitlines()) == 40
        assert load_checkpoint(model).hyper.hidden_dim == 10
        assert (tmp_path / "model" / "training_log.tsv").exists()
        assert len(open(predictions).read().splitlines()) == 4
        frame = pd.read_csv(report, sep="\t")
        assert list(frame['system']) == ['copy_generate']
        assert frame['n'][0] == 4

    def test_train_writes_into_out_directory(self, tmp_path):
        dataset = str(tmp_path / "dataset.jsonl")
        vocab = str(tmp_path / "vocab.txt")
        out = tmp_path / "run"
        save_records(split_dataset(SyntheticCorpusGenerator(seed=5).generate_corpus(20), seed=1), dataset)
        assert run(["dataset", "build-vocab", "--input", dataset, "--output", vocab]) == 0

        code = run(["train", "--data", dataset, "--vocab", vocab, "--out", str(out), "--seed", "1",
                    "--lr", "0.15", "--clip", "2.0", "--batch", "4", "--patience", "1",
                    "--embedding-dim", "8", "--hidden-dim", "10", "--attention-dim", "10",
                    "--max-steps", "4", "--eval-interval", "2"])

        assert code == 0
        checkpoint = load_checkpoint(str(out / "model.ckpt"))
        assert checkpoint.hyper.learning_rate == 0.15
        assert checkpoint.hyper.gradient_clip == 2.0
        assert checkpoint.hyper.batch_size == 4
        assert checkpoint.hyper.patience == 1
        assert checkpoint.hyper.seed == 1
        assert (out / "training_log.tsv").exists()
        assert read_run_manifest(str(out / MANIFEST_NAME))['command'] == "train"

    def test_manifest_written(self, pages, tmp_path):
        records = str(tmp_path / "out" / "records.jsonl")
        run(["extract", "--input", str(pages), "--output", records, "--include-rows"])

        manifest = read_run_manifest(str(tmp_path / "out" / MANIFEST_NAME))

        assert manifest['command'] == "extract"
        assert manifest['config']['fields.table_rows'] is True
        assert records in manifest['outputs']

    def test_missing_input(self, tmp_path, capsys):
        code = run(["train", "--data", str(tmp_path / "absent.jsonl"), "--out", str(tmp_path / "model")])

        assert code == 1
        assert "error: FileNotFoundError:" in capsys.readouterr().err

    def test_prediction_count_mismatch(self, tmp_path, capsys):
        """Evaluation refuses predictions that do not line up with references."""
        dataset = tmp_path / "dataset.jsonl"
        save_records(SyntheticCorpusGenerator(seed=2).generate_corpus(3), str(dataset))
        predictions = tmp_path / "system.jsonl"
        predictions.write_text(json.dumps({"table_index": 0, "title": "x", "score": None, "mode": "m"}) + "\n")

        code = run(["evaluate", "--predictions", str(predictions), "--references", str(dataset),
                    "--out", str(tmp_path / "report.tsv")])

        assert code == 1
        assert "error: LengthMismatch:" in capsys.readouterr().err


class TestPipeline:
    """Test the end-to-end pipeline command."""

    def test_outputs(self, pages, tmp_path):
        """Every intermediate artefact, one prediction file per system, and the report."""
        assert _pipeline(pages, tmp_path) == 0

        for name in ("records.jsonl", "dataset.jsonl", "vocab.txt", "model.ckpt", "training_log.tsv",
                     "report.tsv", MANIFEST_NAME):
            assert (tmp_path / name).exists(), name
        for system in SYSTEM_ORDER:
            lines = (tmp_path / "predictions" / f"{system}.jsonl").read_text().splitlines()
            assert len(lines) == 4
        frame = pd.read_csv(tmp_path / "report.tsv", sep="\t")
        assert list(frame['system']) == SYSTEM_ORDER
        for figure in ("training_curve.png", "rouge_comparison.png", "attention.png"):
            assert (tmp_path / "figures" / figure).exists(), figure

    def test_reproducible(self, pages, tmp_path):
        """Same inputs and seed give byte-identical checkpoints, predictions and reports."""
        a, b = tmp_path / "a", tmp_path / "b"
        assert _pipeline(pages, a) == 0
        assert _pipeline(pages, b) == 0

        for name in ["model.ckpt", "report.tsv", "dataset.jsonl", "vocab.txt"] + \
                [f"predictions/{s}.jsonl" for s in SYSTEM_ORDER]:
            assert (a / name).read_bytes() == (b / name).read_bytes(), name
