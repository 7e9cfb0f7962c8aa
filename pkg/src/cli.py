"""
Command-line entry point.

    tabletitles extract   --input pages/ --output records.jsonl
    tabletitles dataset   aggregate|split|build-vocab|encode ...
    tabletitles train     --data dataset.jsonl --vocab vocab.txt --out model/ --seed 7
    tabletitles generate  --checkpoint model.ckpt --input dataset.jsonl --mode copy_generate
    tabletitles evaluate  --predictions a.jsonl b.jsonl --references dataset.jsonl --out report.tsv
    tabletitles pipeline  --input pages/ --workdir out/ --seed 7

Logs go to standard error; data goes only to files.
"""

import argparse
import dataclasses
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from . import __version__
from .checkpoint import FORMAT_VERSION, Checkpoint, load_checkpoint, save_checkpoint
from .config import RunConfig, load_config, write_run_manifest
from .corpus import (
    Vocabulary, aggregate_titles, build_vocab, encode_records, load_records, oov_rate,
    save_examples, save_records, split_dataset, verbatim_rate,
)
from .decoder import MODES, GeneratedTitle, generate
from .errors import EmptyInput, TableTitleError
from .evalkit import BASELINES, evaluate
from .extractor import PageExtractor
from .table_context import DatasetRecord
from .title_service import (
    TitleGenerationService, baseline_results, load_predictions, save_predictions,
)
from .training import train
from .visualization import save_experiment_figures

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
SYSTEM_ORDER = ['page_title', 'section_heading', 'generate_only', 'copy_only', 'copy_generate']


def setup_logging(verbosity: int):
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(stream=sys.stderr, format=LOG_FORMAT, level=level, force=True)


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser):
    p.add_argument('--config', help='Flat YAML config file; flags override its values')
    p.add_argument('-v', '--verbose', dest='verbosity', action='count', default=None,
                   help='-v for progress, -vv for debug output')
    p.add_argument('--jobs', type=int, default=None, help='Worker threads for extraction, generation and scoring')
    p.add_argument('--seed', type=int, default=None)


def _add_field_args(p: argparse.ArgumentParser):
    p.add_argument('--include-rows', dest='fields.table_rows', action='store_const', const=True, default=None)
    p.add_argument('--include-prefix-suffix', dest='include_prefix_suffix', action='store_true')
    p.add_argument('--max-source-len', dest='fields.max_source_len', type=int, default=None)


def _add_hyper_args(p: argparse.ArgumentParser):
    p.add_argument('--embedding-dim', dest='hyper.embedding_dim', type=int, default=None)
    p.add_argument('--hidden-dim', dest='hyper.hidden_dim', type=int, default=None)
    p.add_argument('--attention-dim', dest='hyper.attention_dim', type=int, default=None)
    p.add_argument('--lr', '--learning-rate', dest='hyper.learning_rate', type=float, default=None)
    p.add_argument('--clip', '--gradient-clip', dest='hyper.gradient_clip', type=float, default=None)
    p.add_argument('--batch', '--batch-size', dest='hyper.batch_size', type=int, default=None)
    p.add_argument('--max-steps', dest='hyper.max_steps', type=int, default=None)
    p.add_argument('--eval-interval', dest='hyper.eval_interval', type=int, default=None)
    p.add_argument('--patience', dest='hyper.patience', type=int, default=None)
    p.add_argument('--no-pgen-bias', dest='hyper.use_pgen_bias', action='store_const', const=False, default=None)


def _add_decode_args(p: argparse.ArgumentParser):
    p.add_argument('--beam', dest='decode.beam_size', type=int, default=None)
    p.add_argument('--min-len', dest='decode.min_len', type=int, default=None)
    p.add_argument('--max-len', dest='decode.max_len', type=int, default=None)
    p.add_argument('--no-renormalize', dest='decode.renormalize', action='store_const', const=False, default=None)
    p.add_argument('--allow-repeats', dest='decode.no_repeat', action='store_const', const=False, default=None)
    p.add_argument('--block-special', dest='decode.block_special', action='store_const', const=True, default=None)
    p.add_argument('--debug-oov', dest='debug_oov', action='store_const', const=True, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='tabletitles',
        description='Generate natural-language titles for web tables.',
    )
    parser.add_argument('--version', action='version',
                        version=f"tabletitles {__version__} (checkpoint format {FORMAT_VERSION})")
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('extract', help='Extract table metadata from HTML pages')
    _add_common(p)
    p.add_argument('--input', required=True, help='Directory of .html files or one file')
    p.add_argument('--output', required=True, help='Dataset file (JSON lines)')
    p.add_argument('--manifest', help='Titles/URL manifest (default: <input>/manifest.jsonl)')
    _add_field_args(p)

    p = sub.add_parser('dataset', help='Prepare datasets')
    dataset = p.add_subparsers(dest='action', required=True)
    for action, needs_vocab in (('aggregate', False), ('split', False), ('build-vocab', False), ('encode', True)):
        q = dataset.add_parser(action)
        _add_common(q)
        q.add_argument('--input', required=True)
        q.add_argument('--output', required=True)
        if needs_vocab:
            q.add_argument('--vocab', required=True)
        if action in ('build-vocab', 'encode'):
            _add_field_args(q)

    p = sub.add_parser('train', help='Train a pointer-generator model')
    _add_common(p)
    p.add_argument('--data', '--input', dest='input', required=True, help='Dataset file with split labels')
    p.add_argument('--out', dest='output', required=True,
                   help='Output directory for model.ckpt and training_log.tsv')
    p.add_argument('--vocab', help='Vocabulary file (built from the train split if omitted)')
    _add_field_args(p)
    _add_hyper_args(p)

    p = sub.add_parser('generate', help='Generate titles with a checkpoint')
    _add_common(p)
    p.add_argument('--checkpoint', required=True)
    p.add_argument('--input', required=True, help='Dataset file, HTML file or directory')
    p.add_argument('--output', required=True, help='Predictions file (JSON lines)')
    p.add_argument('--mode', choices=sorted(MODES), default=None)
    p.add_argument('--split', choices=['train', 'validation', 'test'], help='Only records of this split')
    _add_decode_args(p)

    p = sub.add_parser('evaluate', help='Score prediction files against reference titles')
    _add_common(p)
    p.add_argument('--predictions', nargs='+', required=True)
    p.add_argument('--references', required=True, help='Dataset file holding the reference titles')
    p.add_argument('--out', dest='output', required=True, help='Report path (TSV)')
    p.add_argument('--split', choices=['train', 'validation', 'test'])

    p = sub.add_parser('pipeline', help='Extract, prepare, train, generate and evaluate')
    _add_common(p)
    p.add_argument('--input', required=True, help='Directory of .html files (with manifest.jsonl)')
    p.add_argument('--workdir', required=True)
    _add_field_args(p)
    _add_hyper_args(p)
    _add_decode_args(p)

    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the config file, then explicit flags."""
    config = RunConfig(command=args.command)
    if getattr(args, 'config', None):
        config.update(load_config(args.config))

    known = set(config.to_flat())
    overrides = {k: v for k, v in vars(args).items() if v is not None and k in known and k != 'command'}
    if getattr(args, 'include_prefix_suffix', False):
        overrides['fields.prefix_text'] = True
        overrides['fields.suffix_text'] = True
    config.update(overrides)

    # one source-length setting for linearization and the model
    config.hyper = dataclasses.replace(config.hyper, max_source_len=config.fields.max_source_len,
                                       seed=config.seed)
    return config


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _split_of(records: Sequence[DatasetRecord], split: Optional[str]) -> List[DatasetRecord]:
    return [r for r in records if r.split == split] if split else list(records)


def _train_records(records: Sequence[DatasetRecord]) -> List[DatasetRecord]:
    labelled = [r for r in records if r.split == 'train']
    return labelled or list(records)


def _load_inputs(path: str, config: RunConfig) -> List[DatasetRecord]:
    """Dataset file, or HTML pages extracted on the fly."""
    p = Path(path)
    if p.is_file() and p.suffix.lower() in ('.jsonl', '.json'):
        return load_records(path)
    extractor = PageExtractor(config.fields.table_rows, config.fields.prefix_text or config.fields.suffix_text,
                              config.jobs)
    return extractor.extract_directory(path)


def cmd_extract(args, config: RunConfig) -> List[str]:
    extractor = PageExtractor(config.fields.table_rows, config.fields.prefix_text or config.fields.suffix_text,
                              config.jobs)
    records = extractor.extract_directory(config.input, args.manifest)
    save_records(records, config.output)
    return [config.output]


def aggregate_records(records: Sequence[DatasetRecord]) -> List[DatasetRecord]:
    """Accept one title per record from its candidates."""
    out = []
    for record in records:
        if record.candidate_titles:
            record = dataclasses.replace(record, title=aggregate_titles(record.candidate_titles))
        out.append(record)
    return out


def cmd_dataset(args, config: RunConfig) -> List[str]:
    records = load_records(config.input)
    if args.action == 'aggregate':
        records = aggregate_records(records)
        logger.info("Verbatim titles: %.1f%%", 100 * verbatim_rate(records))
        save_records(records, config.output)
    elif args.action == 'split':
        save_records(split_dataset(records, config.seed), config.output)
    elif args.action == 'build-vocab':
        build_vocab(_train_records(records), config.fields).save(config.output)
    else:
        vocab = Vocabulary.load(config.vocab)
        examples = encode_records(records, vocab, config.fields)
        logger.info("Titles with OOV tokens: %.1f%%", 100 * oov_rate(examples, vocab))
        save_examples(examples, config.output)
    return [config.output]


def train_from_records(records: Sequence[DatasetRecord], config: RunConfig, checkpoint_path: str,
                       vocab: Optional[Vocabulary] = None) -> Checkpoint:
    """Build the vocabulary if needed, train, and save the best checkpoint."""
    if not any(r.split for r in records):
        records = split_dataset(records, config.seed)
    train_records = _train_records(records)
    vocab = vocab or build_vocab(train_records, config.fields)

    train_examples = encode_records(train_records, vocab, config.fields)
    val_examples = encode_records(_split_of(records, 'validation'), vocab, config.fields)
    log_path = str(Path(checkpoint_path).with_name("training_log.tsv"))
    if Path(log_path).exists():
        Path(log_path).unlink()

    result = train(train_examples, val_examples, len(vocab), config.hyper, log_path=log_path,
                   progress=config.verbosity >= 1)
    checkpoint = Checkpoint(config.hyper, vocab, result.params, config.fields)
    save_checkpoint(checkpoint, checkpoint_path)
    return checkpoint


def cmd_train(args, config: RunConfig) -> List[str]:
    records = load_records(config.input)
    vocab = Vocabulary.load(config.vocab) if config.vocab else None
    out = Path(config.output)
    train_from_records(records, config, str(out / "model.ckpt"), vocab)
    return [str(out / "model.ckpt"), str(out / "training_log.tsv")]


def cmd_generate(args, config: RunConfig) -> List[str]:
    checkpoint = load_checkpoint(config.checkpoint)
    records = _split_of(_load_inputs(config.input, config), args.split)
    service = TitleGenerationService(checkpoint, config.decode, config.debug_oov)
    save_predictions(service.batch_generate(records, config.mode, config.jobs), config.output)
    return [config.output]


def cmd_evaluate(args, config: RunConfig) -> List[str]:
    references = [r.title for r in _split_of(load_records(config.references), args.split)]
    systems: Dict[str, List[str]] = {}
    for path in args.predictions:
        systems[Path(path).stem] = [p.title for p in load_predictions(path)]
    report = evaluate(systems, references, config.jobs)
    report.save_tsv(config.output)
    logger.info("\n%s", report.render())
    return [config.output]


def _attention_sample(checkpoint: Checkpoint, records: Sequence[DatasetRecord],
                      config: RunConfig) -> Optional[GeneratedTitle]:
    """Copy+generate decode of the first record with a non-empty input."""
    for record in records:
        try:
            return generate(checkpoint, record.context, 'copy_generate', config.decode)
        except EmptyInput:
            continue
    return None


def cmd_pipeline(args, config: RunConfig) -> List[str]:
    """extract -> aggregate -> split -> vocab -> train -> generate -> evaluate."""
    work = Path(config.workdir)
    work.mkdir(parents=True, exist_ok=True)

    extractor = PageExtractor(config.fields.table_rows, config.fields.prefix_text or config.fields.suffix_text,
                              config.jobs)
    records = extractor.extract_directory(config.input)
    save_records(records, str(work / "records.jsonl"))

    records = split_dataset(aggregate_records(records), config.seed)
    save_records(records, str(work / "dataset.jsonl"))

    vocab = build_vocab(_train_records(records), config.fields)
    vocab.save(str(work / "vocab.txt"))

    checkpoint = train_from_records(records, config, str(work / "model.ckpt"), vocab)

    test = _split_of(records, 'test')
    service = TitleGenerationService(checkpoint, config.decode, config.debug_oov)
    predictions = {name: baseline_results(test, name) for name in BASELINES}
    for mode in MODES:
        predictions[mode] = service.batch_generate(test, mode, config.jobs)

    outputs = [str(work / name) for name in ("records.jsonl", "dataset.jsonl", "vocab.txt", "model.ckpt")]
    systems = {}
    for name in SYSTEM_ORDER:
        path = str(work / "predictions" / f"{name}.jsonl")
        save_predictions(predictions[name], path)
        systems[name] = [p.title for p in predictions[name]]
        outputs.append(path)

    report = evaluate(systems, [r.title for r in test], config.jobs)
    outputs.append(report.save_tsv(str(work / "report.tsv")))
    logger.info("\n%s", report.render())
    save_experiment_figures(str(work / "figures"), str(work / "training_log.tsv"), report,
                            _attention_sample(checkpoint, test, config), checkpoint.vocab)
    return outputs


COMMANDS = {
    'extract': cmd_extract,
    'dataset': cmd_dataset,
    'train': cmd_train,
    'generate': cmd_generate,
    'evaluate': cmd_evaluate,
    'pipeline': cmd_pipeline,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments, dispatch, and write the run manifest.

    Returns:
        0 on success, 1 on a toolkit error, 2 on bad usage
    """
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # --version and --help exit 0, usage errors 2
        return int(exc.code or 0)
    try:
        config = resolve_config(args)
        setup_logging(config.verbosity)
        outputs = COMMANDS[args.command](args, config)
        out_dir = config.workdir or str(Path(outputs[0]).parent)
        inputs = [config.input, config.vocab, config.checkpoint, config.references]
        inputs += list(getattr(args, 'predictions', None) or [])
        write_run_manifest(config, out_dir, inputs, outputs)
    except TableTitleError as exc:
        print(f"error: {exc.name}: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == '__main__':
    main()
