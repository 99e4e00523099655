"""
Command-line interface: train, assess, evaluate, wmd, utest and synth

Exit codes: 0 success, 1 runtime failure, 2 configuration or usage error.
"""
import argparse
import csv
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Set

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError

from readability_wmd import __version__
from readability_wmd.classifier import Hyperparameters, load_model, save_model, train
from readability_wmd.config import (
    RunConfig,
    get_log_level,
    load_run_config,
    parse_overrides,
    require_paths,
    settings_hash_payload,
)
from readability_wmd.corpus import load_corpus, load_stopwords, load_unlabeled, to_nbow, tokenize
from readability_wmd.domain_types import CorrectionReport
from readability_wmd.embeddings import load_vec
from readability_wmd.errors import ConfigError, PhaseError, ReadabilityError
from readability_wmd.evaluation import cross_validate, mann_whitney_u
from readability_wmd.features import FeatureConfig, extract_features
from readability_wmd.formatter import ReportFormatter
from readability_wmd.postprocess import LabelCorrector, to_report
from readability_wmd.synth import SynthSpec, generate_fixture, write_fixture
from readability_wmd.utils import canonical_hash, write_json, write_jsonl
from readability_wmd.wmd import plan_by_token, wmd

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

MODEL_FILE = "model.bin"
TRAIN_LOG_FILE = "train_log.json"
ASSESS_FILE = "assessment.jsonl"
EVAL_FILE = "eval_report.json"

PIPELINE_INPUTS = ("corpus.path", "embeddings.path")


class TrainLog(BaseModel):
    """Summary written next to a trained model"""

    class_labels: List[int]
    feature_names: List[str]
    hyper: Hyperparameters
    seed: int
    n_train: int
    train_accuracy: float = Field(..., ge=0.0, le=1.0)
    iterations: int
    converged: bool
    config_hash: str


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = parse_overrides(args.set or [])
    if args.seed is not None:
        overrides["run.seed"] = args.seed
    if args.output_dir is not None:
        overrides["run.output_dir"] = args.output_dir
    config = load_run_config(args.config, overrides)
    if config.run.seed is None:
        raise ConfigError("run.seed", "a seed is required (config file or --seed)")
    require_paths(config, PIPELINE_INPUTS)
    return config


def _load_inputs(config: RunConfig) -> tuple:
    corpus = load_corpus(config.corpus.path, config.corpus.levels)
    table = load_vec(config.embeddings.path, config.embeddings.max_vocab, config.embeddings.normalize)
    stopwords = load_stopwords(config.corpus.stopwords) if config.corpus.stopwords else None
    return corpus, table, stopwords


def _output_dir(config: RunConfig) -> Path:
    config.run.output_dir.mkdir(parents=True, exist_ok=True)
    return config.run.output_dir


def cmd_train(args: argparse.Namespace) -> int:
    """Train the classifier on the whole corpus and write the model and its log"""
    config = _config_from_args(args)
    corpus, _, _ = _load_inputs(config)
    features = [extract_features(doc, config.features) for doc in corpus.documents]
    model = train(
        features,
        [doc.level for doc in corpus.documents],
        config.classifier,
        config.seed,
        class_labels=corpus.levels,
    )
    out = _output_dir(config)
    save_model(model, out / MODEL_FILE)
    log = TrainLog(
        class_labels=model.class_labels,
        feature_names=model.feature_names,
        hyper=model.hyper,
        seed=model.seed,
        n_train=model.metadata["n_train"],
        train_accuracy=model.metadata["train_accuracy"],
        iterations=model.metadata["iterations"],
        converged=model.metadata["converged"],
        config_hash=canonical_hash(settings_hash_payload(config)),
    )
    write_json(out / TRAIN_LOG_FILE, log)
    print(f"model written to {out / MODEL_FILE} (training accuracy {log.train_accuracy:.3f})")
    return EXIT_OK


def _assess_rows(
    corrector: LabelCorrector, inputs: List[tuple], config: RunConfig
) -> List[CorrectionReport]:
    rows = []
    for doc_id, text in inputs:
        try:
            rows.append(to_report(corrector.correct(doc_id, text, config.postprocess.mode)))
        except PhaseError as exc:
            logger.error(f"Assessment of {doc_id!r} failed: {exc}")
            rows.append(CorrectionReport(id=doc_id, error=str(exc)))
    return rows


def cmd_assess(args: argparse.Namespace) -> int:
    """Correct the level of every input document against the corpus bookshelf"""
    config = _config_from_args(args)
    corpus, table, stopwords = _load_inputs(config)
    out = _output_dir(config)
    model = load_model(args.model or out / MODEL_FILE)
    feature_config = FeatureConfig(enabled=model.feature_names, extra_vowels=config.features.extra_vowels)
    corrector = LabelCorrector(
        model,
        corpus,
        table,
        feature_config,
        stopwords=stopwords,
        window=config.postprocess.window,
    )
    rows = _assess_rows(corrector, load_unlabeled(args.input), config)
    report_path = Path(args.out) if args.out else out / ASSESS_FILE
    write_jsonl(report_path, rows)
    print(ReportFormatter.format_corrections(rows))
    succeeded = sum(row.error is None for row in rows)
    logger.info(f"Assessed {succeeded} of {len(rows)} documents, report at {report_path}")
    return EXIT_OK if succeeded else EXIT_FAILURE


def cmd_evaluate(args: argparse.Namespace) -> int:
    """Cross-validate base, vote-only and WMD-corrected predictions"""
    config = _config_from_args(args)
    corpus, table, stopwords = _load_inputs(config)
    report = cross_validate(corpus, table, config, stopwords=stopwords)
    write_json(_output_dir(config) / EVAL_FILE, report)
    print(ReportFormatter.format_eval_table(report))
    return EXIT_OK


def cmd_wmd(args: argparse.Namespace) -> int:
    """Print the WMD between two text files, optionally with the transport plan"""
    table = load_vec(args.embeddings, args.max_vocab)
    stopwords: Optional[Set[str]] = load_stopwords(args.stopwords) if args.stopwords else None
    nbows = []
    for path in (args.doc_a, args.doc_b):
        text = Path(path).read_text(encoding="utf-8")
        nbows.append(to_nbow(tokenize(text), table, stopwords, str(path)))
    result = wmd(nbows[0], nbows[1], table, want_plan=args.plan)
    print(ReportFormatter.format_distance(result.distance))
    if args.plan:
        print(ReportFormatter.format_plan(plan_by_token(result.plan, table)))
    return EXIT_OK


def _read_score_columns(path: Path) -> tuple:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        rows = [row for row in csv.reader(handle) if any(cell.strip() for cell in row)]
    if not rows:
        raise ValueError(f"{path}: no rows")
    try:
        float(rows[0][0])
    except (ValueError, IndexError):
        rows = rows[1:]
    a, b = [], []
    for line_no, row in enumerate(rows, start=1):
        if len(row) != 2:
            raise ValueError(f"{path}: row {line_no} has {len(row)} columns, expected 2")
        for cell, column in zip(row, (a, b)):
            if cell.strip():
                column.append(float(cell))
    if not a or not b:
        raise ValueError(f"{path}: each column needs at least one value")
    return a, b


def cmd_utest(args: argparse.Namespace) -> int:
    """Mann-Whitney U test between two CSV score columns; prints the result as JSON"""
    a, b = _read_score_columns(Path(args.csv))
    result = mann_whitney_u(a, b)
    print(result.model_dump_json())
    logger.info(ReportFormatter.format_utest(result))
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    """Write a synthetic corpus, matching embeddings and a run config"""
    try:
        spec = SynthSpec(
            n_classes=args.classes,
            docs_per_class=args.docs_per_class,
            vocab_per_class=args.vocab_per_class,
            dim=args.dim,
            noise=args.noise,
            seed=args.seed,
            style_jitter=args.style_jitter,
            noise_min_length=args.noise_min_length,
            noise_max_length=args.noise_max_length,
        )
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ConfigError(str(first["loc"][0]), first["msg"]) from exc
    paths = write_fixture(generate_fixture(spec), args.out_dir)
    for role, path in paths.items():
        print(f"{role}: {path}")
    return EXIT_OK


def _add_config_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", "-c", default=None, help="JSON run config")
    parser.add_argument(
        "--set", action="append", metavar="SECTION.KEY=VALUE", help="override one config key"
    )
    parser.add_argument("--seed", type=int, default=None, help="overrides run.seed")
    parser.add_argument("--output-dir", default=None, help="overrides run.output_dir")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="readability-wmd",
        description="Readability assessment with bookshelf voting and a WMD tie-break",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress at INFO")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train the classifier on the configured corpus")
    _add_config_options(p)

    p = sub.add_parser("assess", help="correct levels of unlabeled documents")
    _add_config_options(p)
    p.add_argument("input", help="JSON Lines file with id and text per line")
    p.add_argument("--model", default=None, help=f"model file, default <output_dir>/{MODEL_FILE}")
    p.add_argument("--out", default=None, help=f"report file, default <output_dir>/{ASSESS_FILE}")

    p = sub.add_parser("evaluate", help="cross-validate base, vote-only and WMD correction")
    _add_config_options(p)

    p = sub.add_parser("wmd", help="WMD between two text files")
    p.add_argument("embeddings", help=".vec embeddings file")
    p.add_argument("doc_a")
    p.add_argument("doc_b")
    p.add_argument("--plan", action="store_true", help="also print token flows")
    p.add_argument("--max-vocab", type=int, default=None)
    p.add_argument("--stopwords", default=None)

    p = sub.add_parser("utest", help="Mann-Whitney U test on a two-column CSV")
    p.add_argument("csv")

    p = sub.add_parser("synth", help="generate a synthetic fixture")
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--docs-per-class", type=int, default=30)
    p.add_argument("--vocab-per-class", type=int, default=40)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--style-jitter", type=int, default=1)
    p.add_argument("--noise-min-length", type=int, default=20, help="shortest run-on sentence length")
    p.add_argument("--noise-max-length", type=int, default=32, help="longest run-on sentence length")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", required=True)
    return parser


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "train": cmd_train,
    "assess": cmd_assess,
    "evaluate": cmd_evaluate,
    "wmd": cmd_wmd,
    "utest": cmd_utest,
    "synth": cmd_synth,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run one command and map failures to exit codes

    Args:
        argv (Optional[List[str]]): Arguments, sys.argv[1:] by default

    Returns:
        int: Process exit code
    """
    dotenv_path = Path.cwd() / ".env"
    if dotenv_path.exists():
        load_dotenv(dotenv_path)
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=get_log_level(args.verbose),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )

    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ReadabilityError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
