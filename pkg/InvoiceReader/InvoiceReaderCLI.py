# -*- coding: utf-8-*-
"""
Module : InvoiceReaderCLI
Author : InvoiceReader team
Description :
    Batch command line front-end. Each stage is its own subcommand with
    file handoff: analyze, extract, classify-page, evaluate, gen-corpus and
    train-classifier.
    Exit codes: 0 success, 1 usage or configuration error, 2 when some input
    files failed and the others were processed.
"""
import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

# Local imports
from InvoiceReader.DocModel import FORMAT_JSON, FORMAT_XML, Document, deserialize_document, serialize_document
from InvoiceReader.Errors import ConfigError, InvoiceReaderError, MissingReportError
from InvoiceReader.Evaluation import (AblationDrop, NoiseModel, evaluate_corpus, generate_corpus, read_corpus,
                                      read_gold_jsonl, run_ablation, score_run)
from InvoiceReader.Helpers.Corpus_Maker import load_templates
from InvoiceReader.InfoExtractor import read_reports, reports_json
from InvoiceReader.OCRIngest import read_ocr_file
from InvoiceReader.PageClassifier import (GROUP_ANNOTATIONS, KIND_LOGISTIC_REGRESSION, KIND_NAIVE_BAYES,
                                          STAGE_LAYOUT_ONLY, STAGE_WITH_ANNOTATIONS, ClassifierModel, cross_validate,
                                          extract_features, load_vocabulary, predict, train)
from InvoiceReader.Pipeline import LANG_AUTO, InvoicePipeline
from InvoiceReader.PipelineConfig import MATCHER_REGEX, MATCHER_SIMILARITY, PipelineConfig, available_languages

__all__ = ["main", "build_parser", "EXIT_OK", "EXIT_USAGE", "EXIT_PARTIAL"]

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARTIAL = 2

_KINDS = {"nb": KIND_NAIVE_BAYES, "lr": KIND_LOGISTIC_REGRESSION}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --------------------------------------------------------------- workers ---

@lru_cache(maxsize=4)
def _pipeline(cfg_json: str) -> InvoicePipeline:
    """One pipeline per configuration and process"""
    return InvoicePipeline(PipelineConfig.from_dict(json.loads(cfg_json)))


def _doc_format(path: Path) -> str:
    return FORMAT_XML if path.suffix.lower() == ".xml" else FORMAT_JSON


def _analyze_one(task) -> Tuple[str, Optional[bytes], Optional[str]]:
    cfg_json, path, input_format, doc_format = task
    path = Path(path)
    try:
        doc = _pipeline(cfg_json).analyze(read_ocr_file(path, input_format), path.stem)
        return path.stem, serialize_document(doc, doc_format), None
    except (InvoiceReaderError, OSError) as e:
        return path.stem, None, str(e)


def _extract_one(task) -> Tuple[str, Optional[dict], Optional[str]]:
    cfg_json, path, lang, mode = task
    path = Path(path)
    try:
        doc = deserialize_document(path.read_bytes(), _doc_format(path))
        pipeline = _pipeline(cfg_json)
        report = pipeline.extract(pipeline.annotate(doc, lang, mode))
        return path.name, report.to_dict(), None
    except ConfigError:
        raise
    except (InvoiceReaderError, OSError) as e:
        return path.name, None, str(e)


def _run(worker: Callable, tasks: List, jobs: int) -> List:
    """Results in task order, serially or over a process pool"""
    if jobs <= 1 or len(tasks) <= 1:
        return [worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(worker, tasks))


def _load_config(args) -> PipelineConfig:
    cfg = PipelineConfig.from_json(args.config) if args.config else PipelineConfig()
    if getattr(args, "matcher", None):
        cfg = cfg.with_overrides(matcher=args.matcher)
    return cfg


def _cfg_json(cfg: PipelineConfig) -> str:
    return json.dumps(cfg.to_dict(), sort_keys=True)


def _report_failures(failures: Sequence[Tuple[str, str]]) -> int:
    for name, message in failures:
        logger.error("%s: %s", name, message)
    return EXIT_PARTIAL if failures else EXIT_OK


def _write_or_print(data: bytes, out: Optional[Path]):
    if out is None:
        sys.stdout.write(data.decode("utf-8"))
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_bytes(data)


# -------------------------------------------------------------- commands ---

def cmd_analyze(args) -> int:
    cfg = _load_config(args)
    args.out.mkdir(parents=True, exist_ok=True)
    doc_format = FORMAT_XML if args.doc_format == "xml" else FORMAT_JSON
    tasks = [(_cfg_json(cfg), str(p), args.format, doc_format) for p in args.inputs]
    failures = []
    for stem, data, error in _run(_analyze_one, tasks, args.jobs):
        if error is not None:
            failures.append((stem, error))
            continue
        (args.out / f"{stem}.{args.doc_format}").write_bytes(data)
    logger.info("Analyzed %d of %d file(s)", len(tasks) - len(failures), len(tasks))
    return _report_failures(failures)


def _check_language(lang: str):
    if lang != LANG_AUTO and lang not in available_languages():
        raise ConfigError(f"unknown language '{lang}': no keyword dictionary")


def cmd_extract(args) -> int:
    cfg = _load_config(args)
    _check_language(args.lang)
    tasks = [(_cfg_json(cfg), str(p), args.lang, cfg.matcher) for p in args.docs]
    reports, failures = [], []
    for name, report, error in _run(_extract_one, tasks, args.jobs):
        if error is not None:
            failures.append((name, error))
        else:
            reports.append(report)
    data = json.dumps(reports, ensure_ascii=False, indent=1).encode("utf-8")
    _write_or_print(data, args.out)
    return _report_failures(failures)


def _annotated(doc: Document, pipeline: InvoicePipeline) -> Document:
    if any(b.block_types for page in doc.pages for b in page.blocks):
        return doc
    return pipeline.annotate(doc)


def cmd_classify_page(args) -> int:
    cfg = _load_config(args)
    try:
        model = ClassifierModel.from_json(args.model.read_bytes())
    except OSError as e:
        raise ConfigError(f"cannot read model {args.model}: {e}") from e
    groups = model.schema.groups
    stage = STAGE_WITH_ANNOTATIONS if GROUP_ANNOTATIONS in groups else STAGE_LAYOUT_ONLY
    pipeline = InvoicePipeline(cfg)
    results, failures = [], []
    for path in args.docs:
        try:
            doc = deserialize_document(path.read_bytes(), _doc_format(path))
            if stage == STAGE_WITH_ANNOTATIONS:
                doc = _annotated(doc, pipeline)
            for page in doc.pages:
                label, probability = predict(model, extract_features(page, model.schema.vocabulary, stage, groups))
                results.append({"source_id": doc.source_id, "page": page.number,
                                "first_page": bool(label), "probability": round(probability, 6)})
        except (InvoiceReaderError, OSError) as e:
            failures.append((path.name, str(e)))
    _write_or_print(json.dumps(results, indent=1).encode("utf-8"), args.out)
    return _report_failures(failures)


def cmd_evaluate(args) -> int:
    cfg = _load_config(args)
    if args.corpus is not None:
        corpus = read_corpus(args.corpus)
        if args.ablate:
            result = run_ablation(corpus, cfg, AblationDrop(args.ablate))
            if args.json_out is not None:
                args.json_out.write_bytes(json.dumps(result.to_dict(), indent=1, sort_keys=True).encode("utf-8"))
            for label, delta in sorted(result.deltas().items()):
                logger.info("%s: match %+.2f points", label, delta)
            table = result.ablated
        else:
            table, _ = evaluate_corpus(corpus, cfg)
    else:
        if args.gold is None or args.reports is None:
            raise UsageError("evaluate needs --corpus, or both --gold and --reports")
        try:
            gold = read_gold_jsonl(args.gold.read_bytes())
            reports = read_reports(args.reports.read_bytes())
        except OSError as e:
            raise ConfigError(str(e)) from e
        try:
            table = score_run(gold, reports, cfg)
        except MissingReportError as e:
            logger.error("%s", e)
            return EXIT_PARTIAL
    if args.json_out is not None and not args.ablate:
        _write_or_print(table.to_json(), args.json_out)
    _write_or_print(table.to_csv().encode("utf-8"), args.out)
    return EXIT_OK


def cmd_gen_corpus(args) -> int:
    templates = load_templates(args.templates)
    if args.templates and len(templates) != len(set(args.templates)):
        found = {t.name for t in templates}
        raise ConfigError(f"unknown template(s): {', '.join(sorted(set(args.templates) - found))}")
    noise = NoiseModel(args.char_noise, args.punct_drop, args.digit_dup)
    corpus = generate_corpus(args.n, templates, noise, args.seed, args.out, args.continuation_ratio)
    logger.info("Generated %d invoice(s), %d page(s)", len(corpus.documents), len(corpus.page_labels))
    return EXIT_OK


def cmd_train_classifier(args) -> int:
    cfg = _load_config(args)
    corpus = read_corpus(args.corpus)
    if not corpus.page_labels:
        raise ConfigError(f"corpus {args.corpus} has no page labels")
    groups = tuple(args.features.split(",")) if args.features else None
    stage = STAGE_WITH_ANNOTATIONS if groups is None or GROUP_ANNOTATIONS in groups else STAGE_LAYOUT_ONLY
    if args.vocab is not None:
        vocab = load_vocabulary(args.vocab)
    else:
        # Local imports
        from InvoiceReader.Tools.generate_keyword_vocabulary import build_vocabulary, load_stop_words
        from InvoiceReader.EntityAnnotator import load_gazetteer
        texts = [" ".join(w.text for w in page.words) for _, pages in corpus.documents for page in pages]
        vocab = build_vocabulary(texts, args.top_words, load_stop_words(),
                                 [load_gazetteer(lang) for lang in cfg.languages])
    labels = {(s, p): first for s, p, first in corpus.page_labels}
    pipeline = InvoicePipeline(cfg)
    dataset = []
    for source_id, pages in corpus.documents:
        doc = pipeline.analyze(pages, source_id)
        if stage == STAGE_WITH_ANNOTATIONS:
            doc = pipeline.annotate(doc)
        for page in doc.pages:
            if (source_id, page.number) in labels:
                dataset.append((extract_features(page, vocab, stage, groups), int(labels[(source_id, page.number)])))
    kind = _KINDS[args.kind]
    if args.cv:
        precision, recall, f1 = cross_validate(dataset, kind, args.cv, cfg)
        print(f"precision={precision:.4f} recall={recall:.4f} f1={f1:.4f}")
    model = train(dataset, kind, cfg)
    _write_or_print(model.to_json(), args.out)
    return EXIT_OK


# ---------------------------------------------------------------- parser ---

def _common(parser: argparse.ArgumentParser, matcher: bool = False):
    parser.add_argument("--config", type=Path, default=None, help="JSON configuration file")
    if matcher:
        group = parser.add_mutually_exclusive_group()
        group.add_argument("--similarity", dest="matcher", action="store_const", const=MATCHER_SIMILARITY,
                           help="weighted edit distance keyword matcher (default)")
        group.add_argument("--regex", dest="matcher", action="store_const", const=MATCHER_REGEX,
                           help="exact keyword matcher")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="InvoiceReader", description="Layout analysis and metadata extraction for OCR invoices")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug output")
    parser.add_argument("--log-file", type=Path, default=None, help="write log output to a file")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for file batches")
    commands = parser.add_subparsers(dest="command", metavar="command")
    commands.required = True

    p = commands.add_parser("analyze", help="layout analysis of OCR files into documents")
    p.add_argument("inputs", nargs="+", type=Path, help="Tesseract TSV or word-box JSON files")
    p.add_argument("--format", choices=("tsv", "json"), default=None, help="input format, guessed when omitted")
    p.add_argument("--doc-format", choices=("json", "xml"), default="json", help="output document format")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    _common(p)
    p.set_defaults(func=cmd_analyze)

    p = commands.add_parser("extract", help="annotate analyzed documents and extract invoice fields")
    p.add_argument("docs", nargs="*", type=Path, help="documents written by analyze")
    p.add_argument("--lang", default=LANG_AUTO, help="auto or a language code")
    p.add_argument("--out", type=Path, default=None, help="report file, stdout when omitted")
    _common(p, matcher=True)
    p.set_defaults(func=cmd_extract)

    p = commands.add_parser("classify-page", help="mark invoice first pages with a trained model")
    p.add_argument("docs", nargs="*", type=Path)
    p.add_argument("--model", type=Path, required=True, help="model written by train-classifier")
    p.add_argument("--out", type=Path, default=None)
    _common(p)
    p.set_defaults(func=cmd_classify_page)

    p = commands.add_parser("evaluate", help="score reports against gold records")
    p.add_argument("--gold", type=Path, default=None, help="gold JSON lines")
    p.add_argument("--reports", type=Path, default=None, help="report file written by extract")
    p.add_argument("--corpus", type=Path, default=None, help="run the pipeline on a generated corpus instead")
    p.add_argument("--ablate", choices=[d.value for d in AblationDrop if d != AblationDrop.NONE], default=None,
                   help="with --corpus, also score without one annotation type")
    p.add_argument("--out", type=Path, default=None, help="score CSV, stdout when omitted")
    p.add_argument("--json-out", type=Path, default=None, help="score (or ablation) JSON")
    _common(p, matcher=True)
    p.set_defaults(func=cmd_evaluate)

    p = commands.add_parser("gen-corpus", help="generate a synthetic invoice corpus")
    p.add_argument("-n", type=int, default=50, help="number of invoices")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--templates", nargs="*", default=None, help="template names, all when omitted")
    p.add_argument("--char-noise", type=float, default=0.0, help="character substitution probability")
    p.add_argument("--punct-drop", type=float, default=0.0, help="punctuation drop probability")
    p.add_argument("--digit-dup", type=float, default=0.0, help="digit duplication probability")
    p.add_argument("--continuation-ratio", type=float, default=0.0, help="share of two-page invoices")
    p.set_defaults(func=cmd_gen_corpus)

    p = commands.add_parser("train-classifier", help="train the first-page classifier on a generated corpus")
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--kind", choices=sorted(_KINDS), default="nb")
    p.add_argument("--vocab", type=Path, default=None, help="vocabulary file, built from the corpus when omitted")
    p.add_argument("--top-words", type=int, default=150, help="frequent words considered when building one")
    p.add_argument("--features", default=None, help="comma separated groups: WORDS,TITLE_PAGE,ANNOTATIONS")
    p.add_argument("--cv", type=int, default=0, help="also print k-fold cross validation scores")
    p.add_argument("--out", type=Path, required=True, help="model file")
    _common(p)
    p.set_defaults(func=cmd_train_classifier)
    return parser


def _setup_logging(verbose: int, log_file: Optional[Path]):
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    kwargs = {"filename": str(log_file)} if log_file else {}
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", force=True, **kwargs)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    _setup_logging(args.verbose, args.log_file)
    try:
        return args.func(args)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except InvoiceReaderError as e:
        logger.error("%s", e)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
