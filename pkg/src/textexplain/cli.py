"""Command-line entry point.

``textexplain explain`` writes one JSON + HTML report pair per input document;
``textexplain global`` aggregates a directory of those reports into global
per-class lemma influence scores.

Exit codes: 0 full success, 1 configuration error or empty corpus, 2 partial
per-document failures (each one logged).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import local, report, textprep
from .config import ALL_METHODS, ALL_PERTURBATIONS, RunConfig
from .global_scores import aggregate_corpus
from .errors import (
    BadConfig,
    BadReport,
    EmptyCorpus,
    ExplainError,
    MissingLexicon,
    ModelUnavailable,
)
from .gateway import open_model

log = logging.getLogger("textexplain")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARTIAL = 2


def _csv(value: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in value.split(",") if part.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="textexplain",
        description="Perturbation-based explanations for black-box text classifiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="optional TOML file with the same keys; flags win")
        p.add_argument("--model", help="ref:<weights.json> or cmd:<command line>")
        p.add_argument("--classes", help="comma-separated class name override")
        p.add_argument("--methods", help=f"comma-separated subset of {','.join(ALL_METHODS)}")
        p.add_argument("--perturbations",
                       help=f"comma-separated subset of {','.join(ALL_PERTURBATIONS)}")
        p.add_argument("--threshold", type=float, help="informativeness threshold (default 0.5)")
        p.add_argument("--seed", type=int, help="clustering seed (default 42)")
        p.add_argument("--pca-components", type=int, dest="pca_components",
                       help="max principal components (default 16)")
        p.add_argument("--combine-pos", action=argparse.BooleanOptionalAction, default=None)
        p.add_argument("--combine-sentence", action=argparse.BooleanOptionalAction, default=None)
        p.add_argument("--combine-mlwe", action=argparse.BooleanOptionalAction, default=None)
        p.add_argument("--antonyms", help="antonym lexicon path")
        p.add_argument("--pos-lexicon", dest="pos_lexicon", help="POS lexicon path")
        p.add_argument("--lemma-exceptions", dest="lemma_exceptions",
                       help="lemma exception lexicon path")
        p.add_argument("--out", help="output directory (default .)")
        p.add_argument("--jobs", type=int, help="parallel documents (default 1)")

    explain = sub.add_parser("explain", help="explain one file, a directory, or a .jsonl corpus")
    add_common(explain)
    explain.add_argument("input", help="UTF-8 .txt file, directory of .txt files, or .jsonl")

    global_cmd = sub.add_parser("global", help="aggregate local reports into global scores")
    add_common(global_cmd)
    global_cmd.add_argument("reports_dir", help="directory of *.explanation.json files")
    global_cmd.add_argument("--top", type=int, default=report.DEFAULT_TOP_N,
                            help="entries in the per-class top list")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig()
    if args.config:
        try:
            with open(args.config, "rb") as fh:
                file_values = tomllib.load(fh)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise BadConfig(f"cannot read config file {args.config}: {exc}") from exc
        for key, value in file_values.items():
            if not hasattr(config, key):
                raise BadConfig(f"unknown config key {key!r}")
            if key in ("methods", "perturbations", "class_names"):
                value = tuple(value)
            setattr(config, key, value)
    overrides = {
        "model": args.model,
        "threshold": args.threshold,
        "seed": args.seed,
        "pca_components": args.pca_components,
        "combine_pos": args.combine_pos,
        "combine_sentence": args.combine_sentence,
        "combine_mlwe": args.combine_mlwe,
        "antonyms": args.antonyms,
        "pos_lexicon": args.pos_lexicon,
        "lemma_exceptions": args.lemma_exceptions,
        "out": args.out,
        "jobs": args.jobs,
    }
    if args.classes is not None:
        overrides["class_names"] = _csv(args.classes)
    if args.methods is not None:
        overrides["methods"] = _csv(args.methods)
    if args.perturbations is not None:
        overrides["perturbations"] = _csv(args.perturbations)
    config = replace(config, **{k: v for k, v in overrides.items() if v is not None})
    return config.validate()


def _iter_documents(input_path: Path):
    """Yield (document_id, text) pairs in a stable order."""
    if input_path.is_dir():
        for path in sorted(input_path.glob("*.txt")):
            yield path.stem, path.read_text(encoding="utf-8")
        return
    if input_path.suffix == ".jsonl":
        with open(input_path, "r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                    yield str(record["id"]), str(record["text"])
                except (json.JSONDecodeError, TypeError, KeyError) as exc:
                    raise BadConfig(f"{input_path}:{line_no} is not an id/text record: {exc}") from exc
        return
    yield input_path.stem, input_path.read_text(encoding="utf-8")


def cmd_explain(args: argparse.Namespace) -> int:
    config = load_config(args)
    if not config.model:
        raise BadConfig("--model is required (ref:<weights.json> or cmd:<command>)")
    lexicons = textprep.load_lexicons(
        pos_path=config.pos_lexicon,
        lemma_path=config.lemma_exceptions,
        antonyms_path=config.antonyms,
    )
    input_path = Path(args.input)
    if not input_path.exists():
        raise BadConfig(f"input {input_path} does not exist")
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        documents = list(_iter_documents(input_path))
    except (OSError, UnicodeDecodeError) as exc:
        raise BadConfig(f"cannot read documents from {input_path}: {exc}") from exc
    if not documents:
        raise BadConfig(f"no documents found under {input_path}")

    model = open_model(config.model)
    if config.class_names is not None:
        model_classes = model.info().class_names
        if len(config.class_names) != len(model_classes):
            raise BadConfig(
                f"--classes lists {len(config.class_names)} names but the model "
                f"has {len(model_classes)} classes"
            )

    failures = 0

    def run_one(item):
        document_id, text = item
        explanation_set = local.explain_document(
            text, model, config, lexicons, document_id=document_id
        )
        if config.class_names is not None:
            explanation_set = replace(explanation_set, class_names=tuple(config.class_names))
        payload = report.local_report(explanation_set, config)
        report.write_bytes(out_dir / f"{document_id}.explanation.json",
                           report.emit_local(payload, "json"))
        report.write_bytes(out_dir / f"{document_id}.explanation.html",
                           report.emit_local(payload, "html"))

    with model:
        if config.jobs == 1:
            runs = ((item, _run_guarded(run_one, item)) for item in documents)
        else:
            with ThreadPoolExecutor(max_workers=config.jobs) as pool:
                runs = list(zip(documents, pool.map(lambda d: _run_guarded(run_one, d), documents)))
        for (document_id, _), error in runs:
            if error is None:
                log.info("explained %s", document_id)
            else:
                failures += 1
                log.error("skipped %s: %s", document_id, error)

    return EXIT_PARTIAL if failures else EXIT_OK


def _run_guarded(fn, item):
    try:
        fn(item)
        return None
    except ModelUnavailable:
        raise  # the whole run is doomed without a model
    except ExplainError as exc:
        return exc


def cmd_global(args: argparse.Namespace) -> int:
    config = load_config(args)
    lexicons = textprep.load_lexicons(
        pos_path=config.pos_lexicon,
        lemma_path=config.lemma_exceptions,
        antonyms_path=config.antonyms,
    )
    reports_dir = Path(args.reports_dir)
    paths = sorted(reports_dir.glob("*.explanation.json"))
    if not paths:
        raise EmptyCorpus(f"no local reports under {reports_dir}")
    documents = []
    class_names = None
    rejected = 0
    for path in paths:
        try:
            parsed = report.parse_local(path.read_bytes())
            documents.append(report.corpus_document_from_report(parsed))
        except BadReport as exc:
            rejected += 1
            log.error("rejected %s: %s", path.name, exc)
            continue
        names = tuple(parsed["class_names"])
        if class_names is None:
            class_names = names
        elif names != class_names:
            raise BadConfig(f"{path.name} uses classes {names}, expected {class_names}")
    if not documents:
        raise EmptyCorpus("every report was rejected")
    scores = aggregate_corpus(documents, class_names, lexicons.lemma_exceptions)
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = report.global_report(scores, top_n=args.top)
    report.write_bytes(out_dir / "global.json", report.emit_global(payload))
    log.info(
        "aggregated %d documents (%d without cluster explanations, %d rejected)",
        scores.corpus_size, scores.skipped_documents, rejected,
    )
    return EXIT_PARTIAL if rejected else EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s", stream=sys.stderr)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    try:
        if args.command == "explain":
            return cmd_explain(args)
        return cmd_global(args)
    except (BadConfig, MissingLexicon, EmptyCorpus, ModelUnavailable) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except ExplainError as exc:
        log.error("%s", exc)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
