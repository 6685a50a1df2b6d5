"""Batch CLI: ``podsum filter | prepare | extract | score``.

Exit codes: 0 success, 1 validation error, 2 I/O (or usage) error.  Logs
go to stderr; machine-readable output goes only to files in ``--out-dir``.
Every flag can also be set through an environment variable named
``PODSUM_<FLAG>`` (dashes to underscores); explicit flags win.  Each run
echoes its effective configuration into the output directory so it can be
reproduced.
"""

from __future__ import annotations

import argparse
import json
import logging
import multiprocessing
import os
import sys
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import Callable, Sequence

from .categories import (
    CategoryTaxonomy,
    build_conditioned_input,
    default_taxonomy,
    emit_training_file,
    load_taxonomy,
    write_generation_config,
)
from .corpus import Corpus, Episode, ingest_corpus, write_corpus
from .errors import ValidationError
from .evaluation import (
    EgfbDistribution,
    attribute_yes_rates,
    attributes_table,
    egfb_score,
    egfb_table,
    load_judgments,
    load_summaries,
    rouge_l,
    rouge_table,
    RougeScore,
)
from .extractive import ExtractionConfig, coarse_extract, load_entity_file
from .filtering import (
    FilePromoDetector,
    FilterConfig,
    RulePromoDetector,
    run_filter_cascade,
    split_corpus,
)

__all__ = ["main", "PipelineConfig"]

log = logging.getLogger("podsum")


@dataclass(frozen=True)
class PipelineConfig:
    """Effective settings of one CLI run, serializable for reproduction."""

    command: str
    options: dict

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "PipelineConfig":
        options = {}
        for key, value in sorted(vars(args).items()):
            if key in ("func", "command"):
                continue
            options[key] = str(value) if isinstance(value, Path) else value
        return cls(command=args.command, options=options)

    def write(self, out_dir: Path) -> None:
        path = out_dir / f"{self.command}_config.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({"command": self.command, "options": self.options}, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _env_name(flag: str) -> str:
    return "PODSUM_" + flag.lstrip("-").upper().replace("-", "_")


def _env_default(flag: str, cast: Callable, fallback):
    raw = os.environ.get(_env_name(flag))
    if raw is None:
        return fallback
    try:
        if cast is bool:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        return cast(raw)
    except ValueError as exc:
        raise ValidationError(f"{_env_name(flag)}: cannot parse value '{raw}'") from exc


def _add_option(parser: argparse.ArgumentParser, flag: str, *, cast=str, default=None, required=False, help="", action=None):
    """Define an option whose default can come from the environment."""
    env_value = _env_default(flag, cast, None)
    if action == "store_true":
        parser.add_argument(flag, action="store_true", default=bool(env_value) if env_value is not None else False, help=help)
        return
    effective_default = env_value if env_value is not None else default
    parser.add_argument(
        flag,
        type=cast,
        default=effective_default,
        required=required and effective_default is None,
        help=help + (f" (env {_env_name(flag)})" if help else ""),
    )


def _add_common(parser: argparse.ArgumentParser) -> None:
    _add_option(parser, "--out-dir", cast=Path, required=True, help="directory for all outputs")
    _add_option(parser, "--seed", cast=int, default=0, help="seed for all randomized steps")
    _add_option(parser, "--workers", cast=int, default=1, help="parallel workers for per-episode stages")
    _add_option(parser, "--verbose", action="store_true", help="debug logging")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="podsum",
        description="Corpus preparation, extractive selection, and scoring for podcast summarization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_filter = sub.add_parser("filter", help="run the description filter cascade and the data split")
    p_filter.add_argument("input", type=Path, help="episodes JSONL")
    _add_option(p_filter, "--min-desc-chars", cast=int, default=10, help="minimum trimmed description length")
    _add_option(p_filter, "--max-desc-chars", cast=int, default=1300, help="maximum trimmed description length")
    _add_option(p_filter, "--dedup-threshold", cast=float, default=0.8, help="TF-IDF cosine at or above which a description is a duplicate")
    _add_option(p_filter, "--holdout-val", cast=int, default=1000, help="validation holdout size")
    _add_option(p_filter, "--holdout-test", cast=int, default=1000, help="test holdout size")
    _add_option(p_filter, "--promo-labels", cast=Path, help="JSONL of per-sentence promo flags; default is the rule detector")
    _add_common(p_filter)
    p_filter.set_defaults(func=cmd_filter)

    p_prepare = sub.add_parser("prepare", help="emit category-conditioned training inputs")
    p_prepare.add_argument("input", type=Path, help="episodes JSONL (filtered)")
    _add_option(p_prepare, "--taxonomy", cast=Path, help="category collapse map TSV; default is the built-in 22-label map")
    _add_option(p_prepare, "--max-input-tokens", cast=int, default=1024, help="token budget for category tokens plus transcript")
    _add_option(p_prepare, "--min-summary-tokens", cast=int, default=50, help="decode-time lower bound, echoed to generation config")
    _add_option(p_prepare, "--max-summary-tokens", cast=int, default=250, help="decode-time upper bound, echoed to generation config")
    _add_option(p_prepare, "--inference", action="store_true", help="allow empty targets (inference emission)")
    _add_common(p_prepare)
    p_prepare.set_defaults(func=cmd_prepare)

    p_extract = sub.add_parser("extract", help="entity-biased extractive selection per episode")
    p_extract.add_argument("input", type=Path, help="episodes JSONL (filtered)")
    _add_option(p_extract, "--entities", cast=Path, help="precomputed entity spans JSONL; default is the capitalization fallback")
    _add_option(p_extract, "--k-s", cast=int, default=7, help="segments kept by content centrality")
    _add_option(p_extract, "--k-t", cast=int, default=3, help="extra segments kept by entity centrality")
    _add_option(p_extract, "--segment-seconds", cast=float, default=60.0, help="target segment duration")
    _add_option(p_extract, "--untimed-window", cast=int, default=150, help="token window for untimed transcripts")
    _add_option(p_extract, "--similarity", cast=str, default="jaccard", help="overlap normalizer: jaccard, overlap, or dice")
    _add_option(p_extract, "--max-input-tokens", cast=int, default=1024, help="cap on rendered extract length")
    _add_option(p_extract, "--inference", action="store_true", help="allow empty targets (inference emission)")
    _add_common(p_extract)
    p_extract.set_defaults(func=cmd_extract)

    p_score = sub.add_parser("score", help="ROUGE-L and/or EGFB reports")
    _add_option(p_score, "--summaries", cast=Path, help="candidate summaries JSONL ({episode_id, summary})")
    _add_option(p_score, "--references", cast=Path, help="episodes JSONL supplying reference descriptions")
    _add_option(p_score, "--system-name", cast=str, default="system", help="row label for the ROUGE table")
    _add_option(p_score, "--judgments", cast=Path, help="human judgments JSONL ({episode_id, grade, attributes})")
    _add_option(p_score, "--egfb-shares", cast=Path, help="published grade shares JSONL ({name, e, g, f, b})")
    _add_option(p_score, "--egfb-sum-tolerance", cast=float, default=0.05, help="allowed deviation of percentage shares from 100")
    _add_common(p_score)
    p_score.set_defaults(func=cmd_score)

    return parser


def _pmap(fn: Callable, items: Sequence, workers: int) -> list:
    """Order-preserving map, optionally across processes.

    Results are identical for any worker count; only wall time changes.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    if "fork" in multiprocessing.get_all_start_methods():
        ctx = multiprocessing.get_context("fork")
    else:
        ctx = multiprocessing.get_context()
    chunksize = max(1, len(items) // (workers * 4))
    with ctx.Pool(processes=workers) as pool:
        return pool.map(fn, items, chunksize=chunksize)


def _prepare_out_dir(args: argparse.Namespace) -> Path:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


def _write_jsonl(path: Path, rows: Sequence[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def cmd_filter(args: argparse.Namespace) -> int:
    corpus = ingest_corpus(args.input)
    if len(corpus) == 0:
        raise ValidationError(f"{args.input}: input corpus is empty")
    config = FilterConfig(
        min_desc_chars=args.min_desc_chars,
        max_desc_chars=args.max_desc_chars,
        dedup_threshold=args.dedup_threshold,
        holdout_val=args.holdout_val,
        holdout_test=args.holdout_test,
        seed=args.seed,
    )
    detector = (
        FilePromoDetector.from_path(args.promo_labels)
        if args.promo_labels
        else RulePromoDetector()
    )
    filtered, report = run_filter_cascade(corpus, config, detector)
    train, val, test = split_corpus(filtered, config)
    out_dir = _prepare_out_dir(args)
    write_corpus(filtered, out_dir / "filtered.jsonl")
    write_corpus(train, out_dir / "train.jsonl")
    write_corpus(val, out_dir / "val.jsonl")
    write_corpus(test, out_dir / "test.jsonl")
    report_obj = report.to_dict()
    report_obj["split_sizes"] = {"train": len(train), "val": len(val), "test": len(test)}
    _write_json(out_dir / "filter_report.json", report_obj)
    PipelineConfig.from_args(args).write(out_dir)
    log.info(
        "filter: %d -> %d episodes; splits %d/%d/%d",
        len(corpus), len(filtered), len(train), len(val), len(test),
    )
    return 0


def _prepare_one(episode: Episode, tax: CategoryTaxonomy, max_input_tokens: int):
    return build_conditioned_input(episode, tax, max_input_tokens)


def cmd_prepare(args: argparse.Namespace) -> int:
    corpus = ingest_corpus(args.input)
    tax = load_taxonomy(args.taxonomy) if args.taxonomy else default_taxonomy()
    worker = partial(_prepare_one, tax=tax, max_input_tokens=args.max_input_tokens)
    inputs = _pmap(worker, corpus.episodes, args.workers)
    out_dir = _prepare_out_dir(args)
    emit_training_file(inputs, out_dir / "conditioned.jsonl", require_targets=not args.inference)
    write_generation_config(
        out_dir / "generation_config.json",
        max_input_tokens=args.max_input_tokens,
        min_summary_tokens=args.min_summary_tokens,
        max_summary_tokens=args.max_summary_tokens,
    )
    unknown = {}
    for episode in corpus:
        for raw in sorted(episode.categories):
            if raw not in tax.mapping:
                unknown[raw] = unknown.get(raw, 0) + 1
    _write_json(
        out_dir / "prepare_report.json",
        {"episodes": len(corpus), "unknown_categories": unknown},
    )
    PipelineConfig.from_args(args).write(out_dir)
    if unknown:
        log.warning("%d distinct unknown category labels passed through", len(unknown))
    log.info("prepare: %d conditioned inputs written", len(corpus))
    return 0


def _extract_one(episode: Episode, config: ExtractionConfig, entity_table):
    if entity_table is None:
        spans = None
    elif episode.id in entity_table:
        spans = entity_table[episode.id]
    else:
        raise ValidationError(f"entity file has no entry for episode '{episode.id}'")
    return coarse_extract(episode, config, spans)


def cmd_extract(args: argparse.Namespace) -> int:
    corpus = ingest_corpus(args.input)
    config = ExtractionConfig(
        k_s=args.k_s,
        k_t=args.k_t,
        segment_seconds=args.segment_seconds,
        untimed_window=args.untimed_window,
        max_input_tokens=args.max_input_tokens,
        similarity=args.similarity,
    )
    entity_table = load_entity_file(args.entities) if args.entities else None
    worker = partial(_extract_one, config=config, entity_table=entity_table)
    results = _pmap(worker, corpus.episodes, args.workers)
    n_untimed = sum(1 for r in results if not r.timed)
    if n_untimed:
        log.info(
            "%d of %d episodes lack timings; segmented with fixed %d-token windows",
            n_untimed, len(results), args.untimed_window,
        )
    if not args.inference:
        for episode, result in zip(corpus, results):
            if not episode.description.strip():
                raise ValidationError(
                    f"episode '{episode.id}' has an empty training target"
                )
    out_dir = _prepare_out_dir(args)
    _write_jsonl(
        out_dir / "extracted.jsonl",
        [
            {"id": ep.id, "source": res.text, "target": ep.description}
            for ep, res in zip(corpus, results)
        ],
    )
    _write_jsonl(
        out_dir / "selections.jsonl",
        [
            {
                "episode_id": res.episode_id,
                "segments": list(res.selection.indices),
                "n_segments": len(res.segments),
                "timed": res.timed,
            }
            for res in results
        ],
    )
    PipelineConfig.from_args(args).write(out_dir)
    log.info("extract: %d episodes processed", len(results))
    return 0


def _rouge_pair(pair: tuple[str, str]) -> RougeScore:
    return rouge_l(pair[0], pair[1])


def cmd_score(args: argparse.Namespace) -> int:
    if not (args.summaries or args.judgments or args.egfb_shares):
        raise ValidationError(
            "nothing to score: pass --summaries with --references, --judgments, "
            "or --egfb-shares"
        )
    out_dir = _prepare_out_dir(args)

    if args.summaries:
        if not args.references:
            raise ValidationError("--summaries requires --references for the descriptions")
        summaries = load_summaries(args.summaries)
        references = ingest_corpus(args.references)
        missing = [eid for eid, _ in summaries if eid not in references.by_id]
        if missing:
            raise ValidationError(
                "summaries reference unknown episode ids: " + ", ".join(sorted(missing))
            )
        pairs = [(summary, references.by_id[eid].description) for eid, summary in summaries]
        scores = _pmap(_rouge_pair, pairs, args.workers)
        n = len(scores)
        if n == 0:
            raise ValidationError(f"{args.summaries}: no summaries to score")
        mean = RougeScore(
            precision=sum(s.precision for s in scores) / n,
            recall=sum(s.recall for s in scores) / n,
            f1=sum(s.f1 for s in scores) / n,
        )
        _write_json(
            out_dir / "rouge_report.json",
            {
                "system": args.system_name,
                "n_pairs": n,
                "precision": mean.precision,
                "recall": mean.recall,
                "f1": mean.f1,
            },
        )
        _write_text(out_dir / "rouge_table.txt", rouge_table([(args.system_name, mean)]))
        log.info("score: ROUGE-L over %d pairs, F1 %.4f", n, mean.f1)

    if args.judgments:
        records = load_judgments(args.judgments)
        if not records:
            raise ValidationError(f"{args.judgments}: no judgment records")
        dist = EgfbDistribution.from_grades(rec.grade for rec in records)
        score = egfb_score(dist)
        rates = attribute_yes_rates(records)
        shares = dist.percentages()
        _write_json(
            out_dir / "egfb_report.json",
            {
                "n_judged": dist.n_judged,
                "counts": {"e": dist.e, "g": dist.g, "f": dist.f, "b": dist.b},
                "shares_pct": {"e": shares.e, "g": shares.g, "f": shares.f, "b": shares.b},
                "score": score,
                "attribute_yes_pct": rates,
            },
        )
        _write_text(out_dir / "egfb_table.txt", egfb_table([(args.system_name, dist, score)]))
        _write_text(out_dir / "attributes_table.txt", attributes_table(rates))
        log.info("score: EGFB %.4f over %d judgments", score, dist.n_judged)

    if args.egfb_shares:
        rows = []
        with open(args.egfb_shares, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                obj = json.loads(line)
                try:
                    name = obj["name"]
                    dist = EgfbDistribution(obj["e"], obj["g"], obj["f"], obj["b"])
                except (KeyError, TypeError) as exc:
                    raise ValidationError(
                        f"{args.egfb_shares}: line {lineno}: expected name/e/g/f/b"
                    ) from exc
                rows.append((name, dist, egfb_score(dist, args.egfb_sum_tolerance)))
        _write_json(
            out_dir / "egfb_scores.json",
            {name: score for name, _, score in rows},
        )
        _write_text(out_dir / "egfb_scores_table.txt", egfb_table(rows))
        log.info("score: %d published share rows scored", len(rows))

    PipelineConfig.from_args(args).write(out_dir)
    return 0


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        parser = build_parser()
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)
        _configure_logging(getattr(args, "verbose", False))
        return args.func(args)
    except ValidationError as exc:
        logging.basicConfig(stream=sys.stderr, level=logging.INFO)
        log.error("%s", exc)
        return 1
    except OSError as exc:
        logging.basicConfig(stream=sys.stderr, level=logging.INFO)
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
