"""Description-quality filters, near-duplicate removal, and the data split.

The cascade runs length bounds, then TF-IDF near-duplicate removal, then
promotional-sentence scrubbing.  Every stage reports which episodes it
removed or edited, and the counts always reconcile with the input size.
"""

from __future__ import annotations

import json
import logging
import math
import random
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Protocol, Sequence

from .corpus import Corpus, Episode, tokenize
from .errors import ValidationError

__all__ = [
    "FilterConfig",
    "StageReport",
    "FilterReport",
    "description_length",
    "filter_by_length",
    "tfidf_vectors",
    "cosine",
    "dedup_similar",
    "split_sentences",
    "RulePromoDetector",
    "FilePromoDetector",
    "scrub_promotions",
    "scrub_corpus",
    "run_filter_cascade",
    "split_corpus",
]

log = logging.getLogger(__name__)

TfIdfVector = dict[str, float]


@dataclass(frozen=True)
class FilterConfig:
    """Thresholds for the filter cascade and the holdout split."""

    min_desc_chars: int = 10
    max_desc_chars: int = 1300
    dedup_threshold: float = 0.8
    holdout_val: int = 1000
    holdout_test: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.min_desc_chars < 0:
            raise ValidationError("min_desc_chars must be >= 0")
        if self.max_desc_chars < self.min_desc_chars:
            raise ValidationError("max_desc_chars must be >= min_desc_chars")
        if not 0.0 <= self.dedup_threshold <= 1.0:
            raise ValidationError("dedup_threshold must be in [0, 1]")
        if self.holdout_val < 0 or self.holdout_test < 0:
            raise ValidationError("holdout sizes must be >= 0")


@dataclass
class StageReport:
    """What one filter stage did: removals plus in-place edits."""

    name: str
    input_size: int
    removed: dict[str, str] = field(default_factory=dict)
    modified: dict[str, str] = field(default_factory=dict)

    @property
    def retained_size(self) -> int:
        return self.input_size - len(self.removed)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "input_size": self.input_size,
            "retained_size": self.retained_size,
            "removed": dict(self.removed),
            "modified": dict(self.modified),
        }


@dataclass
class FilterReport:
    """Stage-by-stage account of a cascade run.

    Invariant: for each stage, input size equals retained size plus the
    number of removals, and consecutive stages chain.
    """

    input_size: int
    retained_size: int
    stages: list[StageReport]

    def to_dict(self) -> dict:
        return {
            "input_size": self.input_size,
            "retained_size": self.retained_size,
            "stages": [s.to_dict() for s in self.stages],
        }


def _single_stage_report(stage: StageReport) -> FilterReport:
    return FilterReport(stage.input_size, stage.retained_size, [stage])


def combine_reports(reports: Sequence[FilterReport]) -> FilterReport:
    if not reports:
        raise ValidationError("cannot combine zero filter reports")
    stages = [s for r in reports for s in r.stages]
    return FilterReport(reports[0].input_size, reports[-1].retained_size, stages)


def description_length(episode: Episode) -> int:
    """Character count of the description after trimming outer whitespace."""
    return len(episode.description.strip())


def filter_by_length(corpus: Corpus, config: FilterConfig) -> tuple[Corpus, FilterReport]:
    """Drop episodes whose trimmed description is too short or too long.

    Bounds are inclusive: lengths in ``[min_desc_chars, max_desc_chars]``
    survive.
    """
    stage = StageReport("length", len(corpus))
    kept = []
    for ep in corpus:
        n = description_length(ep)
        if n < config.min_desc_chars:
            stage.removed[ep.id] = f"description too short ({n} < {config.min_desc_chars} chars)"
        elif n > config.max_desc_chars:
            stage.removed[ep.id] = f"description too long ({n} > {config.max_desc_chars} chars)"
        else:
            kept.append(ep)
    return Corpus(kept), _single_stage_report(stage)


def tfidf_vectors(documents: Sequence[str]) -> list[TfIdfVector]:
    """TF-IDF weights for each document against the given pool.

    Term frequency is the raw count; idf is ``ln(N / (1 + df)) + 1`` with
    ``N`` the pool size and ``df`` the number of pool documents containing
    the term.  Weights are strictly positive for present terms.
    """
    if not documents:
        raise ValidationError("tfidf_vectors needs at least one document")
    counts = [Counter(tokenize(doc)) for doc in documents]
    df: Counter[str] = Counter()
    for c in counts:
        df.update(c.keys())
    n = len(documents)
    idf = {term: math.log(n / (1 + k)) + 1.0 for term, k in df.items()}
    return [{term: tf * idf[term] for term, tf in c.items()} for c in counts]


def cosine(a: TfIdfVector, b: TfIdfVector) -> float:
    """Cosine similarity of two sparse vectors; 0.0 when either is all-zero.

    Iterates shared terms in sorted order so the result is exactly
    symmetric despite float rounding.
    """
    if not a or not b:
        return 0.0
    norm_a = math.sqrt(sum(w * w for w in a.values()))
    norm_b = math.sqrt(sum(w * w for w in b.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    dot = sum(a[t] * b[t] for t in sorted(a.keys() & b.keys()))
    return min(1.0, dot / (norm_a * norm_b))


def dedup_similar(corpus: Corpus, config: FilterConfig) -> tuple[Corpus, FilterReport]:
    """Remove descriptions that nearly repeat earlier ones or the show blurb.

    Episodes are scanned per show in ascending id order.  An episode is
    dropped when its description's TF-IDF cosine against the show
    description, or against any retained earlier description, reaches the
    threshold.  The TF-IDF pool is all of the show's input descriptions
    plus the show description.
    """
    stage = StageReport("dedup", len(corpus))
    removed: set[str] = set()
    for show_id, episodes in corpus.by_show.items():
        ordered = sorted(episodes, key=lambda e: e.id)
        pool = [ep.description for ep in ordered] + [ordered[0].show_description]
        vectors = tfidf_vectors(pool)
        show_vec = vectors[-1]
        kept_vecs: list[tuple[str, TfIdfVector]] = []
        for ep, vec in zip(ordered, vectors):
            sim_show = cosine(vec, show_vec)
            if sim_show >= config.dedup_threshold:
                stage.removed[ep.id] = (
                    f"description repeats show description (cosine {sim_show:.3f})"
                )
                removed.add(ep.id)
                continue
            dup_of = None
            for kept_id, kept_vec in kept_vecs:
                if cosine(vec, kept_vec) >= config.dedup_threshold:
                    dup_of = kept_id
                    break
            if dup_of is not None:
                stage.removed[ep.id] = f"description repeats episode '{dup_of}'"
                removed.add(ep.id)
            else:
                kept_vecs.append((ep.id, vec))
    kept = [ep for ep in corpus if ep.id not in removed]
    return Corpus(kept), _single_stage_report(stage)


_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")


def split_sentences(text: str) -> list[str]:
    """Split on sentence-final punctuation followed by whitespace."""
    stripped = text.strip()
    if not stripped:
        return []
    return [s for s in _SENTENCE_SPLIT.split(stripped) if s]


class PromoDetector(Protocol):
    """Flags promotional sentences within an episode description."""

    def flags(self, episode_id: str, sentences: Sequence[str]) -> list[bool]: ...


_PROMO_PATTERNS: tuple[re.Pattern, ...] = (
    re.compile(r"https?://\S+", re.IGNORECASE),
    re.compile(r"\bwww\.\S+", re.IGNORECASE),
    re.compile(r"@\w+"),
    re.compile(r"\bsubscribe\b", re.IGNORECASE),
    re.compile(r"\bsponsored by\b", re.IGNORECASE),
    re.compile(r"\bpromo code\b", re.IGNORECASE),
    re.compile(r"\bpatreon\b", re.IGNORECASE),
)


class RulePromoDetector:
    """Pattern-based detector: URLs, handles, and sponsorship boilerplate."""

    patterns: tuple[re.Pattern, ...] = _PROMO_PATTERNS

    def flags(self, episode_id: str, sentences: Sequence[str]) -> list[bool]:
        return [any(p.search(s) for p in self.patterns) for s in sentences]


class FilePromoDetector:
    """Detector backed by precomputed per-sentence labels.

    The label table maps episode id to a list of booleans, one per
    sentence of the description in :func:`split_sentences` order.
    """

    def __init__(self, table: dict[str, list[bool]]):
        self.table = table

    @classmethod
    def from_path(cls, path) -> "FilePromoDetector":
        table: dict[str, list[bool]] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                obj = json.loads(line)
                if not isinstance(obj, dict) or "episode_id" not in obj or "flags" not in obj:
                    raise ValidationError(
                        f"{path}: line {lineno}: expected an object with 'episode_id' and 'flags'"
                    )
                flags = obj["flags"]
                if not all(isinstance(f, bool) for f in flags):
                    raise ValidationError(f"{path}: line {lineno}: flags must be booleans")
                table[obj["episode_id"]] = list(flags)
        return cls(table)

    def flags(self, episode_id: str, sentences: Sequence[str]) -> list[bool]:
        if episode_id not in self.table:
            raise ValidationError(f"promo label table has no entry for episode '{episode_id}'")
        flags = self.table[episode_id]
        if len(flags) != len(sentences):
            raise ValidationError(
                f"episode '{episode_id}': {len(flags)} promo labels for "
                f"{len(sentences)} sentences"
            )
        return list(flags)


def scrub_promotions(episode: Episode, detector: PromoDetector) -> Episode:
    """Return the episode with flagged description sentences removed."""
    sentences = split_sentences(episode.description)
    if not sentences:
        return episode
    flags = detector.flags(episode.id, sentences)
    kept = [s for s, flagged in zip(sentences, flags) if not flagged]
    if len(kept) == len(sentences):
        return episode
    return replace(episode, description=" ".join(kept))


def scrub_corpus(
    corpus: Corpus, detector: PromoDetector | None = None
) -> tuple[Corpus, FilterReport]:
    """Scrub every description; removes sentences, never episodes."""
    detector = detector or RulePromoDetector()
    stage = StageReport("scrub", len(corpus))
    out = []
    for ep in corpus:
        scrubbed = scrub_promotions(ep, detector)
        if scrubbed.description != ep.description:
            before = len(split_sentences(ep.description))
            after = len(split_sentences(scrubbed.description))
            stage.modified[ep.id] = f"removed {before - after} of {before} sentences"
        out.append(scrubbed)
    return Corpus(out), _single_stage_report(stage)


def run_filter_cascade(
    corpus: Corpus,
    config: FilterConfig | None = None,
    detector: PromoDetector | None = None,
) -> tuple[Corpus, FilterReport]:
    """Length filter, then near-duplicate removal, then promo scrubbing."""
    config = config or FilterConfig()
    corpus, length_report = filter_by_length(corpus, config)
    corpus, dedup_report = dedup_similar(corpus, config)
    corpus, scrub_report = scrub_corpus(corpus, detector)
    report = combine_reports([length_report, dedup_report, scrub_report])
    log.info(
        "filter cascade: %d in, %d out (%d removed)",
        report.input_size,
        report.retained_size,
        report.input_size - report.retained_size,
    )
    return corpus, report


def split_corpus(corpus: Corpus, config: FilterConfig) -> tuple[Corpus, Corpus, Corpus]:
    """Carve seeded validation and test holdouts out of the corpus.

    Returns ``(train, val, test)``.  Episode ids are shuffled with
    ``random.Random(config.seed)``; the first ``holdout_test`` shuffled ids
    form the test set, the next ``holdout_val`` the validation set.  Each
    split preserves corpus order, and the three splits partition the input.
    """
    needed = config.holdout_val + config.holdout_test
    if len(corpus) < needed:
        raise ValidationError(
            f"corpus has {len(corpus)} episodes, fewer than the "
            f"{needed} needed for the holdout splits"
        )
    ids = [ep.id for ep in corpus]
    rng = random.Random(config.seed)
    rng.shuffle(ids)
    test_ids = set(ids[: config.holdout_test])
    val_ids = set(ids[config.holdout_test : config.holdout_test + config.holdout_val])
    train, val, test = [], [], []
    for ep in corpus:
        if ep.id in test_ids:
            test.append(ep)
        elif ep.id in val_ids:
            val.append(ep)
        else:
            train.append(ep)
    return Corpus(train), Corpus(val), Corpus(test)
