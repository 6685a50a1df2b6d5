"""Summary scoring: LCS-based ROUGE-L, EGFB quality scores, yes-rates.

ROUGE-L here is summary-level: one LCS over the full token sequences, so
numbers from sentence-level toolkit implementations may differ slightly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import tokenize
from .errors import ValidationError

__all__ = [
    "RougeScore",
    "lcs_length",
    "rouge_l",
    "aggregate_rouge",
    "EgfbDistribution",
    "egfb_score",
    "JudgmentRecord",
    "attribute_yes_rates",
    "load_summaries",
    "load_judgments",
    "format_table",
    "rouge_table",
    "egfb_table",
    "attributes_table",
]

GRADES = ("E", "G", "F", "B")
GRADE_WEIGHTS = {"E": 4.0, "G": 2.0, "F": 1.0, "B": 0.0}
N_ATTRIBUTES = 8


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest-common-subsequence length in O(|a|·|b|) time, O(min) memory."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        append = cur.append
        left = 0
        for j, y in enumerate(b, start=1):
            if x == y:
                left = prev[j - 1] + 1
            else:
                up = prev[j]
                left = left if left >= up else up
            append(left)
        prev = cur
    return prev[-1]


@dataclass(frozen=True)
class RougeScore:
    """Precision/recall/F1 triple, each in [0, 1]."""

    precision: float
    recall: float
    f1: float


def _f1(p: float, r: float) -> float:
    return 2.0 * p * r / (p + r) if p + r > 0 else 0.0


def rouge_l(candidate: str, reference: str) -> RougeScore:
    """Summary-level ROUGE-L of a candidate against one reference.

    Both texts are tokenized with the shared rule; either side empty after
    tokenization scores all zeros.
    """
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        return RougeScore(0.0, 0.0, 0.0)
    lcs = lcs_length(cand, ref)
    p = lcs / len(cand)
    r = lcs / len(ref)
    return RougeScore(p, r, _f1(p, r))


def aggregate_rouge(pairs: Sequence[tuple[str, str]]) -> RougeScore:
    """Macro-average: arithmetic mean of per-pair precision, recall, F1."""
    if not pairs:
        raise ValidationError("aggregate_rouge needs at least one pair")
    scores = [rouge_l(c, r) for c, r in pairs]
    n = len(scores)
    return RougeScore(
        precision=sum(s.precision for s in scores) / n,
        recall=sum(s.recall for s in scores) / n,
        f1=sum(s.f1 for s in scores) / n,
    )


@dataclass(frozen=True)
class EgfbDistribution:
    """Excellent/Good/Fair/Bad mass, as percentage shares or raw counts."""

    e: float
    g: float
    f: float
    b: float
    as_counts: bool = False
    n_judged: int | None = None

    def __post_init__(self):
        if min(self.e, self.g, self.f, self.b) < 0:
            raise ValidationError("EGFB shares must be non-negative")

    @classmethod
    def from_counts(cls, e: int, g: int, f: int, b: int) -> "EgfbDistribution":
        return cls(e, g, f, b, as_counts=True, n_judged=e + g + f + b)

    @classmethod
    def from_grades(cls, grades: Iterable[str]) -> "EgfbDistribution":
        counts = {grade: 0 for grade in GRADES}
        for grade in grades:
            if grade not in counts:
                raise ValidationError(f"unknown grade '{grade}', expected one of {GRADES}")
            counts[grade] += 1
        return cls.from_counts(counts["E"], counts["G"], counts["F"], counts["B"])

    def percentages(self) -> "EgfbDistribution":
        """Convert counts to percentage shares; identity if already shares."""
        if not self.as_counts:
            return self
        total = self.e + self.g + self.f + self.b
        if total == 0:
            raise ValidationError("cannot take percentages of zero judgments")
        return EgfbDistribution(
            100.0 * self.e / total,
            100.0 * self.g / total,
            100.0 * self.f / total,
            100.0 * self.b / total,
            n_judged=self.n_judged,
        )


def egfb_score(dist: EgfbDistribution, sum_tolerance: float = 0.05) -> float:
    """Weighted quality score in [0, 4] with weights E=4, G=2, F=1, B=0.

    Percentage shares must sum to 100 within ``sum_tolerance`` (published
    tables sometimes carry rounding residue; widen the tolerance to accept
    them).  Count distributions just take the weighted mean.
    """
    weighted = 4.0 * dist.e + 2.0 * dist.g + 1.0 * dist.f
    if dist.as_counts:
        total = dist.e + dist.g + dist.f + dist.b
        if total == 0:
            raise ValidationError("cannot score a distribution with zero judgments")
        return weighted / total
    total = dist.e + dist.g + dist.f + dist.b
    if abs(total - 100.0) > sum_tolerance:
        raise ValidationError(
            f"percentage shares sum to {total:.4f}, not 100 +/- {sum_tolerance}"
        )
    return weighted / 100.0


@dataclass(frozen=True)
class JudgmentRecord:
    """One human judgment: an overall grade plus 8 yes/no attributes."""

    episode_id: str
    grade: str
    attributes: tuple[bool, ...]

    def __post_init__(self):
        if self.grade not in GRADES:
            raise ValidationError(
                f"episode '{self.episode_id}': grade must be one of {GRADES}, "
                f"got '{self.grade}'"
            )
        if len(self.attributes) != N_ATTRIBUTES:
            raise ValidationError(
                f"episode '{self.episode_id}': expected {N_ATTRIBUTES} attribute "
                f"answers, got {len(self.attributes)}"
            )


def attribute_yes_rates(records: Sequence[JudgmentRecord]) -> list[float]:
    """Per-attribute percentage of yes answers, rounded to one decimal."""
    if not records:
        raise ValidationError("attribute_yes_rates needs at least one record")
    n = len(records)
    return [
        round(100.0 * sum(rec.attributes[q] for rec in records) / n, 1)
        for q in range(N_ATTRIBUTES)
    ]


def load_summaries(path) -> list[tuple[str, str]]:
    """Read ``{"episode_id", "summary"}`` JSONL, preserving order."""
    pairs: list[tuple[str, str]] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            if not isinstance(obj, dict) or "episode_id" not in obj or "summary" not in obj:
                raise ValidationError(
                    f"{path}: line {lineno}: expected an object with 'episode_id' and 'summary'"
                )
            eid = obj["episode_id"]
            if eid in seen:
                raise ValidationError(f"{path}: line {lineno}: duplicate summary for '{eid}'")
            seen.add(eid)
            pairs.append((eid, obj["summary"]))
    return pairs


def load_judgments(path) -> list[JudgmentRecord]:
    """Read JudgmentRecord JSONL: ``{"episode_id", "grade", "attributes"}``."""
    records: list[JudgmentRecord] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            try:
                records.append(
                    JudgmentRecord(
                        episode_id=obj["episode_id"],
                        grade=obj["grade"],
                        attributes=tuple(bool(a) for a in obj["attributes"]),
                    )
                )
            except (KeyError, TypeError) as exc:
                raise ValidationError(f"{path}: line {lineno}: malformed judgment") from exc
    return records


def format_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    """Left-align the first column, right-align the rest, pad with spaces."""
    table = [list(headers)] + [list(r) for r in rows]
    widths = [max(len(row[c]) for row in table) for c in range(len(headers))]
    lines = []
    for row in table:
        cells = [row[0].ljust(widths[0])]
        cells += [row[c].rjust(widths[c]) for c in range(1, len(row))]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def rouge_table(rows: Sequence[tuple[str, RougeScore]]) -> str:
    """Systems as rows, P/R/F1 as percentage columns."""
    body = [
        [name, f"{s.precision * 100:.2f}", f"{s.recall * 100:.2f}", f"{s.f1 * 100:.2f}"]
        for name, s in rows
    ]
    return format_table(["system", "precision", "recall", "f1"], body)


def egfb_table(rows: Sequence[tuple[str, EgfbDistribution, float]]) -> str:
    """Systems as rows, grade shares plus the aggregate score."""
    body = []
    for name, dist, score in rows:
        shares = dist.percentages() if dist.as_counts else dist
        body.append(
            [
                name,
                f"{shares.e:.2f}",
                f"{shares.g:.2f}",
                f"{shares.f:.2f}",
                f"{shares.b:.2f}",
                f"{score:.2f}",
            ]
        )
    return format_table(["system", "E", "G", "F", "B", "score"], body)


def attributes_table(rates: Sequence[float]) -> str:
    """Yes-rate per attribute question, one row per question."""
    body = [[f"Q{q + 1}", f"{rate:.1f}"] for q, rate in enumerate(rates)]
    return format_table(["attribute", "yes_pct"], body)
