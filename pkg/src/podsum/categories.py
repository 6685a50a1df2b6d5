"""Category label collapsing and category-token-conditioned input building.

Inputs for the downstream summarizer are the episode's category labels,
rendered as special tokens in lexicographic order, followed by the first
tokens of the transcript, with the whole line capped at a fixed budget.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

from .corpus import Episode, flatten_transcript, tokenize
from .errors import ValidationError

__all__ = [
    "CategoryTaxonomy",
    "load_taxonomy",
    "default_taxonomy",
    "collapse_category",
    "category_token",
    "make_special_tokens",
    "ConditionedInput",
    "build_conditioned_input",
    "emit_training_file",
    "write_generation_config",
]

log = logging.getLogger(__name__)


@dataclass
class CategoryTaxonomy:
    """Collapse map from raw feed labels to a fixed canonical label set.

    Canonical labels are the ones that map to themselves.  Unknown labels
    pass through :func:`collapse_category` unchanged but are counted in
    ``unknown_seen`` so a run can report them.
    """

    mapping: dict[str, str]
    canonical: frozenset[str] = field(init=False)
    unknown_seen: Counter = field(default_factory=Counter, init=False, compare=False)

    def __post_init__(self):
        canonical = frozenset(raw for raw, target in self.mapping.items() if raw == target)
        for raw, target in self.mapping.items():
            if target not in canonical:
                raise ValidationError(
                    f"taxonomy maps '{raw}' to '{target}', which is not a canonical label "
                    "(canonical labels are the ones mapping to themselves)"
                )
        self.canonical = canonical


def load_taxonomy(path) -> CategoryTaxonomy:
    """Read a two-column tab-separated collapse map; '#' starts a comment."""
    mapping: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split("\t")
            if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
                raise ValidationError(
                    f"{path}: line {lineno}: expected 'raw_label<TAB>canonical_label'"
                )
            raw, target = parts[0].strip(), parts[1].strip()
            if raw in mapping and mapping[raw] != target:
                raise ValidationError(
                    f"{path}: line {lineno}: conflicting mappings for '{raw}'"
                )
            mapping[raw] = target
    return CategoryTaxonomy(mapping)


def default_taxonomy() -> CategoryTaxonomy:
    """The collapse map shipped with the package (22 canonical labels)."""
    ref = resources.files("podsum").joinpath("data/taxonomy.tsv")
    with resources.as_file(ref) as path:
        return load_taxonomy(path)


def collapse_category(raw: str, tax: CategoryTaxonomy) -> str:
    """Map a raw label to its canonical form; unknown labels pass through."""
    if raw in tax.mapping:
        return tax.mapping[raw]
    tax.unknown_seen[raw] += 1
    log.warning("unknown category label %r passed through uncollapsed", raw)
    return raw


def category_token(label: str) -> str:
    """Render a label as a vocabulary-safe special token like ``<cat:comedy>``."""
    slug = "".join(ch if ch.isalnum() else "_" for ch in label.lower())
    return f"<cat:{slug}>"


def make_special_tokens(categories: Iterable[str]) -> list[str]:
    """Special tokens for a label set: deduplicated and sorted."""
    return sorted({category_token(label) for label in categories})


@dataclass(frozen=True)
class ConditionedInput:
    """One training/inference line: category tokens, then transcript prefix."""

    episode_id: str
    special_tokens: tuple[str, ...]
    body: tuple[str, ...]
    target: str

    @property
    def source(self) -> str:
        return " ".join((*self.special_tokens, *self.body))


def build_conditioned_input(
    episode: Episode,
    tax: CategoryTaxonomy,
    max_input_tokens: int = 1024,
) -> ConditionedInput:
    """Assemble the conditioned input for one episode.

    Category tokens count against ``max_input_tokens``, so the transcript
    body gets whatever budget they leave.
    """
    labels = {collapse_category(raw, tax) for raw in episode.categories}
    special = make_special_tokens(labels)
    if max_input_tokens <= len(special):
        raise ValidationError(
            f"episode '{episode.id}': max_input_tokens={max_input_tokens} leaves no "
            f"room for the transcript after {len(special)} category tokens"
        )
    budget = max_input_tokens - len(special)
    body = flatten_transcript(episode)[:budget]
    return ConditionedInput(
        episode_id=episode.id,
        special_tokens=tuple(special),
        body=tuple(body),
        target=episode.description,
    )


def emit_training_file(
    inputs: Sequence[ConditionedInput], path, require_targets: bool = True
) -> None:
    """Write inputs as JSONL ``{"id", "source", "target"}`` in given order.

    In training mode every target must be non-empty; inference emission
    passes ``require_targets=False``.  Validation happens before any line
    is written so a failed call leaves no partial file.
    """
    if require_targets:
        for ci in inputs:
            if not ci.target.strip():
                raise ValidationError(
                    f"episode '{ci.episode_id}' has an empty training target"
                )
    with open(path, "w", encoding="utf-8") as fh:
        for ci in inputs:
            line = {"id": ci.episode_id, "source": ci.source, "target": ci.target}
            fh.write(json.dumps(line, ensure_ascii=False) + "\n")


def write_generation_config(
    path,
    max_input_tokens: int = 1024,
    min_summary_tokens: int = 50,
    max_summary_tokens: int = 250,
) -> None:
    """Emit the decode-time bounds the downstream trainer should honor."""
    if not 0 < min_summary_tokens <= max_summary_tokens:
        raise ValidationError("summary token bounds must satisfy 0 < min <= max")
    config = {
        "max_input_tokens": max_input_tokens,
        "min_summary_tokens": min_summary_tokens,
        "max_summary_tokens": max_summary_tokens,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2, sort_keys=True)
        fh.write("\n")
