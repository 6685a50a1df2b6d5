"""Entity-biased extractive selection over timed transcript segments.

The pipeline: annotate entity spans (external file or a capitalization
fallback), cut the transcript into roughly 60-second segments, build two
pairwise word-overlap graphs (content tokens and entity tokens), rank
segments by degree centrality in each graph, and keep the top content
segments plus the top entity segments, emitted in position order.
"""

from __future__ import annotations

import json
import logging
from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence

from .corpus import _PUNCT, Episode, FlatTranscript, flat_transcript, truncate_to_tokens
from .errors import ValidationError

__all__ = [
    "STOPWORDS",
    "ENTITY_STOPLIST",
    "EntitySpan",
    "Segment",
    "SegmentGraph",
    "ExtractiveSelection",
    "ExtractionConfig",
    "ExtractionResult",
    "fallback_entity_spans",
    "annotate_entities",
    "load_entity_file",
    "segment_transcript",
    "overlap_similarity",
    "build_segment_graph",
    "select_segments",
    "render_selection",
    "coarse_extract",
]

log = logging.getLogger(__name__)

# Function words removed from content-token sets before similarity; entity
# token sets are never filtered.
STOPWORDS: frozenset[str] = frozenset(
    """
    a about above after again against all am an and any are aren't as at be
    because been before being below between both but by can can't cannot could
    couldn't did didn't do does doesn't doing don't down during each few for
    from further had hadn't has hasn't have haven't having he he'd he'll he's
    her here here's hers herself him himself his how how's i i'd i'll i'm i've
    if in into is isn't it it's its itself let's me more most mustn't my
    myself no nor not of off on once only or other ought our ours ourselves
    out over own same shan't she she'd she'll she's should shouldn't so some
    such than that that's the their theirs them themselves then there there's
    these they they'd they'll they're they've this those through to too under
    until up very was wasn't we we'd we'll we're we've were weren't what
    what's when when's where where's which while who who's whom why why's with
    won't would wouldn't you you'd you'll you're you've your yours yourself
    yourselves yeah yes just like really gonna got get so um uh oh okay ok
    """.split()
)

# Capitalized words that the fallback annotator must never treat as names.
# Curly-apostrophe variants cover transcripts with typographic quotes.
ENTITY_STOPLIST: frozenset[str] = frozenset(
    [
        "I", "I'm", "I'll", "I've", "I'd",
        "I’m", "I’ll", "I’ve", "I’d",
        "OK", "Okay", "TV",
    ]
)

def _edge_stripped(word: str) -> str:
    return word.strip(_PUNCT)


@dataclass(frozen=True)
class EntitySpan:
    """A named-entity mention as a half-open token range.

    Indices refer to the episode's flattened token stream; ``surface`` is
    the mention as written, with edge punctuation removed.
    """

    start_token: int
    end_token: int
    surface: str

    def __post_init__(self):
        if self.start_token < 0 or self.end_token <= self.start_token:
            raise ValidationError(
                f"entity span [{self.start_token}, {self.end_token}) is empty or negative"
            )


@dataclass(frozen=True)
class Segment:
    """A contiguous slice of transcript: the node unit of the graphs.

    ``start_s``/``end_s`` are audio seconds for timed episodes and ``None``
    for untimed ones, where ``token_start``/``token_end`` carry the window
    bounds instead.  ``content_tokens`` is the stopword-free token-type
    set; ``entity_tokens`` holds token types drawn from entity spans.
    """

    index: int
    token_start: int
    token_end: int
    text: str
    content_tokens: frozenset[str]
    entity_tokens: frozenset[str]
    start_s: float | None = None
    end_s: float | None = None


@dataclass(frozen=True)
class SegmentGraph:
    """Pairwise similarity matrices plus their degree centralities.

    Both matrices are symmetric with a zero diagonal; centrality i is the
    sum of row i, so the self term is excluded.
    """

    sim_s: tuple[tuple[float, ...], ...]
    sim_t: tuple[tuple[float, ...], ...]
    c_s: tuple[float, ...]
    c_t: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.c_s)


@dataclass(frozen=True)
class ExtractiveSelection:
    """Chosen segment indices, ascending and duplicate-free."""

    indices: tuple[int, ...]

    def __post_init__(self):
        if list(self.indices) != sorted(set(self.indices)):
            raise ValidationError("selection indices must be sorted and unique")


@dataclass(frozen=True)
class ExtractionConfig:
    """Knobs for the extractive pipeline."""

    k_s: int = 7
    k_t: int = 3
    segment_seconds: float = 60.0
    untimed_window: int = 150
    max_input_tokens: int = 1024
    similarity: str = "jaccard"

    def __post_init__(self):
        if self.k_s < 0 or self.k_t < 0:
            raise ValidationError("selection quotas must be >= 0")
        if self.segment_seconds <= 0:
            raise ValidationError("segment_seconds must be positive")
        if self.untimed_window <= 0:
            raise ValidationError("untimed_window must be positive")
        if self.similarity not in ("jaccard", "overlap", "dice"):
            raise ValidationError(f"unknown similarity mode '{self.similarity}'")


@dataclass(frozen=True)
class ExtractionResult:
    """Everything the pipeline produced for one episode."""

    episode_id: str
    selection: ExtractiveSelection
    segments: tuple[Segment, ...]
    text: str
    timed: bool


def _is_candidate(raw_word: str) -> bool:
    stripped = _edge_stripped(raw_word)
    if not stripped or stripped in ENTITY_STOPLIST:
        return False
    first = stripped[0]
    return first.isalpha() and first.isupper()


def _ends_sentence(raw_word: str) -> bool:
    trimmed = raw_word.rstrip("\"'”’)»]")
    return bool(trimmed) and trimmed[-1] in ".!?"


def _starts_sentence(flat: FlatTranscript, i: int) -> bool:
    if i == 0:
        return True
    if flat.utt_index[i] != flat.utt_index[i - 1]:
        return True
    return _ends_sentence(flat.raw[i - 1])


def fallback_entity_spans(
    episode: Episode, flat: FlatTranscript | None = None
) -> list[EntitySpan]:
    """Heuristic entity mentions: maximal runs of capitalized words.

    Runs are detected on the raw, pre-lowercasing text and never cross a
    sentence boundary.  A run of length one that merely starts a sentence
    is discarded, as are stoplist words, so ordinary sentence openers do
    not count as names.
    """
    flat = flat if flat is not None else flat_transcript(episode)
    spans: list[EntitySpan] = []
    n = len(flat.raw)
    i = 0
    while i < n:
        if not _is_candidate(flat.raw[i]):
            i += 1
            continue
        j = i + 1
        while j < n and _is_candidate(flat.raw[j]) and not _starts_sentence(flat, j):
            j += 1
        if not (j - i == 1 and _starts_sentence(flat, i)):
            surface = " ".join(_edge_stripped(flat.raw[k]) for k in range(i, j))
            spans.append(EntitySpan(i, j, surface))
        i = j
    return spans


def _validate_spans(
    episode_id: str, spans: Sequence[EntitySpan], n_tokens: int
) -> list[EntitySpan]:
    ordered = sorted(spans, key=lambda s: (s.start_token, s.end_token))
    prev_end = 0
    for span in ordered:
        if span.end_token > n_tokens:
            raise ValidationError(
                f"episode '{episode_id}': entity span [{span.start_token}, "
                f"{span.end_token}) exceeds transcript length {n_tokens}"
            )
        if span.start_token < prev_end:
            raise ValidationError(
                f"episode '{episode_id}': entity spans overlap at token {span.start_token}"
            )
        prev_end = span.end_token
    return ordered


def annotate_entities(
    episode: Episode,
    spans: Sequence[EntitySpan] | None = None,
    flat: FlatTranscript | None = None,
) -> list[EntitySpan]:
    """Entity spans for an episode: externally supplied or the fallback.

    External spans are validated (in-range, non-overlapping) and returned
    sorted; ``spans=None`` runs the capitalization fallback.
    """
    flat = flat if flat is not None else flat_transcript(episode)
    if spans is None:
        return fallback_entity_spans(episode, flat)
    return _validate_spans(episode.id, spans, len(flat))


def load_entity_file(path) -> dict[str, list[EntitySpan]]:
    """Read precomputed spans: JSONL of ``{"episode_id", "spans": [...]}``."""
    table: dict[str, list[EntitySpan]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            if not isinstance(obj, dict) or "episode_id" not in obj or "spans" not in obj:
                raise ValidationError(
                    f"{path}: line {lineno}: expected an object with 'episode_id' and 'spans'"
                )
            spans = [
                EntitySpan(s["start_token"], s["end_token"], s.get("surface", ""))
                for s in obj["spans"]
            ]
            table[obj["episode_id"]] = spans
    return table


def _assign_entity_tokens(
    segments_bounds: list[tuple[int, int]],
    spans: Sequence[EntitySpan],
    flat: FlatTranscript,
) -> list[set[str]]:
    """Entity token types per segment; a span belongs to the segment holding
    its first token."""
    sets: list[set[str]] = [set() for _ in segments_bounds]
    if not segments_bounds:
        return sets
    starts = [b[0] for b in segments_bounds]
    for span in spans:
        seg = max(0, bisect_right(starts, span.start_token) - 1)
        for t in range(span.start_token, min(span.end_token, len(flat.norm))):
            sets[seg].add(flat.norm[t])
    return sets


def segment_transcript(
    episode: Episode,
    target_s: float = 60.0,
    untimed_window: int = 150,
    entity_spans: Sequence[EntitySpan] | None = None,
    flat: FlatTranscript | None = None,
) -> list[Segment]:
    """Cut the transcript into segments of roughly ``target_s`` seconds.

    Timed mode accumulates whole utterances until their summed duration
    reaches ``target_s``; the last segment may run short.  Untimed mode
    falls back to fixed ``untimed_window``-token windows.  When entity
    spans are given, each goes to the segment containing its first token.
    """
    flat = flat if flat is not None else flat_transcript(episode)
    if not episode.transcript:
        return []
    bounds: list[tuple[int, int]] = []
    texts: list[str] = []
    times: list[tuple[float | None, float | None]] = []
    if episode.timed:
        # token offset of each utterance within the flat stream
        offsets = [0] * (len(episode.transcript) + 1)
        for idx in flat.utt_index:
            offsets[idx + 1] += 1
        for k in range(len(episode.transcript)):
            offsets[k + 1] += offsets[k]
        current: list[int] = []
        duration = 0.0
        for ui, utt in enumerate(episode.transcript):
            current.append(ui)
            duration += utt.duration_s
            if duration >= target_s:
                _close_timed(episode, current, offsets, bounds, texts, times)
                current = []
                duration = 0.0
        if current:
            _close_timed(episode, current, offsets, bounds, texts, times)
    else:
        n = len(flat.norm)
        if n == 0:
            return []
        for start in range(0, n, untimed_window):
            end = min(start + untimed_window, n)
            bounds.append((start, end))
            texts.append(" ".join(flat.raw[start:end]))
            times.append((None, None))
    entity_sets = _assign_entity_tokens(bounds, entity_spans or [], flat)
    segments = []
    for idx, ((t0, t1), text, (s0, s1)) in enumerate(zip(bounds, texts, times)):
        content = frozenset(flat.norm[t0:t1]) - STOPWORDS
        segments.append(
            Segment(
                index=idx,
                token_start=t0,
                token_end=t1,
                text=text,
                content_tokens=content,
                entity_tokens=frozenset(entity_sets[idx]),
                start_s=s0,
                end_s=s1,
            )
        )
    return segments


def _close_timed(episode, utterance_ids, offsets, bounds, texts, times):
    first, last = utterance_ids[0], utterance_ids[-1]
    bounds.append((offsets[first], offsets[last + 1]))
    texts.append(" ".join(episode.transcript[u].text for u in utterance_ids))
    times.append((episode.transcript[first].start_s, episode.transcript[last].end_s))


def overlap_similarity(a: frozenset[str], b: frozenset[str], mode: str = "jaccard") -> float:
    """Word overlap between two token-type sets; 0.0 when either is empty."""
    if not a or not b:
        return 0.0
    inter = len(a & b)
    if mode == "jaccard":
        return inter / len(a | b)
    if mode == "overlap":
        return inter / min(len(a), len(b))
    if mode == "dice":
        return 2.0 * inter / (len(a) + len(b))
    raise ValidationError(f"unknown similarity mode '{mode}'")


def build_segment_graph(
    segments: Sequence[Segment], similarity: str = "jaccard"
) -> SegmentGraph:
    """All-pairs similarities over content and entity tokens, plus centralities."""
    if not segments:
        raise ValidationError("cannot build a graph over zero segments")
    n = len(segments)
    sim_s = [[0.0] * n for _ in range(n)]
    sim_t = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            s = overlap_similarity(segments[i].content_tokens, segments[j].content_tokens, similarity)
            t = overlap_similarity(segments[i].entity_tokens, segments[j].entity_tokens, similarity)
            sim_s[i][j] = sim_s[j][i] = s
            sim_t[i][j] = sim_t[j][i] = t
    c_s = tuple(sum(row) for row in sim_s)
    c_t = tuple(sum(row) for row in sim_t)
    return SegmentGraph(
        sim_s=tuple(tuple(row) for row in sim_s),
        sim_t=tuple(tuple(row) for row in sim_t),
        c_s=c_s,
        c_t=c_t,
    )


def select_segments(graph: SegmentGraph, k_s: int = 7, k_t: int = 3) -> ExtractiveSelection:
    """Top ``k_s`` segments by content centrality, then ``k_t`` more by
    entity centrality, skipping ones already chosen.  Ties go to the lower
    index; the result is sorted by position.
    """
    n = len(graph)
    chosen: set[int] = set()

    def take(scores: tuple[float, ...], quota: int) -> None:
        for _ in range(min(quota, n - len(chosen))):
            best = -1
            for i in range(n):
                if i in chosen:
                    continue
                if best < 0 or scores[i] > scores[best]:
                    best = i
            chosen.add(best)

    take(graph.c_s, k_s)
    take(graph.c_t, k_t)
    return ExtractiveSelection(tuple(sorted(chosen)))


def render_selection(selection: ExtractiveSelection, segments: Sequence[Segment]) -> str:
    """Concatenate the selected segments' original text in position order."""
    return " ".join(segments[i].text for i in selection.indices)


def coarse_extract(
    episode: Episode,
    config: ExtractionConfig | None = None,
    entity_spans: Sequence[EntitySpan] | None = None,
) -> ExtractionResult:
    """Run the full extractive pipeline for one episode.

    ``entity_spans=None`` engages the capitalization fallback.  The
    rendered text is truncated to ``config.max_input_tokens`` so it can
    feed the conditioned-input builder directly.
    """
    config = config or ExtractionConfig()
    flat = flat_transcript(episode)
    spans = annotate_entities(episode, entity_spans, flat)
    segments = segment_transcript(
        episode,
        target_s=config.segment_seconds,
        untimed_window=config.untimed_window,
        entity_spans=spans,
        flat=flat,
    )
    if not segments:
        return ExtractionResult(
            episode_id=episode.id,
            selection=ExtractiveSelection(()),
            segments=(),
            text="",
            timed=episode.timed,
        )
    graph = build_segment_graph(segments, config.similarity)
    selection = select_segments(graph, config.k_s, config.k_t)
    text = truncate_to_tokens(render_selection(selection, segments), config.max_input_tokens)
    return ExtractionResult(
        episode_id=episode.id,
        selection=selection,
        segments=tuple(segments),
        text=text,
        timed=episode.timed,
    )
