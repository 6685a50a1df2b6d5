"""Episode data model, JSONL ingest/write, and the shared tokenizer.

Every token-count limit in the package is defined in terms of
:func:`tokenize`, so the normalization rule lives here and nowhere else.
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import ParseError, ValidationError

__all__ = [
    "Utterance",
    "Episode",
    "Corpus",
    "FlatTranscript",
    "tokenize",
    "flat_transcript",
    "flatten_transcript",
    "truncate_to_tokens",
    "ingest_corpus",
    "write_corpus",
]

# ASCII punctuation plus the typographic marks that show up in podcast feeds.
_PUNCT = string.punctuation + "“”‘’‚„‹›«»–—…¡¿·´`"


def _norm_word(word: str) -> str:
    """Normalize one whitespace-delimited word; may return an empty string."""
    return word.strip(_PUNCT).lower()


def tokenize(text: str) -> list[str]:
    """Split ``text`` into normalized tokens.

    Words are split on whitespace, lowercased, and stripped of punctuation
    at the edges; interior punctuation (it's, re-run) survives.  Words that
    normalize to nothing are dropped.
    """
    tokens = []
    for word in text.split():
        tok = _norm_word(word)
        if tok:
            tokens.append(tok)
    return tokens


def truncate_to_tokens(text: str, max_tokens: int) -> str:
    """Cut ``text`` after its first ``max_tokens`` tokens.

    Words are kept in their original form; only the token *count* follows
    the :func:`tokenize` rule, so ``tokenize(truncate_to_tokens(t, k)) ==
    tokenize(t)[:k]`` holds for every ``t``.
    """
    if max_tokens < 0:
        raise ValidationError(f"max_tokens must be >= 0, got {max_tokens}")
    kept: list[str] = []
    count = 0
    for word in text.split():
        if count >= max_tokens:
            break
        kept.append(word)
        if _norm_word(word):
            count += 1
    return " ".join(kept)


@dataclass(frozen=True)
class Utterance:
    """One contiguous stretch of speech.

    ``start_s``/``end_s`` are both set (timed transcript) or both ``None``
    (plain text transcript).
    """

    text: str
    start_s: float | None = None
    end_s: float | None = None

    @property
    def timed(self) -> bool:
        return self.start_s is not None

    @property
    def duration_s(self) -> float:
        if self.start_s is None or self.end_s is None:
            raise ValidationError("duration of an untimed utterance is undefined")
        return self.end_s - self.start_s


@dataclass(frozen=True)
class Episode:
    """A podcast episode: metadata plus transcript.

    ``description`` doubles as the reference summary; ``categories`` holds
    the raw labels from the feed, uncollapsed.
    """

    id: str
    show_id: str
    description: str
    show_description: str
    categories: frozenset[str]
    transcript: tuple[Utterance, ...]

    @property
    def timed(self) -> bool:
        """True when the transcript carries word timings (all-or-nothing)."""
        return bool(self.transcript) and self.transcript[0].timed


def validate_episode(episode: Episode) -> None:
    """Raise :class:`ValidationError` if ``episode`` breaks an invariant."""
    eid = episode.id
    if not eid:
        raise ValidationError("episode id must be a non-empty string")
    if not episode.show_id:
        raise ValidationError(f"episode '{eid}': show_id must be non-empty")
    timed_flags = {u.timed for u in episode.transcript}
    if len(timed_flags) > 1:
        raise ValidationError(
            f"episode '{eid}': transcript mixes timed and untimed utterances"
        )
    prev_start = None
    for i, utt in enumerate(episode.transcript):
        if not utt.text.strip():
            raise ValidationError(f"episode '{eid}': utterance {i} has empty text")
        if (utt.start_s is None) != (utt.end_s is None):
            raise ValidationError(
                f"episode '{eid}': utterance {i} has only one of start_s/end_s"
            )
        if utt.timed:
            if utt.start_s < 0:
                raise ValidationError(
                    f"episode '{eid}': utterance {i} has negative start_s"
                )
            if utt.end_s < utt.start_s:
                raise ValidationError(
                    f"episode '{eid}': utterance {i} ends before it starts"
                )
            if prev_start is not None and utt.start_s < prev_start:
                raise ValidationError(
                    f"episode '{eid}': utterance {i} starts before utterance {i - 1}"
                )
            prev_start = utt.start_s


@dataclass
class Corpus:
    """An ordered collection of episodes with unique ids."""

    episodes: tuple[Episode, ...]
    by_id: dict[str, Episode] = field(init=False, repr=False, compare=False)
    by_show: dict[str, tuple[Episode, ...]] = field(init=False, repr=False, compare=False)

    def __init__(self, episodes: Iterable[Episode]):
        self.episodes = tuple(episodes)
        by_id: dict[str, Episode] = {}
        by_show: dict[str, list[Episode]] = {}
        for ep in self.episodes:
            if ep.id in by_id:
                raise ValidationError(f"duplicate episode id '{ep.id}'")
            by_id[ep.id] = ep
            by_show.setdefault(ep.show_id, []).append(ep)
        self.by_id = by_id
        self.by_show = {show: tuple(eps) for show, eps in by_show.items()}

    def __len__(self) -> int:
        return len(self.episodes)

    def __iter__(self) -> Iterator[Episode]:
        return iter(self.episodes)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Corpus):
            return NotImplemented
        return self.episodes == other.episodes


@dataclass(frozen=True)
class FlatTranscript:
    """Token-aligned view of a transcript.

    ``raw`` keeps each word as it appeared (punctuation intact), ``norm``
    its normalized form, and ``utt_index`` the utterance each word came
    from.  Words that normalize to nothing are dropped from all three
    lists, so ``norm == flatten_transcript(episode)`` by construction.
    """

    raw: tuple[str, ...]
    norm: tuple[str, ...]
    utt_index: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.norm)


def flat_transcript(episode: Episode) -> FlatTranscript:
    """Flatten a transcript while keeping raw/normalized alignment."""
    raw: list[str] = []
    norm: list[str] = []
    utt_index: list[int] = []
    for i, utt in enumerate(episode.transcript):
        for word in utt.text.split():
            tok = _norm_word(word)
            if not tok:
                continue
            raw.append(word)
            norm.append(tok)
            utt_index.append(i)
    return FlatTranscript(tuple(raw), tuple(norm), tuple(utt_index))


def flatten_transcript(episode: Episode) -> list[str]:
    """Concatenate the tokenized utterances in speech order."""
    return list(flat_transcript(episode).norm)


def _require(obj: dict, key: str, kind, lineno: int, eid: str | None = None):
    where = f"line {lineno}" if eid is None else f"episode '{eid}' (line {lineno})"
    if key not in obj:
        raise ParseError(f"{where}: missing required field '{key}'")
    value = obj[key]
    if not isinstance(value, kind):
        raise ParseError(f"{where}: field '{key}' has wrong type")
    return value


def _episode_from_obj(obj: dict, lineno: int) -> Episode:
    if not isinstance(obj, dict):
        raise ParseError(f"line {lineno}: expected a JSON object")
    eid = _require(obj, "id", str, lineno)
    show_id = _require(obj, "show_id", str, lineno, eid)
    description = _require(obj, "description", str, lineno, eid)
    show_description = _require(obj, "show_description", str, lineno, eid)
    categories = _require(obj, "categories", list, lineno, eid)
    transcript = _require(obj, "transcript", list, lineno, eid)
    for cat in categories:
        if not isinstance(cat, str):
            raise ParseError(f"episode '{eid}' (line {lineno}): categories must be strings")
    utterances = []
    for i, raw in enumerate(transcript):
        if not isinstance(raw, dict) or "text" not in raw or not isinstance(raw["text"], str):
            raise ParseError(
                f"episode '{eid}' (line {lineno}): utterance {i} must be an object with a 'text' string"
            )
        start = raw.get("start_s")
        end = raw.get("end_s")
        for name, value in (("start_s", start), ("end_s", end)):
            if value is not None and not isinstance(value, (int, float)):
                raise ParseError(
                    f"episode '{eid}' (line {lineno}): utterance {i} field '{name}' must be a number"
                )
        utterances.append(Utterance(text=raw["text"], start_s=start, end_s=end))
    episode = Episode(
        id=eid,
        show_id=show_id,
        description=description,
        show_description=show_description,
        categories=frozenset(categories),
        transcript=tuple(utterances),
    )
    validate_episode(episode)
    return episode


def ingest_corpus(path) -> Corpus:
    """Read a JSONL corpus file, validating every episode.

    Raises :class:`ParseError` (with line number) on undecodable lines and
    :class:`ValidationError` on well-formed lines that break an episode or
    corpus invariant.
    """
    episodes = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: line {lineno}: invalid JSON: {exc}") from exc
            episodes.append(_episode_from_obj(obj, lineno))
    return Corpus(episodes)


def _utterance_to_obj(utt: Utterance) -> dict:
    obj: dict = {"text": utt.text}
    if utt.timed:
        obj["start_s"] = utt.start_s
        obj["end_s"] = utt.end_s
    return obj


def write_corpus(corpus: Corpus | Sequence[Episode], path) -> None:
    """Write episodes as JSONL, one object per line, categories sorted.

    The output round-trips: ``ingest_corpus`` on the written file yields an
    equal corpus.
    """
    with open(path, "w", encoding="utf-8") as fh:
        for ep in corpus:
            obj = {
                "id": ep.id,
                "show_id": ep.show_id,
                "description": ep.description,
                "show_description": ep.show_description,
                "categories": sorted(ep.categories),
                "transcript": [_utterance_to_obj(u) for u in ep.transcript],
            }
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
