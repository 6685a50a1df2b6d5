"""Deterministic synthetic corpora for tests, demos, and benchmarks.

Everything here is seeded: the same arguments always produce the same
corpus, byte for byte once written.
"""

from __future__ import annotations

import random

from .corpus import Corpus, Episode, Utterance

__all__ = ["make_synthetic_corpus", "make_minimal_corpus"]

_TOPIC_WORDS = (
    "show episode guest talk story music game season league coach record "
    "history culture science space ocean health food travel market money "
    "startup design film book author artist album tour city street garden "
    "recipe puzzle mystery crime trial court vote policy school teacher "
    "student brain sleep training race match final playoff draft trade "
    "indie studio camera light scene script stage crowd festival river "
    "mountain forest weather winter summer harvest engine rocket planet "
    "signal network code data model method result question answer idea "
    "plan goal habit routine morning evening weekend family friend listener"
).split()

_FILLER_WORDS = (
    "the a an and but so then when while about over under after before "
    "with without into from very quite really pretty more less new old "
    "big small early late local global public private whole half"
).split()

_FIRST_NAMES = (
    "Alma Bruno Carla Diego Elena Felix Greta Hugo Irene Jonas Karim Lena "
    "Marco Nadia Oscar Priya Quinn Rosa Stefan Tara Umar Vera Wanda Yusuf"
).split()

_LAST_NAMES = (
    "Akers Bell Castro Duran Eng Fischer Grant Holm Ibsen Jansen Kerr "
    "Lindqvist Moreau Novak Ortiz Petrov Quirke Reyes Sato Thorne Udo Voss"
).split()

_RAW_CATEGORIES = (
    "Arts", "Business", "Comedy", "Education", "Fiction", "Games",
    "Government", "Health", "History", "Kids & Family", "Leisure",
    "Lifestyle & Health", "Music", "News", "Religion & Spirituality",
    "Science", "Society & Culture", "Sports", "Sports & Recreation",
    "Stories", "TV & Film", "Technology", "True Crime",
)

_PROMO_SENTENCES = (
    "Subscribe at www.example.com for more!",
    "This episode is sponsored by Acme Coffee.",
    "Follow us on social media @theshowpod.",
    "Use promo code LISTEN for ten percent off.",
)

_WORDS_PER_SECOND = 2.5


def _sentence(rng: random.Random, n_words: int, with_name: bool) -> str:
    words = [rng.choice(_FILLER_WORDS)]
    while len(words) < n_words:
        words.append(rng.choice(_TOPIC_WORDS if rng.random() < 0.6 else _FILLER_WORDS))
    if with_name and n_words >= 4:
        # names go mid-sentence so the capitalization fallback can see them
        pos = rng.randrange(1, len(words) - 1)
        words[pos : pos + 1] = [rng.choice(_FIRST_NAMES), rng.choice(_LAST_NAMES)]
    return " ".join(words) + "."


def _description(rng: random.Random, promo: bool) -> str:
    sentences = [
        _sentence(rng, rng.randint(8, 14), with_name=rng.random() < 0.5)
        for _ in range(rng.randint(2, 4))
    ]
    if promo:
        sentences.append(rng.choice(_PROMO_SENTENCES))
    return " ".join(sentences)


def make_synthetic_corpus(
    n_episodes: int = 100,
    n_shows: int = 10,
    tokens_per_episode: int = 600,
    seed: int = 0,
    untimed_fraction: float = 0.0,
    promo_fraction: float = 0.0,
) -> Corpus:
    """Generate a plausible, fully valid corpus.

    Transcripts are lowercase sentences with occasional capitalized
    name pairs mid-sentence, so the entity fallback finds spans.  A
    ``promo_fraction`` of descriptions get one promotional sentence
    appended.
    """
    rng = random.Random(seed)
    show_descriptions = {
        f"show{s:04d}": _description(rng, promo=False) for s in range(n_shows)
    }
    episodes = []
    for i in range(n_episodes):
        show_id = f"show{i % n_shows:04d}"
        rng_ep = random.Random(seed * 1_000_003 + i)
        utterances = []
        produced = 0
        clock = 0.0
        timed = rng_ep.random() >= untimed_fraction
        while produced < tokens_per_episode:
            n_words = min(rng_ep.randint(8, 15), tokens_per_episode - produced)
            text = _sentence(rng_ep, max(n_words, 3), with_name=rng_ep.random() < 0.3)
            n_actual = len(text.split())
            produced += n_actual
            if timed:
                duration = n_actual / _WORDS_PER_SECOND
                utterances.append(Utterance(text=text, start_s=clock, end_s=clock + duration))
                clock += duration
            else:
                utterances.append(Utterance(text=text))
        n_cats = rng_ep.choices((0, 1, 2, 3), weights=(5, 60, 25, 10))[0]
        categories = frozenset(rng_ep.sample(_RAW_CATEGORIES, n_cats))
        episodes.append(
            Episode(
                id=f"ep{i:06d}",
                show_id=show_id,
                description=_description(rng_ep, promo=rng_ep.random() < promo_fraction),
                show_description=show_descriptions[show_id],
                categories=categories,
                transcript=tuple(utterances),
            )
        )
    return Corpus(episodes)


def make_minimal_corpus(n_episodes: int, seed: int = 0) -> Corpus:
    """A corpus of id-only stub episodes, for split and scale tests."""
    del seed  # reserved for future variation; ids are deterministic anyway
    episodes = [
        Episode(
            id=f"ep{i:06d}",
            show_id=f"show{i % 1000:04d}",
            description="stub description for split testing.",
            show_description="stub show.",
            categories=frozenset(),
            transcript=(),
        )
        for i in range(n_episodes)
    ]
    return Corpus(episodes)
