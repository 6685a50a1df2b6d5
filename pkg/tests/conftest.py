"""Shared fixture builders for the test suite."""

from __future__ import annotations

import pytest

from podsum.corpus import Corpus, Episode, Utterance


@pytest.hookimpl(tryfirst=True, hookwrapper=True)
def pytest_runtest_makereport(item, call):
    # expose phase outcomes to fixtures, so teardown can see pass/fail
    outcome = yield
    rep = outcome.get_result()
    setattr(item, "rep_" + rep.when, rep)


def utt(text: str, start: float | None = None, end: float | None = None) -> Utterance:
    return Utterance(text=text, start_s=start, end_s=end)


def timed_utterances(texts: list[str], seconds_each: float = 10.0) -> tuple[Utterance, ...]:
    """Back-to-back utterances of equal duration starting at t=0."""
    out = []
    clock = 0.0
    for text in texts:
        out.append(Utterance(text=text, start_s=clock, end_s=clock + seconds_each))
        clock += seconds_each
    return tuple(out)


def make_episode(
    eid: str = "ep1",
    show: str = "show1",
    description: str = "A perfectly ordinary episode description.",
    show_description: str = "A show about ordinary things.",
    categories: tuple[str, ...] = ("Comedy",),
    texts: tuple[str, ...] = ("hello there everyone.", "today we talk about gardens."),
    timed: bool = True,
    seconds_each: float = 10.0,
) -> Episode:
    if timed:
        transcript = timed_utterances(list(texts), seconds_each)
    else:
        transcript = tuple(Utterance(text=t) for t in texts)
    return Episode(
        id=eid,
        show_id=show,
        description=description,
        show_description=show_description,
        categories=frozenset(categories),
        transcript=transcript,
    )


def make_corpus(*episodes: Episode) -> Corpus:
    return Corpus(episodes)
