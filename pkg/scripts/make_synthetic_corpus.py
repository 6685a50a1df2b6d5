#!/usr/bin/env python3
"""Generate a seeded synthetic episode corpus as JSONL.

Handy for demos and for exercising the CLI without real data:

    python scripts/make_synthetic_corpus.py --episodes 50 --out episodes.jsonl
    podsum filter episodes.jsonl --out-dir out --holdout-val 5 --holdout-test 5
"""

import argparse
from pathlib import Path

from podsum.corpus import write_corpus
from podsum.synth import make_synthetic_corpus


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--episodes", type=int, default=100)
    parser.add_argument("--shows", type=int, default=10)
    parser.add_argument("--tokens-per-episode", type=int, default=600)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--untimed-fraction",
        type=float,
        default=0.0,
        help="fraction of episodes emitted without utterance timings",
    )
    parser.add_argument(
        "--promo-fraction",
        type=float,
        default=0.1,
        help="fraction of descriptions that get a promotional sentence",
    )
    parser.add_argument("--out", type=Path, required=True)
    return parser.parse_args()


def main() -> None:
    args = parse_args()
    corpus = make_synthetic_corpus(
        n_episodes=args.episodes,
        n_shows=args.shows,
        tokens_per_episode=args.tokens_per_episode,
        seed=args.seed,
        untimed_fraction=args.untimed_fraction,
        promo_fraction=args.promo_fraction,
    )
    write_corpus(corpus, args.out)
    print(f"wrote {len(corpus)} episodes to {args.out}")


if __name__ == "__main__":
    main()
