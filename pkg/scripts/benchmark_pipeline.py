#!/usr/bin/env python3
"""Time the filter -> extract pipeline on a synthetic corpus.

Reports single-threaded wall time and, with --workers, verifies that the
parallel run produces identical selections before reporting its speedup.
"""

import argparse
import time
from functools import partial

from podsum.cli import _extract_one, _pmap
from podsum.extractive import ExtractionConfig
from podsum.filtering import FilterConfig, run_filter_cascade
from podsum.synth import make_synthetic_corpus


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--episodes", type=int, default=1000)
    parser.add_argument("--tokens-per-episode", type=int, default=5000)
    parser.add_argument("--shows", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=0, help="also time a parallel run")
    return parser.parse_args()


def main() -> None:
    args = parse_args()
    print(f"generating {args.episodes} episodes x {args.tokens_per_episode} tokens ...")
    corpus = make_synthetic_corpus(
        n_episodes=args.episodes,
        n_shows=args.shows,
        tokens_per_episode=args.tokens_per_episode,
        seed=args.seed,
    )

    config = ExtractionConfig()
    worker = partial(_extract_one, config=config, entity_table=None)

    t0 = time.perf_counter()
    filtered, report = run_filter_cascade(corpus, FilterConfig())
    t1 = time.perf_counter()
    results = [worker(ep) for ep in filtered]
    t2 = time.perf_counter()

    n = len(filtered)
    print(f"filter:  {t1 - t0:7.2f} s  ({len(corpus)} -> {n} episodes)")
    print(f"extract: {t2 - t1:7.2f} s  ({n / max(t2 - t1, 1e-9):.1f} episodes/s)")
    print(f"total:   {t2 - t0:7.2f} s single-threaded")

    if args.workers > 1:
        t3 = time.perf_counter()
        parallel = _pmap(worker, filtered.episodes, args.workers)
        t4 = time.perf_counter()
        same = [r.selection == p.selection and r.text == p.text for r, p in zip(results, parallel)]
        print(f"extract with {args.workers} workers: {t4 - t3:7.2f} s, outputs identical: {all(same)}")


if __name__ == "__main__":
    main()
