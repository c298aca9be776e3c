#!/usr/bin/env python3
"""Benchmark the compiled BM25 kernel against the pure-Python twin.

Builds a synthetic catalog with a Zipf-ish vocabulary and reports two
phases per backend: "accumulate" (the term-at-a-time scoring kernel, the
part that is compiled) and "search" (scoring plus candidate extraction,
sorting, and truncation). Rankings from both backends are checked for
equality first. Usage:

    python3 benchmarks/bench_scoring.py [--docs 20000] [--queries 200]
"""

import argparse
import random
import time

from kgqa import scoring
from kgqa.kgstore import EntityRecord
from kgqa.retrieval import Bm25Index, Bm25Params


def build_corpus(n_docs: int, rng: random.Random):
    vocab_common = [f"common{i}" for i in range(50)]
    vocab_rare = [f"rare{i}" for i in range(max(50, n_docs // 2))]
    records = []
    for i in range(n_docs):
        length = rng.randint(4, 16)
        tokens = [rng.choice(vocab_common) if rng.random() < 0.7
                  else rng.choice(vocab_rare) for _ in range(length)]
        records.append(EntityRecord(f"Q{i + 1}", " ".join(tokens[:3]),
                                    " ".join(tokens[3:])))
    return records, vocab_common, vocab_rare


def make_queries(n_queries: int, vocab_common, vocab_rare, rng: random.Random):
    queries = []
    for _ in range(n_queries):
        terms = [rng.choice(vocab_common) for _ in range(rng.randint(1, 3))]
        if rng.random() < 0.5:
            terms.append(rng.choice(vocab_rare))
        queries.append(" ".join(terms))
    return queries


def time_phase(fn, queries) -> float:
    start = time.perf_counter()
    for query in queries:
        fn(query)
    return time.perf_counter() - start


def report(label, py_time, c_time, n_queries):
    line = f"{label:<12} python {py_time:7.3f}s ({n_queries / py_time:8.1f} q/s)"
    if c_time is not None:
        line += (f"   c {c_time:7.3f}s ({n_queries / c_time:8.1f} q/s)"
                 f"   speedup {py_time / c_time:5.1f}x")
    print(line)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--docs", type=int, default=20000)
    parser.add_argument("--queries", type=int, default=200)
    parser.add_argument("--k", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    records, vocab_common, vocab_rare = build_corpus(args.docs, rng)
    queries = make_queries(args.queries, vocab_common, vocab_rare, rng)

    print(f"corpus: {args.docs} docs, {args.queries} queries, "
          f"default backend: {scoring.backend_name()}")
    index = Bm25Index.build(records, Bm25Params(1.5, 0.75))

    # Warm up posting-array caches and confirm the backends agree.
    for query in queries[: min(20, len(queries))]:
        py = index.search(query, args.k, backend="python")
        if scoring.HAVE_NATIVE:
            assert py == index.search(query, args.k, backend="c"), \
                f"backend mismatch for {query!r}"

    py_kernel = time_phase(lambda q: index.scores_for(q, backend="python"), queries)
    c_kernel = (time_phase(lambda q: index.scores_for(q, backend="c"), queries)
                if scoring.HAVE_NATIVE else None)
    report("accumulate", py_kernel, c_kernel, args.queries)

    py_search = time_phase(lambda q: index.search(q, args.k, backend="python"),
                           queries)
    c_search = (time_phase(lambda q: index.search(q, args.k, backend="c"), queries)
                if scoring.HAVE_NATIVE else None)
    report("search", py_search, c_search, args.queries)

    if not scoring.HAVE_NATIVE:
        print("compiled kernel not available; pure-Python numbers only")


if __name__ == "__main__":
    main()
