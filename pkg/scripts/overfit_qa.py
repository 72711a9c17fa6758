"""Overfit sanity run: train a 1-hop memory network on synthetic factoid QA
until it memorizes the training set.

Mirrors the paper-scale QA setting at desk scale (100 movies, 1k questions,
d=50, lr=0.005) and prints train hits@1 per checkpoint.

Run: python scripts/overfit_qa.py [--movies 100] [--examples 1000] [--epochs 50]
"""

from __future__ import annotations

import argparse

from dialeval.evaluation import evaluate
from dialeval.ingest import gen_synthetic_sources
from dialeval.models import TrainConfig
from dialeval.models.memn2n import init_memn2n, memn2n_train
from dialeval.models.rankers import MemN2NRanker
from dialeval.pipeline import build_vocab, prepare_memn2n
from dialeval.taskgen import gen_qa
from dialeval.templates import DEFAULT_TEMPLATES


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--movies", type=int, default=100)
    ap.add_argument("--examples", type=int, default=1000)
    ap.add_argument("--epochs", type=int, default=50)
    ap.add_argument("--checkpoint-every", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    kb, _, _ = gen_synthetic_sources(args.seed, args.movies, 60, 10, 10)
    train, _, _ = gen_qa(kb, DEFAULT_TEMPLATES, args.seed, args.examples, 50, 50)
    vocab = build_vocab(train, kb)
    cfg = TrainConfig(learning_rate=0.005, dim=50, hops=1,
                      epochs=args.checkpoint_every, seed=args.seed)
    prepared, entities = prepare_memn2n(train, vocab, kb, cfg)
    params = init_memn2n(vocab.size, cfg.dim, cfg.hops, cfg.max_memories,
                         seed=cfg.seed)

    done = 0
    while done < args.epochs:
        losses = memn2n_train(prepared, entities.bags, params, cfg)
        done += cfg.epochs
        ranker = MemN2NRanker(params, vocab, kb, cfg)
        report = evaluate(ranker, train, k=1)
        print(f"epoch {done:3d}  loss {losses[-1]:.4f}  "
              f"train hits@1 {report.overall.percent:.1f}")


if __name__ == "__main__":
    main()
