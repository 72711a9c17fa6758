"""Context-use comparison: memory network vs supervised embeddings on the
three response positions of the QA+recommendation dialogs.

The interesting readout is positions 2 and 3, where the right answer depends
on earlier turns; a bag-of-words embedding model has to cram the whole dialog
into one vector while the memory network can attend to the relevant turn and
the KB facts it recalls.

Run: python scripts/context_trend.py [--dialogs 2000] [--epochs 15]
"""

from __future__ import annotations

import argparse

from dialeval.evaluation import evaluate
from dialeval.ingest import gen_synthetic_sources
from dialeval.models import TrainConfig
from dialeval.pipeline import build_vocab, make_ranker, train_memn2n, train_supemb
from dialeval.taskgen import gen_qarecs
from dialeval.templates import DEFAULT_TEMPLATES


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--movies", type=int, default=100)
    ap.add_argument("--dialogs", type=int, default=2000)
    ap.add_argument("--epochs", type=int, default=15)
    ap.add_argument("--hops", type=int, default=2)
    ap.add_argument("--k", type=int, default=10)
    ap.add_argument("--seed", type=int, default=5)
    args = ap.parse_args()

    kb, ratings, _ = gen_synthetic_sources(args.seed, args.movies, 60, 120, 10)
    n_users = ratings.n_users
    test_users = list(range(n_users // 10))
    train_users = list(range(n_users // 10, n_users))
    n_test = max(args.dialogs // 20, 10)
    train = gen_qarecs(kb, ratings, DEFAULT_TEMPLATES, args.seed,
                       args.dialogs - n_test, train_users)
    test = gen_qarecs(kb, ratings, DEFAULT_TEMPLATES, args.seed + 2, n_test,
                      test_users, dialog_id_base=args.dialogs)
    vocab = build_vocab(train, kb)

    mem_cfg = TrainConfig(learning_rate=0.005, dim=50, hops=args.hops,
                          epochs=args.epochs, seed=1)
    emb_cfg = TrainConfig(learning_rate=0.005, dim=50, epochs=args.epochs,
                          n_dicts=2, seed=1)
    mem_params, _ = train_memn2n(train, vocab, kb, mem_cfg)
    emb_params, _ = train_supemb(train, vocab, emb_cfg, variant="two_dict")

    print(f"{'model':<10} {'pos 1':>7} {'pos 2':>7} {'pos 3+':>7}  (hits@{args.k})")
    for name, ranker in (
        ("memn2n", make_ranker("memn2n", mem_params, vocab, kb, mem_cfg)),
        ("supemb", make_ranker("supemb", emb_params, vocab, kb, emb_cfg)),
    ):
        report = evaluate(ranker, test, k=args.k)
        cells = [report.by_position.get(p) for p in ("1", "2", "3+")]
        print(f"{name:<10} " + " ".join(
            f"{c.percent:7.1f}" if c else f"{'-':>7}" for c in cells))


if __name__ == "__main__":
    main()
