"""Adapters that turn a trained model into a candidate ranker for evaluation.

A ranker maps an Example to an ordered list of candidate labels (entity
symbols, or response texts for explicit candidate lists).  Ties always break
by candidate index, ascending, so rankings are deterministic.
"""

from __future__ import annotations

import random

import numpy as np

from dialeval import DataError
from dialeval.kb import KnowledgeBase
from dialeval.models.config import TrainConfig
from dialeval.models.embeddings import EmbedParams, embed_sum
from dialeval.models.memn2n import MemN2NParams, build_memory, candidate_matrix, memn2n_forward
from dialeval.models.mf import MFParams, mf_rank
from dialeval.models.tfidf import TfIdfModel
from dialeval.taskgen import Example
from dialeval.text import Vocabulary, bag, tokenize


def rank_by_score(labels: list[str], scores: np.ndarray) -> list[str]:
    order = np.lexsort((np.arange(len(labels)), -scores))
    return [labels[i] for i in order]


def query_text(example: Example) -> str:
    """Context and input concatenated, oldest first."""
    parts = [t for turn in example.context for t in turn]
    parts.append(example.input)
    return " ".join(parts)


class EntityCandidates:
    """The shared answer space for qa/recs/qarecs: every entity symbol."""

    def __init__(self, vocab: Vocabulary):
        self.token_ids = vocab.entity_ids()
        self.labels = [vocab.symbols[t] for t in self.token_ids]
        self.bags = [{t: 1} for t in self.token_ids]


class OracleRanker:
    """Scores the gold at +inf; harness self-test."""

    def __init__(self, vocab: Vocabulary | None = None):
        self.entities = EntityCandidates(vocab) if vocab else None

    def rank(self, example: Example) -> list[str]:
        if example.candidate_pool is not None:
            labels = example.explicit_candidates()
        elif self.entities is not None:
            labels = self.entities.labels
        else:
            labels = list(example.gold)
        gold = set(example.gold)
        return [c for c in labels if c in gold] + [c for c in labels if c not in gold]


class RandomRanker:
    def __init__(self, seed: int, vocab: Vocabulary | None = None,
                 n_candidates: int | None = None):
        self.rng = random.Random(seed)
        self.entities = EntityCandidates(vocab) if vocab else None
        self.n_candidates = n_candidates

    def rank(self, example: Example) -> list[str]:
        if example.candidate_pool is not None:
            labels = example.explicit_candidates()
        elif self.entities is not None:
            labels = list(self.entities.labels)
        else:
            raise DataError("random ranker needs a vocabulary or explicit candidates")
        self.rng.shuffle(labels)
        return labels


class EmbedRanker:
    def __init__(self, params: EmbedParams, vocab: Vocabulary):
        self.params = params
        self.vocab = vocab
        self.entities = EntityCandidates(vocab)
        # output embeddings of the fixed entity candidates, cached
        self._entity_out = params.U_out[:, self.entities.token_ids]

    def rank(self, example: Example) -> list[str]:
        x = embed_sum(bag(tokenize(self.vocab, query_text(example))), self.params.U_in)
        if example.candidate_pool is None:
            scores = x @ self._entity_out
            return rank_by_score(self.entities.labels, scores)
        labels = example.explicit_candidates()
        scores = np.array([
            float(x @ embed_sum(bag(tokenize(self.vocab, c)), self.params.U_out))
            for c in labels
        ])
        return rank_by_score(labels, scores)


class MemN2NRanker:
    def __init__(self, params: MemN2NParams, vocab: Vocabulary,
                 kb: KnowledgeBase | None, cfg: TrainConfig):
        self.params = params
        self.vocab = vocab
        self.kb = kb
        self.cfg = cfg
        self.entities = EntityCandidates(vocab)
        self._entity_G = candidate_matrix(params.W, self.entities.bags)
        self._pool_G: dict[int, tuple[list[str], np.ndarray]] = {}

    def _explicit(self, example: Example) -> tuple[list[str], np.ndarray]:
        key = id(example.candidate_pool)
        labels = example.explicit_candidates()
        cached = self._pool_G.get(key)
        if cached is None:
            pool_bags = [bag(tokenize(self.vocab, c)) for c in example.candidate_pool]
            cached = (list(example.candidate_pool),
                      candidate_matrix(self.params.W, pool_bags))
            self._pool_G[key] = cached
        gold_bag = bag(tokenize(self.vocab, example.gold[0]))
        gold_G = candidate_matrix(self.params.W, [gold_bag])
        return labels, np.vstack([gold_G, cached[1]])

    def rank(self, example: Example) -> list[str]:
        ms = build_memory(list(example.context), example.input, self.kb,
                          self.vocab, self.cfg)
        if example.candidate_pool is None:
            labels, G = self.entities.labels, self._entity_G
        else:
            labels, G = self._explicit(example)
        scores, _ = memn2n_forward(ms, [], self.params, G=G)
        return rank_by_score(labels, scores)


class TfIdfRanker:
    def __init__(self, model: TfIdfModel, vocab: Vocabulary, use_context: bool = True):
        self.model = model
        self.vocab = vocab
        self.use_context = use_context

    def rank(self, example: Example) -> list[str]:
        text = query_text(example) if self.use_context else example.input
        query = bag(tokenize(self.vocab, text))
        labels = example.explicit_candidates() if example.candidate_pool is not None \
            else EntityCandidates(self.vocab).labels
        cand_bags = [bag(tokenize(self.vocab, c)) for c in labels]
        return [labels[i] for i in self.model.rank(query, cand_bags)]


class MFRanker:
    """Reads the movie entities out of the statement, fits a pseudo-user and
    ranks the remaining movies."""

    def __init__(self, params: MFParams, vocab: Vocabulary, kb: KnowledgeBase):
        self.params = params
        self.vocab = vocab
        self.kb = kb

    def rank(self, example: Example) -> list[str]:
        history = set()
        for tid in tokenize(self.vocab, query_text(example)):
            if self.vocab.is_entity(tid):
                eid = self.kb.entity_id(self.vocab.symbols[tid])
                if eid is not None and eid in self.params.item_index:
                    history.add(eid)
        return [self.kb.entities[e] for e in mf_rank(history, self.params)]
