import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dialeval import DataError
from dialeval.evaluation import (
    EvalReport, evaluate, format_report, hits_at_k, is_entity_matched,
    report_tsv,
)
from dialeval.models.rankers import OracleRanker, RandomRanker
from dialeval.pipeline import build_vocab
from dialeval.taskgen import Example
from dialeval.templates import QUESTION_CLASSES


def test_hits_at_k_basic():
    assert hits_at_k(["a", "b", "c"], {"b"}, 1) == 0
    assert hits_at_k(["a", "b", "c"], {"b"}, 2) == 1
    assert hits_at_k(["a", "b"], {"x", "b"}, 2) == 1
    with pytest.raises(DataError):
        hits_at_k(["a"], set(), 1)
    with pytest.raises(DataError):
        hits_at_k(["a"], {"a"}, 0)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 20), min_size=1, max_size=20, unique=True),
       st.sets(st.integers(0, 20), min_size=1, max_size=5),
       st.integers(1, 19))
def test_hits_monotone_in_k(ranked, gold, k):
    assert hits_at_k(ranked, gold, k) <= hits_at_k(ranked, gold, k + 1)


class FixedRanker:
    def __init__(self, ranking):
        self.ranking = ranking

    def rank(self, example):
        return list(self.ranking)


def loop_oracle(ranker, examples, k):
    """Straight-line re-implementation of the evaluation loop."""
    hits = 0
    for ex in examples:
        ranked = ranker.rank(ex)
        hits += int(any(c in set(ex.gold) for c in ranked[:k]))
    return 100.0 * hits / len(examples)


def make_examples(n, rng):
    labels = [f"c{i}" for i in range(10)]
    out = []
    for i in range(n):
        gold = rng.sample(labels, rng.randint(1, 2))
        pool = tuple(c for c in labels if c not in gold)
        out.append(Example(input=f"q {i}", gold=tuple(gold),
                           candidate_pool=pool, dialog_id=i,
                           task_tag="discussion"))
    return out


def test_evaluate_matches_loop_oracle():
    rng = random.Random(0)
    examples = make_examples(80, rng)
    labels = [f"c{i}" for i in range(10)]
    for k in (1, 3, 5):
        ranker = FixedRanker(rng.sample(labels, len(labels)))
        report = evaluate(ranker, examples, k)
        assert report.overall.percent == pytest.approx(
            loop_oracle(ranker, examples, k))


def test_random_scorer_within_three_sigma():
    """hits@k of a uniform random ranking over C candidates has expectation
    100*k/C; binomial oracle over many trials."""
    rng = random.Random(1)
    C, k, n = 50, 5, 2000
    labels = [f"c{i}" for i in range(C)]
    examples = []
    for i in range(n):
        gold = labels[rng.randrange(C)]
        examples.append(Example(input=f"q {i}", gold=(gold,),
                                candidate_pool=tuple(c for c in labels if c != gold),
                                dialog_id=i, task_tag="discussion"))
    report = evaluate(RandomRanker(seed=2), examples, k)
    p = k / C
    sigma = 100.0 * math.sqrt(p * (1 - p) / n)
    assert abs(report.overall.percent - 100.0 * p) <= 3 * sigma


def test_oracle_ranker_always_hits():
    rng = random.Random(3)
    examples = make_examples(30, rng)
    report = evaluate(OracleRanker(), examples, 1)
    assert report.overall.percent == 100.0


def test_evaluate_rejects_missing_gold():
    ex = Example(input="q", gold=("a",), candidate_pool=("b",), task_tag="discussion")
    ranker = FixedRanker(["b", "c"])  # ranker lost the gold candidate
    with pytest.raises(DataError, match="example 0"):
        evaluate(ranker, [ex], 1)


def test_breakdowns(small_kb):
    examples = [
        Example(input="q1", gold=("a",), task_tag="qa",
                question_class="movie_to_director", dialog_id=0),
        Example(input="q2", gold=("a",), task_tag="qa",
                question_class="movie_to_year", dialog_id=1),
        Example(input="q3", gold=("b",), context=(("x", "y"),),
                response_position=2, task_tag="qarecs", dialog_id=2),
        Example(input="q4", gold=("b",), context=(("x", "y"), ("z", "w")),
                response_position=3, task_tag="qarecs", dialog_id=3),
    ]
    report = evaluate(OracleRanker(), examples, 1)
    assert report.by_class["movie_to_director"].count == 1
    assert report.by_position["1"].count == 2
    assert report.by_position["2"].count == 1
    assert report.by_position["3+"].count == 1
    assert report.by_task["qa"].count == 2
    assert report.by_task["qarecs"].count == 2


def test_report_always_emits_all_question_classes():
    ex = Example(input="q", gold=("a",), task_tag="qa",
                 question_class="movie_to_year")
    report = evaluate(OracleRanker(), [ex], 1)
    rows = report.rows()
    type_rows = [r for r in rows if r[0] == "type"]
    assert [r[1] for r in type_rows] == list(QUESTION_CLASSES)
    assert len(type_rows) == 11
    # unsupported class present with zero count
    lang = next(r for r in type_rows if r[1] == "movie_to_language")
    assert lang[3] == 0


def test_entity_matched_subset(small_kb):
    vocab = build_vocab(
        [Example(input="who directed kung fu hustle", gold=("stephen chow",))],
        small_kb, min_freq=1)
    matched = Example(input="who directed kung fu hustle", gold=("stephen chow",))
    self_ref = Example(input="tell me about kung fu hustle", gold=("kung fu hustle",))
    no_entity = Example(input="hello there", gold=("hi",))
    assert is_entity_matched(matched, vocab)
    assert not is_entity_matched(self_ref, vocab)  # gold already in the input
    assert not is_entity_matched(no_entity, vocab)


def test_format_report_and_tsv():
    ex = Example(input="q", gold=("a",), task_tag="qa",
                 question_class="movie_to_year")
    report = evaluate(OracleRanker(), [ex], 1)
    text = format_report(report)
    assert "overall" in text and "movie_to_year" in text
    only_pos = format_report(report, breakdown="position")
    assert "movie_to_year" not in only_pos and "position" in only_pos
    tsv = report_tsv(report)
    lines = tsv.strip().split("\n")
    assert lines[0] == "partition\tcell\thits\tcount"
    # overall + 11 classes + 3 positions + 1 task + entity_matched
    assert len(lines) == 1 + 1 + 11 + 3 + 1 + 1
