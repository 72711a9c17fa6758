import pytest

from dialeval.kb import KnowledgeBase
from dialeval.templates import DEFAULT_TEMPLATES
from dialeval.text import build_vocabulary


@pytest.fixture
def small_kb() -> KnowledgeBase:
    kb = KnowledgeBase()
    kb.add_triple("kung fu hustle", "directed_by", "stephen chow")
    kb.add_triple("kung fu hustle", "starred_actors", "stephen chow")
    kb.add_triple("kung fu hustle", "starred_actors", "yuen wah")
    kb.add_triple("kung fu hustle", "has_genre", "comedy")
    kb.add_triple("kung fu hustle", "has_tags", "martial arts")
    kb.add_triple("kung fu hustle", "release_year", "2004")
    kb.add_triple("shaolin soccer", "directed_by", "stephen chow")
    kb.add_triple("shaolin soccer", "has_genre", "comedy")
    kb.add_triple("shaolin soccer", "has_tags", "underdog story")
    kb.add_triple("the god of cookery", "directed_by", "stephen chow")
    kb.add_triple("the god of cookery", "has_genre", "comedy")
    return kb.freeze()


@pytest.fixture
def templates():
    return DEFAULT_TEMPLATES


@pytest.fixture
def small_vocab(small_kb):
    texts = (["who directed the film x"] * 5
             + ["i liked the movie a lot"] * 5
             + small_kb.render_all())
    return build_vocabulary(texts, small_kb.entities, min_freq=1)
