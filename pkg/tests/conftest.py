import pytest

from rexbench.corpus import CorpusBuilder, build_indices
from rexbench.rules import Registry, Ruleset

# The sentence behind most golden tests: a passive clause whose object of
# "for" is a kill noun with a "of"-attached victim.
SENTENCE_TOKENS = [
    ("Mr.", "mr.", "NNP"), ("Williams", "williams", "NNP"),
    ("was", "be", "VBD"), ("sentenced", "sentence", "VBN"),
    ("for", "for", "IN"), ("the", "the", "DT"), ("murder", "murder", "NN"),
    ("of", "of", "IN"), ("Wright", "wright", "NNP"), (".", ".", "."),
]
SENTENCE_DEPS = [
    ("nn", 2, 1), ("nsubjpass", 4, 2), ("auxpass", 4, 3), ("prep_for", 4, 7),
    ("det", 7, 6), ("prep_of", 7, 9),
]

KILL_RULESET_TEXT = """
killNoun("murder").
killNoun("assassination").
killNoun("killing").
killNoun("slaughter").
killOfVictim(c,b) <= prep_of(c,b) & token(c,d) & killNoun(d).
killOfVictim(c,b) <= nn(c,b) & token(c,d) & killNoun(d).
killOfVictim(c,b) <= poss(c,b) & token(c,d) & killNoun(d).
killed(a,b) <= person(a) & person(b) & nsubjpass(c,a) & token(c,"sentenced") & prep_for(c,d) & killOfVictim(d,b).
killed(a,b) <= person(a) & person(b) & prep_by(c,a) & killOfVictim(c,b).
"""


def build_sentence_corpus(ners=(("person", 2, 2), ("person", 9, 9))):
    builder = CorpusBuilder()
    builder.start_document("d1")
    builder.add_sentence(SENTENCE_TOKENS, SENTENCE_DEPS, ners)
    return build_indices(builder.finish())


@pytest.fixture
def sentence_corpus():
    return build_sentence_corpus()


@pytest.fixture
def kill_ruleset(sentence_corpus):
    return Ruleset.from_text(KILL_RULESET_TEXT, Registry(sentence_corpus))


def build_founder_corpus():
    """Two clauses around the verb "built": founding a company, and building
    a company into something else."""
    builder = CorpusBuilder()
    builder.start_document("d1")
    builder.add_sentence(
        [("Michael", "michael", "NNP"), ("Dell", "dell", "NNP"),
         ("built", "build", "VBD"), ("his", "his", "PRP$"),
         ("first", "first", "JJ"), ("company", "company", "NN"),
         (".", ".", ".")],
        [("nn", 2, 1), ("nsubj", 3, 2), ("poss", 6, 4), ("amod", 6, 5),
         ("dobj", 3, 6)],
        [("person", 2, 2), ("organization", 6, 6)],
    )
    builder.add_sentence(
        [("Mr.", "mr.", "NNP"), ("Harris", "harris", "NNP"),
         ("built", "build", "VBD"), ("Dell", "dell", "NNP"),
         ("into", "into", "IN"), ("a", "a", "DT"),
         ("formidable", "formidable", "JJ"),
         ("competitor", "competitor", "NN"), (".", ".", ".")],
        [("nn", 2, 1), ("nsubj", 3, 2), ("dobj", 3, 4), ("prep_into", 3, 8),
         ("det", 8, 6), ("amod", 8, 7)],
        [("person", 2, 2), ("organization", 4, 4)],
    )
    return build_indices(builder.finish())


@pytest.fixture
def founder_corpus():
    return build_founder_corpus()


@pytest.fixture
def registry(sentence_corpus):
    return Registry(sentence_corpus)
