import io

import pytest

from rexbench.corpus import (CorpusBuilder, CorpusFormatError, build_indices,
                             ingest)
from tests.conftest import SENTENCE_DEPS, SENTENCE_TOKENS

CORPUS_FILE = """\
#doc d1
#sent 0
1\tMr.\tmr.\tNNP
2\tWilliams\twilliams\tNNP
3\twas\tbe\tVBD
4\tsentenced\tsentence\tVBN
5\tfor\tfor\tIN
6\tthe\tthe\tDT
7\tmurder\tmurder\tNN
8\tof\tof\tIN
9\tWright\twright\tNNP
10\t.\t.\t.
#dep nn\t2\t1
#dep nsubjpass\t4\t2
#dep auxpass\t4\t3
#dep prep_for\t4\t7
#dep det\t7\t6
#dep prep_of\t7\t9
#ner person\t2\t2
#ner person\t9\t9
"""


def test_ingest_sentence_file():
    corpus = ingest(CORPUS_FILE)
    assert corpus.sentence_count == 1
    assert corpus.token_count == 10
    assert len(corpus.dep_edges) >= 5
    assert len(corpus.entity_mentions) == 2


def test_ingest_empty_stream():
    corpus = ingest("")
    assert corpus.sentence_count == 0
    build_indices(corpus)
    assert corpus.occurrence_count("anything") == 0


def test_ingest_dangling_dependency_reports_line():
    bad = "#sent 0\n1\ta\ta\tDT\n#dep nsubj\t1\t99\n"
    with pytest.raises(CorpusFormatError) as err:
        ingest(bad)
    assert "line 3" in str(err.value)
    assert "nonexistent token" in str(err.value)


def test_ingest_duplicate_sentence_id():
    bad = "#sent 0\n1\ta\ta\tDT\n\n#sent 0\n1\tb\tb\tDT\n"
    with pytest.raises(CorpusFormatError) as err:
        ingest(bad)
    assert "duplicate sentence id" in str(err.value)


def test_ingest_malformed_token_line():
    bad = "#sent 0\n1\tonly-two-fields\n"
    with pytest.raises(CorpusFormatError) as err:
        ingest(bad)
    assert "line 2" in str(err.value)


def test_hyphenated_labels_are_canonicalized():
    text = "#sent 0\n1\ta\ta\tDT\n2\tb\tb\tNN\n#dep prep-of\t2\t1\n"
    corpus = build_indices(ingest(text))
    assert corpus.dep_pairs("prep_of") == [((0, 2), (0, 1))]


def test_inverted_index_murder_posting(sentence_corpus):
    assert sentence_corpus.word_postings("murder") == [(0, 7)]


def test_zero_token_corpus_has_empty_indices():
    corpus = build_indices(CorpusBuilder().finish())
    assert corpus.word_postings("x") == []
    assert corpus.dep_pairs("nsubj") == []


def test_postings_sorted_across_sentences():
    # Oracle: a linear scan over the stored tokens.
    builder = CorpusBuilder()
    for words in (["alpha", "target"], ["target", "beta"], ["x", "target"]):
        builder.add_sentence([(w, w, "NN") for w in words])
    corpus = build_indices(builder.finish())
    expected = sorted(t.pos for t in corpus.iter_tokens()
                      if t.surface == "target")
    assert corpus.word_postings("target") == expected
    assert len(expected) == 3


def test_str_to_spans_multiword():
    builder = CorpusBuilder()
    builder.add_sentence([(w, w.lower(), "NNP") for w in
                          ["Lee", "Harvey", "Oswald", "fled"]])
    corpus = build_indices(builder.finish())
    assert corpus.str_to_spans("Lee Harvey Oswald") == {(0, 1, 3)}


def test_str_to_spans_single_word(sentence_corpus):
    assert sentence_corpus.str_to_spans("murder") == {(0, 7, 7)}


def test_str_to_spans_absent_and_empty(sentence_corpus):
    assert sentence_corpus.str_to_spans("zebra") == set()
    with pytest.raises(ValueError):
        sentence_corpus.str_to_spans("   ")


def test_str_to_spans_case_sensitive(sentence_corpus):
    assert sentence_corpus.str_to_spans("Murder") == set()
    assert sentence_corpus.search_sentences("MURDER") == [0]


def test_index_completeness_and_soundness(sentence_corpus):
    for tok in sentence_corpus.iter_tokens():
        spans = sentence_corpus.str_to_spans(tok.surface)
        assert (tok.pos[0], tok.pos[1], tok.pos[1]) in spans
        for span in spans:
            assert sentence_corpus.span_surface(span) == tok.surface


def test_occurrence_count(sentence_corpus):
    assert sentence_corpus.occurrence_count("murder") == 1
    assert sentence_corpus.occurrence_count("absent") == 0


def test_occurrence_count_planted():
    # Oracle: token scan while planting a known number of occurrences.
    builder = CorpusBuilder()
    planted = 0
    for i in range(30):
        words = ["filler", f"w{i}"]
        if i % 3 != 2:
            words.append("needle")
            planted += 1
            if i % 5 == 0:
                words.append("needle")
                planted += 1
        builder.add_sentence([(w, w, "NN") for w in words])
    corpus = build_indices(builder.finish())
    scanned = sum(1 for t in corpus.iter_tokens() if t.surface == "needle")
    assert planted == scanned
    assert corpus.occurrence_count("needle") == planted


def test_immutability_after_build(sentence_corpus):
    with pytest.raises(RuntimeError):
        sentence_corpus.register_gazetteer("school", {"University"})
    first = sentence_corpus.str_to_spans("murder")
    assert sentence_corpus.str_to_spans("murder") == first


# -- gazetteer ----------------------------------------------------------------


def _school_corpus():
    builder = CorpusBuilder()
    builder.add_sentence(
        [("He", "he", "PRP"), ("attended", "attend", "VBD"),
         ("the", "the", "DT"), ("University", "university", "NNP"),
         ("of", "of", "IN"), ("Washington", "washington", "NNP"),
         (".", ".", ".")],
        [("nsubj", 2, 1), ("prep_of", 4, 6), ("det", 4, 3), ("dobj", 2, 4)],
    )
    return builder


def test_gazetteer_university_of_washington():
    builder = _school_corpus()
    corpus = builder.finish()
    added = corpus.register_gazetteer("school", {"University", "College"})
    build_indices(corpus)
    assert added == 1
    mentions = [m for m in corpus.entity_mentions if m.etype == "school"]
    assert len(mentions) == 1
    assert corpus.span_surface(mentions[0].span) == "University of Washington"
    assert mentions[0].source == "gazetteer"
    # The entity predicate holds at the head position.
    assert (0, 4) in corpus.entity_head_positions("school")


def test_gazetteer_empty_headwords():
    corpus = _school_corpus().finish()
    assert corpus.register_gazetteer("school", set()) == 0


def test_gazetteer_collision_with_ner():
    builder = CorpusBuilder()
    builder.add_sentence([("Acme", "acme", "NNP")], ners=[("organization", 1, 1)])
    corpus = builder.finish()
    with pytest.raises(ValueError):
        corpus.register_gazetteer("organization", {"Acme"})


def test_gazetteer_repeated_headword_counts():
    # Oracle: a brute-force scan over chunk spans built by the documented
    # rule, counting spans headed by a listed word.
    builder = CorpusBuilder()
    for name in ("Stanford", "Cornell", "Oxford", "Yale"):
        builder.add_sentence(
            [("He", "he", "PRP"), ("joined", "join", "VBD"),
             (name, name.lower(), "NNP"),
             ("University", "university", "NNP"), (".", ".", ".")],
            [("nsubj", 2, 1), ("nn", 4, 3), ("dobj", 2, 4)],
        )
    corpus = builder.finish()
    added = corpus.register_gazetteer("school", {"University"})
    build_indices(corpus)
    expected = 0
    for sent in corpus.sentences:
        run = [t for t in sent.tokens if t.tag in ("NNP", "NNPS")]
        if run and run[-1].surface == "University":
            expected += 1
    assert added == expected == 4


def test_gazetteer_parity_with_ner():
    # Equal span and type behave identically regardless of source.
    b1 = CorpusBuilder()
    b1.add_sentence([("Rice", "rice", "NNP"), ("University", "university", "NNP")],
                    [("nn", 2, 1)])
    c1 = b1.finish()
    c1.register_gazetteer("school", {"University"})
    build_indices(c1)

    b2 = CorpusBuilder()
    b2.add_sentence([("Rice", "rice", "NNP"), ("University", "university", "NNP")],
                    [("nn", 2, 1)], ners=[("school", 1, 2)])
    c2 = build_indices(b2.finish())
    assert set(c1.entity_head_positions("school")) == \
        set(c2.entity_head_positions("school"))


# -- coreference ----------------------------------------------------------------


def test_coref_clusters_merge_across_sentences():
    text = (
        "#sent 0\n1\tOswald\toswald\tNNP\n2\tfled\tflee\tVBD\n"
        "#coref 3\t1-1\n\n"
        "#sent 1\n1\tLee\tlee\tNNP\n2\tHarvey\tharvey\tNNP\n"
        "3\tOswald\toswald\tNNP\n#coref 3\t1-3\n"
    )
    corpus = build_indices(ingest(text))
    assert len(corpus.coref_clusters) == 1
    cluster = corpus.coref_clusters[0]
    assert cluster.representative == (0, 1, 1)
    assert cluster.mentions == frozenset({(0, 1, 1), (1, 1, 3)})
    assert ((0, 1, 1), (1, 1, 3)) in corpus.coref_pairs()


def test_head_of_span(sentence_corpus):
    # "Mr. Williams": nn(2, 1) makes Williams the head.
    assert sentence_corpus.head_of_span((0, 1, 2)) == (0, 2)
    # No internal edges: falls back to the last token.
    assert sentence_corpus.head_of_span((0, 5, 6)) == (0, 6)
