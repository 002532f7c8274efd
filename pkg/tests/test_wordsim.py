import math
import random

from rexbench.corpus import CorpusBuilder, build_indices
from rexbench.wordsim import (build_vectors, deserialize_table, prefix_words,
                              serialize_table, similar_words)


def _corpus_from_sentences(sentences):
    builder = CorpusBuilder()
    for words in sentences:
        builder.add_sentence([(w, w, "NN") for w in words])
    return build_indices(builder.finish())


def dense_oracle(corpus, min_count):
    """Independent dense PPMI + cosine over an explicit co-occurrence
    matrix with row-marginal normalization."""
    sent_words = [sorted({t.surface for t in s.tokens})
                  for s in corpus.sentences]
    occ = {}
    for t in corpus.iter_tokens():
        occ[t.surface] = occ.get(t.surface, 0) + 1
    vocab = sorted(w for w, c in occ.items() if c >= min_count)
    k = int(len(occ) * 0.001)
    stop = set()
    if k > 0:
        stop = {w for w, _ in sorted(occ.items(),
                                     key=lambda i: (-i[1], i[0]))[:k]}
    # Dense symmetric matrix of sentence co-occurrence counts.
    matrix = {(w, v): 0 for w in vocab for v in vocab}
    for words in sent_words:
        words = [w for w in words if w in set(vocab)]
        for w in words:
            for v in words:
                if w != v:
                    matrix[(w, v)] += 1
    row = {w: sum(matrix[(w, v)] for v in vocab) for w in vocab}
    total = sum(row.values())
    vecs = {}
    for w in vocab:
        weights = {}
        for v in vocab:
            if v == w or v in stop:
                continue
            joint = matrix[(w, v)]
            if joint == 0 or row[w] == 0 or row[v] == 0:
                continue
            val = math.log(joint * total / (row[w] * row[v]))
            if val > 0:
                weights[v] = val
        vecs[w] = weights

    def cos(a, b):
        if a == b:
            return 1.0 if vecs[a] else 0.0
        wa, wb = vecs[a], vecs[b]
        dot = sum(wa[x] * wb.get(x, 0.0) for x in wa)
        na = math.sqrt(sum(x * x for x in wa.values()))
        nb = math.sqrt(sum(x * x for x in wb.values()))
        if na == 0 or nb == 0:
            return 0.0
        return dot / (na * nb)

    return vecs, cos


def test_direct_cooccurrence():
    corpus = _corpus_from_sentences([["a", "b"], ["a", "c"]])
    table = build_vectors(corpus, min_count=1)
    vec = table.vector("a")
    assert vec.weights.get("b", 0) > 0
    assert vec.weights.get("c", 0) > 0


def test_min_count_filters():
    corpus = _corpus_from_sentences([["rare", "common"], ["common", "x"],
                                     ["common", "x"]])
    table = build_vectors(corpus, min_count=2)
    assert "rare" not in table
    assert "common" in table


def test_ppmi_matches_counting_oracle():
    rng = random.Random(3)
    vocab = [f"w{i}" for i in range(12)]
    sentences = [[rng.choice(vocab) for _ in range(rng.randint(2, 6))]
                 for _ in range(10)]
    corpus = _corpus_from_sentences(sentences)
    table = build_vectors(corpus, min_count=1)
    oracle_vecs, _ = dense_oracle(corpus, min_count=1)
    assert set(table.vectors) == set(oracle_vecs)
    for w, weights in oracle_vecs.items():
        got = table.vector(w).weights
        assert set(got) == set(weights)
        for ctx, val in weights.items():
            assert abs(got[ctx] - val) < 1e-9


def test_cosine_matches_dense_oracle_and_range():
    rng = random.Random(9)
    vocab = [f"t{i}" for i in range(40)]
    sentences = [[rng.choice(vocab) for _ in range(rng.randint(2, 7))]
                 for _ in range(60)]
    corpus = _corpus_from_sentences(sentences)
    table = build_vectors(corpus, min_count=1)
    _, cos = dense_oracle(corpus, min_count=1)
    words = sorted(table.vectors)
    for w1 in words[:15]:
        for w2 in words[:15]:
            got = table.cosine(w1, w2)
            want = cos(w1, w2)
            assert abs(got - want) < 1e-9, (w1, w2)
            assert 0.0 <= got <= 1.0 + 1e-12
            assert abs(got - table.cosine(w2, w1)) < 1e-15


def test_self_similarity_and_orthogonality():
    corpus = _corpus_from_sentences([["a", "b"], ["a", "b"], ["c", "d"],
                                     ["c", "d"]])
    table = build_vectors(corpus, min_count=1)
    assert table.cosine("a", "a") == 1.0
    assert table.cosine("a", "c") == 0.0


def test_similar_words_ranking():
    # "murdered" and "assassinated" share victim contexts; "wedding" does not.
    sentences = []
    for victim in ("kennedy", "lincoln", "garfield"):
        sentences.append(["oswald", "murdered", victim])
        sentences.append(["booth", "assassinated", victim])
    sentences.append(["big", "wedding", "party"])
    sentences.append(["big", "wedding", "party"])
    corpus = _corpus_from_sentences(sentences)
    table = build_vectors(corpus, min_count=1)
    sims = similar_words("murdered", k=5, table=table)
    words = [s.word for s in sims]
    assert "assassinated" in words
    assert "wedding" not in words or words.index("assassinated") < words.index("wedding")
    assert sims[0].occurrences == corpus.occurrence_count(sims[0].word)


def test_similar_words_oov():
    corpus = _corpus_from_sentences([["a", "b"]])
    table = build_vectors(corpus, min_count=1)
    assert similar_words("zebra", k=3, table=table) == []


def test_prefix_words():
    corpus = _corpus_from_sentences(
        [["married", "marriage"], ["married", "x"], ["marred", "y"]])
    table = build_vectors(corpus, min_count=1)
    got = prefix_words("marr", table)
    words = [s.word for s in got]
    assert words == ["married", "marred", "marriage"]
    assert got[0].occurrences == 2
    for s in got:
        assert s.occurrences == corpus.occurrence_count(s.word)
    assert prefix_words("marriagesarelong", table) == []


def test_rebuild_and_serialization_deterministic():
    rng = random.Random(4)
    vocab = [f"v{i}" for i in range(20)]
    sentences = [[rng.choice(vocab) for _ in range(4)] for _ in range(30)]
    corpus = _corpus_from_sentences(sentences)
    t1 = serialize_table(build_vectors(corpus, min_count=1))
    t2 = serialize_table(build_vectors(corpus, min_count=1))
    assert t1 == t2
    table = deserialize_table(t1, corpus)
    assert serialize_table(table) == t1
