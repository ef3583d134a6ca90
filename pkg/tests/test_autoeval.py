from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

from citeforge.autoeval import (
    DEFAULT_VERB_LEXICON,
    EvalError,
    rouge,
    rouge_corpus,
    tokenize,
    verb_frequency,
)

# ---------------------------------------------------------------------------
# brute-force oracle: explicit n-gram lists and full-table LCS


def oracle_rouge_n(candidate, reference, n):
    cand = tokenize(candidate)
    ref = tokenize(reference)
    cand_ngrams = [tuple(cand[i : i + n]) for i in range(len(cand) - n + 1)]
    ref_ngrams = [tuple(ref[i : i + n]) for i in range(len(ref) - n + 1)]
    remaining = list(ref_ngrams)
    overlap = 0
    for g in cand_ngrams:
        if g in remaining:
            remaining.remove(g)
            overlap += 1
    p = overlap / len(cand_ngrams) if cand_ngrams else 0.0
    r = overlap / len(ref_ngrams) if ref_ngrams else 0.0
    f1 = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return p, r, f1


def oracle_rouge_l(candidate, reference):
    cand = tokenize(candidate)
    ref = tokenize(reference)
    m, n = len(cand), len(ref)
    table = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            if cand[i - 1] == ref[j - 1]:
                table[i][j] = table[i - 1][j - 1] + 1
            else:
                table[i][j] = max(table[i - 1][j], table[i][j - 1])
    lcs = table[m][n]
    p = lcs / m if m else 0.0
    r = lcs / n if n else 0.0
    f1 = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return p, r, f1


WORDS = ["the", "cat", "sat", "ran", "dog", "on", "mat", "fast", "slowly", "a"]


def random_text(rng, max_len=12):
    return " ".join(rng.choice(WORDS) for _ in range(rng.randint(0, max_len)))


def test_identity_scores_one():
    text = "The cat sat on the mat."
    for variant in ("R1", "R2", "RL"):
        score = rouge(text, text, variant)
        assert score.precision == score.recall == score.f1 == 1.0


def test_hand_counted_unigram_case():
    score = rouge("the cat sat", "the cat ran", "R1")
    assert score.precision == pytest.approx(2 / 3)
    assert score.recall == pytest.approx(2 / 3)
    assert score.f1 == pytest.approx(2 / 3)


def test_disjoint_vocabulary_scores_zero():
    for variant in ("R1", "R2", "RL"):
        score = rouge("alpha beta", "gamma delta", variant)
        assert score.precision == score.recall == score.f1 == 0.0


def test_empty_reference_flagged():
    score = rouge("something", "", "R1")
    assert score.recall == 0.0 and score.f1 == 0.0
    assert score.empty_reference


def test_oracle_equivalence_on_random_pairs():
    rng = random.Random(1234)
    for _ in range(100):
        a, b = random_text(rng), random_text(rng)
        for variant, oracle in (
            ("R1", lambda x, y: oracle_rouge_n(x, y, 1)),
            ("R2", lambda x, y: oracle_rouge_n(x, y, 2)),
            ("RL", oracle_rouge_l),
        ):
            score = rouge(a, b, variant)
            op, orr, of1 = oracle(a, b)
            assert abs(score.precision - op) <= 1e-12
            assert abs(score.recall - orr) <= 1e-12
            assert abs(score.f1 - of1) <= 1e-12


@given(st.lists(st.sampled_from(WORDS), max_size=10), st.lists(st.sampled_from(WORDS), max_size=10))
def test_r1_precision_recall_symmetry(a_words, b_words):
    a, b = " ".join(a_words), " ".join(b_words)
    assert rouge(a, b, "R1").precision == pytest.approx(rouge(b, a, "R1").recall)


@given(
    st.lists(st.sampled_from(WORDS), max_size=8),
    st.lists(st.sampled_from(WORDS), min_size=1, max_size=8),
)
def test_r1_recall_monotone_in_appended_reference_token(cand_words, ref_words):
    cand = " ".join(cand_words)
    ref = " ".join(ref_words)
    base = rouge(cand, ref, "R1").recall
    extended = rouge(cand + " " + ref_words[0], ref, "R1").recall
    assert extended >= base - 1e-12


def test_rouge_corpus_all_identical():
    pairs = {f"e{i}": "the cat sat" for i in range(3)}
    result = rouge_corpus(pairs, dict(pairs))
    assert all(v == pytest.approx(1.0) for v in result.aggregate_f1.values())


def test_rouge_corpus_hand_computed_mean():
    outputs = {"a": "the cat sat", "b": "alpha beta"}
    references = {"a": "the cat ran", "b": "gamma delta"}
    result = rouge_corpus(outputs, references)
    assert result.aggregate_f1["R1"] == pytest.approx((2 / 3 + 0.0) / 2)


def test_rouge_corpus_rejects_empty_and_mismatch():
    with pytest.raises(EvalError):
        rouge_corpus({}, {})
    with pytest.raises(EvalError, match="id mismatch"):
        rouge_corpus({"a": "x"}, {"b": "y"})


# ---------------------------------------------------------------------------
# verb frequency


def test_verb_frequency_suffix_match():
    report = verb_frequency({"model": ["Rei (2017) further extended this model with an objective."]})
    assert report.counts["model"]["extend"] == 1
    assert report.rates["model"] == 1.0


def test_verb_frequency_empty():
    report = verb_frequency({"model": []})
    assert report.rates["model"] == 0.0
    assert all(v == 0 for v in report.counts["model"].values())


def test_verb_frequency_planted_rate():
    citations = [
        "X (2000) improves the baseline.",
        "Y (2001) proposed a method.",
        "Z (2002) builds on prior work.",
        "W (2003) following earlier ideas.",
    ] + ["Q (2004) presents results."] * 6
    report = verb_frequency({"sys": citations})
    assert report.totals["sys"] == 10
    assert report.rates["sys"] == pytest.approx(0.4)


def test_verb_frequency_e_drop_forms():
    report = verb_frequency({"s": ["A (1999) improving things.", "B (1998) introduces ideas."]})
    assert report.counts["s"]["improve"] == 1
    assert report.counts["s"]["introduce"] == 1


def test_default_lexicon():
    assert set(DEFAULT_VERB_LEXICON) == {"extend", "improve", "propose", "introduce", "build", "follow"}
