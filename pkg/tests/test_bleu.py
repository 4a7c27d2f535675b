"""Sentence and corpus BLEU fixtures."""

import math

import pytest

from seqot import bleu_n, corpus_bleu


class TestSentenceBleu:
    def test_identical_sentence_is_one(self):
        s = "a small cat sat on the mat".split()
        for n in range(1, 5):
            assert bleu_n(s, [s], n) == 1.0

    def test_zero_unigram_overlap_is_zero(self):
        assert bleu_n("a b c".split(), ["x y z".split()]) == 0.0

    def test_empty_hypothesis_is_zero(self):
        assert bleu_n([], ["a b".split()]) == 0.0

    def test_hand_computed_brevity_fixture(self):
        """3-token hypothesis inside a 4-token reference: both clipped
        precisions are 1, so BLEU-2 equals the brevity penalty
        exp(1 - 4/3) = 0.716531..."""
        hyp = "the cat sat".split()
        ref = "the cat sat down".split()
        expected = math.exp(1.0 - 4.0 / 3.0)
        assert bleu_n(hyp, [ref], 2) == pytest.approx(expected, abs=1e-4)

    def test_self_similarity_for_orders_up_to_length(self, rng):
        vocab = list("abcdefg")
        for _ in range(10):
            length = int(rng.integers(1, 8))
            s = list(rng.choice(vocab, size=length))
            for n in range(1, length + 1):
                assert bleu_n(s, [s], n) == 1.0

    def test_clipping_respects_reference_counts(self):
        # 'the' appears twice in the hypothesis but once in the reference
        hyp = "the the cat".split()
        ref = "the cat".split()
        # unigram precision: clipped (1 + 1) / 3
        assert bleu_n(hyp, [ref], 1) == pytest.approx(2.0 / 3.0)

    def test_multiple_references_take_best_clip(self):
        hyp = "a b".split()
        refs = ["a x".split(), "y b".split()]
        assert bleu_n(hyp, refs, 1) == pytest.approx(1.0)

    def test_zero_higher_order_smoothed_not_zero(self):
        # shared unigrams but no shared bigram: smoothing keeps a tiny score
        hyp = "a c b".split()
        ref = "a b".split()
        score = bleu_n(hyp, [ref], 2)
        assert 0.0 < score < 0.01

    def test_brevity_penalty_only_penalizes_short(self):
        hyp = "a b c d e".split()
        ref = "a b c".split()
        # long hypotheses are penalized via precision, not BP
        assert bleu_n(hyp, [ref], 1) == pytest.approx(3.0 / 5.0)

    def test_determinism(self):
        hyp = "a b a c".split()
        ref = "a c b".split()
        assert bleu_n(hyp, [ref], 4) == bleu_n(hyp, [ref], 4)

    def test_argument_validation(self):
        with pytest.raises(ValueError, match="max_n"):
            bleu_n(["a"], [["a"]], 0)
        with pytest.raises(ValueError, match="reference"):
            bleu_n(["a"], [])


class TestCorpusBleu:
    def test_identical_corpus_is_one(self):
        hyps = ["a b c".split(), "d e".split()]
        refs = [[h] for h in hyps]
        assert corpus_bleu(hyps, refs) == 1.0

    def test_aggregation_differs_from_mean_of_sentences(self):
        hyps = ["a b".split(), "x y z w".split()]
        refs = [["a b".split()], ["x q z w".split()]]
        corpus = corpus_bleu(hyps, refs, 1)
        # aggregate unigram precision (2 + 3) / (2 + 4)
        assert corpus == pytest.approx(5.0 / 6.0)

    def test_no_smoothing_at_corpus_level(self):
        hyps = ["a b".split()]
        refs = [["x y".split()]]
        assert corpus_bleu(hyps, refs) == 0.0

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            corpus_bleu([], [])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError, match="hypotheses"):
            corpus_bleu([["a"]], [])
