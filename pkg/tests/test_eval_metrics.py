from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from railadvisor.corpus import count_tokens
from railadvisor.eval_metrics import (
    ScoreSet,
    bleu,
    lcs_length,
    metric_tokenize,
    ngram_counts,
    rouge_l,
    rouge_n,
    score_pair,
)
from oracles import (
    naive_bleu,
    naive_lcs,
    naive_metric_tokenize,
    naive_rouge_l,
    naive_rouge_n,
    naive_score_texts,
)

VOCAB = ["the", "cat", "is", "on", "mat", "a", "b", "c", "d", "x", "故", "障", "车"]
token_lists = st.lists(st.sampled_from(VOCAB), max_size=25)

MIXED = list("动车组故障处理 abXY12，。？?!\n")
mixed_text = st.text(alphabet=st.sampled_from(MIXED), max_size=80)


class TestMetricTokenize:
    def test_empty(self):
        assert metric_tokenize("") == []

    def test_rule_forced_example(self):
        assert metric_tokenize("CR400AF故障") == ["cr400af", "故", "障"]

    def test_case_folding(self):
        assert metric_tokenize("HMI hmi") == ["hmi", "hmi"]

    def test_punctuation_stripped(self):
        assert metric_tokenize("运行。？！") == ["运", "行"]

    def test_length_matches_count_tokens(self):
        rng = random.Random(13)
        corpus_chars = "动车组牵引丢失故障处理速度传感器 CRHMI0123 ,.?！"
        for _ in range(20):
            text = "".join(rng.choice(corpus_chars) for _ in range(rng.randint(0, 60)))
            assert len(metric_tokenize(text)) == count_tokens(text)

    @given(mixed_text)
    def test_matches_independent_tokenizer(self, text):
        assert metric_tokenize(text) == naive_metric_tokenize(text)


class TestRougeN:
    def test_identity(self):
        seq = ["a", "b", "c", "d"]
        assert rouge_n(seq, seq, 1) == 1.0
        assert rouge_n(seq, seq, 2) == 1.0

    def test_disjoint(self):
        assert rouge_n(["a", "b"], ["x", "y"], 1) == 0.0

    def test_hand_counts(self):
        ref = ["a", "b", "c", "d"]
        cand = ["a", "b", "x"]
        assert rouge_n(cand, ref, 1) == pytest.approx(0.5)
        assert rouge_n(cand, ref, 2) == pytest.approx(1 / 3)

    def test_reference_without_ngrams(self):
        assert rouge_n(["a"], [], 1) == 0.0
        assert rouge_n(["a", "b"], ["x"], 2) == 0.0

    def test_clipping(self):
        # candidate repeats a token more often than the reference holds it
        assert rouge_n(["a", "a", "a"], ["a", "a", "b"], 1) == pytest.approx(2 / 3)

    @given(token_lists, token_lists, st.integers(1, 3))
    @settings(max_examples=80)
    def test_matches_oracle(self, cand, ref, n):
        assert rouge_n(cand, ref, n) == pytest.approx(
            naive_rouge_n(cand, ref, n), abs=1e-12
        )


class TestLcs:
    def test_identity(self):
        seq = ["a", "b", "c"]
        assert lcs_length(seq, seq) == 3

    def test_disjoint(self):
        assert lcs_length(["a"], ["b"]) == 0

    def test_hand_dp(self):
        assert lcs_length(["a", "b", "c", "d"], ["a", "b", "x"]) == 2

    def test_order_sensitivity(self):
        assert lcs_length(["a", "b"], ["b", "a"]) == 1

    @given(token_lists, token_lists)
    @settings(max_examples=80)
    def test_matches_full_table_oracle(self, a, b):
        assert lcs_length(a, b) == naive_lcs(a, b)

    @given(token_lists, token_lists)
    @settings(max_examples=80)
    def test_lcs_bounded_by_clipped_unigram_overlap(self, a, b):
        counts_a = ngram_counts(a, 1)
        counts_b = ngram_counts(b, 1)
        clipped = sum(min(c, counts_b[g]) for g, c in counts_a.items())
        assert lcs_length(a, b) <= clipped


class TestRougeL:
    def test_identity(self):
        assert rouge_l(["x", "y"], ["x", "y"]) == 1.0

    def test_from_lcs_example(self):
        assert rouge_l(["a", "b", "x"], ["a", "b", "c", "d"]) == pytest.approx(0.5)

    def test_empty_candidate(self):
        assert rouge_l([], ["a", "b"]) == 0.0

    def test_empty_reference(self):
        assert rouge_l(["a"], []) == 0.0


class TestBleu:
    def test_identity_length_four(self):
        seq = ["a", "b", "c", "d"]
        assert bleu(seq, seq) == pytest.approx(1.0)

    def test_identity_short(self):
        assert bleu(["a", "b"], ["a", "b"]) == pytest.approx(1.0)

    def test_empty_candidate(self):
        assert bleu([], ["a"]) == 0.0

    def test_clipped_unigram_precision_case(self):
        cand = ["the"] * 7
        ref = ["the", "cat", "is", "on", "the", "mat"]
        # p1 clipped = 2/7; higher orders smoothed; candidate longer so BP=1
        expected = math.exp(
            (math.log(2 / 7) + math.log(1 / 7) + math.log(1 / 6) + math.log(1 / 5)) / 4
        )
        assert bleu(cand, ref) == pytest.approx(expected, abs=1e-12)
        assert bleu(cand, ref) == pytest.approx(naive_bleu(cand, ref), abs=1e-12)

    def test_brevity_penalty_applied(self):
        cand = ["a", "b"]
        ref = ["a", "b", "c", "d"]
        assert bleu(cand, ref) == pytest.approx(math.exp(1 - 4 / 2), abs=1e-12)

    def test_zero_unigram_overlap_is_zero(self):
        assert bleu(["q", "w"], ["a", "b"]) == 0.0

    @given(token_lists, token_lists)
    @settings(max_examples=80)
    def test_matches_oracle(self, cand, ref):
        assert bleu(cand, ref) == pytest.approx(naive_bleu(cand, ref), abs=1e-12)


class TestScorePair:
    def test_identical_texts(self):
        text = "牵引丢失时利用剩余动力保持运行"
        assert score_pair(text, text) == ScoreSet(1.0, 1.0, 1.0, 1.0)

    def test_empty_candidate(self):
        assert score_pair("", "参考答案内容") == ScoreSet(0.0, 0.0, 0.0, 0.0)

    def test_token_disjoint(self):
        scores = score_pair("abc def", "轴温报警处置")
        assert scores == ScoreSet(0.0, 0.0, 0.0, 0.0)

    def test_fixture_pair_matches_oracle(self):
        cand = "司机应利用剩余动力保持运行，并通知随车机械师确认故障代码3454。"
        ref = "发现牵引丢失后，司机利用剩余动力保持运行，立即通知随车机械师。"
        got = score_pair(cand, ref)
        expected = naive_score_texts(cand, ref)
        for value, want in zip(got.as_tuple(), expected):
            assert value == pytest.approx(want, abs=1e-9)

    @given(mixed_text, mixed_text)
    @settings(max_examples=60)
    def test_scores_within_unit_interval(self, cand, ref):
        for value in score_pair(cand, ref).as_tuple():
            assert 0.0 <= value <= 1.0

    def test_pure(self):
        cand, ref = "甲乙丙丁", "乙丙戊"
        assert score_pair(cand, ref) == score_pair(cand, ref)
