import itertools
from functools import lru_cache

import pytest
from hypothesis import given, settings, strategies as st

from errors import DataError
from pipeline.alignscore import (ErrorCounts, OpKind, ScoreTable, aggregate_scores, align, cba, pair_texts,
                                 score_by_pair, score_utterance)
from tests.helpers import utt


def exhaustive_cost(ref, hyp):
    """Cheapest edit script found by trying every operation at every step."""
    @lru_cache(maxsize=None)
    def best(i, j):
        if i == len(ref) and j == len(hyp):
            return 0
        options = []
        if i < len(ref) and j < len(hyp):
            options.append(best(i + 1, j + 1) + (ref[i] != hyp[j]))
        if i < len(ref):
            options.append(best(i + 1, j) + 1)
        if j < len(hyp):
            options.append(best(i, j + 1) + 1)
        return min(options)
    return best(0, 0)


def check_alignment(ref, hyp, alignment):
    ref_seen = [op.ref_index for op in alignment.ops if op.ref_index is not None]
    hyp_seen = [op.hyp_index for op in alignment.ops if op.hyp_index is not None]
    assert ref_seen == list(range(len(ref)))
    assert hyp_seen == list(range(len(hyp)))
    for op in alignment.ops:
        if op.kind is OpKind.MATCH:
            assert ref[op.ref_index] == hyp[op.hyp_index]
        if op.kind is OpKind.SUB:
            assert ref[op.ref_index] != hyp[op.hyp_index]
    assert alignment.cost == alignment.count(OpKind.SUB) + alignment.count(OpKind.DEL) + alignment.count(OpKind.INS)


def sequences(max_len):
    for n in range(max_len + 1):
        yield from itertools.product('abc', repeat=n)


def test_cost_matches_oracle_on_short_sequences():
    for ref in sequences(4):
        for hyp in sequences(4):
            alignment = align(ref, hyp)
            assert alignment.cost == exhaustive_cost(ref, hyp), (ref, hyp)
            check_alignment(ref, hyp, alignment)


@settings(max_examples=2000, deadline=None)
@given(st.lists(st.sampled_from('abc'), max_size=6), st.lists(st.sampled_from('abc'), max_size=6))
def test_cost_matches_oracle(ref, hyp):
    alignment = align(ref, hyp)
    assert alignment.cost == exhaustive_cost(tuple(ref), tuple(hyp))
    check_alignment(ref, hyp, alignment)
    assert align(ref, hyp) == alignment


def kinds(alignment):
    return [op.kind for op in alignment.ops]


class TestAlign:
    def test_identical(self):
        a = align('abc', 'abc')
        assert kinds(a) == [OpKind.MATCH] * 3
        assert a.cost == 0

    def test_one_substitution(self):
        a = align('abc', 'axc')
        assert kinds(a) == [OpKind.MATCH, OpKind.SUB, OpKind.MATCH]
        assert (a.count(OpKind.MATCH), a.count(OpKind.SUB), a.count(OpKind.DEL), a.count(OpKind.INS)) == (2, 1, 0, 0)

    def test_insertion_into_empty(self):
        assert kinds(align('', 'a')) == [OpKind.INS]
        assert kinds(align('a', '')) == [OpKind.DEL]

    def test_substitution_preferred_over_ins_del(self):
        assert kinds(align('a', 'b')) == [OpKind.SUB]

    def test_tokens_compare_by_surface(self):
        ref = utt('r', 'eng:the zul:umuntu').tokens
        hyp = utt('h', 'the umuntu').tokens
        assert align(ref, hyp).cost == 0


class TestScoring:
    def test_perfect(self):
        ref = utt('u', 'eng:the zul:umuntu')
        s = score_utterance(ref, ref)
        assert s.overall.wer == 0
        assert s.per_language['eng'].wer == 0
        assert s.per_language['zul'].wer == 0

    def test_substitution_goes_to_reference_language(self):
        s = score_utterance(utt('u', 'eng:the zul:umuntu'), utt('u', 'the umfana'))
        assert s.overall.wer == pytest.approx(0.5)
        assert (s.per_language['zul'].sub, s.per_language['zul'].n_ref) == (1, 1)
        assert s.per_language['eng'].errors == 0

    def test_insertion_uses_hypothesis_tag(self):
        s = score_utterance(utt('u', 'eng:the'), utt('u', 'the zul:manje'))
        assert s.overall.wer == 1.0
        assert s.per_language['zul'].ins == 1
        assert s.per_language['eng'].errors == 0

    def test_insertion_falls_back_to_preceding_reference(self):
        s = score_utterance(utt('u', 'eng:go zul:manje'), utt('u', 'go now manje'))
        assert s.per_language['eng'].ins == 1

    def test_insertion_before_everything_uses_following_reference(self):
        s = score_utterance(utt('u', 'zul:manje'), utt('u', 'extra manje'))
        assert s.per_language['zul'].ins == 1

    def test_insertion_without_any_reference(self):
        s = score_utterance(utt('u', ''), utt('u', 'extra'))
        assert s.per_language['unk'].ins == 1
        assert s.overall.wer is None

    def test_untagged_reference_words(self):
        s = score_utterance(utt('u', 'eng:a b'), utt('u', 'a'))
        assert s.per_language['unk'].dels == 1
        assert s.overall.n_ref == sum(c.n_ref for c in s.per_language.values())

    def test_all_deletions(self):
        s = score_utterance(utt('u', 'eng:a zul:b'), utt('u', ''))
        assert s.overall.wer == 1.0


class TestCodeSwitchedBigrams:
    REF = utt('u', 'eng:go zul:manje')

    def test_both_matched(self):
        assert cba(self.REF, align(self.REF.tokens, utt('h', 'go manje').tokens)) == (1, 1)

    def test_substituted(self):
        assert cba(self.REF, align(self.REF.tokens, utt('h', 'go later').tokens)) == (1, 0)

    def test_insertion_between(self):
        alignment = align(self.REF.tokens, utt('h', 'go now manje').tokens)
        assert cba(self.REF, alignment) == (1, 1)
        assert cba(self.REF, alignment, strict=True) == (1, 0)

    def test_no_switches(self):
        ref = utt('u', 'eng:a eng:b')
        assert cba(ref, align(ref.tokens, ref.tokens)) == (0, 0)

    def test_score_carries_strict_flag(self):
        hyp = utt('h', 'go now manje')
        assert score_utterance(self.REF, hyp).cba.n_correct == 1
        assert score_utterance(self.REF, hyp, strict=True).cba.n_correct == 0


class TestAggregation:
    def test_pooled_not_averaged(self):
        a = score_utterance(utt('a', 'eng:x eng:y'), utt('a', 'x z'))
        b = score_utterance(utt('b', 'eng:x eng:y'), utt('b', 'x y'))
        report = aggregate_scores([a, b])
        assert report.wer == pytest.approx(0.25)

    def test_single_utterance(self):
        a = score_utterance(utt('a', 'eng:x zul:y'), utt('a', 'x'))
        report = aggregate_scores([a])
        assert report.overall == a.overall
        assert report.cba.n_switch_bigrams == 1

    def test_permutation(self):
        parts = [score_utterance(utt(f'u{i}', 'eng:x zul:y sot:z'), utt(f'u{i}', ' '.join(['x', 'y', 'q'][:i])))
                 for i in range(4)]
        assert aggregate_scores(parts).to_dict() == aggregate_scores(list(reversed(parts))).to_dict()

    def test_no_reference_words(self):
        with pytest.raises(DataError):
            aggregate_scores([score_utterance(utt('a', ''), utt('a', 'x'))])

    def test_bantu_pool(self):
        report = aggregate_scores([
            score_utterance(utt('a', 'eng:x zul:y sot:z'), utt('a', 'x q q')),
            score_utterance(utt('b', 'xho:w xho:w eng:x'), utt('b', 'w w x')),
        ])
        assert report.bantu == ErrorCounts(n_ref=4, sub=2)
        assert report.bantu.wer == pytest.approx(0.5)

    def test_by_pair(self):
        parts = [
            score_utterance(utt('a', 'eng:x zul:y'), utt('a', 'x y')),
            score_utterance(utt('b', 'eng:x xho:y'), utt('b', 'x q')),
        ]
        by_pair = score_by_pair(parts)
        assert list(by_pair) == ['EX', 'EZ', 'Overall']
        assert by_pair['EX'].wer == pytest.approx(0.5)
        assert by_pair['Overall'].wer == pytest.approx(0.25)
        rows = ScoreTable(by_pair).table_rows()
        assert rows[-1][:4] == ['Overall', 2, 4, '25.00']


def test_pair_texts_policy(caplog):
    refs = [utt('a', 'eng:x'), utt('b', 'eng:y')]
    hyps = [utt('a', 'x'), utt('stray', 'z')]
    pairs = pair_texts(refs, hyps)
    assert [r.id for r, _ in pairs] == ['a', 'b']
    assert pairs[1][1].tokens == ()
    assert 'stray' in caplog.text
    assert [r.id for r, _ in pair_texts(refs, hyps, missing_as_deletions=False)] == ['a']
