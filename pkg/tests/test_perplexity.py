import math

import pytest
from hypothesis import given, settings, strategies as st

from models import TaggedUtterance, Token
from pipeline.ngramlm import BOS, EOS, ModelInfo, NGramModel, Smoothing, count_ngrams, train_lm
from pipeline.perplexity import (EvalConfig, PerplexityTable, PoolKind, assign_positions, direction, perplexity,
                                 perplexity_by_pair)
from tests.helpers import tok, utt
from utils import languages as registry
from utils import reports


def uniform_model(words):
    events = sorted(set(words) | {EOS})
    lp = math.log10(1.0 / len(events))
    probs = {(w,): lp for w in events}
    probs[(BOS,)] = -99.0
    return NGramModel(1, probs, {}, set(events) | {BOS}, ModelInfo('uniform'))


def closed_model(utts, order=2):
    vocab = {w for u in utts for w in u.words}
    return train_lm(count_ngrams(utts, order), Smoothing.add_k(0.5), vocab)


def test_switch_direction_by_family():
    eng, zul, sot, afr = (registry.get_language(c) for c in ('eng', 'zul', 'sot', 'afr'))
    assert direction(eng, zul) == 'EB'
    assert direction(sot, eng) == 'BE'
    assert direction(zul, sot) == 'BB'
    assert direction(eng, afr) == 'other'


def test_position_assignment():
    assert assign_positions(utt('u', 'eng:hello zul:sawubona').tokens) == [
        (False, 'eng'), (True, 'EB'), (False, 'zul'),
    ]


def test_first_word_and_end_marker_are_monolingual():
    positions = assign_positions(utt('u', 'zul:a eng:b eng:c').tokens)
    assert positions == [(False, 'zul'), (True, 'BE'), (False, 'eng'), (False, 'eng')]


def test_unknown_tokens_break_switches():
    positions = assign_positions(utt('u', 'eng:a x zul:b').tokens)
    assert positions == [(False, 'eng'), (False, None), (False, 'zul'), (False, 'zul')]


def test_empty_utterance_scores_end_marker_only():
    assert assign_positions(()) == [(False, None)]


def test_uniform_model_gives_vocabulary_size():
    utts = [utt('a', 'eng:the zul:umuntu eng:go'), utt('b', 'zul:yebo zul:manje'), utt('c', 'eng:now')]
    words = {w for u in utts for w in u.words}
    report = perplexity(uniform_model(words), utts)
    v = len(words) + 1
    for pool in report.pools:
        if pool.token_count:
            assert pool.ppl == pytest.approx(v, rel=1e-12), pool.name


def test_monolingual_corpus():
    utts = [utt('a', 'eng:a eng:b'), utt('b', 'eng:b eng:c eng:a')]
    report = perplexity(closed_model(utts), utts)
    assert report.cpp is None
    assert report.pool(PoolKind.CS_ALL).token_count == 0
    assert report.mpp == report.ppl


def test_oov_positions_are_excluded():
    model = uniform_model({'a', 'b'})
    report = perplexity(model, [utt('u', 'eng:a eng:zzz eng:b')])
    assert report.oov_count == 1
    assert report.pool(PoolKind.ALL).token_count == 3


def test_reordering_is_invisible():
    utts = [utt('a', 'eng:a zul:b eng:c'), utt('b', 'zul:b zul:b sot:d'), utt('c', 'eng:c eng:a zul:b')]
    model = closed_model(utts)
    assert perplexity(model, utts).to_dict() == perplexity(model, list(reversed(utts))).to_dict()


def test_parallel_matches_serial():
    utts = [utt(f'u{i}', 'eng:a zul:b eng:c' if i % 2 else 'zul:b sot:d eng:a') for i in range(12)]
    model = closed_model(utts)
    assert perplexity(model, utts, EvalConfig(jobs=3)).to_dict() == perplexity(model, utts).to_dict()


def test_by_pair():
    utts = [utt('a', 'eng:a zul:b'), utt('b', 'eng:a xho:c'), utt('c', 'd')]
    reports_by_pair = perplexity_by_pair(uniform_model({'a', 'b', 'c', 'd'}), utts)
    assert list(reports_by_pair) == ['EX', 'EZ', 'untagged']


def test_table_layout():
    utts = [utt('a', 'eng:a zul:b eng:a'), utt('b', 'zul:b zul:b')]
    model = uniform_model({'a', 'b'})
    table = PerplexityTable([('uniform', None, perplexity(model, utts))])
    assert table.table_header() == ['model', 'dev', 'test', 'all_cpp', 'cpp_eb', 'cpp_be', 'all_mpp',
                                    'mpp_eng', 'mpp_zul']
    (row,) = table.table_rows()
    assert row[0] == 'uniform'
    assert row[1] == reports.UNDEFINED
    assert row[2:] == ['3.00'] * 7


LANGS = ['eng', 'zul', 'xho', 'sot']


@st.composite
def tagged_corpora(draw):
    n = draw(st.integers(min_value=1, max_value=15))
    utts = []
    for i in range(n):
        pairs = draw(st.lists(st.tuples(st.sampled_from('abcdefgh'), st.sampled_from(LANGS)),
                              min_size=1, max_size=10))
        tokens = [Token(w, registry.get_language(c)) for w, c in pairs]
        utts.append(TaggedUtterance(f'u{i}', 'spk', tokens=tokens))
    return utts


@settings(max_examples=100, deadline=None)
@given(tagged_corpora())
def test_decomposition_identity(utts):
    report = perplexity(closed_model(utts), utts)
    n_all = report.pool(PoolKind.ALL).token_count
    n_cs = report.pool(PoolKind.CS_ALL).token_count
    n_mono = report.pool(PoolKind.MONO_ALL).token_count
    assert n_all == n_cs + n_mono
    assert n_cs == sum(p.token_count for p in report.pools if p.kind is PoolKind.CS_DIR)
    assert n_mono == sum(p.token_count for p in report.pools if p.kind is PoolKind.MONO_LANG)
    if n_cs and n_mono:
        lhs = n_all * math.log(report.ppl)
        rhs = n_cs * math.log(report.cpp) + n_mono * math.log(report.mpp)
        assert lhs == pytest.approx(rhs, rel=1e-9)
