"""Perplexity with its code-switch (CPP) / monolingual (MPP) decomposition."""
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from functools import partial

from models import Family
from pipeline.corpus import pair_label
from pipeline.ngramlm import BOS, EOS
from utils import reports
from utils.parallel import parallel_map

logger = logging.getLogger(__name__)


class PoolKind(str, Enum):
    ALL = 'all'
    CS_ALL = 'cs_all'
    CS_DIR = 'cs_dir'
    MONO_ALL = 'mono_all'
    MONO_LANG = 'mono_lang'


DIRECTIONS = ('EB', 'BE', 'BB', 'other')


@dataclass(frozen=True)
class EvalConfig:
    jobs: int = 1


@dataclass
class EvalPool:
    kind: PoolKind
    key: str = ''
    token_count: int = 0
    sum_log10_prob: float = 0.0

    @property
    def name(self):
        if self.kind is PoolKind.CS_DIR:
            return f'cpp_{self.key}'
        if self.kind is PoolKind.MONO_LANG:
            return f'mpp_{self.key}'
        return {PoolKind.ALL: 'ppl', PoolKind.CS_ALL: 'cpp', PoolKind.MONO_ALL: 'mpp'}[self.kind]

    @property
    def ppl(self):
        """10^(-mean log10 prob); None for an empty pool."""
        if self.token_count == 0:
            return None
        return 10.0 ** (-self.sum_log10_prob / self.token_count)


def direction(prev, cur):
    """Switch direction by language family: EB, BE, BB (Bantu to Bantu) or other."""
    if prev.family is Family.ENGLISH and cur.family.is_bantu:
        return 'EB'
    if prev.family.is_bantu and cur.family is Family.ENGLISH:
        return 'BE'
    if prev.family.is_bantu and cur.family.is_bantu:
        return 'BB'
    return 'other'


def assign_positions(tokens):
    """Pool assignment of every predicted position (each word, then the end marker).

    Returns a list of (is_switch, key): key is the switch direction for
    switch positions, else the language code the monolingual position is
    attributed to (None when that token is untagged). The first word and
    the end marker are never switches.
    """
    out = []
    for i, token in enumerate(tokens):
        prev = tokens[i - 1].lang if i > 0 else None
        if prev is not None and token.lang is not None and prev != token.lang:
            out.append((True, direction(prev, token.lang)))
        else:
            out.append((False, token.code))
    out.append((False, tokens[-1].code if tokens else None))
    return out


def _score_utterance(model, utt):
    """Per-pool log10 probabilities of one utterance, plus its OOV count."""
    pools = defaultdict(list)
    oov = 0
    words = utt.words
    history = [BOS]
    for i, (is_switch, key) in enumerate(assign_positions(utt.tokens)):
        word = words[i] if i < len(words) else EOS
        lp = model.logprob(history, word)
        history.append(word)
        if lp is None:
            oov += 1
            continue
        pools[(PoolKind.ALL, '')].append(lp)
        if is_switch:
            pools[(PoolKind.CS_ALL, '')].append(lp)
            pools[(PoolKind.CS_DIR, key)].append(lp)
        else:
            pools[(PoolKind.MONO_ALL, '')].append(lp)
            if key is not None:
                pools[(PoolKind.MONO_LANG, key)].append(lp)
    return dict(pools), oov


@dataclass
class PerplexityReport:
    pools: list = field(default_factory=list)
    oov_count: int = 0

    def pool(self, kind, key=''):
        for p in self.pools:
            if p.kind is kind and p.key == key:
                return p
        return EvalPool(kind, key)

    @property
    def ppl(self):
        return self.pool(PoolKind.ALL).ppl

    @property
    def cpp(self):
        return self.pool(PoolKind.CS_ALL).ppl

    @property
    def mpp(self):
        return self.pool(PoolKind.MONO_ALL).ppl

    def mono_languages(self):
        return sorted((p.key for p in self.pools if p.kind is PoolKind.MONO_LANG),
                      key=lambda c: (c != 'eng', c))

    def to_dict(self):
        return {
            'oov_count': self.oov_count,
            'pools': [{'kind': p.kind.value, 'key': p.key, 'name': p.name,
                       'token_count': p.token_count, 'sum_log10_prob': p.sum_log10_prob,
                       'ppl': p.ppl} for p in self.pools],
        }


def perplexity(model, utts, cfg=None):
    """Score every predicted position of utts and pool the results.

    Pools are summed exactly (math.fsum), so the report does not depend
    on utterance order or on how the work was split across jobs.
    """
    cfg = cfg or EvalConfig()
    partials = parallel_map(partial(_score_utterance, model), utts, cfg.jobs)
    merged = defaultdict(list)
    oov = 0
    for pools, n_oov in partials:
        oov += n_oov
        for key, values in pools.items():
            merged[key].extend(values)

    def make(kind, key=''):
        values = merged.get((kind, key), [])
        return EvalPool(kind, key, len(values), math.fsum(values))

    pools = [make(PoolKind.ALL), make(PoolKind.CS_ALL)]
    pools += [make(PoolKind.CS_DIR, d) for d in DIRECTIONS
              if d in ('EB', 'BE', 'BB') or (PoolKind.CS_DIR, d) in merged]
    pools.append(make(PoolKind.MONO_ALL))
    codes = sorted((key for kind, key in merged if kind is PoolKind.MONO_LANG),
                   key=lambda c: (c != 'eng', c))
    pools += [make(PoolKind.MONO_LANG, c) for c in codes]
    if oov:
        logger.warning('%d out-of-vocabulary position(s) excluded from perplexity', oov)
    return PerplexityReport(pools, oov)


def perplexity_by_pair(model, utts, cfg=None):
    """One report per language pair of the utterances ('untagged' for the rest)."""
    groups = defaultdict(list)
    for u in utts:
        groups[pair_label(u) or 'untagged'].append(u)
    return {label: perplexity(model, group, cfg) for label, group in sorted(groups.items())}


class PerplexityTable:
    """Dev/test perplexities with the test-set CPP/MPP breakdown, one row per entry.

    entries: list of (label, dev report or None, test report).
    """

    def __init__(self, entries):
        self.entries = list(entries)

    def _codes(self):
        codes = {c for _, _, test in self.entries for c in test.mono_languages()}
        return sorted(codes, key=lambda c: (c != 'eng', c))

    def table_header(self):
        return (['model', 'dev', 'test', 'all_cpp', 'cpp_eb', 'cpp_be', 'all_mpp']
                + [f'mpp_{c}' for c in self._codes()])

    def table_rows(self):
        rows = []
        for label, dev, test in self.entries:
            row = [label, reports.fmt(dev.ppl if dev else None), reports.fmt(test.ppl),
                   reports.fmt(test.cpp), reports.fmt(test.pool(PoolKind.CS_DIR, 'EB').ppl),
                   reports.fmt(test.pool(PoolKind.CS_DIR, 'BE').ppl), reports.fmt(test.mpp)]
            row += [reports.fmt(test.pool(PoolKind.MONO_LANG, c).ppl) for c in self._codes()]
            rows.append(row)
        return rows

    def to_dict(self):
        return {label: {'dev': dev.to_dict() if dev else None, 'test': test.to_dict()}
                for label, dev, test in self.entries}
