"""Synthetic recognisers and the closed transcribe, select, retrain, evaluate loop.

Nothing here models acoustics. A proxy recogniser gets each word right with
a probability that saturates in how often it has seen the word in training,
which is enough to run and test the semi-supervised pipeline end to end.
"""
import hashlib
import json
import logging
import math
import sys
from collections import Counter
from contextlib import contextmanager
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from errors import DataError, LoopStageError
from models import Lexicon, TaggedUtterance, Token
from pipeline.alignscore import score_by_pair, score_utterance
from pipeline.corpus import load_lexicons
from pipeline.semisup import CandidateTranscription, Manifest, TrainingSet, merge_training_sets, select_best
from utils import languages as registry
from utils import reports
from utils.parallel import parallel_map

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger(__name__)


class StrictModel(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)


class NoiseRates(StrictModel):
    p_sub: float = Field(0.0, ge=0.0, le=1.0)
    p_del: float = Field(0.0, ge=0.0, le=1.0)
    p_ins: float = Field(0.0, ge=0.0, le=1.0)

    @model_validator(mode='after')
    def _check_mass(self):
        if self.p_sub + self.p_del > 1.0:
            raise ValueError(f'p_sub + p_del = {self.p_sub + self.p_del} exceeds 1')
        return self

    @property
    def keep(self):
        return max(0.0, 1.0 - self.p_sub - self.p_del)


class NoiseProfile(StrictModel):
    """Error rates per language code; languages not listed use `default`."""
    default: NoiseRates = NoiseRates()
    languages: Dict[str, NoiseRates] = {}

    def rates(self, code):
        return self.languages.get(code, self.default)


class ProxyParams(StrictModel):
    base_acc: float = Field(0.6, gt=0.0, lt=1.0)
    tau: float = Field(500.0, gt=0.0)


class GeneratorParams(StrictModel):
    pairs: List[str] = ['EZ', 'EX', 'ES', 'ET']
    min_len: int = Field(3, ge=1)
    max_len: int = Field(12, ge=1)
    p_switch: float = Field(0.2, ge=0.0, le=1.0)
    zipf_s: float = Field(1.0, ge=0.0)
    seconds_per_token: float = Field(0.4, gt=0.0)

    @model_validator(mode='after')
    def _check(self):
        if self.max_len < self.min_len:
            raise ValueError('max_len must be at least min_len')
        unknown = [p for p in self.pairs if registry.pair_languages(p) is None]
        if unknown or not self.pairs:
            raise ValueError(f'unknown language pair(s): {unknown or "none given"}')
        return self


class LoopConfig(StrictModel):
    seed_utts: int = Field(500, ge=0)
    pool_utts: int = Field(2000, ge=0)
    heldout_utts: int = Field(500, ge=1)
    lexicon_dir: Optional[str] = None
    lexicon_size: int = Field(200, ge=2)
    generator: GeneratorParams = GeneratorParams()
    proxy: ProxyParams = ProxyParams()
    system_id: str = '5LING'
    competitors: Dict[str, NoiseProfile] = {}
    min_conf: float = Field(0.0, ge=0.0)
    cba_strict: bool = False
    seed: int = 42

    def languages(self):
        codes = set()
        for pair in self.generator.pairs:
            codes.update(registry.pair_languages(pair))
        return sorted(codes)


def load_loop_config(path):
    """LoopConfig from a JSON or TOML (.toml) file."""
    path = Path(path)
    try:
        if path.suffix == '.toml':
            with open(path, 'rb') as f:
                data = tomllib.load(f)
        else:
            data = json.loads(path.read_text(encoding='utf-8'))
    except (OSError, ValueError) as e:
        raise DataError(f'cannot read loop config {path}: {e}') from None
    return LoopConfig.model_validate(data)


def derive_seed(master, *parts):
    """64-bit seed from a master seed and any labels (utterance id, stage, ...)."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(master).encode('utf-8'))
    for part in parts:
        h.update(b'\x1f')
        h.update(str(part).encode('utf-8'))
    return int.from_bytes(h.digest(), 'little')


def rng_for(seed):
    return np.random.Generator(np.random.PCG64(seed))


class WordLists:
    """Lexicons as sorted word lists, for drawing words by index."""

    def __init__(self, lexicons):
        self.words = {}
        self.index = {}
        for lex in lexicons:
            words = tuple(sorted(lex.words))
            self.words[lex.language.code] = words
            self.index[lex.language.code] = {w: i for i, w in enumerate(words)}

    def get(self, code):
        words = self.words.get(code)
        if not words:
            raise DataError(f'no lexicon for language {code!r}')
        return words

    def other_word(self, code, word, draw):
        """A lexicon word different from `word`, picked by a uniform draw in [0, 1)."""
        words = self.get(code)
        i = self.index[code].get(word)
        if i is None or len(words) == 1:
            return words[min(int(draw * len(words)), len(words) - 1)]
        j = min(int(draw * (len(words) - 1)), len(words) - 2)
        return words[j + 1 if j >= i else j]


def synthetic_lexicons(codes, size=200):
    """Pseudo-word lexicons, disjoint across languages (each word starts with the pair letter)."""
    syllables = [c + v for c in 'bdfgklmnpstwz' for v in 'aeiou']
    lexicons = []
    for code in codes:
        letter = registry.languages.get(code, {}).get('letter', code[0]).lower()
        words = set()
        for i in range(size):
            parts, n = [], i
            for _ in range(2):
                parts.append(syllables[n % len(syllables)])
                n //= len(syllables)
            if n:
                parts.append(syllables[n % len(syllables)])
            words.add(letter + ''.join(parts))
        lexicons.append(Lexicon(registry.get_language(code), frozenset(words)))
    return lexicons


def generate_corpus(n, prefix, lexicons, params=None, seed=42):
    """n synthetic code-switched utterances with Zipf-distributed words.

    Each utterance picks a pair and a matrix language, then switches
    language with probability p_switch before every word after the first.
    """
    params = params or GeneratorParams()
    lists = WordLists(lexicons)
    cdfs = {}
    for code, words in lists.words.items():
        weights = 1.0 / np.arange(1, len(words) + 1) ** params.zipf_s
        cdfs[code] = np.cumsum(weights) / weights.sum()

    utts = []
    width = len(str(max(n - 1, 0)))
    for i in range(n):
        utt_id = f'{prefix}{i:0{width}d}'
        rng = rng_for(derive_seed(seed, 'generate', utt_id))
        pair = registry.pair_languages(params.pairs[int(rng.integers(len(params.pairs)))])
        current = int(rng.integers(2))
        length = int(rng.integers(params.min_len, params.max_len + 1))
        tokens = []
        for k in range(length):
            if k and rng.random() < params.p_switch:
                current = 1 - current
            code = pair[current]
            words = lists.get(code)
            j = int(np.searchsorted(cdfs[code], rng.random(), side='right'))
            tokens.append(Token(words[min(j, len(words) - 1)], registry.get_language(code)))
        duration = round(length * params.seconds_per_token, 6)
        utts.append(TaggedUtterance(utt_id, f'{prefix}spk{i % 20:02d}', 0.0, duration, tokens))
    return utts


def corrupt(u, profile, rng_seed, lexicons, system_id='noisy'):
    """A noisy transcription of a tagged utterance.

    Confidence is the geometric mean over reference tokens of 1 for kept
    tokens and the profile's keep probability for changed ones.
    """
    lists = lexicons if isinstance(lexicons, WordLists) else WordLists(lexicons)
    rng = rng_for(rng_seed)
    out = []
    log_conf = 0.0
    for token in u.tokens:
        if token.lang is None:
            raise DataError(f'{u.id}: cannot corrupt untagged token {token.surface!r}')
        rates = profile.rates(token.code)
        r = rng.random()
        if r < rates.p_sub:
            out.append(Token(lists.other_word(token.code, token.surface, rng.random()), token.lang))
            log_conf += math.log(rates.keep) if rates.keep > 0 else -math.inf
        elif r < rates.p_sub + rates.p_del:
            log_conf += math.log(rates.keep) if rates.keep > 0 else -math.inf
        else:
            out.append(token)
        if rates.p_ins and rng.random() < rates.p_ins:
            words = lists.get(token.code)
            out.append(Token(words[int(rng.integers(len(words)))], token.lang))
    confidence = math.exp(log_conf / len(u.tokens)) if u.tokens else 1.0
    return CandidateTranscription(u.id, system_id, out, min(1.0, max(0.0, confidence)), u.duration)


@dataclass(frozen=True)
class ProxyRecognizer:
    lexicons: WordLists
    base_acc: float = 0.6
    tau: float = 500.0
    exposure: Counter = field(default_factory=Counter)
    system_id: str = '5LING'

    def __post_init__(self):
        if not 0.0 < self.base_acc < 1.0:
            raise ValueError(f'base_acc must be in (0, 1), got {self.base_acc}')
        if self.tau <= 0:
            raise ValueError(f'tau must be positive, got {self.tau}')

    @classmethod
    def untrained(cls, lexicons, params=None, system_id='5LING'):
        params = params or ProxyParams()
        lists = lexicons if isinstance(lexicons, WordLists) else WordLists(lexicons)
        return cls(lists, params.base_acc, params.tau, Counter(), system_id)

    def accuracy(self, word):
        n = self.exposure.get(word, 0)
        return self.base_acc + (1.0 - self.base_acc) * (1.0 - math.exp(-n / self.tau))


def recognize(proxy, u, rng_seed):
    """Each word is right with probability accuracy(w), else replaced within its language.

    One uniform draw is consumed per token whatever the outcome, so a proxy
    with more exposure never gets a word wrong that a weaker one got right
    under the same seed.
    """
    rng = rng_for(rng_seed)
    out = []
    accuracies = []
    for token in u.tokens:
        if token.lang is None:
            raise DataError(f'{u.id}: token {token.surface!r} has no language')
        proxy.lexicons.get(token.code)
        acc = proxy.accuracy(token.surface)
        accuracies.append(acc)
        keep_draw, sub_draw = rng.random(), rng.random()
        if keep_draw < acc:
            out.append(token)
        else:
            out.append(Token(proxy.lexicons.other_word(token.code, token.surface, sub_draw), token.lang))
    confidence = math.fsum(accuracies) / len(accuracies) if accuracies else 1.0
    return CandidateTranscription(u.id, proxy.system_id, out, confidence, u.duration)


def _training_words(data):
    if isinstance(data, Manifest):
        for row in data.rows:
            yield from (t.surface for t in row.tokens)
    elif isinstance(data, TrainingSet):
        yield from data.words()
    else:
        for u in data:
            yield from u.words


def retrain(proxy, data):
    """A new proxy whose exposure counts include every word occurrence in data."""
    exposure = Counter(proxy.exposure)
    exposure.update(_training_words(data))
    return ProxyRecognizer(proxy.lexicons, proxy.base_acc, proxy.tau, exposure, proxy.system_id)


def _recognize_one(proxy, master, stage, u):
    return recognize(proxy, u, derive_seed(master, stage, u.id))


def _corrupt_one(profile, lists, master, system_id, u):
    return corrupt(u, profile, derive_seed(master, 'competitor', system_id, u.id), lists, system_id)


@contextmanager
def _stage(name):
    logger.info('loop stage: %s', name)
    try:
        yield
    except LoopStageError:
        raise
    except Exception as e:
        raise LoopStageError(name, e) from e


@dataclass
class LoopReport:
    baseline: dict
    retrained: dict
    manifest_counts: dict
    training: dict
    seed: int
    config: dict

    def to_dict(self):
        return {
            'seed': self.seed,
            'config': self.config,
            'selection': self.manifest_counts,
            'training': self.training,
            'baseline': {pair: r.to_dict() for pair, r in self.baseline.items()},
            'retrained': {pair: r.to_dict() for pair, r in self.retrained.items()},
        }

    def table_header(self):
        return ['pair', 'baseline_wer', 'mant_autot_wer', 'baseline_cba', 'mant_autot_cba']

    def table_rows(self):
        def pct(x):
            return reports.fmt(None if x is None else 100.0 * x)

        return [[pair, pct(self.baseline[pair].wer), pct(self.retrained[pair].wer),
                 pct(self.baseline[pair].cba.accuracy), pct(self.retrained[pair].cba.accuracy)]
                for pair in self.baseline]


def _score(proxy, heldout, config, jobs):
    hyps = parallel_map(partial(_recognize_one, proxy, config.seed, 'heldout'), heldout, jobs)
    partials = [score_utterance(ref, TaggedUtterance(ref.id, ref.speaker, tokens=hyp.tokens),
                                strict=config.cba_strict)
                for ref, hyp in zip(heldout, hyps)]
    return score_by_pair(partials)


def run_loop(config, jobs=1):
    """Train on manual data, transcribe the pool, select, retrain, compare on held-out data."""
    with _stage('generate'):
        if config.lexicon_dir:
            lexicons = load_lexicons(config.lexicon_dir)
        else:
            lexicons = synthetic_lexicons(config.languages(), config.lexicon_size)
        manual = generate_corpus(config.seed_utts, 'man', lexicons, config.generator, config.seed)
        pool = generate_corpus(config.pool_utts, 'pool', lexicons, config.generator, config.seed)
        heldout = generate_corpus(config.heldout_utts, 'test', lexicons, config.generator, config.seed)
        lists = WordLists(lexicons)

    with _stage('train'):
        untrained = ProxyRecognizer.untrained(lists, config.proxy, config.system_id)
        baseline = retrain(untrained, manual)

    with _stage('recognize'):
        candidates = parallel_map(partial(_recognize_one, baseline, config.seed, 'pool'), pool, jobs)
        for system_id, profile in sorted(config.competitors.items()):
            candidates += parallel_map(partial(_corrupt_one, profile, lists, config.seed, system_id),
                                       pool, jobs)

    with _stage('select'):
        manifest = select_best(candidates, config.min_conf, utt_ids=[u.id for u in pool])

    with _stage('retrain'):
        training = merge_training_sets(manual, manifest)
        retrained = retrain(untrained, training)

    with _stage('score'):
        before = _score(baseline, heldout, config, jobs)
        after = _score(retrained, heldout, config, jobs)

    summary = {'counts': training.provenance_counts(),
               'durations_s': {k: round(v, 6) for k, v in training.durations().items()}}
    logger.info('held-out WER %.4f -> %.4f', before['Overall'].wer, after['Overall'].wer)
    return LoopReport(before, after, manifest.counts(), summary, config.seed,
                      config.model_dump(mode='json'))
