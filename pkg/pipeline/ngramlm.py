"""Backoff n-gram language models: counting, smoothing, querying, interpolation."""
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from enum import Enum

import numpy as np

from errors import ClosureError, DataError
from models import ClassKind, Lexicon, TaggedUtterance
from pipeline.corpus import classify_utterance
from utils import languages as registry

logger = logging.getLogger(__name__)

BOS = '<s>'
EOS = '</s>'
UNK = '<unk>'
LOG10_ZERO = -99.0


def _words(utt):
    return utt.words if isinstance(utt, TaggedUtterance) else list(utt)


class NGramCounts:
    """Raw n-gram counts of orders 1..order over <s>/</s> padded sentences.

    ngrams[n - 1] maps n-gram tuples to counts. <s> is context only and is
    never counted as a predicted unigram.
    """

    def __init__(self, order):
        if order < 1:
            raise ValueError(f'n-gram order must be >= 1, got {order}')
        self.order = order
        self.ngrams = [Counter() for _ in range(order)]
        self.sentences = 0

    def add_sentence(self, words):
        padded = [BOS] + list(words) + [EOS]
        for i in range(1, len(padded)):
            for n in range(1, self.order + 1):
                if i - n + 1 < 0:
                    break
                self.ngrams[n - 1][tuple(padded[i - n + 1:i + 1])] += 1
        self.sentences += 1

    def merge(self, other):
        if other.order != self.order:
            raise ValueError('cannot merge counts of different orders')
        for mine, theirs in zip(self.ngrams, other.ngrams):
            mine.update(theirs)
        self.sentences += other.sentences
        return self

    def __getitem__(self, ngram):
        return self.ngrams[len(ngram) - 1].get(tuple(ngram), 0)

    @property
    def token_count(self):
        return sum(self.ngrams[0].values())

    def words(self):
        return {g[0] for g in self.ngrams[0]}


def count_ngrams(utts, order):
    counts = NGramCounts(order)
    for u in utts:
        counts.add_sentence(_words(u))
    return counts


class Method(str, Enum):
    ADDK = 'addk'
    WITTEN_BELL = 'wb'
    KNESER_NEY = 'kn'


@dataclass(frozen=True)
class Smoothing:
    method: Method = Method.KNESER_NEY
    k: float = 1.0

    @classmethod
    def add_k(cls, k=1.0):
        if k <= 0:
            raise ValueError(f'add-k constant must be positive, got {k}')
        return cls(Method.ADDK, k)

    @classmethod
    def witten_bell(cls):
        return cls(Method.WITTEN_BELL)

    @classmethod
    def kneser_ney(cls):
        return cls(Method.KNESER_NEY)

    @classmethod
    def parse(cls, name, k=1.0):
        method = Method(name)
        return cls.add_k(k) if method is Method.ADDK else cls(method)

    def __str__(self):
        return f'addk({self.k:g})' if self.method is Method.ADDK else self.method.value


@dataclass(frozen=True)
class ModelInfo:
    smoothing: str = 'unknown'
    token_count: int = 0
    fallback_orders: tuple = ()


def backoff_logprob(probs, backoffs, history, word):
    """Standard backoff chain; None when the word has no unigram entry."""
    total = 0.0
    while True:
        lp = probs.get(history + (word,))
        if lp is not None:
            return total + lp
        if not history:
            return None
        total += backoffs.get(history, 0.0)
        history = history[1:]


class NGramModel:
    """Immutable backoff model; probabilities and backoff weights are log10."""

    def __init__(self, order, probs, backoffs, vocab, info=None):
        self.order = order
        self._probs = dict(probs)
        self._backoffs = dict(backoffs)
        self.vocab = frozenset(vocab)
        self.info = info or ModelInfo()

    @property
    def probs(self):
        return self._probs

    @property
    def backoffs(self):
        return self._backoffs

    @property
    def events(self):
        """Everything the model can predict: the vocabulary plus </s>, minus <s>."""
        return sorted((self.vocab | {EOS}) - {BOS})

    def histories(self):
        return [()] + sorted(self._backoffs)

    def ngrams(self, n):
        return sorted(g for g in self._probs if len(g) == n)

    def counts(self):
        sizes = Counter(len(g) for g in self._probs)
        return [sizes.get(n, 0) for n in range(1, self.order + 1)]

    def _map(self, word):
        if word in self.vocab:
            return word
        if UNK in self.vocab:
            return UNK
        return None

    def logprob(self, history, word):
        """log10 P(word | history), or None when the word is out of vocabulary."""
        word = self._map(word)
        if word is None:
            return None
        context = tuple(history)[-(self.order - 1):] if self.order > 1 else ()
        context = tuple(self._map(w) or w for w in context)
        return backoff_logprob(self._probs, self._backoffs, context, word)

    def max_difference(self, other):
        """Largest absolute difference between stored values; inf if the entry sets differ."""
        if set(self._probs) != set(other.probs) or set(self._backoffs) != set(other.backoffs):
            return math.inf
        diffs = [abs(v - other.probs[g]) for g, v in self._probs.items()]
        diffs += [abs(v - other.backoffs[g]) for g, v in self._backoffs.items()]
        return max(diffs, default=0.0)


class InterpolatedModel:
    """Linear mixture of component models queried at evaluation time."""

    def __init__(self, components, weights, trace=()):
        components, weights = list(components), [float(w) for w in weights]
        if not components:
            raise ValueError('an interpolated model needs at least one component')
        if len(components) != len(weights):
            raise ValueError(f'{len(components)} components but {len(weights)} weights')
        if any(w < 0 for w in weights) or abs(math.fsum(weights) - 1.0) > 1e-12:
            raise ValueError(f'interpolation weights must lie on the simplex: {weights}')
        self.components = components
        self.weights = weights
        self.trace = tuple(trace)
        self.order = max(c.order for c in components)
        self.vocab = frozenset().union(*(c.vocab for c in components))

    def logprob(self, history, word):
        parts = []
        for model, weight in zip(self.components, self.weights):
            if weight == 0.0:
                continue
            lp = model.logprob(history, word)
            if lp is not None:
                parts.append((weight, lp))
        if len(parts) == 1 and parts[0][0] == 1.0:
            return parts[0][1]
        total = math.fsum(w * 10.0 ** lp for w, lp in parts)
        return math.log10(total) if total > 0.0 else None


def prob(model, history, word):
    """log10 probability of word after history, or None for an out-of-vocabulary word."""
    return model.logprob(history, word)


def vocabulary(lexicons):
    """Word set of a Lexicon, a collection of Lexicons, or a plain collection of words."""
    if isinstance(lexicons, Lexicon):
        return set(lexicons.words)
    words = set()
    for item in lexicons:
        if isinstance(item, Lexicon):
            words |= item.words
        else:
            words.add(item)
    return words


class _Trainer:

    def __init__(self, counts, smoothing, events):
        self.counts = counts
        self.order = counts.order
        self.smoothing = smoothing
        self.events = events
        self.uniform = 1.0 / len(events)
        self.probs = {}
        self.backoffs = {}
        self.fallbacks = []
        self._n = 0

    def _table(self, n):
        """history -> {word: count} for order n, continuation counts for lower KN orders."""
        raw = self.counts.ngrams[n - 1]
        continuation = None
        if self.smoothing.method is Method.KNESER_NEY and n < self.order:
            continuation = Counter(g[1:] for g in self.counts.ngrams[n])
        table = defaultdict(dict)
        for g, c in raw.items():
            if continuation is not None and g[0] != BOS:
                c = continuation[g]
            table[g[:-1]][g[-1]] = c
        return table

    @staticmethod
    def _kn_discounts(table):
        coc = Counter(c for words in table.values() for c in words.values())
        n1, n2, n3, n4 = (coc[i] for i in range(1, 5))
        if not (n1 and n2 and n3):
            return None
        y = n1 / (n1 + 2 * n2)
        discounts = (1 - 2 * y * n2 / n1, 2 - 3 * y * n3 / n2, 3 - 4 * y * n4 / n3)
        if not all(0 < d <= i for i, d in enumerate(discounts, start=1)):
            return None
        return discounts

    def _lower(self, history, word):
        if self._n == 1:
            return self.uniform
        lp = backoff_logprob(self.probs, self.backoffs, history[1:], word)
        return 0.0 if lp is None else 10.0 ** lp

    def _estimate(self, n, table):
        method = self.smoothing.method
        discounts = None
        if method is Method.KNESER_NEY:
            discounts = self._kn_discounts(table)
            if discounts is None:
                logger.warning('order %d: degenerate count-of-counts for Kneser-Ney, using Witten-Bell', n)
                self.fallbacks.append(n)
                method = Method.WITTEN_BELL

        estimates = {}
        for history, words in table.items():
            total = sum(words.values())
            types = len(words)
            if method is Method.KNESER_NEY:
                by_count = Counter(min(c, 3) for c in words.values())
                gamma = sum(discounts[i - 1] * by_count[i] for i in (1, 2, 3)) / total
            elif method is Method.WITTEN_BELL:
                gamma = types / (total + types)
            else:
                gamma = self.smoothing.k / (total + self.smoothing.k * len(self.events))
            dist = {}
            for word, c in words.items():
                if method is Method.KNESER_NEY:
                    p = (c - discounts[min(c, 3) - 1]) / total + gamma * self._lower(history, word)
                elif method is Method.WITTEN_BELL:
                    p = (c + types * self._lower(history, word)) / (total + types)
                else:
                    p = (c + self.smoothing.k) / (total + self.smoothing.k * len(self.events))
                dist[word] = p
            estimates[history] = (dist, gamma)
        return estimates

    def _store(self, n, estimates):
        for history, (dist, _) in estimates.items():
            for word, p in dist.items():
                self.probs[history + (word,)] = math.log10(p)

        if n == 1:
            dist, gamma = estimates.get((), ({}, 1.0))
            # AddK's gamma is already the per-word unseen mass; the others spread theirs uniformly
            unseen = gamma if self.smoothing.method is Method.ADDK else gamma * self.uniform
            for word in self.events:
                if word not in dist:
                    self.probs[(word,)] = math.log10(unseen)
            self.probs[(BOS,)] = LOG10_ZERO
            return

        for history, (dist, _) in estimates.items():
            left = 1.0 - math.fsum(dist.values())
            lower = 1.0 - math.fsum(self._lower(history, w) for w in dist)
            if lower <= 1e-10 or left <= 0.0:
                self.backoffs[history] = 0.0
            else:
                self.backoffs[history] = math.log10(left / lower)

    def build(self):
        for n in range(1, self.order + 1):
            self._n = n
            table = self._table(n)
            self._store(n, self._estimate(n, table))
        vocab = set(self.events) | {BOS}
        info = ModelInfo(str(self.smoothing), self.counts.token_count, tuple(self.fallbacks))
        return NGramModel(self.order, self.probs, self.backoffs, vocab, info)


def train_lm(counts, smoothing=None, vocab=None):
    """Train a backoff model from counts.

    With a vocabulary the model is closed over it: every vocabulary word
    gets probability mass and training words outside it raise ClosureError.
    """
    smoothing = smoothing or Smoothing.kneser_ney()
    if not counts.ngrams[0]:
        raise DataError('cannot train a language model on empty counts')
    seen = counts.words()
    if vocab is not None:
        vocab = vocabulary(vocab) - {BOS, EOS}
        offenders = seen - vocab - {EOS}
        if offenders:
            raise ClosureError(offenders)
        events = sorted(vocab | {EOS})
    else:
        events = sorted(seen)
    model = _Trainer(counts, smoothing, events).build()
    logger.info('trained %d-gram %s model: %s n-grams, %d events',
                model.order, smoothing, '/'.join(map(str, model.counts())), len(events))
    return model


def dev_events(utts):
    """Every predicted position of every utterance: (utt_id, position, history, word)."""
    for u in utts:
        padded = [BOS] + _words(u) + [EOS]
        for i in range(1, len(padded)):
            yield u.id, i, tuple(padded[:i]), padded[i]


def interpolate_em(components, dev, init=None, tol=1e-6, max_iter=100):
    """Optimise linear interpolation weights on dev data with EM.

    The returned model's trace holds the dev log-likelihood (natural log)
    before the first and after every iteration; it never decreases.
    """
    components = list(components)
    if not components:
        raise ValueError('interpolation needs at least one component')
    dev = list(dev)
    if not dev:
        raise DataError('interpolation needs a non-empty dev set')
    k = len(components)
    weights = np.full(k, 1.0 / k) if init is None else np.asarray(init, dtype=float)
    if weights.shape != (k,) or (weights < 0).any() or abs(weights.sum() - 1.0) > 1e-9:
        raise ValueError(f'initial weights must be {k} values on the simplex')
    weights = weights / weights.sum()

    events = list(dev_events(dev))
    p = np.zeros((k, len(events)))
    for j, (_, _, history, word) in enumerate(events):
        for i, model in enumerate(components):
            lp = model.logprob(history, word)
            p[i, j] = 0.0 if lp is None else 10.0 ** lp
    dead = np.flatnonzero(p.max(axis=0) <= 0.0)
    if dead.size:
        utt_id, position, _, word = events[dead[0]]
        raise DataError(f'no component gives probability to {word!r} '
                        f'at position {position} of utterance {utt_id} ({dead.size} event(s) in total)')

    mixture = weights @ p
    trace = [float(np.log(mixture).sum())]
    if k > 1:
        for iteration in range(1, max_iter + 1):
            responsibilities = weights[:, None] * p / mixture
            weights = responsibilities.mean(axis=1)
            weights = weights / weights.sum()
            mixture = weights @ p
            trace.append(float(np.log(mixture).sum()))
            if trace[-1] - trace[-2] < tol:
                logger.info('EM converged after %d iteration(s)', iteration)
                break
        else:
            logger.warning('EM stopped at max_iter=%d before converging', max_iter)
    return InterpolatedModel(components, weights.tolist(), trace)


def component_corpora(utts):
    """Split utterances into code-switched, Bantu monolingual and English monolingual text.

    These are the three training sets of the interpolated five-lingual model.
    """
    code_switched, bantu, english = [], [], []
    for u in utts:
        cls = classify_utterance(u)
        if cls.kind is ClassKind.CODE_SWITCHED:
            code_switched.append(u)
        elif cls.kind is ClassKind.MONOLINGUAL:
            (code,) = cls.languages
            family = registry.get_language(code).family
            if family.is_bantu:
                bantu.append(u)
            elif code == 'eng':
                english.append(u)
    return code_switched, bantu, english
