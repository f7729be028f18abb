"""Edit-distance alignment, mixed and language-specific WER, code-switched bigram accuracy."""
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum

from errors import DataError
from models import TaggedUtterance
from pipeline.corpus import pair_label, switch_points
from utils import languages as registry
from utils import reports

logger = logging.getLogger(__name__)

UNKNOWN = 'unk'


class OpKind(str, Enum):
    MATCH = 'match'
    SUB = 'sub'
    DEL = 'del'
    INS = 'ins'


@dataclass(frozen=True)
class Op:
    kind: OpKind
    ref_index: int = None
    hyp_index: int = None


@dataclass(frozen=True)
class Alignment:
    ops: tuple

    @property
    def cost(self):
        return sum(1 for op in self.ops if op.kind is not OpKind.MATCH)

    def count(self, kind):
        return sum(1 for op in self.ops if op.kind is kind)


def _surface(token):
    return token.surface if hasattr(token, 'surface') else token


def align(ref, hyp):
    """Minimum unit-cost alignment of hyp against ref.

    The backtrace runs from the end and prefers Match, then Sub, Ins, Del
    among equal-cost moves, so the op sequence is deterministic.
    """
    r = [_surface(t) for t in ref]
    h = [_surface(t) for t in hyp]
    rows, cols = len(r) + 1, len(h) + 1
    d = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        d[i][0] = i
    for j in range(cols):
        d[0][j] = j
    for i in range(1, rows):
        prev, cur = d[i - 1], d[i]
        for j in range(1, cols):
            diag = prev[j - 1] + (r[i - 1] != h[j - 1])
            cur[j] = min(diag, prev[j] + 1, cur[j - 1] + 1)

    ops = []
    i, j = len(r), len(h)
    while i > 0 or j > 0:
        here = d[i][j]
        if i > 0 and j > 0 and r[i - 1] == h[j - 1] and here == d[i - 1][j - 1]:
            ops.append(Op(OpKind.MATCH, i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and here == d[i - 1][j - 1] + 1:
            ops.append(Op(OpKind.SUB, i - 1, j - 1))
            i, j = i - 1, j - 1
        elif j > 0 and here == d[i][j - 1] + 1:
            ops.append(Op(OpKind.INS, None, j - 1))
            j -= 1
        else:
            ops.append(Op(OpKind.DEL, i - 1, None))
            i -= 1
    ops.reverse()
    return Alignment(tuple(ops))


@dataclass
class ErrorCounts:
    n_ref: int = 0
    sub: int = 0
    dels: int = 0
    ins: int = 0

    @property
    def errors(self):
        return self.sub + self.dels + self.ins

    @property
    def wer(self):
        """Error rate as a fraction; None without reference words."""
        return self.errors / self.n_ref if self.n_ref else None

    def add(self, other):
        self.n_ref += other.n_ref
        self.sub += other.sub
        self.dels += other.dels
        self.ins += other.ins
        return self

    def to_dict(self):
        return {'n_ref': self.n_ref, 'sub': self.sub, 'del': self.dels, 'ins': self.ins,
                'errors': self.errors, 'wer': self.wer}


@dataclass
class CBACounts:
    n_switch_bigrams: int = 0
    n_correct: int = 0

    @property
    def accuracy(self):
        return self.n_correct / self.n_switch_bigrams if self.n_switch_bigrams else None

    def add(self, other):
        self.n_switch_bigrams += other.n_switch_bigrams
        self.n_correct += other.n_correct
        return self

    def to_dict(self):
        return {'n_switch_bigrams': self.n_switch_bigrams, 'n_correct': self.n_correct,
                'accuracy': self.accuracy}


@dataclass
class UtteranceScore:
    utt_id: str
    pair: str
    overall: ErrorCounts
    per_language: dict
    cba: CBACounts


def cba(ref, alignment, strict=False):
    """(switch bigrams, correctly recognised ones) of a reference utterance.

    A switch bigram is correct when both its words are matched. In strict
    mode an insertion between the two also makes it wrong.
    """
    position = {}
    for k, op in enumerate(alignment.ops):
        if op.ref_index is not None:
            position[op.ref_index] = k
    tokens = ref.tokens if isinstance(ref, TaggedUtterance) else tuple(ref)
    points = switch_points(tokens)
    correct = 0
    for i in points:
        left, right = alignment.ops[position[i - 1]], alignment.ops[position[i]]
        if left.kind is not OpKind.MATCH or right.kind is not OpKind.MATCH:
            continue
        if strict and any(op.kind is OpKind.INS for op in alignment.ops[position[i - 1] + 1:position[i]]):
            continue
        correct += 1
    return len(points), correct


def _lang(token):
    return token.code if getattr(token, 'lang', None) is not None else UNKNOWN


def _insertion_language(ops, k, ref_tokens, hyp_tokens):
    tag = _lang(hyp_tokens[ops[k].hyp_index])
    if tag != UNKNOWN:
        return tag
    for op in reversed(ops[:k]):
        if op.ref_index is not None:
            return _lang(ref_tokens[op.ref_index])
    for op in ops[k + 1:]:
        if op.ref_index is not None:
            return _lang(ref_tokens[op.ref_index])
    return UNKNOWN


def score_utterance(ref, hyp, strict=False):
    """Counts for one utterance; Sub/Del go to the reference word's language,
    Ins to the hypothesis tag, else to the nearest preceding (then following)
    reference word."""
    alignment = align(ref.tokens, hyp.tokens)
    overall = ErrorCounts(n_ref=len(ref.tokens))
    per_language = defaultdict(ErrorCounts)
    for token in ref.tokens:
        per_language[_lang(token)].n_ref += 1
    for k, op in enumerate(alignment.ops):
        if op.kind is OpKind.SUB:
            overall.sub += 1
            per_language[_lang(ref.tokens[op.ref_index])].sub += 1
        elif op.kind is OpKind.DEL:
            overall.dels += 1
            per_language[_lang(ref.tokens[op.ref_index])].dels += 1
        elif op.kind is OpKind.INS:
            overall.ins += 1
            per_language[_insertion_language(alignment.ops, k, ref.tokens, hyp.tokens)].ins += 1
    n_switch, n_correct = cba(ref, alignment, strict)
    return UtteranceScore(ref.id, pair_label(ref) or 'untagged', overall, dict(per_language),
                          CBACounts(n_switch, n_correct))


@dataclass
class ScoreReport:
    overall: ErrorCounts = field(default_factory=ErrorCounts)
    per_language: dict = field(default_factory=dict)
    cba: CBACounts = field(default_factory=CBACounts)
    n_utts: int = 0

    @property
    def wer(self):
        return self.overall.wer

    @property
    def bantu(self):
        """Counts pooled over every Nguni and Sotho language."""
        pooled = ErrorCounts()
        for code, counts in self.per_language.items():
            if code != UNKNOWN and registry.get_language(code).family.is_bantu:
                pooled.add(counts)
        return pooled

    def languages(self):
        return sorted((c for c in self.per_language if c != UNKNOWN), key=lambda c: (c != 'eng', c))

    def to_dict(self):
        return {
            'n_utts': self.n_utts,
            'overall': self.overall.to_dict(),
            'per_language': {code: c.to_dict() for code, c in sorted(self.per_language.items())},
            'bantu': self.bantu.to_dict(),
            'cba': self.cba.to_dict(),
        }


def aggregate_scores(partials):
    """Pool utterance counts into a set-level report; rates are ratios of summed counts."""
    report = ScoreReport()
    for p in partials:
        report.n_utts += 1
        report.overall.add(p.overall)
        for code, counts in p.per_language.items():
            report.per_language.setdefault(code, ErrorCounts()).add(counts)
        report.cba.add(p.cba)
    if report.overall.n_ref == 0:
        raise DataError('no reference words in the evaluation set')
    report.per_language = dict(sorted(report.per_language.items()))
    return report


def score_by_pair(partials):
    """Reports per language pair of the references, plus 'Overall'."""
    partials = list(partials)
    groups = defaultdict(list)
    for p in partials:
        groups[p.pair].append(p)
    out = {pair: aggregate_scores(group) for pair, group in sorted(groups.items())
           if sum(g.overall.n_ref for g in group)}
    out['Overall'] = aggregate_scores(partials)
    return out


def pair_texts(refs, hyps, missing_as_deletions=True):
    """Match hypotheses to references by utterance id.

    Hypotheses without a reference are skipped with a warning. References
    without a hypothesis are scored against an empty one, or skipped.
    """
    ref_ids = {u.id for u in refs}
    stray = sorted(u.id for u in hyps if u.id not in ref_ids)
    if stray:
        logger.warning('%d hypothesis id(s) have no reference and are skipped: %s',
                       len(stray), ', '.join(stray[:10]))
    by_id = {u.id: u for u in hyps}
    pairs = []
    for ref in refs:
        hyp = by_id.get(ref.id)
        if hyp is None:
            if not missing_as_deletions:
                logger.warning('no hypothesis for %s, skipped', ref.id)
                continue
            hyp = ref.with_tokens(())
        pairs.append((ref, hyp))
    return pairs


class ScoreTable:
    """Per-pair rows: WER, English WER, Bantu WER, CBA (fractions printed as %)."""

    def __init__(self, by_pair):
        self.by_pair = by_pair

    def table_header(self):
        return ['pair', 'utts', 'n_ref', 'wer', 'wer_eng', 'wer_bantu', 'cba',
                'sub', 'del', 'ins', 'switch_bigrams']

    def table_rows(self):
        def pct(x):
            return reports.fmt(None if x is None else 100.0 * x)

        rows = []
        for pair, r in self.by_pair.items():
            rows.append([pair, r.n_utts, r.overall.n_ref, pct(r.wer),
                         pct(r.per_language.get('eng', ErrorCounts()).wer), pct(r.bantu.wer),
                         pct(r.cba.accuracy), r.overall.sub, r.overall.dels, r.overall.ins,
                         r.cba.n_switch_bigrams])
        return rows

    def to_dict(self):
        return {pair: r.to_dict() for pair, r in self.by_pair.items()}
