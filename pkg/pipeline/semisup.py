"""Confidence-based selection of automatic transcriptions and ManT+AutoT training sets."""
import logging
import os
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path

from errors import DataError
from models import TaggedUtterance
from pipeline.corpus import (ParseConfig, classify_utterance, format_token, parse_token, read_lines, tag_tokens,
                             write_data_dir)
from utils import languages as registry
from utils import reports

logger = logging.getLogger(__name__)

NO_CANDIDATES = 'no-candidates'
BELOW_THRESHOLD = 'below-threshold'

MANUAL = 'ManT'
AUTOMATIC = 'AutoT'


@dataclass(frozen=True)
class CandidateTranscription:
    utt_id: str
    system_id: str
    tokens: tuple
    confidence: float
    duration_s: float = None

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise DataError(f'{self.utt_id}/{self.system_id}: confidence {self.confidence} outside [0, 1]')
        if not isinstance(self.tokens, tuple):
            object.__setattr__(self, 'tokens', tuple(self.tokens))


@dataclass(frozen=True)
class SelectionResult:
    utt_id: str
    chosen_system: str
    confidence: float
    label: str
    tokens: tuple
    duration_s: float = None


@dataclass(frozen=True)
class Rejection:
    utt_id: str
    reason: str
    confidence: float = None
    system_id: str = None


@dataclass
class Manifest:
    rows: list = field(default_factory=list)
    rejected: list = field(default_factory=list)

    @property
    def counts_by_label(self):
        return dict(sorted(Counter(r.label for r in self.rows).items()))

    @property
    def counts_by_system(self):
        return dict(sorted(Counter(r.chosen_system for r in self.rows).items()))

    @property
    def rejected_count(self):
        return len(self.rejected)

    def counts(self):
        reasons = Counter(r.reason for r in self.rejected)
        return {
            'accepted': len(self.rows),
            'rejected': len(self.rejected),
            'rejected_by_reason': dict(sorted(reasons.items())),
            'by_label': self.counts_by_label,
            'by_system': self.counts_by_system,
        }

    def table_header(self):
        return ['utt_id', 'system', 'confidence', 'label']

    def table_rows(self):
        return [[r.utt_id, r.chosen_system, f'{r.confidence:.4f}', r.label] for r in self.rows]

    def to_dict(self):
        return self.counts()


def load_candidates(path, system_id, config=None):
    """Read a `utt_id<TAB>confidence<TAB>tokens` file decoded by one system."""
    config = config or ParseConfig()
    out = []
    seen = set()
    for lineno, line in read_lines(path):
        fields = line.split('\t')
        if not 2 <= len(fields) <= 3:
            raise DataError(f'{path}:{lineno}: expected utt_id, confidence and tokens separated by single tabs')
        utt_id = fields[0].strip()
        if utt_id in seen:
            raise DataError(f'{path}:{lineno}: duplicate candidate for {utt_id} from {system_id}')
        seen.add(utt_id)
        try:
            confidence = float(fields[1])
        except ValueError:
            raise DataError(f'{path}:{lineno}: malformed confidence {fields[1]!r}') from None
        words = fields[2].split() if len(fields) > 2 else []
        tokens = [parse_token(w, config) for w in words]
        out.append(CandidateTranscription(utt_id, system_id, tokens, confidence))
    logger.info('loaded %d candidate(s) for %s from %s', len(out), system_id, path)
    return out


def is_bilingual(system_id):
    return system_id in registry.pairs


def _label(candidate, lexicons):
    if is_bilingual(candidate.system_id):
        return candidate.system_id
    tokens = candidate.tokens
    if lexicons:
        utt = TaggedUtterance(candidate.utt_id, candidate.utt_id, tokens=tokens)
        tokens = tag_tokens([utt], lexicons)[0].tokens
    utt = TaggedUtterance(candidate.utt_id, candidate.utt_id, tokens=tokens)
    return classify_utterance(utt).label


def select_best(candidates, min_conf=0.0, utt_ids=None, lexicons=None):
    """Pick the most confident candidate per utterance.

    Ties go to the lexicographically smallest system id. Winners below
    min_conf are rejected, as are ids in utt_ids that no system decoded.
    Five-lingual winners are labelled from their (lexicon-tagged) tokens,
    bilingual winners with their language pair.
    """
    groups = defaultdict(list)
    for c in candidates:
        groups[c.utt_id].append(c)

    manifest = Manifest()
    universe = set(groups) if utt_ids is None else set(utt_ids)
    stray = sorted(set(groups) - universe)
    if stray:
        logger.warning('%d candidate utterance(s) outside the untranscribed pool are ignored', len(stray))

    for utt_id in sorted(universe):
        group = groups.get(utt_id)
        if not group:
            manifest.rejected.append(Rejection(utt_id, NO_CANDIDATES))
            continue
        systems = Counter(c.system_id for c in group)
        dup = sorted(s for s, n in systems.items() if n > 1)
        if dup:
            raise DataError(f'{utt_id}: more than one candidate from system(s) {", ".join(dup)}')
        best = min(group, key=lambda c: (-c.confidence, c.system_id))
        if best.confidence < min_conf:
            manifest.rejected.append(Rejection(utt_id, BELOW_THRESHOLD, best.confidence, best.system_id))
            continue
        manifest.rows.append(SelectionResult(utt_id, best.system_id, best.confidence,
                                             _label(best, lexicons), best.tokens, best.duration_s))

    if manifest.rejected:
        logger.warning('rejected %d of %d utterance(s) (min_conf=%s)',
                       len(manifest.rejected), len(universe), min_conf)
    return manifest


def _writable_dir(out_dir):
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise DataError(f'cannot create output directory {out_dir}: {e}') from None
    if not os.access(out_dir, os.W_OK):
        raise DataError(f'output directory {out_dir} is not writable')
    return out_dir


def _text_line(utt_id, tokens):
    words = [format_token(t) for t in tokens]
    return ' '.join([utt_id] + words)


def emit_manifest(manifest, out_dir):
    """Write `text`, `labels` (TSV) and `counts.json` for a selection round."""
    out_dir = _writable_dir(out_dir)
    try:
        with open(out_dir / 'text', 'w', encoding='utf-8', newline='\n') as f:
            for r in manifest.rows:
                f.write(_text_line(r.utt_id, r.tokens) + '\n')
        (out_dir / 'labels').write_text(reports.render(manifest, 'tsv'), encoding='utf-8')
        (out_dir / 'counts.json').write_text(reports.to_json(manifest.counts()), encoding='utf-8')
    except OSError as e:
        raise DataError(f'cannot write manifest to {out_dir}: {e}') from None
    return [out_dir / 'text', out_dir / 'labels', out_dir / 'counts.json']


@dataclass
class TrainingSet:
    utterances: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def durations(self):
        totals = {MANUAL: 0.0, AUTOMATIC: 0.0}
        for u in self.utterances:
            totals[self.provenance[u.id]] += u.duration
        totals['total'] = totals[MANUAL] + totals[AUTOMATIC]
        return totals

    def provenance_counts(self):
        counts = Counter(self.provenance.values())
        return {MANUAL: counts[MANUAL], AUTOMATIC: counts[AUTOMATIC]}

    def words(self):
        for u in self.utterances:
            yield from u.words


def merge_training_sets(manual, auto, auto_prefix='', durations=None):
    """Manually transcribed utterances followed by the accepted automatic ones.

    `durations` maps pool utterance ids to seconds for rows whose
    candidates carried no duration.
    """
    durations = durations or {}
    combined = TrainingSet()
    for u in manual:
        if u.id in combined.provenance:
            raise DataError(f'duplicate manual utterance id {u.id}')
        combined.utterances.append(u)
        combined.provenance[u.id] = MANUAL
    for r in auto.rows:
        utt_id = auto_prefix + r.utt_id
        if utt_id in combined.provenance:
            raise DataError(f'utterance id {utt_id} is both manual and automatic; use a prefix')
        duration = r.duration_s if r.duration_s is not None else durations.get(r.utt_id, 0.0)
        combined.utterances.append(TaggedUtterance(utt_id, utt_id, 0.0, duration, r.tokens))
        combined.provenance[utt_id] = AUTOMATIC
    logger.info('training set: %s', combined.provenance_counts())
    return combined


def write_training_set(combined, out_dir):
    out_dir = _writable_dir(out_dir)
    write_data_dir(combined.utterances, out_dir)
    rows = [[u.id, combined.provenance[u.id], f'{u.duration:.4f}'] for u in combined.utterances]
    (out_dir / 'provenance').write_text(reports.to_tsv(['utt_id', 'provenance', 'duration_s'], rows),
                                        encoding='utf-8')
    summary = {'counts': combined.provenance_counts(),
               'durations_h': {k: round(v / 3600.0, 4) for k, v in combined.durations().items()}}
    (out_dir / 'durations.json').write_text(reports.to_json(summary), encoding='utf-8')
