"""Kaldi-style corpus ingestion, lexicon tagging and corpus statistics."""
import logging
import unicodedata
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path

from errors import DataError
from models import ClassKind, Lexicon, TaggedUtterance, Token, UttClass
from utils import languages as registry

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ParseConfig:
    inline_tags: bool = False
    case_fold: bool = True
    # Extra language codes accepted as inline tag suffixes
    languages: frozenset = frozenset()

    def is_tag(self, code):
        return registry.is_registered(code) or code in self.languages


@dataclass(frozen=True)
class TagPolicy:
    priority: tuple = ()
    sticky: bool = True
    # Re-derive tags that are already known (inline tags are kept otherwise)
    retag: bool = False


def normalize(word, case_fold=True):
    word = unicodedata.normalize('NFC', word)
    return word.casefold() if case_fold else word


def parse_token(raw, config):
    if config.inline_tags:
        surface, sep, code = raw.rpartition('_')
        if sep and surface and config.is_tag(code):
            return Token(normalize(surface, config.case_fold), registry.get_language(code))
    return Token(normalize(raw, config.case_fold))


def read_lines(path):
    """Numbered non-blank lines of a UTF-8 file."""
    with open(path, 'rb') as f:
        for lineno, raw in enumerate(f, start=1):
            try:
                line = raw.decode('utf-8').rstrip('\r\n')
            except UnicodeDecodeError as e:
                raise DataError(f'{path}:{lineno}: not valid UTF-8 ({e.reason})') from None
            if line.strip():
                yield lineno, line


def read_text_file(path, config=None):
    """Parse a Kaldi `text` file into (utt_id, tokens) pairs, in file order."""
    config = config or ParseConfig()
    entries = {}
    for lineno, line in read_lines(path):
        fields = line.split()
        utt_id, raw_tokens = fields[0], fields[1:]
        if utt_id in entries:
            raise DataError(f'{path}:{lineno}: duplicate utterance id {utt_id!r}')
        entries[utt_id] = tuple(parse_token(raw, config) for raw in raw_tokens)
    return entries


def _read_segments(path):
    segments = {}
    for lineno, line in read_lines(path):
        fields = line.split()
        if len(fields) != 4:
            raise DataError(f'{path}:{lineno}: malformed segment line (expected 4 fields, got {len(fields)})')
        utt_id, recording, start, end = fields
        try:
            start_s, end_s = float(start), float(end)
        except ValueError:
            raise DataError(f'{path}:{lineno}: malformed segment times {start!r} {end!r}') from None
        if end_s < start_s or start_s < 0:
            raise DataError(f'{path}:{lineno}: malformed segment, end {end_s} before start {start_s}')
        if utt_id in segments:
            raise DataError(f'{path}:{lineno}: duplicate segment for utterance {utt_id!r}')
        segments[utt_id] = (recording, start_s, end_s)
    return segments


def _read_utt2spk(path):
    speakers = {}
    for lineno, line in read_lines(path):
        fields = line.split()
        if len(fields) != 2:
            raise DataError(f'{path}:{lineno}: malformed utt2spk line')
        speakers[fields[0]] = fields[1]
    return speakers


def parse_data_dir(path, config=None):
    """Read a Kaldi data directory (`text`, optional `segments` and `utt2spk`).

    A directory with `segments` but no `text` is an untranscribed pool.
    """
    config = config or ParseConfig()
    path = Path(path)
    text_path = path / 'text'
    has_segments = (path / 'segments').is_file()
    if not text_path.is_file() and not has_segments:
        raise DataError(f'{path}: no text or segments file')

    transcripts = read_text_file(text_path, config) if text_path.is_file() else {}
    segments = _read_segments(path / 'segments') if has_segments else {}
    speakers = _read_utt2spk(path / 'utt2spk') if (path / 'utt2spk').is_file() else {}

    utt_ids = list(transcripts)
    untranscribed = [u for u in segments if u not in transcripts]
    if untranscribed:
        logger.info('%s: %d segmented utterance(s) have no transcription', path, len(untranscribed))
    utt_ids.extend(untranscribed)

    utts = []
    for utt_id in utt_ids:
        recording, start_s, end_s = segments.get(utt_id, (None, 0.0, 0.0))
        utts.append(TaggedUtterance(
            id=utt_id,
            speaker=speakers.get(utt_id, utt_id),
            start_s=start_s,
            end_s=end_s,
            tokens=transcripts.get(utt_id, ()),
            recording=recording,
        ))
    logger.debug('parsed %d utterances from %s', len(utts), path)
    return utts


def _format_seconds(value):
    short = f'{value:.2f}'
    return short if float(short) == value else repr(value)


def format_token(token):
    return f'{token.surface}_{token.code}' if token.lang is not None else token.surface


def write_data_dir(utts, path):
    """Canonical corpus dump; parse_data_dir(path, inline_tags=True) reads it back."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    with open(path / 'text', 'w', encoding='utf-8', newline='\n') as f:
        for u in utts:
            f.write(' '.join([u.id] + [format_token(t) for t in u.tokens]) + '\n')
    segmented = [u for u in utts if u.recording is not None]
    if segmented:
        with open(path / 'segments', 'w', encoding='utf-8', newline='\n') as f:
            for u in segmented:
                f.write(f'{u.id} {u.recording} {_format_seconds(u.start_s)} {_format_seconds(u.end_s)}\n')
    with open(path / 'utt2spk', 'w', encoding='utf-8', newline='\n') as f:
        for u in utts:
            f.write(f'{u.id} {u.speaker}\n')


def load_lexicons(path, case_fold=True):
    """One lexicon per file; the file stem is the language code.

    Only the first field of each line is used, so Kaldi `lexicon.txt`
    files with pronunciations load as well.
    """
    path = Path(path)
    if not path.is_dir():
        raise DataError(f'{path}: lexicon directory not found')
    lexicons = []
    for file in sorted(path.iterdir()):
        if not file.is_file() or file.name.startswith('.'):
            continue
        words = set()
        for _, line in read_lines(file):
            words.add(normalize(line.split()[0], case_fold))
        lexicons.append(Lexicon(registry.get_language(file.stem), frozenset(words)))
    return lexicons


def _build_index(lexicons, policy):
    codes = [lex.language.code for lex in lexicons]
    duplicates = sorted(c for c, n in Counter(codes).items() if n > 1)
    if duplicates:
        raise DataError(f'more than one lexicon for language(s): {", ".join(duplicates)}')

    rank = {code: i for i, code in enumerate(policy.priority)}

    def order(lang):
        return (rank.get(lang.code, len(rank)), lang.code)

    index = defaultdict(list)
    for lex in lexicons:
        for word in lex.words:
            index[word].append(lex.language)
    return {word: tuple(sorted(langs, key=order)) for word, langs in index.items()}


def _tag_utterance(utt, index, policy):
    previous = None
    tokens = []
    for token in utt.tokens:
        lang = token.lang
        if lang is None or policy.retag:
            candidates = index.get(token.surface, ())
            if not candidates:
                lang = None
            elif len(candidates) == 1:
                lang = candidates[0]
            elif policy.sticky and previous in candidates:
                lang = previous
            else:
                lang = candidates[0]
        if lang is not None:
            previous = lang
        tokens.append(token.tagged(lang))
    return utt.with_tokens(tokens)


def tag_tokens(utts, lexicons, policy=None):
    """Assign each token the language of the lexicon that contains it.

    Ambiguous words take the language of the previous resolved token when
    that language is a candidate, else the first language in priority order.
    """
    if not lexicons:
        raise DataError('tagging needs at least one lexicon')
    policy = policy or TagPolicy()
    index = _build_index(lexicons, policy)
    return [_tag_utterance(u, index, policy) for u in utts]


def classify_utterance(u):
    codes = {t.code for t in u.tokens if t.lang is not None}
    if not codes:
        return UttClass.untagged()
    if len(codes) == 1:
        return UttClass.monolingual(next(iter(codes)))
    return UttClass.code_switched(codes)


def pair_label(u):
    """Language-pair tag of an utterance ("EZ", "sot+zul", "eng"), None if untagged."""
    cls = classify_utterance(u)
    if cls.kind is ClassKind.UNTAGGED:
        return None
    return registry.pair_label(cls.languages)


def switch_points(tokens):
    """Indices i where tokens i-1 and i carry known, different languages."""
    return [i for i in range(1, len(tokens))
            if tokens[i].lang is not None and tokens[i - 1].lang is not None
            and tokens[i].lang != tokens[i - 1].lang]


@dataclass
class LanguageStats:
    mono_dur_s: float = 0.0
    cs_dur_s: float = 0.0
    token_count: int = 0
    type_count: int = 0

    @property
    def total_dur_s(self):
        return self.mono_dur_s + self.cs_dur_s


@dataclass
class CorpusStats:
    languages: dict = field(default_factory=dict)
    class_counts: dict = field(default_factory=dict)
    switch_count: int = 0
    utterance_count: int = 0
    untranscribed_count: int = 0
    unknown_token_count: int = 0
    total_dur_s: float = 0.0
    untagged_dur_s: float = 0.0

    @property
    def token_count(self):
        return sum(s.token_count for s in self.languages.values())

    @property
    def type_count(self):
        return sum(s.type_count for s in self.languages.values())

    @property
    def mono_dur_s(self):
        return sum(s.mono_dur_s for s in self.languages.values())

    @property
    def cs_dur_s(self):
        return sum(s.cs_dur_s for s in self.languages.values())

    def to_dict(self):
        return {
            'languages': {
                code: {
                    'name': registry.display_name(code),
                    'mono_dur_s': s.mono_dur_s,
                    'cs_dur_s': s.cs_dur_s,
                    'total_dur_s': s.total_dur_s,
                    'token_count': s.token_count,
                    'type_count': s.type_count,
                } for code, s in sorted(self.languages.items())
            },
            'class_counts': dict(sorted(self.class_counts.items())),
            'switch_count': self.switch_count,
            'utterance_count': self.utterance_count,
            'untranscribed_count': self.untranscribed_count,
            'unknown_token_count': self.unknown_token_count,
            'total_dur_s': self.total_dur_s,
            'untagged_dur_s': self.untagged_dur_s,
        }

    def table_header(self):
        return ['language', 'mono_min', 'cs_min', 'total_h', 'total_pct', 'tokens', 'types']

    def table_rows(self):
        """Rows shaped like the corpus composition table: one per language plus a total."""
        grand = sum(s.total_dur_s for s in self.languages.values())
        rows = []
        for code, s in sorted(self.languages.items(), key=lambda kv: (-kv[1].total_dur_s, kv[0])):
            pct = 100.0 * s.total_dur_s / grand if grand else 0.0
            rows.append([registry.display_name(code), f'{s.mono_dur_s / 60:.2f}', f'{s.cs_dur_s / 60:.2f}',
                         f'{s.total_dur_s / 3600:.2f}', f'{pct:.2f}', s.token_count, s.type_count])
        rows.append(['Total', f'{self.mono_dur_s / 60:.2f}', f'{self.cs_dur_s / 60:.2f}',
                     f'{grand / 3600:.2f}', '100.00' if grand else '0.00', self.token_count, self.type_count])
        return rows


class StatsAccumulator:
    """Mergeable partial of CorpusStats (type sets are kept until the end)."""

    def __init__(self):
        self.mono = defaultdict(float)
        self.cs = defaultdict(float)
        self.tokens = Counter()
        self.types = defaultdict(set)
        self.classes = Counter()
        self.switches = 0
        self.utterances = 0
        self.untranscribed = 0
        self.unknown_tokens = 0
        self.total_dur = 0.0
        self.untagged_dur = 0.0

    def add(self, utt):
        self.utterances += 1
        if not utt.tokens:
            self.untranscribed += 1
            return self
        cls = classify_utterance(utt)
        self.classes[cls.label] += 1
        known = Counter()
        for token in utt.tokens:
            if token.lang is None:
                self.unknown_tokens += 1
                continue
            known[token.code] += 1
            self.types[token.code].add(token.surface)
        self.tokens.update(known)

        if cls.kind is ClassKind.UNTAGGED:
            self.untagged_dur += utt.duration
            return self
        self.total_dur += utt.duration
        if cls.kind is ClassKind.MONOLINGUAL:
            (code,) = cls.languages
            self.mono[code] += utt.duration
        else:
            n_known = sum(known.values())
            for code, n in known.items():
                self.cs[code] += utt.duration * n / n_known
            self.switches += len(switch_points(utt.tokens))
        return self

    def merge(self, other):
        for code, v in other.mono.items():
            self.mono[code] += v
        for code, v in other.cs.items():
            self.cs[code] += v
        self.tokens.update(other.tokens)
        for code, words in other.types.items():
            self.types[code] |= words
        self.classes.update(other.classes)
        self.switches += other.switches
        self.utterances += other.utterances
        self.untranscribed += other.untranscribed
        self.unknown_tokens += other.unknown_tokens
        self.total_dur += other.total_dur
        self.untagged_dur += other.untagged_dur
        return self

    def result(self):
        codes = set(self.tokens) | set(self.mono) | set(self.cs)
        return CorpusStats(
            languages={code: LanguageStats(self.mono.get(code, 0.0), self.cs.get(code, 0.0),
                                           self.tokens.get(code, 0), len(self.types.get(code, ())))
                       for code in codes},
            class_counts=dict(self.classes),
            switch_count=self.switches,
            utterance_count=self.utterances,
            untranscribed_count=self.untranscribed,
            unknown_token_count=self.unknown_tokens,
            total_dur_s=self.total_dur,
            untagged_dur_s=self.untagged_dur,
        )


def corpus_stats(utts):
    acc = StatsAccumulator()
    for u in utts:
        acc.add(u)
    return acc.result()


def stats_by_set(sets):
    """Per-set duration breakdown (minutes) of monolingual and code-switched speech.

    `sets` maps a set name (dev, test, ...) to its utterances. Returns the
    header and one row per set: <code>_mdur for every language, then
    <code>_cdur, total and switch count.
    """
    stats = {name: corpus_stats(utts) for name, utts in sets.items()}
    codes = sorted({code for s in stats.values() for code in s.languages},
                   key=lambda c: (c != 'eng', c))
    header = (['set'] + [f'{c}_mdur' for c in codes] + [f'{c}_cdur' for c in codes]
              + ['total', 'switches'])
    rows = []
    for name, s in stats.items():
        empty = LanguageStats()
        mono = [f'{s.languages.get(c, empty).mono_dur_s / 60:.2f}' for c in codes]
        cs = [f'{s.languages.get(c, empty).cs_dur_s / 60:.2f}' for c in codes]
        rows.append([name] + mono + cs + [f'{s.total_dur_s / 60:.2f}', s.switch_count])
    return header, rows
