from dataclasses import dataclass, field
from enum import Enum


class Family(str, Enum):
    ENGLISH = 'English'
    NGUNI = 'Nguni'
    SOTHO = 'Sotho'
    OTHER = 'Other'

    @property
    def is_bantu(self):
        return self in (Family.NGUNI, Family.SOTHO)


@dataclass(frozen=True, order=True)
class LanguageId:
    code: str
    family: Family = field(default=Family.OTHER, compare=False)

    def __post_init__(self):
        if not self.code:
            raise ValueError('language code must be non-empty')

    def __str__(self):
        return self.code


@dataclass(frozen=True)
class Lexicon:
    language: LanguageId
    words: frozenset

    def __post_init__(self):
        if '' in self.words:
            raise ValueError(f'lexicon {self.language.code} contains an empty word')

    def __contains__(self, word):
        return word in self.words

    def __len__(self):
        return len(self.words)


@dataclass(frozen=True)
class Token:
    surface: str
    lang: LanguageId = None  # None means Unknown

    def __post_init__(self):
        if not self.surface:
            raise ValueError('token surface must be non-empty')

    @property
    def code(self):
        return self.lang.code if self.lang is not None else None

    def tagged(self, lang):
        return Token(self.surface, lang)


@dataclass(frozen=True)
class TaggedUtterance:
    id: str
    speaker: str
    start_s: float = 0.0
    end_s: float = 0.0
    tokens: tuple = ()
    recording: str = None

    def __post_init__(self):
        if self.end_s < self.start_s:
            raise ValueError(f'utterance {self.id}: end {self.end_s} before start {self.start_s}')
        if not isinstance(self.tokens, tuple):
            object.__setattr__(self, 'tokens', tuple(self.tokens))

    @property
    def duration(self):
        return self.end_s - self.start_s

    @property
    def words(self):
        return [t.surface for t in self.tokens]

    def with_tokens(self, tokens):
        return TaggedUtterance(self.id, self.speaker, self.start_s, self.end_s, tuple(tokens), self.recording)


class ClassKind(str, Enum):
    MONOLINGUAL = 'monolingual'
    CODE_SWITCHED = 'code-switched'
    UNTAGGED = 'untagged'


@dataclass(frozen=True)
class UttClass:
    kind: ClassKind
    languages: frozenset = frozenset()

    @classmethod
    def monolingual(cls, code):
        return cls(ClassKind.MONOLINGUAL, frozenset([code]))

    @classmethod
    def code_switched(cls, codes):
        return cls(ClassKind.CODE_SWITCHED, frozenset(codes))

    @classmethod
    def untagged(cls):
        return cls(ClassKind.UNTAGGED)

    @property
    def label(self):
        """Report label: the language code, 'cs' or 'untagged'."""
        if self.kind is ClassKind.MONOLINGUAL:
            (code,) = self.languages
            return code
        if self.kind is ClassKind.CODE_SWITCHED:
            return 'cs'
        return 'untagged'
