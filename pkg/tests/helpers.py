from models import TaggedUtterance, Token
from utils import languages as registry


def tok(text):
    """'eng:the' is a tagged token, a bare word is untagged."""
    code, sep, surface = text.partition(':')
    if not sep:
        return Token(text)
    return Token(surface, registry.get_language(code))


def utt(utt_id, specs, dur=0.0, speaker=None):
    return TaggedUtterance(utt_id, speaker or utt_id, 0.0, dur, [tok(s) for s in specs.split()])


def write_lines(path, lines):
    path.write_text(''.join(line + '\n' for line in lines), encoding='utf-8')
    return path
