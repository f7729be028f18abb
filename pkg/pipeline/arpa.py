"""ARPA backoff format: `\\data\\` counts, `\\N-grams:` sections, `\\end\\`."""
import logging
import re

from errors import DataError
from pipeline.corpus import read_lines
from pipeline.ngramlm import ModelInfo, NGramModel

logger = logging.getLogger(__name__)

_COUNT = re.compile(r'^ngram\s+(\d+)\s*=\s*(\d+)$')
_SECTION = re.compile(r'^\\(\d+)-grams:$')


def _fmt(value):
    return f'{value + 0.0:.7g}'


def write_arpa(model, path):
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write('\n\\data\\\n')
        for n, count in enumerate(model.counts(), start=1):
            f.write(f'ngram {n}={count}\n')
        for n in range(1, model.order + 1):
            f.write(f'\n\\{n}-grams:\n')
            for ngram in model.ngrams(n):
                line = f'{_fmt(model.probs[ngram])}\t{" ".join(ngram)}'
                bow = model.backoffs.get(ngram)
                if bow is not None:
                    line += f'\t{_fmt(bow)}'
                f.write(line + '\n')
        f.write('\n\\end\\\n')


def read_arpa(path):
    declared = {}
    probs, backoffs = {}, {}
    seen = {}
    state = 'header'
    section = 0
    for lineno, line in read_lines(path):
        line = line.strip()
        if line == '\\data\\':
            state = 'data'
            continue
        if line == '\\end\\':
            state = 'end'
            break
        match = _SECTION.match(line)
        if match:
            section = int(match.group(1))
            if section not in declared:
                raise DataError(f'{path}:{lineno}: section {section}-grams has no count in \\data\\')
            seen[section] = 0
            state = 'ngrams'
            continue
        if state == 'header':
            continue
        if state == 'data':
            match = _COUNT.match(line)
            if not match:
                raise DataError(f'{path}:{lineno}: expected "ngram N=count" in \\data\\ section')
            declared[int(match.group(1))] = int(match.group(2))
            continue

        fields = line.split('\t') if '\t' in line else line.split()
        if '\t' in line and len(fields) >= 2:
            words = tuple(fields[1].split())
            rest = fields[2:]
        else:
            words = tuple(fields[1:1 + section])
            rest = fields[1 + section:]
        if len(words) != section:
            raise DataError(f'{path}:{lineno}: expected a {section}-gram, got {len(words)} word(s)')
        try:
            probs[words] = float(fields[0])
            if rest:
                if section == max(declared):
                    raise DataError(f'{path}:{lineno}: backoff weight on a highest-order n-gram')
                backoffs[words] = float(rest[0])
        except ValueError:
            raise DataError(f'{path}:{lineno}: malformed number in n-gram line') from None
        seen[section] += 1

    if state != 'end':
        raise DataError(f'{path}: missing \\end\\ marker')
    if not declared:
        raise DataError(f'{path}: no \\data\\ section')
    for n, count in sorted(declared.items()):
        if seen.get(n, 0) != count:
            raise DataError(f'{path}: \\data\\ declares {count} {n}-grams but the section has {seen.get(n, 0)}')

    order = max(declared)
    vocab = {g[0] for g in probs if len(g) == 1}
    logger.debug('read %d-gram ARPA model from %s', order, path)
    return NGramModel(order, probs, backoffs, vocab, ModelInfo(smoothing='arpa'))
