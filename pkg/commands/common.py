"""Options and input helpers shared by the CLI blueprints."""
from pathlib import Path

import click
from flask import current_app

from models import TaggedUtterance
from pipeline.corpus import ParseConfig, TagPolicy, load_lexicons, parse_data_dir, read_text_file, tag_tokens
from utils import reports


def format_option(f):
    return click.option('--format', 'fmt', type=click.Choice(['tsv', 'json']), default=None,
                        help='Report format (default: CSWITCH_FORMAT or tsv).')(f)


def out_option(f):
    return click.option('--out', type=click.Path(dir_okay=False), default=None,
                        help='Report file; stdout when omitted or "-".')(f)


def jobs_option(f):
    return click.option('--jobs', type=click.IntRange(min=1), default=None,
                        help='Worker processes (default: CSWITCH_JOBS or 1).')(f)


def parse_options(f):
    f = click.option('--inline-tags/--no-inline-tags', default=None,
                     help='Read word_<code> suffixes as language tags.')(f)
    f = click.option('--case-fold/--no-case-fold', default=None,
                     help='Casefold words when reading (default on).')(f)
    return f


def lexicons_option(required=False):
    return click.option('--lexicons', type=click.Path(exists=True, file_okay=False), required=required,
                        help='Directory with one word list per language, named by language code.')


def setting(value, key):
    return current_app.config[key] if value is None else value


def parse_config(inline_tags=None, case_fold=None):
    return ParseConfig(inline_tags=setting(inline_tags, 'INLINE_TAGS'),
                       case_fold=setting(case_fold, 'CASE_FOLD'))


def read_lexicons(path, case_fold=None):
    if path is None:
        return None
    return load_lexicons(path, setting(case_fold, 'CASE_FOLD'))


def read_corpus(path, config, lexicons=None):
    """Utterances from a data directory or a bare `text` file, tagged when lexicons are given."""
    path = Path(path)
    if path.is_dir():
        utts = parse_data_dir(path, config)
    else:
        utts = [TaggedUtterance(utt_id, utt_id, tokens=tokens)
                for utt_id, tokens in read_text_file(path, config).items()]
    if lexicons:
        utts = tag_tokens(utts, lexicons, TagPolicy())
    return utts


def emit(report, fmt=None, out=None):
    reports.write(reports.render(report, setting(fmt, 'REPORT_FORMAT')), out)
