from pathlib import Path

import click
from flask import Blueprint

from commands.common import (emit, format_option, lexicons_option, out_option, parse_config, parse_options,
                             read_corpus, read_lexicons)
from pipeline.corpus import TagPolicy, corpus_stats, format_token, stats_by_set, tag_tokens, write_data_dir
from utils import reports

corpus_bp = Blueprint('corpus', __name__, cli_group=None)


@corpus_bp.cli.command('stats')
@click.argument('data', nargs=-1, required=True, type=click.Path(exists=True))
@lexicons_option()
@parse_options
@format_option
@out_option
def stats(data, lexicons, inline_tags, case_fold, fmt, out):
    """Corpus composition of DATA (durations, tokens, types per language).

    With several DATA paths, report one row per set instead.
    """
    config = parse_config(inline_tags, case_fold)
    lexicons = read_lexicons(lexicons, case_fold)
    if len(data) == 1:
        emit(corpus_stats(read_corpus(data[0], config, lexicons)), fmt, out)
        return
    sets = {Path(p).name: read_corpus(p, config, lexicons) for p in data}
    header, rows = stats_by_set(sets)
    emit(reports.Table(header, rows), fmt, out)


@corpus_bp.cli.command('tag')
@click.argument('data', type=click.Path(exists=True))
@lexicons_option(required=True)
@click.option('--priority', default='', help='Comma-separated language codes for ambiguous words.')
@click.option('--sticky/--no-sticky', default=True,
              help='Resolve ambiguous words to the language of the previous word when possible.')
@click.option('--retag', is_flag=True, help='Re-derive tags already present in the input.')
@parse_options
@click.option('--out', type=click.Path(dir_okay=False), default=None, help='Tagged text file; stdout by default.')
def tag(data, lexicons, priority, sticky, retag, inline_tags, case_fold, out):
    """Tag every word of DATA with its language, writing word_<code> text."""
    policy = TagPolicy(tuple(c for c in priority.split(',') if c), sticky, retag)
    utts = read_corpus(data, parse_config(inline_tags, case_fold))
    tagged = tag_tokens(utts, read_lexicons(lexicons, case_fold), policy)
    lines = [' '.join([u.id] + [format_token(t) for t in u.tokens]) for u in tagged]
    reports.write(''.join(line + '\n' for line in lines), out)


@corpus_bp.cli.command('dump')
@click.argument('data', type=click.Path(exists=True))
@click.argument('out_dir', type=click.Path(file_okay=False))
@lexicons_option()
@parse_options
def dump(data, out_dir, lexicons, inline_tags, case_fold):
    """Write DATA, tagged, as a canonical data directory in OUT_DIR."""
    utts = read_corpus(data, parse_config(inline_tags, case_fold), read_lexicons(lexicons, case_fold))
    write_data_dir(utts, out_dir)
    click.echo(f'wrote {len(utts)} utterance(s) to {out_dir}', err=True)
