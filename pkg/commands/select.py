from pathlib import Path

import click
from flask import Blueprint

from commands.common import (emit, format_option, lexicons_option, out_option, parse_config, parse_options,
                             read_corpus, read_lexicons, setting)
from pipeline.semisup import emit_manifest, is_bilingual, load_candidates, merge_training_sets, select_best
from pipeline.semisup import write_training_set

select_bp = Blueprint('select', __name__, cli_group=None)


def _candidate_sources(values, five_lingual):
    sources = []
    for value in values:
        system_id, sep, path = value.partition('=')
        if not sep or not system_id or not path:
            raise click.UsageError(f'--candidates expects SYSTEM=PATH, got {value!r}')
        if not is_bilingual(system_id) and system_id != five_lingual:
            raise click.UsageError(f'unknown system {system_id!r}: use a language pair tag or {five_lingual!r}')
        if not Path(path).is_file():
            raise click.UsageError(f'candidate file for {system_id} not found: {path}')
        sources.append((system_id, path))
    systems = [s for s, _ in sources]
    if len(set(systems)) != len(systems):
        raise click.UsageError('each system may be given only once')
    return sources


@select_bp.cli.command('select')
@click.option('--candidates', 'candidate_specs', multiple=True, required=True, metavar='SYSTEM=PATH',
              help='Decoder output per system: utt_id<TAB>confidence<TAB>words (repeatable).')
@click.option('--min-conf', type=float, default=None, help='Reject winners below this confidence.')
@click.option('--five-lingual', default=None, help='System id of the five-lingual decoder (default 5LING).')
@click.option('--pool', type=click.Path(exists=True), default=None,
              help='Untranscribed data directory; utterances nobody decoded are rejected.')
@click.option('--out-dir', required=True, type=click.Path(file_okay=False),
              help='Directory for text, labels and counts.json.')
@click.option('--manual', type=click.Path(exists=True), default=None,
              help='Manually transcribed data to merge with the selection.')
@click.option('--train-out', type=click.Path(file_okay=False), default=None,
              help='Directory for the merged ManT+AutoT training set (needs --manual).')
@click.option('--auto-prefix', default='', help='Prefix for automatic utterance ids in the merged set.')
@lexicons_option()
@parse_options
@format_option
@out_option
def select(candidate_specs, min_conf, five_lingual, pool, out_dir, manual, train_out, auto_prefix,
           lexicons, inline_tags, case_fold, fmt, out):
    """Keep the most confident transcription of every utterance across decoders."""
    five_lingual = setting(five_lingual, 'FIVE_LINGUAL_SYSTEM')
    if is_bilingual(five_lingual):
        raise click.UsageError(f'--five-lingual cannot be the language pair tag {five_lingual!r}')
    if bool(manual) != bool(train_out):
        raise click.UsageError('--manual and --train-out go together')

    config = parse_config(inline_tags, case_fold)
    lexicons = read_lexicons(lexicons, case_fold)
    candidates = []
    for system_id, path in _candidate_sources(candidate_specs, five_lingual):
        candidates.extend(load_candidates(path, system_id, config))
    pool_utts = read_corpus(pool, config) if pool else None
    utt_ids = [u.id for u in pool_utts] if pool else None

    manifest = select_best(candidates, setting(min_conf, 'MIN_CONF'), utt_ids, lexicons)
    emit_manifest(manifest, out_dir)
    if manual:
        durations = {u.id: u.duration for u in pool_utts} if pool else None
        combined = merge_training_sets(read_corpus(manual, config, lexicons), manifest, auto_prefix, durations)
        write_training_set(combined, train_out)
    emit(manifest, fmt, out)
