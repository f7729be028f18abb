from functools import partial

import click
from flask import Blueprint

from commands.common import (emit, format_option, jobs_option, lexicons_option, out_option, parse_config,
                             parse_options, read_corpus, read_lexicons, setting)
from pipeline.alignscore import ScoreTable, pair_texts, score_by_pair, score_utterance
from utils.parallel import parallel_map

score_bp = Blueprint('score', __name__, cli_group=None)


def _score_pair(strict, pair):
    ref, hyp = pair
    return score_utterance(ref, hyp, strict)


@score_bp.cli.command('score')
@click.option('--ref', 'ref_path', required=True, type=click.Path(exists=True), help='Reference transcriptions.')
@click.option('--hyp', 'hyp_path', required=True, type=click.Path(exists=True), help='Recognised transcriptions.')
@click.option('--cba-strict', is_flag=True,
              help='A switch bigram with an insertion between its words counts as wrong.')
@click.option('--skip-missing', is_flag=True,
              help='Skip references without a hypothesis instead of scoring them as deletions.')
@lexicons_option()
@parse_options
@jobs_option
@format_option
@out_option
def score(ref_path, hyp_path, cba_strict, skip_missing, lexicons, inline_tags, case_fold, jobs, fmt, out):
    """WER overall, per language and pooled over Bantu languages, with code-switched bigram accuracy."""
    config = parse_config(inline_tags, case_fold)
    lexicons = read_lexicons(lexicons, case_fold)
    refs = read_corpus(ref_path, config, lexicons)
    hyps = read_corpus(hyp_path, config, lexicons)
    pairs = pair_texts(refs, hyps, missing_as_deletions=not skip_missing)
    partials = parallel_map(partial(_score_pair, cba_strict), pairs, setting(jobs, 'JOBS'))
    emit(ScoreTable(score_by_pair(partials)), fmt, out)
