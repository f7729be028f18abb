import logging
from pathlib import Path

import click
from flask import Blueprint

from commands.common import (emit, format_option, jobs_option, lexicons_option, out_option, parse_config,
                             parse_options, read_corpus, read_lexicons, setting)
from errors import DataError
from pipeline.arpa import read_arpa, write_arpa
from pipeline.ngramlm import Method, Smoothing, component_corpora, count_ngrams, interpolate_em, train_lm
from pipeline.perplexity import EvalConfig, PerplexityTable, perplexity, perplexity_by_pair
from utils import reports

logger = logging.getLogger(__name__)

lm_bp = Blueprint('lm', __name__, cli_group=None)

COMPONENT_NAMES = ('code_switched', 'bantu_mono', 'english_mono')


def training_options(f):
    f = click.option('--k', type=click.FloatRange(min=0.0, min_open=True), default=None,
                     help='Add-k constant (only with --smoothing addk).')(f)
    f = click.option('--smoothing', type=click.Choice([m.value for m in Method]), default=None,
                     help='kn (modified Kneser-Ney), wb (Witten-Bell) or addk.')(f)
    f = click.option('--order', type=click.IntRange(min=1), default=None, help='n-gram order (default 3).')(f)
    return f


def _smoothing(name, k):
    name = setting(name, 'SMOOTHING')
    if k is not None and name != Method.ADDK.value:
        raise click.UsageError('--k is only valid with --smoothing addk')
    try:
        return Smoothing.parse(name, setting(k, 'ADDK_K'))
    except ValueError as e:
        raise click.UsageError(f'bad smoothing settings: {e}') from None


def _words(*corpora):
    return {w for utts in corpora for u in utts for w in u.words}


@lm_bp.cli.command('lm-train')
@click.argument('train', type=click.Path(exists=True))
@click.option('--out', type=click.Path(dir_okay=False), required=True, help='ARPA file to write.')
@click.option('--vocab-from', multiple=True, type=click.Path(exists=True),
              help='Close the vocabulary over TRAIN plus these corpora (repeatable).')
@training_options
@parse_options
def lm_train(train, out, vocab_from, order, smoothing, k, inline_tags, case_fold):
    """Train a backoff n-gram model on TRAIN and write it in ARPA format."""
    smoothing = _smoothing(smoothing, k)
    config = parse_config(inline_tags, case_fold)
    utts = read_corpus(train, config)
    vocab = None
    if vocab_from:
        vocab = _words(utts, *(read_corpus(p, config) for p in vocab_from))
    model = train_lm(count_ngrams(utts, setting(order, 'NGRAM_ORDER')), smoothing, vocab)
    write_arpa(model, out)
    if model.info.fallback_orders:
        click.echo(f'Witten-Bell used for order(s) {list(model.info.fallback_orders)}', err=True)


@lm_bp.cli.command('lm-ppl')
@click.option('--model', 'models', multiple=True, required=True, type=click.Path(exists=True, dir_okay=False),
              help='ARPA model (repeatable, one row each).')
@click.option('--eval', 'eval_path', required=True, type=click.Path(exists=True), help='Test corpus.')
@click.option('--dev', 'dev_path', type=click.Path(exists=True), default=None, help='Development corpus.')
@click.option('--by-pair', is_flag=True, help='One row per language pair of the test corpus.')
@lexicons_option()
@parse_options
@jobs_option
@format_option
@out_option
def lm_ppl(models, eval_path, dev_path, by_pair, lexicons, inline_tags, case_fold, jobs, fmt, out):
    """Perplexity of each model with its code-switch / monolingual breakdown."""
    config = parse_config(inline_tags, case_fold)
    lexicons = read_lexicons(lexicons, case_fold)
    test = read_corpus(eval_path, config, lexicons)
    dev = read_corpus(dev_path, config, lexicons) if dev_path else None
    cfg = EvalConfig(jobs=setting(jobs, 'JOBS'))

    entries = []
    for path in models:
        model = read_arpa(path)
        label = Path(path).stem
        if by_pair:
            dev_reports = perplexity_by_pair(model, dev, cfg) if dev else {}
            for pair, report in perplexity_by_pair(model, test, cfg).items():
                entries.append((f'{label}:{pair}', dev_reports.get(pair), report))
        else:
            entries.append((label, perplexity(model, dev, cfg) if dev else None, perplexity(model, test, cfg)))
    emit(PerplexityTable(entries), fmt, out)


@lm_bp.cli.command('lm-interp')
@click.option('--train', 'train_path', type=click.Path(exists=True), default=None,
              help='Tagged training corpus, split into code-switched, Bantu and English parts.')
@click.option('--component', 'components', multiple=True, type=click.Path(exists=True, dir_okay=False),
              help='Pre-trained ARPA component (repeatable).')
@click.option('--dev', 'dev_path', required=True, type=click.Path(exists=True), help='Weight tuning corpus.')
@click.option('--eval', 'eval_path', type=click.Path(exists=True), default=None,
              help='Also report perplexities on this corpus to --ppl-out.')
@click.option('--ppl-out', type=click.Path(dir_okay=False), default=None)
@click.option('--tol', type=float, default=None, help='Stop when dev log-likelihood gains less than this.')
@click.option('--max-iter', type=click.IntRange(min=1), default=None)
@training_options
@lexicons_option()
@parse_options
@jobs_option
@format_option
@out_option
def lm_interp(train_path, components, dev_path, eval_path, ppl_out, tol, max_iter, order, smoothing, k,
              lexicons, inline_tags, case_fold, jobs, fmt, out):
    """Optimise linear interpolation weights of several models on dev data."""
    if bool(train_path) == bool(components):
        raise click.UsageError('give either --train or at least one --component')
    config = parse_config(inline_tags, case_fold)
    lexicons = read_lexicons(lexicons, case_fold)
    dev = read_corpus(dev_path, config, lexicons)
    test = read_corpus(eval_path, config, lexicons) if eval_path else None

    if train_path:
        smoothing = _smoothing(smoothing, k)
        train = read_corpus(train_path, config, lexicons)
        vocab = _words(train, dev, test or [])
        names, models = [], []
        for name, part in zip(COMPONENT_NAMES, component_corpora(train)):
            if not part:
                logger.warning('no %s training utterances; component skipped', name)
                continue
            names.append(name)
            models.append(train_lm(count_ngrams(part, setting(order, 'NGRAM_ORDER')), smoothing, vocab))
        if not models:
            raise DataError(f'{train_path}: no tagged utterances to train components on')
    else:
        names = [Path(p).stem for p in components]
        models = [read_arpa(p) for p in components]

    mixed = interpolate_em(models, dev,
                           tol=setting(tol, 'EM_TOL'),
                           max_iter=setting(max_iter, 'EM_MAX_ITER'))
    table = reports.Table(['component', 'weight'],
                          [[n, f'{w:.6f}'] for n, w in zip(names, mixed.weights)],
                          {'weights': dict(zip(names, mixed.weights)), 'trace': list(mixed.trace)})
    emit(table, fmt, out)

    if test is not None:
        cfg = EvalConfig(jobs=setting(jobs, 'JOBS'))
        entries = [(n, perplexity(m, dev, cfg), perplexity(m, test, cfg)) for n, m in zip(names, models)]
        entries.append(('interpolated', perplexity(mixed, dev, cfg), perplexity(mixed, test, cfg)))
        emit(PerplexityTable(entries), fmt, ppl_out)
