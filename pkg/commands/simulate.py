import click
from flask import Blueprint, current_app

from commands.common import emit, format_option, jobs_option, out_option, setting
from pipeline.simrec import LoopConfig, load_loop_config, run_loop

simulate_bp = Blueprint('simulate', __name__, cli_group=None)


@simulate_bp.cli.command('simulate')
@click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False), default=None,
              help='Loop configuration (JSON, or TOML with a .toml suffix).')
@click.option('--seed', type=int, default=None, help='Override the configured master seed.')
@click.option('--min-conf', type=float, default=None, help='Override the selection threshold.')
@jobs_option
@format_option
@out_option
def simulate(config_path, seed, min_conf, jobs, fmt, out):
    """Run the transcribe, select, retrain loop on synthetic data and compare held-out WER."""
    config = load_loop_config(config_path) if config_path else LoopConfig(seed=current_app.config['SEED'])
    overrides = {k: v for k, v in (('seed', seed), ('min_conf', min_conf)) if v is not None}
    if overrides:
        config = LoopConfig.model_validate({**config.model_dump(), **overrides})
    emit(run_loop(config, setting(jobs, 'JOBS')), fmt, out)
