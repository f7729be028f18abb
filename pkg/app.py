import logging
import sys

import click
from flask import Flask
from flask.cli import FlaskGroup
from pydantic import ValidationError

from config import Config
from errors import CSwitchError


def create_app(config_class=Config):
    app = Flask(__name__)
    app.config.from_object(config_class)

    # Diagnostics on stderr; reports own stdout
    logging.basicConfig(
        level=getattr(logging, str(app.config['LOG_LEVEL']).upper(), logging.WARNING),
        stream=sys.stderr,
        format='%(levelname)s %(name)s: %(message)s',
    )

    # Register blueprints
    from commands.corpus import corpus_bp
    from commands.lm import lm_bp
    from commands.score import score_bp
    from commands.select import select_bp
    from commands.simulate import simulate_bp

    app.register_blueprint(corpus_bp)
    app.register_blueprint(lm_bp)
    app.register_blueprint(score_bp)
    app.register_blueprint(select_bp)
    app.register_blueprint(simulate_bp)

    return app


cli = FlaskGroup(
    name='cswitch',
    create_app=create_app,
    add_default_commands=False,
    help='Code-switched speech corpus, language model, scoring and semi-supervised selection tools.',
)


def run_cli(argv=None):
    """Run one subcommand: 0 on success, 1 on a usage error, 2 on bad data."""
    try:
        rv = cli.main(args=argv, prog_name='cswitch', standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return 1
    except click.Abort:
        click.echo('Aborted!', err=True)
        return 1
    except (CSwitchError, ValidationError) as e:
        click.echo(f'error: {e}', err=True)
        return 2
    except OSError as e:
        click.echo(f'error: {e}', err=True)
        return 2
    except click.ClickException as e:
        e.show()
        return 1
    return rv if isinstance(rv, int) else 0


if __name__ == '__main__':
    sys.exit(run_cli())
