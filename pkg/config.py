import os
from dotenv import load_dotenv

load_dotenv()


def _flag(name, default):
    value = os.environ.get(name)
    if value is None:
        return default
    return value.strip().lower() in ('1', 'true', 'yes', 'on')


class Config:
    # Log verbosity for every subcommand (DEBUG, INFO, WARNING, ERROR)
    LOG_LEVEL = os.environ.get('CSWITCH_LOG') or 'WARNING'

    # Corpus parsing
    CASE_FOLD = _flag('CSWITCH_CASE_FOLD', True)
    INLINE_TAGS = _flag('CSWITCH_INLINE_TAGS', False)

    # Language modelling
    NGRAM_ORDER = int(os.environ.get('CSWITCH_ORDER') or 3)
    SMOOTHING = os.environ.get('CSWITCH_SMOOTHING') or 'kn'
    ADDK_K = float(os.environ.get('CSWITCH_ADDK_K') or 1.0)
    EM_TOL = 1e-6
    EM_MAX_ITER = 100

    # Selection
    MIN_CONF = float(os.environ.get('CSWITCH_MIN_CONF') or 0.0)
    FIVE_LINGUAL_SYSTEM = '5LING'

    # Simulation and scheduling
    SEED = int(os.environ.get('CSWITCH_SEED') or 42)
    JOBS = int(os.environ.get('CSWITCH_JOBS') or 1)

    REPORT_FORMAT = os.environ.get('CSWITCH_FORMAT') or 'tsv'
