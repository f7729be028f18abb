import pytest

from app import create_app
from pipeline.corpus import load_lexicons
from tests.helpers import write_lines


@pytest.fixture
def app():
    app = create_app()
    app.config.update(TESTING=True, JOBS=1, REPORT_FORMAT='tsv', MIN_CONF=0.0, INLINE_TAGS=False)
    return app


@pytest.fixture
def runner(app):
    return app.test_cli_runner()


@pytest.fixture
def lexicon_dir(tmp_path):
    d = tmp_path / 'lexicons'
    d.mkdir()
    write_lines(d / 'eng', ['the', 'hello', 'go', 'now', 'taxi', 'a', 'yes'])
    write_lines(d / 'zul', ['sawubona', 'manje', 'umuntu', 'umfana', 'taxi', 'yebo'])
    write_lines(d / 'tsn', ['a', 'dumela'])
    write_lines(d / '.hidden', ['ignored'])
    return d


@pytest.fixture
def lexicons(lexicon_dir):
    return load_lexicons(lexicon_dir)


@pytest.fixture
def data_dir(tmp_path):
    """A small Kaldi data directory with one segmented but untranscribed utterance."""
    d = tmp_path / 'data'
    d.mkdir()
    write_lines(d / 'text', [
        'utt1 hello sawubona',
        'utt2 the umuntu manje',
        'utt3 yebo yebo',
    ])
    write_lines(d / 'segments', [
        'utt1 rec1 0.00 3.00',
        'utt2 rec1 3.50 5.25',
        'utt3 rec2 0.00 1.00',
        'utt4 rec2 1.00 4.00',
    ])
    write_lines(d / 'utt2spk', ['utt1 spkA', 'utt2 spkA', 'utt3 spkB', 'utt4 spkB'])
    return d
