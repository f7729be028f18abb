import json

import pytest

from app import run_cli
from pipeline.arpa import read_arpa
from tests.helpers import write_lines

SUBCOMMANDS = ['stats', 'tag', 'dump', 'lm-train', 'lm-ppl', 'lm-interp', 'score', 'select', 'simulate']


def tsv(text):
    return [line.split('\t') for line in text.splitlines()]


class TestExitCodes:
    @pytest.mark.parametrize('name', SUBCOMMANDS)
    def test_help(self, name, capsys):
        assert run_cli([name, '--help']) == 0
        assert 'Usage' in capsys.readouterr().out

    def test_unknown_command(self, capsys):
        assert run_cli(['frobnicate']) == 1

    def test_missing_option(self, capsys):
        assert run_cli(['score', '--ref', 'nowhere']) == 1

    def test_bad_data(self, tmp_path, capsys):
        write_lines(tmp_path / 'segments', ['utt1 rec1 5.0 1.0'])
        write_lines(tmp_path / 'text', ['utt1 a'])
        assert run_cli(['stats', str(tmp_path)]) == 2
        assert 'error:' in capsys.readouterr().err

    def test_invalid_loop_config(self, tmp_path, capsys):
        path = tmp_path / 'loop.json'
        path.write_text('{"seed_utts": -5}', encoding='utf-8')
        assert run_cli(['simulate', '--config', str(path)]) == 2

    def test_missing_candidate_file(self, tmp_path, capsys):
        argv = ['select', '--candidates', f'EZ={tmp_path / "missing.tsv"}', '--out-dir', str(tmp_path / 'sel')]
        assert run_cli(argv) == 1
        assert 'not found' in capsys.readouterr().err
        assert not (tmp_path / 'sel').exists()

    def test_undecodable_text(self, tmp_path, capsys):
        (tmp_path / 'text').write_bytes(b'utt1 ok\nutt2 \xff\xfe\n')
        assert run_cli(['stats', str(tmp_path)]) == 2
        assert ':2:' in capsys.readouterr().err

    def test_undecodable_candidates(self, tmp_path, capsys):
        path = tmp_path / 'ez.tsv'
        path.write_bytes(b'u1\t0.5\t\xff\n')
        assert run_cli(['select', '--candidates', f'EZ={path}', '--out-dir', str(tmp_path / 'sel')]) == 2
        assert ':1:' in capsys.readouterr().err

    def test_output_in_missing_directory(self, data_dir, tmp_path, capsys):
        assert run_cli(['stats', str(data_dir), '--out', str(tmp_path / 'nowhere' / 'x.tsv')]) == 2
        assert 'error:' in capsys.readouterr().err

    @pytest.mark.parametrize('k', ['0', '-1'])
    def test_non_positive_k(self, tmp_path, k, capsys):
        train = write_lines(tmp_path / 'train.txt', ['t1 a b'])
        argv = ['lm-train', str(train), '--out', str(tmp_path / 'm.arpa'), '--smoothing', 'addk', '--k', k]
        assert run_cli(argv) == 1
        assert not (tmp_path / 'm.arpa').exists()

    def test_success(self, data_dir, capsys):
        assert run_cli(['stats', str(data_dir)]) == 0
        assert capsys.readouterr().out.startswith('language\t')


def test_stats(runner, data_dir, lexicon_dir):
    result = runner.invoke(args=['stats', str(data_dir), '--lexicons', str(lexicon_dir)])
    assert result.exit_code == 0, result.output
    rows = tsv(result.output)
    assert rows[0] == ['language', 'mono_min', 'cs_min', 'total_h', 'total_pct', 'tokens', 'types']
    assert rows[-1][0] == 'Total'
    assert rows[-1][5] == '7'


def test_stats_json_to_file(runner, data_dir, tmp_path):
    out = tmp_path / 'stats.json'
    result = runner.invoke(args=['stats', str(data_dir), '--format', 'json', '--out', str(out)])
    assert result.exit_code == 0
    assert result.output == ''
    assert isinstance(json.loads(out.read_text(encoding='utf-8')), dict)


def test_stats_by_set(runner, data_dir, tmp_path):
    other = tmp_path / 'dev'
    other.mkdir()
    write_lines(other / 'text', ['d1 hello'])
    result = runner.invoke(args=['stats', str(data_dir), str(other)])
    assert result.exit_code == 0, result.output
    assert [r[0] for r in tsv(result.output)[1:]] == ['data', 'dev']


def test_tag(runner, data_dir, lexicon_dir):
    result = runner.invoke(args=['tag', str(data_dir), '--lexicons', str(lexicon_dir)])
    assert result.exit_code == 0, result.output
    assert result.output.splitlines()[0] == 'utt1 hello_eng sawubona_zul'


def test_dump_round_trip(runner, data_dir, lexicon_dir, tmp_path):
    out = tmp_path / 'dumped'
    result = runner.invoke(args=['dump', str(data_dir), str(out), '--lexicons', str(lexicon_dir)])
    assert result.exit_code == 0, result.output
    again = runner.invoke(args=['stats', str(out), '--inline-tags'])
    first = runner.invoke(args=['stats', str(data_dir), '--lexicons', str(lexicon_dir)])
    assert again.output == first.output


def test_score_identical(runner, tmp_path):
    text = write_lines(tmp_path / 'ref.txt', ['u1 hello_eng sawubona_zul', 'u2 yebo_zul manje_zul'])
    result = runner.invoke(args=['score', '--ref', str(text), '--hyp', str(text), '--inline-tags'])
    assert result.exit_code == 0, result.output
    rows = tsv(result.output)
    assert rows[0][:4] == ['pair', 'utts', 'n_ref', 'wer']
    assert rows[-1][:4] == ['Overall', '2', '4', '0.00']


def test_score_one_error(runner, tmp_path, lexicon_dir):
    ref = write_lines(tmp_path / 'ref.txt', ['u1 the umuntu manje', 'u2 hello now'])
    hyp = write_lines(tmp_path / 'hyp.txt', ['u1 the umfana manje', 'u2 hello now'])
    result = runner.invoke(args=['score', '--ref', str(ref), '--hyp', str(hyp), '--lexicons', str(lexicon_dir),
                                 '--format', 'json'])
    assert result.exit_code == 0, result.output
    data = json.loads(result.output)
    assert data['Overall']['overall']['wer'] == pytest.approx(0.2)


def test_select(runner, tmp_path):
    ez = write_lines(tmp_path / 'ez.tsv', ['u1\t0.9\thello_eng yebo_zul', 'u2\t0.2\tnow_eng'])
    ex = write_lines(tmp_path / 'ex.tsv', ['u1\t0.5\thello_eng', 'u2\t0.6\tnow_eng molo_xho'])
    out_dir = tmp_path / 'sel'
    result = runner.invoke(args=['select', '--candidates', f'EZ={ez}', '--candidates', f'EX={ex}',
                                 '--min-conf', '0.3', '--out-dir', str(out_dir), '--inline-tags'])
    assert result.exit_code == 0, result.output
    assert tsv(result.output)[1:] == [['u1', 'EZ', '0.9000', 'EZ'], ['u2', 'EX', '0.6000', 'EX']]
    assert (out_dir / 'text').read_text(encoding='utf-8').splitlines()[1] == 'u2 now_eng molo_xho'


def test_select_merges_manual_data(runner, tmp_path, data_dir):
    ez = write_lines(tmp_path / 'ez.tsv', ['p1\t0.9\thello'])
    result = runner.invoke(args=['select', '--candidates', f'EZ={ez}', '--out-dir', str(tmp_path / 'sel'),
                                 '--manual', str(data_dir), '--train-out', str(tmp_path / 'train')])
    assert result.exit_code == 0, result.output
    summary = json.loads((tmp_path / 'train' / 'durations.json').read_text(encoding='utf-8'))
    assert summary['counts'] == {'ManT': 4, 'AutoT': 1}


def test_select_takes_durations_from_pool(runner, tmp_path):
    manual = tmp_path / 'manual'
    manual.mkdir()
    write_lines(manual / 'text', ['m1 hello'])
    write_lines(manual / 'segments', ['m1 rec1 0.00 7200.00'])
    pool = tmp_path / 'pool'
    pool.mkdir()
    write_lines(pool / 'segments', ['p1 rec2 0.00 5400.00', 'p2 rec2 5400.00 5460.00'])
    ez = write_lines(tmp_path / 'ez.tsv', ['p1\t0.9\thello'])
    result = runner.invoke(args=['select', '--candidates', f'EZ={ez}', '--pool', str(pool),
                                 '--out-dir', str(tmp_path / 'sel'), '--manual', str(manual),
                                 '--train-out', str(tmp_path / 'train'), '--format', 'json'])
    assert result.exit_code == 0, result.output
    assert json.loads(result.output)['rejected_by_reason'] == {'no-candidates': 1}
    summary = json.loads((tmp_path / 'train' / 'durations.json').read_text(encoding='utf-8'))
    assert summary['durations_h'] == {'ManT': 2.0, 'AutoT': 1.5, 'total': 3.5}


@pytest.mark.parametrize('args', [
    ['--candidates', 'EZ={x}', '--five-lingual', 'EZ'],
    ['--candidates', 'QQ={x}'],
    ['--candidates', 'EZ'],
    ['--candidates', 'EZ={x}', '--candidates', 'EZ={y}'],
    ['--candidates', 'EZ={x}', '--train-out', 'somewhere'],
])
def test_select_usage_errors(runner, tmp_path, args):
    x = write_lines(tmp_path / 'x.tsv', ['u1\t0.5\ta'])
    y = write_lines(tmp_path / 'y.tsv', ['u1\t0.6\tb'])
    args = [a.format(x=x, y=y) for a in args]
    result = runner.invoke(args=['select', '--out-dir', str(tmp_path / 'sel')] + args)
    assert result.exit_code != 0
    assert not (tmp_path / 'sel').exists()


def test_lm_train_and_ppl(runner, tmp_path):
    train = write_lines(tmp_path / 'train.txt', ['t1 a_eng b_zul', 't2 b_zul b_zul a_eng', 't3 a_eng a_eng'])
    model = tmp_path / 'm.arpa'
    result = runner.invoke(args=['lm-train', str(train), '--out', str(model), '--order', '2',
                                 '--smoothing', 'wb', '--inline-tags'])
    assert result.exit_code == 0, result.output
    assert read_arpa(model).order == 2

    result = runner.invoke(args=['lm-ppl', '--model', str(model), '--eval', str(train), '--inline-tags'])
    assert result.exit_code == 0, result.output
    rows = tsv(result.output)
    assert rows[0] == ['model', 'dev', 'test', 'all_cpp', 'cpp_eb', 'cpp_be', 'all_mpp', 'mpp_eng', 'mpp_zul']
    assert rows[1][0] == 'm'
    assert len(rows) == 2


def test_lm_train_k_needs_addk(runner, tmp_path):
    train = write_lines(tmp_path / 'train.txt', ['t1 a b'])
    result = runner.invoke(args=['lm-train', str(train), '--out', str(tmp_path / 'm.arpa'), '--k', '0.5'])
    assert result.exit_code != 0
    assert '--k' in result.output


def test_lm_interp(runner, tmp_path):
    train = write_lines(tmp_path / 'train.txt', [
        't1 a_eng b_zul', 't2 b_zul c_zul', 't3 a_eng d_eng', 't4 c_zul b_zul a_eng',
    ])
    dev = write_lines(tmp_path / 'dev.txt', ['d1 a_eng b_zul c_zul', 'd2 d_eng a_eng'])
    ppl_out = tmp_path / 'ppl.json'
    result = runner.invoke(args=['lm-interp', '--train', str(train), '--dev', str(dev), '--eval', str(dev),
                                 '--ppl-out', str(ppl_out), '--order', '2', '--smoothing', 'addk',
                                 '--inline-tags', '--format', 'json'])
    assert result.exit_code == 0, result.output
    data = json.loads(result.output)
    assert sorted(data['weights']) == ['bantu_mono', 'code_switched', 'english_mono']
    assert sum(data['weights'].values()) == pytest.approx(1.0)
    assert list(json.loads(ppl_out.read_text(encoding='utf-8')))[-1] == 'interpolated'


def test_lm_interp_needs_one_source(runner, tmp_path):
    dev = write_lines(tmp_path / 'dev.txt', ['d1 a'])
    result = runner.invoke(args=['lm-interp', '--dev', str(dev)])
    assert result.exit_code != 0


def test_simulate(runner, tmp_path):
    config = tmp_path / 'loop.json'
    config.write_text(json.dumps({'seed_utts': 20, 'pool_utts': 40, 'heldout_utts': 20, 'lexicon_size': 20}),
                      encoding='utf-8')
    result = runner.invoke(args=['simulate', '--config', str(config), '--seed', '3', '--format', 'json'])
    assert result.exit_code == 0, result.output
    data = json.loads(result.output)
    assert data['seed'] == 3
    assert data['selection']['accepted'] + data['selection']['rejected'] == 40
    assert data['retrained']['Overall']['overall']['wer'] <= data['baseline']['Overall']['overall']['wer']


def test_simulate_is_repeatable(runner, tmp_path):
    config = tmp_path / 'loop.json'
    config.write_text(json.dumps({'seed_utts': 20, 'pool_utts': 60, 'heldout_utts': 20, 'lexicon_size': 20,
                                  'competitors': {'EX': {'default': {'p_sub': 0.3}}}}), encoding='utf-8')
    outputs = []
    for jobs in ('1', '1', '8'):
        out = tmp_path / f'report{len(outputs)}.json'
        result = runner.invoke(args=['simulate', '--config', str(config), '--jobs', jobs, '--format', 'json',
                                     '--out', str(out)])
        assert result.exit_code == 0, result.output
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]


def test_lm_ppl_values(runner, tmp_path):
    # add-one unigrams: a 4/9, b 2/9, </s> 3/9
    train = write_lines(tmp_path / 'train.txt', ['t1 a_eng b_zul', 't2 a_eng a_eng'])
    test = write_lines(tmp_path / 'test.txt', ['e1 a_eng b_zul'])
    model = tmp_path / 'uni.arpa'
    result = runner.invoke(args=['lm-train', str(train), '--out', str(model), '--order', '1',
                                 '--smoothing', 'addk', '--k', '1', '--inline-tags'])
    assert result.exit_code == 0, result.output
    result = runner.invoke(args=['lm-ppl', '--model', str(model), '--eval', str(test), '--inline-tags'])
    assert result.exit_code == 0, result.output
    assert tsv(result.output)[1] == ['uni', '—', '3.12', '4.50', '4.50', '—', '2.60', '2.25', '3.00']
