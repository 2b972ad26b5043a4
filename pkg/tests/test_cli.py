import pytest
import pandas as pd

from bloheat import *
from bloheat.Cli import run, main, parser, _Step, EXIT_OK, EXIT_FAILED, EXIT_CONFIG

CONSTANT = 'function:\n  kind: Constant\n  c: 5.0\ndomain:\n  cells_per_axis: 64\n'


def write(tmp_path, text, name='experiment.yaml'):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def body(path):
    with open(path) as fh: return ''.join(l for l in fh if not l.startswith('#'))


class TestRun:
    def test_norms_of_constant(self, tmp_path):
        out = str(tmp_path / 'norms.csv')
        assert run(write(tmp_path, CONSTANT), 'norms', output=out) == EXIT_OK
        df = pd.read_csv(out, comment='#')
        assert df['quantity'].tolist() == ['blo_norm', 'bmo_norm', 'bennett_blo_functional']
        assert (df['value'] == 0).all()

    def test_reports_are_reproducible(self, tmp_path):
        cfg = write(tmp_path, CONSTANT)
        a, b = str(tmp_path / 'a.csv'), str(tmp_path / 'b.csv')
        assert run(cfg, 'norms', output=a) == run(cfg, 'norms', output=b) == EXIT_OK
        assert body(a) == body(b)

    def test_bad_config(self, tmp_path, capsys):
        assert run(write(tmp_path, 'domain:\n  cells: 8\n'), 'norms') == EXIT_CONFIG
        assert 'config error: line 2' in capsys.readouterr().err

    def test_example_neglog(self, tmp_path):
        out = str(tmp_path / 'neglog.csv')
        assert run(None, 'example-neglog', output=out) == EXIT_OK
        df = pd.read_csv(out, comment='#')
        assert list(df.columns) == ['a', 'b', 'defect_exact', 'defect_grid', 'abs_error']
        assert len(df) == 200 and df['abs_error'].max() <= 1e-3

    def test_json_output(self, tmp_path):
        out = str(tmp_path / 'norms.json')
        assert run(write(tmp_path, CONSTANT), 'norms', output=out, fmt='json') == EXIT_OK
        assert '"rows"' in open(out).read()

    def test_library_error_names_the_operation(self, tmp_path, capsys):
        cfg = write(tmp_path, 'function:\n  kind: Linear\ndomain:\n  cells_per_axis: 32\n')
        assert run(cfg, 'gfunc', output=str(tmp_path / 'g.csv')) == EXIT_FAILED
        assert 'failed in gsquared_blo_check' in capsys.readouterr().err

    def test_failed_step_does_not_leak_into_the_next_run(self, tmp_path, capsys):
        bad = write(tmp_path, 'function:\n  kind: Linear\ndomain:\n  cells_per_axis: 32\n', 'bad.yaml')
        assert run(bad, 'gfunc', output=str(tmp_path / 'g.csv')) == EXIT_FAILED
        capsys.readouterr()
        assert run(write(tmp_path, CONSTANT), 'norms', output=str(tmp_path / 'n.csv')) == EXIT_OK
        assert 'failed' not in capsys.readouterr().err

    def test_steps_are_recorded_per_report(self):
        a, b = Report('norms', 'a' * 64), Report('gfunc', 'b' * 64)
        with _Step(a, 'blo_norm'): pass
        with _Step(b, 'g_function'): pass
        assert (a.step, b.step) == ('blo_norm', 'g_function')

    def test_unknown_subcommand(self):
        with pytest.raises(InputError):
            run(None, 'plot')


class TestMain:
    def test_main(self, tmp_path):
        out = str(tmp_path / 'norms.csv')
        assert main(['--config', write(tmp_path, CONSTANT), '--output', out, '--seed', '3', 'norms']) == EXIT_OK

    def test_parser(self):
        args = parser().parse_args(['-vv', '--format', 'json', 'pde'])
        assert args.command == 'pde' and args.fmt == 'json' and args.verbose == 2

    def test_parser_rejects_unknown_command(self):
        with pytest.raises(SystemExit):
            parser().parse_args(['plot'])
