import inspect
import io
import json
import pytest
import warnings
import pandas as pd

from bloheat import *
import importlib
Util = importlib.import_module('bloheat.Util')


@pytest.fixture
def report():
    r = Report('norms', config_digest='a' * 64)
    r.add('blo_norm', 0.75, {'mode': 'grid'}, {'center': [0.25], 'radius': 0.125})
    r.add('bmo_norm', 1.5, flags='PASS')
    return r


class TestReport:
    def test_csv_header_and_body(self, report):
        text = report.render('csv')
        head = [l for l in text.splitlines() if l.startswith('#')]
        assert [l.split(':')[0] for l in head] == ['# body_sha256', '# config_sha256', '# created', '# experiment']
        df = pd.read_csv(io.StringIO(text), comment='#')
        assert list(df.columns) == list(COLUMNS) and df['value'].tolist() == [0.75, 1.5]

    def test_body_digest_ignores_creation_time(self, report):
        other = Report('norms', config_digest='a' * 64)
        other.rows = list(report.rows)
        other.created = '1970-01-01T00:00:00+00:00'
        assert other.body_digest() == report.body_digest()
        assert other.render() != report.render()

    def test_json(self, report):
        out = json.loads(report.render('json'))
        assert out['experiment'] == 'norms' and len(out['rows']) == 2
        assert json.loads(out['rows'][0]['witness']) == {'center': [0.25], 'radius': 0.125}

    def test_table_replaces_rows(self):
        r = Report('example-neglog', table=pd.DataFrame({'a': [0.0], 'b': [1.0]}))
        assert r.body().splitlines() == ['a,b', '0,1']

    def test_full_precision(self):
        assert '0.10000000000000001' in Report('x').add('q', 0.1).body()

    def test_bad_format(self, report):
        with pytest.raises(InputError):
            report.body('xml')

    def test_write(self, report, tmp_path):
        p = tmp_path / 'out.csv'
        text = report.write(str(p))
        assert p.read_text() == text


class TestSpecPrinter:
    def test_module_compiles_without_warnings(self):
        src = inspect.getsource(Util)
        with warnings.catch_warnings():
            warnings.simplefilter('error')
            compile(src, Util.__file__, 'exec')

    def test_repr_has_no_blank_lines(self):
        text = repr(ResultSpec(name='blo_norm', value=0.5, witness={'center': [0.25], 'radius': 0.125}))
        assert 'blo_norm' in text and all(l.strip() for l in text.splitlines())
