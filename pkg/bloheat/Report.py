import io
import sys
import json
import hashlib
from datetime import datetime, timezone

try: from bloheat.Config import *  # production:  if bloheat package is installed
except ImportError:   from Config import *  # development: if not installed and running from source

logger = logging.getLogger(__name__)

COLUMNS = ('quantity', 'parameters', 'value', 'witness', 'flags')


def _plain(v):
    """ JSON-ready copy: numpy scalars and arrays become built-ins, tuples lists."""
    if isinstance(v, dict): return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)): return [_plain(x) for x in v]
    if isinstance(v, np.ndarray): return _plain(v.tolist())
    if isinstance(v, np.generic): return v.item()
    return v


def _cell(v):
    return '' if v is None or v == {} else json.dumps(_plain(v), sort_keys=True)


class Report(SpecPrinter):
    """ Rows of computed quantities with the witness that recomputes each, plus run metadata.

    The body (rows) is deterministic for a given configuration and seed; the creation time lives in the metadata only.

    >>> r = Report('norms', config_digest='0' * 64)
    >>> r.add('blo_norm', 1.25, {'mode': 'grid'}, {'center': [0.5], 'radius': 0.25}).add('bmo_norm', 0.5)
    ... # doctest: +ELLIPSIS
    <...Report object at ...>
    >>> print(r.body('csv'))
    quantity,parameters,value,witness,flags
    blo_norm,"{""mode"": ""grid""}",1.25,"{""center"": [0.5], ""radius"": 0.25}",
    bmo_norm,,0.5,,
    <BLANKLINE>
    """
    def __init__(self, experiment, config_digest='', table=None):
        self.experiment, self.config_digest = experiment, config_digest
        self.created = datetime.now(timezone.utc).isoformat(timespec='seconds')
        self.rows, self.table = [], table
        self.step = None  # library operation in progress, named when it fails

    def __repr__(self):
        return object.__repr__(self)

    def add(self, quantity, value, parameters=None, witness=None, flags=''):
        self.rows.append({'quantity': quantity, 'parameters': _cell(parameters), 'value': float(value),
                          'witness': _cell(witness), 'flags': flags})
        return self

    def add_result(self, res, quantity=None, parameters=None, flags='', field='value'):
        """ A row from a ``ResultSpec``: its ``field`` as the value, its ``witness`` (if any) and every other field
        as parameters.

        >>> r = Report('gfunc').add_result(ResultSpec(name='g_blo_check', blo_ratio=0.5, passed=True), field='blo_ratio')
        >>> r.rows[0]['quantity'], r.rows[0]['value'], r.rows[0]['parameters']
        ('g_blo_check', 0.5, '{"passed": true}')
        """
        d = {k: v for k, v in vars(res).items() if not k.startswith('_') and k not in ('name', field, 'witness')}
        d.update(parameters or {})
        return self.add(quantity or res.name, getattr(res, field), d, getattr(res, 'witness', None), flags)

    def frame(self):
        if self.table is not None: return self.table
        return pd.DataFrame(self.rows, columns=list(COLUMNS))

    def body(self, fmt='csv'):
        """ The report body as text: CSV with 17 significant digits, or sorted-key JSON records."""
        df = self.frame()
        if fmt == 'csv':
            buf = io.StringIO()
            df.to_csv(buf, index=False, float_format='%.17g', lineterminator='\n')
            return buf.getvalue()
        if fmt == 'json': return json.dumps(_plain(df.to_dict(orient='records')), sort_keys=True, indent=1) + '\n'
        raise InputError('format must be csv or json, got %r' % (fmt,))

    def body_digest(self, fmt='csv'):
        return hashlib.sha256(self.body(fmt).encode()).hexdigest()

    def render(self, fmt='csv'):
        body = self.body(fmt)
        meta = {'experiment': self.experiment, 'created': self.created, 'config_sha256': self.config_digest,
                'body_sha256': hashlib.sha256(body.encode()).hexdigest()}
        if fmt == 'csv':
            return ''.join('# %s: %s\n' % (k, meta[k]) for k in sorted(meta)) + body
        out = dict(meta, rows=json.loads(body))
        return json.dumps(out, sort_keys=True, indent=1) + '\n'

    def write(self, path=None, fmt='csv'):
        """ Writes the rendered report to ``path``, or to standard output when ``path`` is ``None``."""
        text = self.render(fmt)
        if path is None:
            sys.stdout.write(text)
        else:
            with open(path, 'w', newline='') as fh: fh.write(text)
            logger.info('report %s written to %s (%d rows)', self.experiment, path, len(self.frame()))
        return text
