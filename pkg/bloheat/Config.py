import os
import json
import hashlib

try: from bloheat.PdeChecks import *  # production:  if bloheat package is installed
except ImportError:   from PdeChecks import *  # development: if not installed and running from source

logger = logging.getLogger(__name__)

DEFAULT_CONFIG = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'default_config.yaml')

# section -> key -> (dtype, min, max); defaults come from default_config.yaml
SCHEMA = {
    'domain': {'n': (int, 1, 2), 'half_width': (float, 1e-6, None), 'cells_per_axis': (int, 2, 2 ** 16)},
    'radii': {'policy': (str, None, None), 'max_fraction': (float, 1e-6, 1.0), 'margin': (float, 0.0, None)},
    'time_grid': {'t_min': (float, 1e-12, None), 't_max': (float, 1e-12, None), 'points_per_decade': (int, 4, 64)},
    'square_function': {'s_min': (float, 1e-12, None), 's_max': (float, 1e-12, 1e8),
                        'points_per_decade': (int, 4, 256)},
    'heat': {'truncation_multiple': (float, 8, 40), 'quadrature': (str, None, None),
             'tail_tolerance': (float, 0.0, 1e-3)},
    'weights': {'threshold': (float, 1.0, None), 'refinements': (int, 1, 6)},
    'pde': {'centers': (int, 1, 256), 'pairs': (int, 1, 10 ** 5)},
    'output': {'path': (str, None, None), 'format': (str, None, None)},
}
SCALARS = {'tolerance': (float, 0.0, 1.0), 'seed': (int, 0, 2 ** 64 - 1), 'threads': (int, 1, 256)}
FREE = ('function', 'epsilon_grid')
CHOICES = {('radii', 'policy'): ('dyadic', 'linear'), ('heat', 'quadrature'): HeatParams.QUADRATURES,
           ('output', 'format'): ('csv', 'json')}
NULLABLE = {('output', 'path')}


def _line_map(text):
    """ 1-based line of every key of a YAML mapping tree, keyed by its path tuple."""
    lines = {}

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                lines[path + (k.value,)] = k.start_mark.line + 1
                walk(v, path + (k.value,))

    try:
        walk(yaml.compose(text), ())
    except yaml.YAMLError:
        pass
    return lines


def _read(path):
    try:
        with open(path) as fh: text = fh.read()
    except OSError as e:
        raise ConfigError('cannot read %s: %s' % (path, e.strerror))
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        raise ConfigError('malformed YAML: %s' % getattr(e, 'problem', e), line=None if mark is None else mark.line + 1)
    if data is None: data = {}
    if not isinstance(data, dict): raise ConfigError('configuration must be a mapping', line=1)
    return data, _line_map(text)


class ExperimentConfig(ResultSpec):
    """ A validated experiment configuration: the defaults of ``default_config.yaml`` with a user file merged over them.

    Unknown keys and out-of-range values raise ``ConfigError`` naming the line of the offending key.

    >>> cfg = ExperimentConfig(); cfg.domain['cells_per_axis'], cfg.output['format'], cfg.seed
    (256, 'csv', 0)
    >>> cfg.build_function().label(), cfg.build_domain().N
    ('NegLogAbs', 256)
    >>> ExperimentConfig(overrides={'domain': {'cells': 3}})
    Traceback (most recent call last):
    ...
    ConfigError: unknown key domain.cells
    """
    def __init__(self, path=None, overrides=None, print_precision=9):
        super().__init__(print_precision=print_precision)
        base, _ = _read(DEFAULT_CONFIG)
        user, lines = _read(path) if path is not None else ({}, {})
        self.path, self._lines = path, lines
        merged = self._merge(self._merge(base, user), overrides or {})
        self._validate(merged)

    @staticmethod
    def _merge(base, user):
        out = {k: (dict(v) if isinstance(v, dict) else v) for k, v in base.items()}
        for k, v in user.items():
            if isinstance(v, dict) and isinstance(out.get(k), dict) and k != 'function': out[k].update(v)
            else: out[k] = v
        return out

    def _fail(self, msg, *path):
        raise ConfigError(msg, line=self._lines.get(tuple(path)))

    def _validate(self, cfg):
        known = set(SCHEMA) | set(SCALARS) | set(FREE)
        for k in cfg:
            if k not in known: self._fail('unknown key %s' % k, k)
        for sec, keys in SCHEMA.items():
            vals = cfg[sec]
            if not isinstance(vals, dict): self._fail('section %s must be a mapping' % sec, sec)
            for k in vals:
                if k not in keys: self._fail('unknown key %s.%s' % (sec, k), sec, k)
            holder = ResultSpec()
            for k, (dtype, lo, hi) in keys.items():
                v = vals.get(k)
                if (sec, k) in NULLABLE and v is None:
                    setattr(holder, k, None)
                    continue
                if (sec, k) in CHOICES and v not in CHOICES[(sec, k)]:
                    self._fail('bad spec %s.%s=%s. Must be one of %s' % (sec, k, v, ', '.join(CHOICES[(sec, k)])), sec, k)
                try:
                    holder.add_verify(dtype=dtype, min=lo, max=hi, strict=True, **{k: v})
                except ConfigError as e:
                    self._fail('%s (section %s)' % (str(e), sec), sec, k)
            setattr(self, sec, {k: getattr(holder, k) for k in keys})
        for k, (dtype, lo, hi) in SCALARS.items():
            try:
                self.add_verify(dtype=dtype, min=lo, max=hi, strict=True, **{k: cfg[k]})
            except ConfigError as e:
                self._fail(str(e), k)
        eps = cfg['epsilon_grid']
        if not isinstance(eps, list) or not eps or not Util.are_numbers(eps) or min(eps) <= 0 \
                or not Util.is_monotonic(eps):
            self._fail('epsilon_grid must be a non-empty ascending list of positive numbers', 'epsilon_grid')
        self.epsilon_grid = [float(e) for e in eps]
        if not isinstance(cfg['function'], dict): self._fail('function must be a descriptor mapping', 'function')
        self.function = cfg['function']
        builders = (('function', self.build_function), ('domain', self.build_domain),
                    ('time_grid', self.build_time_grid), ('square_function', self.build_square_function),
                    ('heat', self.build_heat))
        for sec, build in builders:  # module preconditions, checked at load time
            try:
                build()
            except (InputError, ConfigError) as e:
                self._fail('%s: %s' % (sec, e), sec)

    def __getstate__(self):
        return {k: v for k, v in self.__dict__.items() if not k.startswith('_')}

    def build_function(self):
        return AnalyticFunction.from_descriptor(self.function, self.domain['n'])

    def build_domain(self):
        return Domain(self.domain['n'], self.domain['half_width'], self.domain['cells_per_axis'])

    def build_time_grid(self):
        t = self.time_grid
        return TimeGrid(t['t_min'], t['t_max'], t['points_per_decade'])

    def build_square_function(self):
        s = self.square_function
        return SquareFunctionParams(s['s_min'], s['s_max'], s['points_per_decade'])

    def build_heat(self):
        return HeatParams(**self.heat)

    def build_radii(self, d):
        r = self.radii
        if r['policy'] == 'linear': return linear_radii(d, r['max_fraction'])
        return dyadic_radii(d, max_fraction=r['max_fraction'])

    def as_dict(self):
        out = {sec: dict(getattr(self, sec)) for sec in SCHEMA}
        out.update({k: getattr(self, k) for k in SCALARS})
        out.update(function=self.function, epsilon_grid=self.epsilon_grid)
        return out

    def digest(self):
        """ SHA-256 of the canonical JSON (sorted keys) of the validated configuration.

        >>> ExperimentConfig().digest() == ExperimentConfig(overrides={'seed': 0}).digest()
        True
        """
        return hashlib.sha256(json.dumps(self.as_dict(), sort_keys=True).encode()).hexdigest()
