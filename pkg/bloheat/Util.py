import re
import yaml
import math
import numbers
import logging
import warnings
import numpy as np
from concurrent.futures import ThreadPoolExecutor

logger = logging.getLogger(__name__)


class BloError(Exception):
    """ Root of all errors raised by ``bloheat`` functionals."""


class InputError(BloError, ValueError):
    """ Violated precondition of an operation (empty ball family, ``t <= 0``, odd grid, ...)."""


class NumericError(BloError, ArithmeticError):
    """ Numeric failure: overflow guard tripped, impossible negative quadrature, divergence where a number was asked."""


class ConfigError(BloError):
    """ Invalid experiment configuration.

    Parameters
    ----------
    msg : str
        what is wrong
    line : int, None
        1-based line of the offending key in the configuration file, if known

    Examples
    --------
    >>> str(ConfigError('unknown key foo', line=7))
    'line 7: unknown key foo'
    >>> str(ConfigError('unknown key foo'))
    'unknown key foo'
    """
    def __init__(self, msg, line=None):
        self.line = line
        super().__init__(msg if line is None else 'line %d: %s' % (line, msg))


class Util():
    """ A collection of utility functions, most of which are static methods,
    i.e. can be called as ``Util.is_iterable()``.

    ``Util.threads`` is the worker count used by ``Util.pmap()``; the command line sets it from ``--threads``.
    """
    threads = 1

    @staticmethod
    def is_iterable(x):
        """ Checks if ``x`` is iterable.

        Parameters
        ----------
        x : object
            any object

        Returns
        -------
        bool
            ``True`` if ``x`` is iterable (strings excluded), ``False`` otherwise

        Examples
        --------
        >>> Util.is_iterable(1)
        False
        >>> Util.is_iterable((1, 2, 3))
        True
        >>> Util.is_iterable('ball')
        False
        """
        if isinstance(x, str): return False
        try:
            iter(x)
            return True
        except TypeError: return False

    @staticmethod
    def is_number(x):
        """ Checks if ``x`` is a real number (``bool`` excluded).

        >>> Util.is_number(2.5), Util.is_number(True), Util.is_number('2')
        (True, False, False)
        """
        return isinstance(x, numbers.Real) and not isinstance(x, bool)

    @staticmethod
    def are_numbers(x):
        """ Checks if x is an iterable of real numbers.

        Examples
        --------
        >>> Util.are_numbers(5)
        False
        >>> Util.are_numbers([1, 'blah', 3.])
        False
        >>> Util.are_numbers((1, 2., 5.4321))
        True
        """
        try:
            return all(Util.is_number(n) for n in x)
        except TypeError:
            return False

    @staticmethod
    def is_monotonic(x, direction=1, strict=True):
        """ Checks that a sequence is increasing (``direction=1``) or decreasing (``-1``).

        >>> Util.is_monotonic([0.125, 0.25, 0.5])
        True
        >>> Util.is_monotonic([0.125, 0.125, 0.5]), Util.is_monotonic([0.125, 0.125, 0.5], strict=False)
        (False, True)
        """
        if direction not in (1, -1): raise InputError('direction must be 1 for up, -1 for down')
        x = tuple(x)[::direction]
        return all(a < b if strict else a <= b for a, b in zip(x, x[1:]))

    @staticmethod
    def to_point(x, n=None):
        """ Converts a number or iterable of numbers to a point (tuple of floats) in ``n`` dimensions.

        Parameters
        ----------
        x : number, iterable
            coordinates; a number is promoted to all axes
        n : int, None
            desired dimension. ``None`` keeps the length of ``x``.

        Examples
        --------
        >>> Util.to_point(1)
        (1.0,)
        >>> Util.to_point(0.5, n=2)
        (0.5, 0.5)
        >>> import numpy as np; Util.to_point(np.array([1, 2]))
        (1.0, 2.0)
        """
        x = (x,) if Util.is_number(x) else tuple(x)
        if n is not None and len(x) == 1 and n > 1: x = x * n
        if n is not None and len(x) != n:
            raise InputError('point %s must have %d coordinates' % (x, n))
        return tuple(float(i) for i in x)

    @staticmethod
    def to_tuple(a):
        """ Recursively converts iterables (and arrays) to a ``tuple`` of built-in floats.

        >>> import numpy as np; Util.to_tuple(np.array([[1, 2], [3, 4]]))
        ((1.0, 2.0), (3.0, 4.0))
        """
        try:  return tuple(Util.to_tuple(i) for i in a)
        except TypeError: return float(a)

    @staticmethod
    def round(x, prec=5):
        """ Recursively rounds an iterable to the desired precision.

        >>> Util.round((1, 1/3, [1/7, 1/11]))
        (1, 0.33333, [0.14286, 0.09091])
        """
        try:
            return round(x, prec)
        except TypeError:
            return type(x)(Util.round(y, prec) for y in x)

    @staticmethod
    def log_grid(lo, hi, ppd=10):
        """ Log-spaced values from ``lo`` to ``hi`` (both included), at least ``ppd`` points per decade.

        Spacing is uniform in ``log10``; the interval count is ``ceil(ppd * decades)``.

        Parameters
        ----------
        lo, hi : float
            positive ends, ``lo < hi``
        ppd : int
            points per decade

        Returns
        -------
        numpy.ndarray

        Examples
        --------
        >>> Util.round([float(v) for v in Util.log_grid(1, 100, 2)], 4)
        [1.0, 3.1623, 10.0, 31.6228, 100.0]
        >>> len(Util.log_grid(1e-3, 1, 16))
        49
        """
        if not (0 < lo < hi): raise InputError('log grid needs 0 < lo < hi, got %r, %r' % (lo, hi))
        if ppd < 1: raise InputError('points per decade must be >= 1')
        m = max(1, int(math.ceil(ppd * math.log10(hi / lo) - 1e-9)))
        return 10.0 ** np.linspace(math.log10(lo), math.log10(hi), m + 1)

    @staticmethod
    def pmap(fun, items, threads=None):
        """ Ordered map, run on a thread pool when ``threads > 1``.

        Results come back in input order whatever the thread count, so reductions are reproducible.

        >>> Util.pmap(lambda v: v * v, range(5), threads=3)
        [0, 1, 4, 9, 16]
        """
        threads = Util.threads if threads is None else threads
        items = list(items)
        if threads is None or threads <= 1 or len(items) < 2:
            return [fun(i) for i in items]
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fun, items))

    @staticmethod
    def drift(before, after):
        """ Relative change ``|after - before| / max(|before|, tiny)``; the stability measure of extension studies.

        >>> Util.drift(2.0, 2.1)  # doctest: +ELLIPSIS
        0.0500...
        >>> Util.drift(0.0, 0.0)
        0.0
        """
        return abs(after - before) / max(abs(before), 1e-300)


class SpecPrinter:
    r""" Helper class for printing class's internal variables.

    This is a base class that is inherited by any child class needs to display its specifications (class variables).

    Examples
    --------
    >>> class A(SpecPrinter):
    ...     def __init__(self, **kwargs):
    ...        self.center = [0.25, -0.5]; self.note = None; self.radius = 1/3
    ...        super().__init__(**kwargs)
    >>> A()  # dumps variables of A(); same as print(str(A())), print(A()), print(repr(A()))
    A
    center:
    - 0.25
    - -0.5
    radius: 0.333333333

    >>> A(print_precision=3).full_spec(print_as_line=True)
    'A{center:[0.25, -0.5], radius:0.333}'
    """
    print_precision = 9

    def __init__(self, print_precision=9):
        """ Constructor

        Sets rounding precision for display of floating numbers

        Parameters
        ----------
        print_precision : int, optional
            Number of decimal digits to which printed output is rounded.
            Default 9 digits. If set to ``None``, machine precision is used.
        """
        SpecPrinter.print_precision = print_precision

    def full_spec(self, print_as_line=True):
        r""" Returns a formatted string containing all variables of this class (recursively)

        Parameters
        ----------
        print_as_line : bool
            If ``True``, print key:value pairs are separated by ``,``
            If ``False``, --- by ``\n``

        Returns
        -------
        str
            Formatted string with the object's specifications
        """

        def float_representer(dumper, value):
            if math.isfinite(value) and SpecPrinter.print_precision is not None:
                value = round(value, SpecPrinter.print_precision)
            return dumper.represent_scalar(u'tag:yaml.org,2002:float', str(value))

        def numpy_representer_seq(dumper, data):
            return dumper.represent_sequence('!ndarray:', data.tolist())

        yaml.add_representer(float, float_representer)
        yaml.add_representer(np.ndarray, numpy_representer_seq)

        # '\n' is inserted after each "width" number of characters, and at the end. So, we set to large width.
        s = yaml.dump(self, default_flow_style=print_as_line, width=1000)

        s = re.sub(r'\w+: null', '', s)  # removes null keys
        s = re.sub(r'(?im)^\s*\n', '', s)  # removes lines of spaces

        s = s.replace('!!python/object:', '').replace('!!python/tuple', '').replace('!ndarray: ', '')
        s = s.replace('__main__.', '').replace('bloheat.', '')
        s = re.sub(r'\b(Util|GridCore|AnalyticFunction|HeatSemigroup|Norms|MaximalWeights|LittlewoodPaley|'
                   r'PdeChecks|Config|Report|Acceptance|Cli)\.', '', s)

        s = s.replace(' {', '{')
        s = re.sub(re.compile(r'(,\s){2,}'), ', ', s)  # ", , , , , ... "   |->  ", "

        if print_as_line:
            s = s.replace(',', ', ').replace(': ', ':')
            s = re.sub(r'(\s){2,}', ' ', s)    # replace successive spaces with one instance

        return s.strip()

    def __repr__(self):
        return self.full_spec(print_as_line=False)

    def __str__(self):
        return self.full_spec(print_as_line=False)


class ResultSpec(SpecPrinter):
    """ ResultSpec verifies and saves a computed functional together with its witness and inputs.

    Every functional of the package returns (or fills) one of these.
    A typical BLO norm estimate:

    .. code::

          ball_count: 40
          mode: grid
          name: blo_norm
          value: 1.265
          witness:
            center: [-0.3125]
            radius: 0.5

    Examples
    --------
    >>> ResultSpec(name='blo_norm', value=1.25, mode='grid')
    ResultSpec
    mode: grid
    name: blo_norm
    value: 1.25
    """
    name = None
    value = None

    def __init__(self, print_precision=9, **kwargs):
        """ Constructor. Saves named inputs with ``add()``.

        Parameters
        ----------
        print_precision : int, optional
            Number of decimal digits to which printed output is rounded.
        kwargs : object, optional
            any named input (key=value, key=value,...) to store
        """
        SpecPrinter.print_precision = print_precision
        self.add(**kwargs)

    def add_verify(self, dtype=None, min=None, max=None, dflt=None, strict=False, **kwargs):
        """ Asserts the type and range of passed ``kwargs`` parameter *key*=*value*.

        If assertion fails and ``strict`` is ``False``, default value is used and message is saved into
        a ``[key]_warning`` variable (and warned). If ``strict`` is ``True``, ``ConfigError`` is raised instead.
        Only the first kwargs argument is processed.

        Parameters
        ----------
        dtype : {None, int, float, str, bool, ...}
            type of the input variable. ``float`` accepts any real number; ``int`` rejects floats.
        min, max : {None, number}
            allowed range of the value (inclusive)
        dflt : object
            value used when the check fails in non-strict mode, or when the value is ``None``
        strict : bool
            raise instead of substituting the default
        kwargs :
            A single *key*=*value* pair that needs to be validated and stored.

        Examples
        --------
        >>> rs = ResultSpec()
        >>> rs.add_verify(dtype=int, min=2, max=None, dflt=64, cells=128); rs
        ResultSpec
        cells: 128

        >>> import warnings
        >>> with warnings.catch_warnings():
        ...     warnings.simplefilter("ignore")
        ...     rs.add_verify(dtype=int, min=2, max=1024, dflt=64, cells=4096)
        >>> rs
        ResultSpec
        cells: 64
        cells_warning: bad spec cells=4096. Must be 2 <= int <= 1024. Using default 64

        >>> rs.add_verify(dtype=float, min=0, max=float("inf"), strict=True, t_min=-1.0)  # doctest: +IGNORE_EXCEPTION_DETAIL
        Traceback (most recent call last):
        ...
        ConfigError: bad spec t_min=-1.0. Must be 0 <= float <= inf
        """
        k, v = tuple(kwargs.keys())[0], tuple(kwargs.values())[0]

        bad = v is None and strict
        use_default = v is None
        if not (use_default or dtype is None):
            if dtype is float: ok = Util.is_number(v)
            elif dtype is int: ok = isinstance(v, int) and not isinstance(v, bool)
            else: ok = isinstance(v, dtype)
            if not ok: use_default = bad = True
        if not (use_default or min is None):
            if v < min: use_default = bad = True
        if not (use_default or max is None):
            if v > max: use_default = bad = True

        if bad or (use_default and v is not None):
            tname = 'object' if dtype is None else dtype.__name__
            msg = 'bad spec ' + k + '=' + str(v) + '. Must be ' + str(min) + ' <= ' + tname + ' <= ' + str(max)
            if strict: raise ConfigError(msg)
            msg += '. Using default ' + str(dflt)
            warnings.warn(msg, UserWarning)
            setattr(self, k + '_warning', msg)
        if use_default: v = dflt
        if dtype is float and Util.is_number(v): v = float(v)

        setattr(self, k, v)

    def add(self, **kwargs):
        """ Adds all key/value input arguments as object variables. ``None`` values are skipped.

        NumPy scalars are stored as built-in numbers so that printing and serialization stay plain.

        >>> ResultSpec().add(value=np.float64(0.5), skipped=None).value.__class__.__name__
        'float'
        """
        for k, v in kwargs.items():
            if v is None: continue
            if isinstance(v, np.generic): v = v.item()
            setattr(self, k, v)
        return self
