import math
import numpy as np
from scipy import integrate, optimize, special

try: from bloheat.Util import *  # production:  if bloheat package is installed
except ImportError:   from Util import *  # development: if not installed and running from source

logger = logging.getLogger(__name__)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


class AnalyticFunction(SpecPrinter):
    """ Closed-form test function with a declared BLO / BMO / L-infinity classification.

    The family is fixed. Composite kinds (``Shifted``, ``Scaled``, ``Sum``, ``ExpWeight``) wrap a ``base``
    function (and a ``bounded_part`` for ``Sum``).

    ===============  ====================================  ==============================
    kind             value                                 parameters
    ===============  ====================================  ==============================
    Constant         c                                     ``c``
    Linear           x_1                                   none
    NegLogAbs        -ln|x|                                none
    LogAbs           ln|x|                                 none
    PowerLawWeight   |x|^(-alpha)                          ``alpha`` (0 < alpha < n)
    GaussianBump     exp(-|x|^2 / (4a))                    ``a`` > 0
    Indicator        1 on the closed ball                  ``center``, ``radius``
    BoundedSine      A prod_i sin(w x_i)                   ``amplitude``, ``frequency``
    Shifted          base(x - h)                           ``h``
    Scaled           lam * base(x)                         ``lam`` > 0
    Sum              base(x) + weight * bounded_part(x)    ``weight`` (default 1)
    ExpWeight        exp(epsilon * base(x))                ``epsilon`` > 0
    ===============  ====================================  ==============================

    Examples
    --------
    >>> f = AnalyticFunction('NegLogAbs'); f.evaluate(1.0) == 0, f.evaluate(math.exp(-1))
    (True, 1.0)
    >>> f.is_BLO, f.is_BMO, f.is_Linfty
    (True, True, False)
    >>> AnalyticFunction('LogAbs').is_BLO
    False
    >>> AnalyticFunction('GaussianBump', a=1).evaluate(0)
    1.0
    >>> AnalyticFunction('PowerLawWeight', alpha=1.5)
    Traceback (most recent call last):
    ...
    InputError: PowerLawWeight requires 0 < alpha < n=1, got 1.5
    """
    KINDS = ('Constant', 'Linear', 'NegLogAbs', 'LogAbs', 'PowerLawWeight', 'GaussianBump', 'Indicator',
             'BoundedSine', 'Shifted', 'Scaled', 'Sum', 'ExpWeight')
    FLAGS = {  # is_BLO, is_BMO, is_Linfty
        'Constant': (True, True, True),   'Linear': (False, False, False),
        'NegLogAbs': (True, True, False), 'LogAbs': (False, True, False),
        'PowerLawWeight': (False, False, False), 'GaussianBump': (True, True, True),
        'Indicator': (True, True, True),  'BoundedSine': (True, True, True)}
    RADIAL = ('NegLogAbs', 'LogAbs', 'PowerLawWeight')

    def __init__(self, kind='NegLogAbs', n=1, base=None, bounded_part=None, strict=True, **params):
        """ Constructor.

        Parameters
        ----------
        kind : str
            one of ``AnalyticFunction.KINDS``
        n : int
            dimension, 1 or 2
        base, bounded_part : AnalyticFunction, optional
            wrapped functions of composite kinds; they must share dimension ``n``
        strict : bool
            if ``False``, ``PowerLawWeight`` accepts any ``alpha < n`` (used internally for exp-weights)
        params :
            kind parameters, see class table
        """
        if kind not in self.KINDS: raise InputError('unknown function kind %r' % (kind,))
        if n not in (1, 2): raise InputError('dimension n must be 1 or 2, got %r' % (n,))
        self.kind, self.n, self.params = kind, n, dict(params)
        self.base, self.bounded_part = base, bounded_part
        self._corner_cache = {}
        self._check(strict)

    def __getstate__(self):
        return {k: v for k, v in self.__dict__.items() if not k.startswith('_')}

    def _check(self, strict):
        p, k, n = self.params, self.kind, self.n
        if k == 'Constant':
            p.setdefault('c', 0.0)
            if not Util.is_number(p['c']): raise InputError('Constant requires a real c')
            p['c'] = float(p['c'])
        elif k == 'PowerLawWeight':
            a = p.get('alpha')
            if not Util.is_number(a) or a >= n or (strict and a <= 0):
                raise InputError('PowerLawWeight requires 0 < alpha < n=%d, got %s' % (n, a))
            p['alpha'] = float(a)
        elif k == 'GaussianBump':
            p.setdefault('a', 1.0)
            if not Util.is_number(p['a']) or p['a'] <= 0: raise InputError('GaussianBump requires a > 0')
            p['a'] = float(p['a'])
        elif k == 'Indicator':
            p['center'] = Util.to_point(p.get('center', 0.0), n)
            if not Util.is_number(p.get('radius')) or p['radius'] <= 0:
                raise InputError('Indicator requires radius > 0')
            p['radius'] = float(p['radius'])
        elif k == 'BoundedSine':
            p.setdefault('amplitude', 1.0); p.setdefault('frequency', 1.0)
            if not Util.is_number(p['amplitude']) or not Util.is_number(p['frequency']) or p['frequency'] <= 0:
                raise InputError('BoundedSine requires a real amplitude and frequency > 0')
            p['amplitude'], p['frequency'] = float(p['amplitude']), float(p['frequency'])
        elif k in ('Shifted', 'Scaled', 'Sum', 'ExpWeight'):
            if not isinstance(self.base, AnalyticFunction): raise InputError('%s requires a base function' % k)
            if self.base.n != n: raise InputError('%s base has dimension %d, expected %d' % (k, self.base.n, n))
            if k == 'Shifted':
                p['h'] = Util.to_point(p.get('h', 0.0), n)
            elif k == 'Scaled':
                if not Util.is_number(p.get('lam')) or p['lam'] <= 0: raise InputError('Scaled requires lam > 0')
                p['lam'] = float(p['lam'])
            elif k == 'Sum':
                g = self.bounded_part
                if not isinstance(g, AnalyticFunction) or g.n != n:
                    raise InputError('Sum requires a bounded_part of dimension %d' % n)
                if not g.is_Linfty: raise InputError('Sum bounded_part must be bounded, got %s' % g.kind)
                p.setdefault('weight', 1.0); p['weight'] = float(p['weight'])
            else:
                if not Util.is_number(p.get('epsilon')) or p['epsilon'] <= 0:
                    raise InputError('ExpWeight requires epsilon > 0')
                p['epsilon'] = float(p['epsilon'])

    # ---------------------------------------------------------------- classification
    @property
    def flags(self):
        k = self.kind
        if k in self.FLAGS: return self.FLAGS[k]
        if k in ('Shifted', 'Scaled'): return self.base.flags
        if k == 'Sum': return self.base.flags
        return (False, False, self.base.is_Linfty)

    @property
    def is_BLO(self): return self.flags[0]

    @property
    def is_BMO(self): return self.flags[1]

    @property
    def is_Linfty(self): return self.flags[2]

    @property
    def singular_point(self):
        """ Location of the (single) singular point, or ``None`` if the function is finite everywhere.

        >>> AnalyticFunction('Shifted', base=AnalyticFunction('NegLogAbs'), h=0.5).singular_point
        (0.5,)
        >>> AnalyticFunction('BoundedSine').singular_point is None
        True
        """
        k = self.kind
        if k in ('NegLogAbs', 'LogAbs'): return (0.0,) * self.n
        if k == 'PowerLawWeight': return (0.0,) * self.n if self.params['alpha'] > 0 else None
        if k == 'Shifted':
            s = self.base.singular_point
            return None if s is None else tuple(a + b for a, b in zip(s, self.params['h']))
        if k in ('Scaled', 'Sum', 'ExpWeight'): return self.base.singular_point
        return None

    @property
    def singular_set(self):
        return 'empty' if self.singular_point is None else 'origin' if not any(self.singular_point) else 'point'

    def breakpoints(self, axis=0):
        """ Coordinates along ``axis`` where the function is singular or jumps; quadrature panels break there.

        >>> AnalyticFunction('Indicator', center=0.0, radius=1.0).breakpoints()
        [-1.0, 1.0]
        """
        k = self.kind
        if k == 'Indicator':
            c, r = self.params['center'][axis], self.params['radius']
            return [c - r, c + r]
        if k == 'Shifted':
            return [v + self.params['h'][axis] for v in self.base.breakpoints(axis)]
        if k in ('Scaled', 'ExpWeight'): return self.base.breakpoints(axis)
        if k == 'Sum': return sorted(set(self.base.breakpoints(axis) + self.bounded_part.breakpoints(axis)))
        s = self.singular_point
        return [] if s is None else [s[axis]]

    def sup_norm(self):
        """ Declared L-infinity norm (an upper bound for ``Sum``; ``inf`` for unbounded kinds).

        >>> AnalyticFunction('BoundedSine', amplitude=-0.5, frequency=3).sup_norm()
        0.5
        """
        k, p = self.kind, self.params
        if k == 'Constant': return abs(p['c'])
        if k in ('GaussianBump', 'Indicator'): return 1.0
        if k == 'BoundedSine': return abs(p['amplitude'])
        if k == 'Shifted': return self.base.sup_norm()
        if k == 'Scaled': return p['lam'] * self.base.sup_norm()
        if k == 'Sum': return self.base.sup_norm() + abs(p['weight']) * self.bounded_part.sup_norm()
        if k == 'ExpWeight' and self.base.is_Linfty: return math.exp(p['epsilon'] * self.base.sup_norm())
        return math.inf

    def length_scale(self):
        """ Smallest length on which the function varies (``inf`` if it has none); quadrature panels stay below it.

        >>> AnalyticFunction('Sum', base=AnalyticFunction('NegLogAbs'),
        ...                  bounded_part=AnalyticFunction('BoundedSine', frequency=4)).length_scale()
        0.25
        """
        k, p = self.kind, self.params
        if k == 'GaussianBump': return math.sqrt(p['a'])
        if k == 'Indicator': return p['radius']
        if k == 'BoundedSine': return 1.0 / p['frequency']
        if k == 'Sum': return min(self.base.length_scale(), self.bounded_part.length_scale())
        if k in ('Shifted', 'Scaled', 'ExpWeight'): return self.base.length_scale()
        return math.inf

    # ---------------------------------------------------------------- evaluation
    def values(self, points):
        """ Vectorized closed-form values at ``points`` (array of shape ``(m, n)``); no singularity check."""
        P = np.asarray(points, dtype=float).reshape(-1, self.n)
        k, p = self.kind, self.params
        if k == 'Constant': return np.full(P.shape[0], p['c'])
        if k == 'Linear': return P[:, 0].copy()
        if k == 'BoundedSine': return p['amplitude'] * np.prod(np.sin(p['frequency'] * P), axis=1)
        if k == 'Indicator':
            d = np.sqrt(np.sum((P - np.asarray(p['center'])) ** 2, axis=1))
            return (d <= p['radius']).astype(float)
        if k == 'Shifted': return self.base.values(P - np.asarray(p['h']))
        if k == 'Scaled': return p['lam'] * self.base.values(P)
        if k == 'Sum': return self.base.values(P) + p['weight'] * self.bounded_part.values(P)
        if k == 'ExpWeight': return np.exp(p['epsilon'] * self.base.values(P))
        r = np.abs(P[:, 0]) if self.n == 1 else np.hypot(P[:, 0], P[:, 1])
        with np.errstate(divide='ignore'):
            if k == 'NegLogAbs': return -np.log(r)
            if k == 'LogAbs': return np.log(r)
            if k == 'PowerLawWeight': return r ** -p['alpha']
        return np.exp(-r * r / (4 * p['a']))  # GaussianBump

    def hits_singularity(self, points):
        s = self.singular_point
        if s is None: return np.zeros(np.asarray(points).reshape(-1, self.n).shape[0], dtype=bool)
        P = np.asarray(points, dtype=float).reshape(-1, self.n)
        return np.all(P == np.asarray(s), axis=1)

    def evaluate(self, x):
        """ Closed-form value at one point ``x``.

        Raises ``InputError`` at the singular point.

        >>> AnalyticFunction('NegLogAbs').evaluate(0)
        Traceback (most recent call last):
        ...
        InputError: NegLogAbs is singular at (0.0,)
        >>> AnalyticFunction('Linear', n=2).evaluate((0.25, 3))
        0.25
        """
        x = Util.to_point(x, self.n)
        if self.hits_singularity(x)[0]: raise InputError('%s is singular at %s' % (self.kind, x))
        return float(self.values(x)[0])

    # ---------------------------------------------------------------- exact integrals
    def exact_cell_integral(self, cell):
        """ Exact integral over an axis-aligned cell.

        Closed-form antiderivatives per axis for separable kinds; in 1-D the log and power antiderivatives
        run across the singularity; in 2-D the log kinds use the closed form of the double integral of
        ``ln(x^2 + y^2)``, power weights and indicators a polar corner integral. Cells that do not touch
        the singular point of kinds without a closed form are integrated by a 16x16 Gauss-Legendre rule.

        Parameters
        ----------
        cell : tuple
            ``((lo_1, hi_1), ..., (lo_n, hi_n))``; in 1-D ``(lo, hi)`` is accepted as well

        Returns
        -------
        float

        Examples
        --------
        >>> b = 0.5; f = AnalyticFunction('NegLogAbs')
        >>> abs(f.exact_cell_integral((0, b)) - b * (1 - math.log(b))) < 1e-15
        True
        >>> AnalyticFunction('Constant', n=2, c=3).exact_cell_integral(((0, 2), (0, 0.5)))
        3.0
        >>> round(AnalyticFunction('PowerLawWeight', alpha=0.5).exact_cell_integral((0, 4)), 12)
        4.0
        """
        lo, hi = self._cell_bounds(cell)
        return float(self.cell_integrals(lo[None, :], hi[None, :])[0])

    def _cell_bounds(self, cell):
        c = np.asarray(cell, dtype=float)
        if c.ndim == 1: c = c.reshape(1, 2)
        if c.shape != (self.n, 2): raise InputError('cell must have %d (lo, hi) pairs' % self.n)
        if np.any(c[:, 1] <= c[:, 0]): raise InputError('cell bounds must satisfy lo < hi, got %s' % (cell,))
        return c[:, 0], c[:, 1]

    def cell_integrals(self, lo, hi):
        """ Exact integrals over many cells at once; ``lo`` and ``hi`` have shape ``(m, n)``."""
        lo, hi = np.atleast_2d(np.asarray(lo, dtype=float)), np.atleast_2d(np.asarray(hi, dtype=float))
        k, p = self.kind, self.params
        vol = np.prod(hi - lo, axis=1)
        if k == 'Constant': return p['c'] * vol
        if k == 'Linear': return 0.5 * (hi[:, 0] ** 2 - lo[:, 0] ** 2) * np.prod(hi[:, 1:] - lo[:, 1:], axis=1)
        if k == 'GaussianBump': return np.prod(_gauss_1d(p['a'], lo, hi), axis=1)
        if k == 'BoundedSine':
            w = p['frequency']
            return p['amplitude'] * np.prod(2 * np.sin(0.5 * w * (lo + hi)) * np.sin(0.5 * w * (hi - lo)) / w, axis=1)
        if k == 'Shifted':
            h = np.asarray(p['h'])
            return self.base.cell_integrals(lo - h, hi - h)
        if k == 'Scaled': return p['lam'] * self.base.cell_integrals(lo, hi)
        if k == 'Sum': return self.base.cell_integrals(lo, hi) + p['weight'] * self.bounded_part.cell_integrals(lo, hi)
        if k == 'ExpWeight': return self._exp_integrals(lo, hi)
        if k == 'Indicator': return self._indicator_integrals(lo, hi)
        if self.n == 1: return _radial_1d(k, p, lo[:, 0], hi[:, 0])
        return self._radial_2d(lo, hi)

    def _touching(self, lo, hi):
        s = self.singular_point
        if s is None: return np.zeros(lo.shape[0], dtype=bool)
        s = np.asarray(s)
        return np.all((lo <= s) & (s <= hi), axis=1)

    def _gauss_legendre(self, lo, hi):
        """ Tensor Gauss-Legendre rule (16 nodes per axis) on each cell; for integrands smooth on the cell."""
        out = np.empty(lo.shape[0])
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        if self.n == 1:
            W, X = _GL_WEIGHTS, _GL_NODES[:, None]
        else:
            W = np.outer(_GL_WEIGHTS, _GL_WEIGHTS).ravel()
            X = np.stack(np.meshgrid(_GL_NODES, _GL_NODES, indexing='ij'), axis=-1).reshape(-1, 2)
        for s in range(0, lo.shape[0], 2048):
            m, h = mid[s:s + 2048], half[s:s + 2048]
            pts = m[:, None, :] + h[:, None, :] * X[None, :, :]
            v = self.values(pts.reshape(-1, self.n)).reshape(m.shape[0], -1)
            out[s:s + 2048] = (v @ W) * np.prod(h, axis=1)
        return out

    def _radial_2d(self, lo, hi):
        k = self.kind
        out = np.empty(lo.shape[0])
        touch = self._touching(lo, hi)
        if np.any(~touch): out[~touch] = self._gauss_legendre(lo[~touch], hi[~touch])
        for i in np.flatnonzero(touch):
            if k in ('NegLogAbs', 'LogAbs'):
                v = sum(_quadrant_sum(_log_corner, a, b) for a, b in _quadrant_boxes(lo[i], hi[i]))
                out[i] = (-0.5 if k == 'NegLogAbs' else 0.5) * v
            else:
                alpha = self.params['alpha']
                G = lambda rho: rho ** (2 - alpha) / (2 - alpha)
                out[i] = sum(_quadrant_sum(lambda X, Y: self._corner(G, X, Y, ()), a, b)
                             for a, b in _quadrant_boxes(lo[i], hi[i]))
        return out

    def _corner(self, G, X, Y, kinks):
        key = (X, Y)
        if key not in self._corner_cache: self._corner_cache[key] = _polar_corner(G, X, Y, kinks)
        return self._corner_cache[key]

    def _indicator_integrals(self, lo, hi):
        c, r = np.asarray(self.params['center']), self.params['radius']
        if self.n == 1:
            return np.clip(np.minimum(hi[:, 0], c[0] + r) - np.maximum(lo[:, 0], c[0] - r), 0, None)
        lo, hi = lo - c, hi - c
        near = np.sqrt(np.sum(np.clip(np.maximum(lo, -hi), 0, None) ** 2, axis=1))
        far = np.sqrt(np.sum(np.maximum(np.abs(lo), np.abs(hi)) ** 2, axis=1))
        out = np.where(far <= r, np.prod(hi - lo, axis=1), 0.0)
        G = lambda rho: 0.5 * min(rho, r) ** 2
        for i in np.flatnonzero((near < r) & (far > r)):
            out[i] = sum(_quadrant_sum(lambda X, Y: self._corner(G, X, Y, (r,)), a, b)
                         for a, b in _quadrant_boxes(lo[i], hi[i]))
        return out

    def _exp_reduced(self):
        """ An equivalent function with closed-form cell integrals, as ``(factor, function)``; ``None`` if unknown."""
        b, eps = self.base, self.params['epsilon']
        if b.kind == 'Constant': return math.exp(eps * b.params['c']), AnalyticFunction('Constant', n=self.n, c=1.0)
        if b.kind == 'NegLogAbs':
            if eps >= self.n: raise InputError('exp(%g * NegLogAbs) is not locally integrable in n=%d' % (eps, self.n))
            return 1.0, AnalyticFunction('PowerLawWeight', n=self.n, alpha=eps)
        if b.kind == 'LogAbs': return 1.0, AnalyticFunction('PowerLawWeight', n=self.n, alpha=-eps, strict=False)
        if b.kind == 'Scaled':
            return AnalyticFunction('ExpWeight', n=self.n, base=b.base, epsilon=eps * b.params['lam'])._exp_reduced()
        if b.kind == 'Shifted':
            red = AnalyticFunction('ExpWeight', n=self.n, base=b.base, epsilon=eps)._exp_reduced()
            if red is None: return None
            return red[0], AnalyticFunction('Shifted', n=self.n, base=red[1], h=b.params['h'])
        if b.kind == 'Sum' and b.bounded_part.kind == 'Constant':
            red = AnalyticFunction('ExpWeight', n=self.n, base=b.base, epsilon=eps)._exp_reduced()
            if red is None: return None
            return red[0] * math.exp(eps * b.params['weight'] * b.bounded_part.params['c']), red[1]
        return None

    def _exp_integrals(self, lo, hi):
        red = self._exp_reduced()
        if red is not None: return red[0] * red[1].cell_integrals(lo, hi)
        touch = self._touching(lo, hi)
        if np.any(touch):
            raise InputError('no exact cell integral for ExpWeight of %s on a cell touching its singular point'
                             % self.base.kind)
        return self._gauss_legendre(lo, hi)

    def integrable_exactly(self):
        """ ``True`` if every cell (including those touching the singular point) has an exact integral."""
        if self.kind == 'ExpWeight': return self._exp_reduced() is not None
        if self.kind in ('Shifted', 'Scaled'): return self.base.integrable_exactly()
        if self.kind == 'Sum': return self.base.integrable_exactly() and self.bounded_part.integrable_exactly()
        return True

    # ---------------------------------------------------------------- balls
    def ball_integral(self, b):
        """ Exact integral over a ball ``b`` (anything with ``center`` and ``radius``).

        Any interval in 1-D. In 2-D, radial kinds on disks centered at their singular point, through the polar
        antiderivative (``r ln r - r`` type closed forms); other 2-D balls raise ``InputError``.

        >>> f = AnalyticFunction('NegLogAbs', n=2)
        >>> class B: center, radius = (0.0, 0.0), 0.5
        >>> round(f.ball_integral(B) / (math.pi * 0.25), 12) == round(0.5 - math.log(0.5), 12)
        True
        """
        c, r = Util.to_point(b.center, self.n), float(b.radius)
        if self.n == 1: return self.exact_cell_integral((c[0] - r, c[0] + r))
        k, p = self.kind, self.params
        if k == 'Constant': return p['c'] * math.pi * r * r
        if k == 'Scaled': return p['lam'] * self.base.ball_integral(b)
        if k == 'Sum': return self.base.ball_integral(b) + p['weight'] * self.bounded_part.ball_integral(b)
        if k == 'Shifted':
            h = p['h']
            return self.base.ball_integral(_Ball(tuple(a - s for a, s in zip(c, h)), r))
        if c == (0.0, 0.0):
            if k == 'NegLogAbs': return math.pi * r * r * (0.5 - math.log(r))
            if k == 'LogAbs': return -math.pi * r * r * (0.5 - math.log(r))
            if k == 'PowerLawWeight': return 2 * math.pi * r ** (2 - p['alpha']) / (2 - p['alpha'])
            if k == 'GaussianBump': return 4 * math.pi * p['a'] * -math.expm1(-r * r / (4 * p['a']))
        raise InputError('no exact 2-D ball integral for %s centered at %s; use cell averages' % (k, c))

    def ball_mean(self, b):
        r = float(b.radius)
        return self.ball_integral(b) / (2 * r if self.n == 1 else math.pi * r * r)

    def infimum_on_ball(self, b):
        """ Infimum over the closed ball ``b``; closed form for monotone and radial kinds.

        ``LogAbs`` on a ball containing its singular point gives ``-inf``. Other kinds use a dense lattice
        refined by bounded scalar minimization (1-D).

        >>> class B: center, radius = (0.5,), 0.25
        >>> AnalyticFunction('NegLogAbs').infimum_on_ball(B) == -math.log(0.75)
        True
        >>> class B0: center, radius = (0.0,), 1.0
        >>> AnalyticFunction('LogAbs').infimum_on_ball(B0)
        -inf
        """
        c, r = np.asarray(Util.to_point(b.center, self.n)), float(b.radius)
        k, p = self.kind, self.params
        d = float(np.sqrt(np.sum(c * c)))
        if k == 'Constant': return p['c']
        if k == 'Linear': return float(c[0]) - r
        if k == 'NegLogAbs': return -math.log(d + r)
        if k == 'LogAbs': return -math.inf if d <= r else math.log(d - r)
        if k == 'PowerLawWeight': return (d + r) ** -p['alpha']
        if k == 'GaussianBump': return math.exp(-(d + r) ** 2 / (4 * p['a']))
        if k == 'Indicator':
            dc = float(np.sqrt(np.sum((c - np.asarray(p['center'])) ** 2)))
            return 1.0 if dc + r <= p['radius'] else 0.0
        if k == 'Shifted': return self.base.infimum_on_ball(_Ball(tuple(c - np.asarray(p['h'])), r))
        if k == 'Scaled': return p['lam'] * self.base.infimum_on_ball(b)
        if k == 'ExpWeight': return math.exp(p['epsilon'] * self.base.infimum_on_ball(b))
        if k == 'BoundedSine' and self.n == 1: return _sine_infimum(p['amplitude'], p['frequency'], c[0] - r, c[0] + r)
        if k == 'Sum' and self.bounded_part.kind == 'Constant':
            return self.base.infimum_on_ball(b) + p['weight'] * self.bounded_part.params['c']
        if k == 'Sum' and self.base.infimum_on_ball(b) == -math.inf: return -math.inf
        return self._numeric_infimum(c, r)

    def _numeric_infimum(self, c, r):
        if self.n == 1:
            xs = np.linspace(c[0] - r, c[0] + r, 4097)
            xs = xs[~self.hits_singularity(xs[:, None])]
            v = self.values(xs[:, None])
            i = int(np.argmin(v))
            lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, xs.size - 1)]
            best = float(v[i])
            if hi > lo:
                res = optimize.minimize_scalar(lambda x: float(self.values(np.array([[x]]))[0]),
                                               bounds=(lo, hi), method='bounded', options={'xatol': 1e-12})
                if res.success and np.isfinite(res.fun): best = min(best, float(res.fun))
            return best
        u = np.linspace(-r, r, 129)
        P = np.stack(np.meshgrid(u, u, indexing='ij'), axis=-1).reshape(-1, 2)
        P = P[np.sum(P * P, axis=1) <= r * r] + c
        P = P[~self.hits_singularity(P)]
        return float(np.min(self.values(P)))

    # ---------------------------------------------------------------- descriptors
    @staticmethod
    def from_descriptor(d, n=None):
        """ Builds a function from a (nested) config descriptor.

        >>> f = AnalyticFunction.from_descriptor({'kind': 'Sum', 'base': {'kind': 'NegLogAbs'},
        ...     'bounded_part': {'kind': 'BoundedSine', 'amplitude': 0.5, 'frequency': 3}})
        >>> f.kind, f.bounded_part.params['frequency'], f.is_BLO
        ('Sum', 3.0, True)
        >>> AnalyticFunction.from_descriptor(f.to_descriptor()).to_descriptor() == f.to_descriptor()
        True
        """
        if not isinstance(d, dict) or 'kind' not in d: raise InputError('function descriptor needs a kind')
        d = dict(d)
        n = d.pop('n', n if n is not None else 1)
        kind = d.pop('kind')
        base = d.pop('base', None)
        bounded = d.pop('bounded_part', None)
        if base is not None: base = AnalyticFunction.from_descriptor(base, n)
        if bounded is not None: bounded = AnalyticFunction.from_descriptor(bounded, n)
        return AnalyticFunction(kind, n=n, base=base, bounded_part=bounded, **d)

    def to_descriptor(self):
        d = {'kind': self.kind, 'n': self.n}
        for k, v in self.params.items(): d[k] = list(v) if isinstance(v, tuple) else v
        if self.base is not None: d['base'] = self.base.to_descriptor()
        if self.bounded_part is not None: d['bounded_part'] = self.bounded_part.to_descriptor()
        return d

    def label(self):
        """ Short human readable name, e.g. ``Sum(NegLogAbs,BoundedSine)``."""
        inner = [f.label() for f in (self.base, self.bounded_part) if f is not None]
        return self.kind + ('(%s)' % ','.join(inner) if inner else '')


class _Ball:
    def __init__(self, center, radius): self.center, self.radius = center, radius


def _gauss_1d(a, lo, hi):
    """ Per-axis integrals of exp(-x^2/(4a)); erfc on one-signed cells keeps far cells accurate."""
    s = 2 * math.sqrt(a)
    k = math.sqrt(math.pi * a)
    pos = k * (special.erfc(lo / s) - special.erfc(hi / s))
    neg = k * (special.erfc(-hi / s) - special.erfc(-lo / s))
    mid = k * (special.erf(hi / s) - special.erf(lo / s))
    return np.where(lo >= 0, pos, np.where(hi <= 0, neg, mid))


def _radial_1d(kind, p, lo, hi):
    if kind == 'NegLogAbs': F = lambda x: x - special.xlogy(x, np.abs(x))
    elif kind == 'LogAbs': F = lambda x: special.xlogy(x, np.abs(x)) - x
    else:
        e = 1 - p['alpha']
        F = lambda x: np.sign(x) * np.abs(x) ** e / e
    return F(hi) - F(lo)


def _quadrant_boxes(lo, hi):
    """ Splits a 2-D box at the axes into pieces mirrored into the closed first quadrant."""
    axes = []
    for a, b in zip(lo, hi):
        parts = [(a, 0.0), (0.0, b)] if a < 0 < b else [(a, b)]
        axes.append([(min(abs(u), abs(v)), max(abs(u), abs(v))) for u, v in parts])
    return [((x[0], y[0]), (x[1], y[1])) for x in axes[0] for y in axes[1]]


def _quadrant_sum(C, a, b):
    """ Inclusion-exclusion of corner integrals ``C(X, Y)`` over ``[0, X] x [0, Y]``."""
    (x0, y0), (x1, y1) = a, b
    return C(x1, y1) - C(x0, y1) - C(x1, y0) + C(x0, y0)


def _log_corner(X, Y):
    """ Integral of ln(x^2 + y^2) over [0, X] x [0, Y]."""
    if X == 0 or Y == 0: return 0.0
    return (X * Y * (math.log(X * X + Y * Y) - 3) + X * X * math.atan2(Y, X) + Y * Y * math.atan2(X, Y))


def _polar_corner(G, X, Y, kinks):
    """ Integral of a radial function over [0, X] x [0, Y]; ``G`` is its radial antiderivative of r*phi(r)."""
    if X == 0 or Y == 0: return 0.0
    th = math.atan2(Y, X)
    pts1 = [math.acos(X / k) for k in kinks if X < k and math.acos(X / k) < th]
    pts2 = [math.asin(Y / k) for k in kinks if Y < k and math.asin(Y / k) > th]
    v1 = integrate.quad(lambda t: G(X / math.cos(t)), 0, th, points=pts1 or None, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
    v2 = integrate.quad(lambda t: G(Y / math.sin(t)), th, 0.5 * math.pi, points=pts2 or None, epsabs=1e-15,
                        epsrel=1e-13, limit=200)[0]
    return v1 + v2


def _sine_infimum(A, w, a, b):
    if A == 0: return 0.0
    target = 1.5 * math.pi if A > 0 else 0.5 * math.pi  # sin = -1 for A > 0, +1 for A < 0
    k = math.ceil((w * a - target) / (2 * math.pi))
    if (target + 2 * math.pi * k) / w <= b: return -abs(A)
    return min(A * math.sin(w * a), A * math.sin(w * b))


def neglog_case(a, b):
    """ Which closed-form case of the -ln|x| interval defect applies to (a, b): ``'i'``, ``'ii'`` or ``'iii'``.

    >>> neglog_case(0, 1), neglog_case(-2, -1), neglog_case(-1, 3)
    ('i', 'ii', 'iii')
    """
    if not a < b: raise InputError('interval needs a < b, got (%r, %r)' % (a, b))
    return 'i' if a >= 0 else 'ii' if b <= 0 else 'iii'


def neglog_interval_defect(a, b):
    """ Exact mean minus essential infimum of ``f = -ln|x|`` on the interval (a, b).

    Three cases: ``0 <= a < b`` gives ``1 - ln(b/a) / (b/a - 1)`` (and exactly 1 when a = 0);
    ``a < b <= 0`` follows by the even symmetry; ``a < 0 < b`` gives ``1 + ln R / (1 + R)`` with R the
    ratio of the longer to the shorter side of the origin.

    Parameters
    ----------
    a, b : float
        interval ends, ``a < b``, not both zero

    Returns
    -------
    float

    Examples
    --------
    >>> neglog_interval_defect(0, 2.5)
    1.0
    >>> round(neglog_interval_defect(1, math.e), 5)
    0.41802
    >>> neglog_interval_defect(-3, 3)
    1.0
    >>> neglog_interval_defect(-2, -1) == neglog_interval_defect(1, 2)
    True
    >>> neglog_interval_defect(1, 1)
    Traceback (most recent call last):
    ...
    InputError: interval needs a < b, got (1, 1)
    """
    case = neglog_case(a, b)
    if case == 'ii': return neglog_interval_defect(-b, -a)
    if case == 'i':
        if a == 0: return 1.0
        d = (b - a) / a  # b/a - 1
        return 1.0 - math.log1p(d) / d
    R = max(-a, b) / min(-a, b)
    return 1.0 + math.log(R) / (1.0 + R)


def neglog_blo_norm_oracle():
    """ BLO norm of ``-ln|x|`` on the line: the largest of the three interval cases.

    Case (i) never exceeds 1; the straddling case ``1 + ln r / (1 + r)``, ``r >= 1``, is maximized by golden
    section search.

    >>> v = neglog_blo_norm_oracle(); round(v, 4), 1 < v <= 2
    (1.2785, True)
    """
    res = optimize.minimize_scalar(lambda r: -(1.0 + math.log(r) / (1.0 + r)), bracket=(1.0, 3.0, 20.0),
                                   method='golden', tol=1e-10)
    logger.debug('oracle optimum r=%.12g value=%.15g', res.x, -res.fun)
    return max(1.0, float(-res.fun))


def neglog_blo_norm_dense(npts=10 ** 6, r_max=1e3):
    """ Dense-grid cross-check of ``neglog_blo_norm_oracle()`` over log-spaced ratios in [1, r_max]."""
    r = np.exp(np.linspace(0.0, math.log(r_max), npts))
    return max(1.0, float(np.max(1.0 + np.log(r) / (1.0 + r))))
