import math
import numpy as np
import pandas as pd
from scipy import ndimage
from numpy.lib.stride_tricks import sliding_window_view

try: from bloheat.AnalyticFunction import *  # production:  if bloheat package is installed
except ImportError:   from AnalyticFunction import *  # development: if not installed and running from source

logger = logging.getLogger(__name__)

_TOL = 1e-12  # relative slack of ball membership and admissibility tests


class Domain(SpecPrinter):
    """ Cell-centered grid on the box ``[-L, L]^n``.

    Cell centers along each axis are ``x_k = -L + (k + 1/2) h`` with ``h = 2L/N``. ``N`` is even, so no cell center
    sits on a coordinate hyperplane.

    Examples
    --------
    >>> d = Domain(n=1, L=1, N=4); d.h, d.centers().tolist()
    (0.5, [-0.75, -0.25, 0.25, 0.75])
    >>> Domain(n=2, L=1, N=4).points().shape
    (16, 2)
    >>> Domain(N=5)
    Traceback (most recent call last):
    ...
    InputError: cells_per_axis must be an even positive integer, got 5
    """
    def __init__(self, n=1, L=1.0, N=64):
        if n not in (1, 2): raise InputError('dimension n must be 1 or 2, got %r' % (n,))
        if not Util.is_number(L) or not L > 0: raise InputError('half_width must be positive, got %r' % (L,))
        if isinstance(N, bool) or not isinstance(N, (int, np.integer)) or N <= 0 or N % 2:
            raise InputError('cells_per_axis must be an even positive integer, got %r' % (N,))
        self.n, self.L, self.N = n, float(L), int(N)

    @property
    def h(self): return 2 * self.L / self.N

    @property
    def shape(self): return (self.N,) * self.n

    @property
    def size(self): return self.N ** self.n

    def centers(self):
        """ Cell centers along one axis."""
        return -self.L + (np.arange(self.N) + 0.5) * self.h

    def edges(self):
        return -self.L + np.arange(self.N + 1) * self.h

    def points(self):
        """ All cell centers as an ``(N^n, n)`` array, C order (last axis fastest)."""
        c = self.centers()
        if self.n == 1: return c[:, None]
        return np.stack(np.meshgrid(c, c, indexing='ij'), axis=-1).reshape(-1, 2)

    def cells(self):
        """ ``(lo, hi)`` corner arrays of every cell, each of shape ``(N^n, n)``, same order as ``points()``."""
        P = self.points()
        return P - 0.5 * self.h, P + 0.5 * self.h

    def refine(self):
        """ The same box with twice as many cells per axis.

        >>> Domain(n=2, L=2, N=8).refine().N
        16
        """
        return Domain(self.n, self.L, 2 * self.N)

    def index_of(self, x):
        """ Multi-index of the cell containing ``x`` (clipped to the box)."""
        x = Util.to_point(x, self.n)
        return tuple(int(min(max(math.floor((xi + self.L) / self.h), 0), self.N - 1)) for xi in x)


class Ball(SpecPrinter):
    """ Closed ball (an interval when n = 1).

    >>> b = Ball(0.25, 0.5); b.center, b.radius, b.interval
    ((0.25,), 0.5, (-0.25, 0.75))
    >>> Ball.from_interval(-1, 3).center
    (1.0,)
    """
    def __init__(self, center, radius):
        if not Util.is_number(radius) or not radius > 0: raise InputError('ball radius must be positive, got %r' % (radius,))
        self.center, self.radius = Util.to_point(center), float(radius)

    @staticmethod
    def from_interval(a, b):
        if not a < b: raise InputError('interval needs a < b, got (%r, %r)' % (a, b))
        return Ball(0.5 * (a + b), 0.5 * (b - a))

    @property
    def n(self): return len(self.center)

    @property
    def interval(self):
        if self.n != 1: raise InputError('interval is defined for n = 1 balls only')
        return (self.center[0] - self.radius, self.center[0] + self.radius)

    @property
    def volume(self):
        return 2 * self.radius if self.n == 1 else math.pi * self.radius ** 2

    def contains(self, points):
        """ Membership mask of ``points`` (shape ``(m, n)``)."""
        P = np.asarray(points, dtype=float).reshape(-1, self.n)
        d2 = np.sum((P - np.asarray(self.center)) ** 2, axis=1)
        return d2 <= (self.radius * (1 + _TOL)) ** 2

    def as_dict(self):
        return {'center': list(self.center), 'radius': self.radius}


class GridFunction(SpecPrinter):
    """ Values on the cells of a ``Domain``.

    Parameters
    ----------
    domain : Domain
    values : array_like
        ``N^n`` values, flat in ``Domain.points()`` order or shaped ``(N,)*n``
    provenance : str
        where the values came from (``sample:NegLogAbs``, ``heat(t=0.01)``, ...)
    valid : array_like of bool, optional
        cells whose values are trusted (operator outputs near the box edge are not); all cells by default
    source : AnalyticFunction, optional
        closed-form origin, enables exact mode

    Values on the valid region must be finite.
    """
    def __init__(self, domain, values, provenance='', valid=None, source=None):
        v = np.asarray(values, dtype=float)
        if v.size != domain.size: raise InputError('values hold %d entries, domain needs %d' % (v.size, domain.size))
        self.domain, self.provenance, self.source = domain, provenance, source
        self._values = v.reshape(domain.shape)
        self._valid = np.ones(domain.shape, dtype=bool) if valid is None else np.asarray(valid, dtype=bool).reshape(domain.shape)
        if not np.all(np.isfinite(self._values[self._valid])):
            raise NumericError('non-finite values in %s' % (provenance or 'grid function'))
        self._cell_means = None

    def __getstate__(self):
        return {'domain': self.domain, 'provenance': self.provenance}

    @property
    def values(self): return self._values

    @property
    def valid(self): return self._valid

    @property
    def n(self): return self.domain.n

    def flat(self): return self._values.ravel()

    def with_values(self, values, provenance, valid=None):
        """ A new function on the same domain (the valid mask carries over unless given)."""
        return GridFunction(self.domain, values, provenance, self._valid if valid is None else valid)

    def at(self, x):
        return float(self._values[self.domain.index_of(x)])

    def cell_means(self):
        """ Exact cell averages of ``source`` (cached); the samples themselves when there is no source."""
        if self.source is None: return self._values
        if self._cell_means is None:
            lo, hi = self.domain.cells()
            self._cell_means = (self.source.cell_integrals(lo, hi) / self.domain.h ** self.n).reshape(self.domain.shape)
        return self._cell_means


def sample(f, d):
    """ Samples ``f`` at every cell center of ``d``.

    >>> sample(AnalyticFunction('Linear'), Domain(1, 1, 4)).flat().tolist()
    [-0.75, -0.25, 0.25, 0.75]
    >>> v = sample(AnalyticFunction('NegLogAbs'), Domain(1, 1, 4)).flat()
    >>> bool(np.allclose(v, [math.log(4/3), math.log(4), math.log(4), math.log(4/3)]))
    True
    """
    P = d.points()
    if f.n != d.n: raise InputError('function of dimension %d on a domain of dimension %d' % (f.n, d.n))
    if np.any(f.hits_singularity(P)):
        raise InputError('cell centers intersect the singular set of %s' % f.label())
    logger.debug('sample %s on N=%d^%d', f.label(), d.N, d.n)
    return GridFunction(d, f.values(P), 'sample:' + f.label(), source=f)


def cell_averages(f, d):
    """ Exact cell averages of ``f`` on ``d`` (integral over the cell divided by its volume).

    >>> g = cell_averages(AnalyticFunction('NegLogAbs'), Domain(1, 1, 2)); g.flat().tolist()
    [1.0, 1.0]
    """
    if f.n != d.n: raise InputError('function of dimension %d on a domain of dimension %d' % (f.n, d.n))
    lo, hi = d.cells()
    return GridFunction(d, f.cell_integrals(lo, hi) / d.h ** d.n, 'cell_averages:' + f.label(), source=f)


def _member_mask(g, b):
    m = b.contains(g.domain.points()).reshape(g.domain.shape) & g.valid
    if not m.any(): raise InputError('ball contains no samples')
    return m


def _exact_function(g):
    if isinstance(g, AnalyticFunction): return g
    if isinstance(g, GridFunction) and g.source is not None: return g.source
    raise InputError('exact mode needs an analytic source')


def mean_over_ball(g, b, mode='grid'):
    """ Average of ``g`` over the ball ``b``.

    Grid mode averages the values at the cell centers inside ``b``. Exact mode integrates the analytic source:
    the interval mean in 1-D; in 2-D the closed-form disk mean where one exists, otherwise the exact cell averages
    of the member cells. An ``AnalyticFunction`` argument always means exact mode.

    >>> d = Domain(1, 1, 64); g = sample(AnalyticFunction('Linear'), d)
    >>> round(mean_over_ball(g, Ball.from_interval(-0.5, 0.25)), 12)
    -0.125
    >>> f = AnalyticFunction('NegLogAbs')
    >>> abs(mean_over_ball(f, Ball.from_interval(0, 0.5)) - (1 - math.log(0.5))) < 1e-14
    True
    """
    if isinstance(g, AnalyticFunction) or mode == 'exact':
        f = _exact_function(g)
        if f.n == 1: return f.ball_mean(b)
        try:
            return f.ball_mean(b)
        except InputError:
            if not isinstance(g, GridFunction): raise
            return float(np.mean(g.cell_means()[_member_mask(g, b)]))
    if mode != 'grid': raise InputError('mode must be grid or exact, got %r' % (mode,))
    return float(np.mean(g.values[_member_mask(g, b)]))


def essinf_over_ball(g, b, mode='grid'):
    """ Essential infimum of ``g`` on ``b``: the minimum over member cell centers (grid) or the closed-form
    infimum of the source (exact; the grid minimum in 2-D when no closed form exists).

    >>> g = sample(AnalyticFunction('NegLogAbs'), Domain(1, 1, 256))
    >>> abs(essinf_over_ball(g, Ball.from_interval(-0.5, 0.5)) + math.log(0.5)) < 0.01
    True
    """
    if isinstance(g, AnalyticFunction) or mode == 'exact':
        f = _exact_function(g)
        if f.n == 1 or not isinstance(g, GridFunction): return f.infimum_on_ball(b)
        return float(np.min(g.values[_member_mask(g, b)]))
    if mode != 'grid': raise InputError('mode must be grid or exact, got %r' % (mode,))
    return float(np.min(g.values[_member_mask(g, b)]))


def dyadic_radii(d, min_multiple=2, max_fraction=0.5):
    """ Dyadic radius ladder ``{2h, 4h, ...}`` up to ``max_fraction * L``.

    >>> dyadic_radii(Domain(1, 1, 64))
    (0.0625, 0.125, 0.25, 0.5)
    """
    r, out = min_multiple * d.h, []
    while r <= max_fraction * d.L * (1 + _TOL):
        out.append(r)
        r *= 2
    if not out: raise InputError('no dyadic radius fits; enlarge domain')
    return tuple(out)


def admissible_centers(d, radius, margin=0.0):
    """ Mask of cell centers whose ball of ``radius``, widened by half a cell, stays strictly inside the box with
    ``margin`` to spare.

    The half cell keeps every member cell of the ball off the boundary, so a radius of 0 leaves out the outer ring.

    >>> admissible_centers(Domain(1, 1, 8), 0.25).tolist()
    [False, False, True, True, True, True, False, False]
    >>> int(admissible_centers(Domain(2, 1, 8), 0.0).sum())
    36
    """
    c = d.centers()
    ok1 = (d.L - np.abs(c)) - (radius + 0.5 * d.h + margin) > _TOL * d.L
    if d.n == 1: return ok1
    return ok1[:, None] & ok1[None, :]


def enumerate_balls(d, radii, margin=0.0, max_fraction=1.0):
    """ Every admissible ball: centers at cell centers, radius from ``radii``, clear of the boundary by ``margin``
    (see ``admissible_centers``).

    Ordered by radius (ascending), then by center in ``Domain.points()`` order.

    >>> len(enumerate_balls(Domain(1, 1, 4), {0.25}))
    2
    >>> len(enumerate_balls(Domain(1, 1, 8), {0.125, 0.25}))
    10
    >>> enumerate_balls(Domain(1, 1, 4), set())
    Traceback (most recent call last):
    ...
    InputError: radius set is empty
    """
    radii = sorted(float(r) for r in radii)
    if not radii: raise InputError('radius set is empty')
    if radii[0] <= 0: raise InputError('radii must be positive')
    if radii[-1] > d.L * max_fraction * (1 + _TOL):
        raise InputError('radius %g exceeds %g * L' % (radii[-1], max_fraction))
    P, out = d.points(), []
    for r in radii:
        for p in P[admissible_centers(d, r, margin).ravel()]:
            out.append(Ball(p, r))
    if not out: raise InputError('no admissible balls; enlarge domain')
    logger.debug('enumerated %d balls over %d radii', len(out), len(radii))
    return out


def ball_footprint(d, radius):
    """ Reach in cells and boolean footprint of a ball of ``radius`` centered on a cell."""
    j = int(math.floor(radius / d.h * (1 + _TOL)))
    if d.n == 1: return j, np.ones(2 * j + 1, dtype=bool)
    k = np.arange(-j, j + 1) * d.h
    return j, (k[:, None] ** 2 + k[None, :] ** 2) <= (radius * (1 + _TOL)) ** 2


def _windowed(values, j, fp, idx):
    """ Member values of the balls centered at flat indices ``idx``, one row per ball."""
    if values.ndim == 1:
        w = sliding_window_view(values, 2 * j + 1)
        return w[idx - j]
    N = values.shape[1]
    w = sliding_window_view(values, (2 * j + 1, 2 * j + 1))
    r, c = np.divmod(idx, N)
    return w[r - j, c - j][:, fp]


def ball_scan(g, radius, margin=0.0, mode='grid', mad=False):
    """ Mean and minimum over every admissible ball of one radius at once.

    Sliding-window sums with the ball footprint (``scipy.ndimage``) give the means, ``minimum_filter`` the minima.
    Membership is the same as ``mean_over_ball``: cell centers within the radius. Exact mode in 1-D replaces
    them by the closed-form interval means and infima; exact mode in 2-D takes means of the exact cell averages.

    Parameters
    ----------
    g : GridFunction
    radius : float
    margin : float
        extra clearance from the box boundary
    mode : {'grid', 'exact'}
    mad : bool
        also compute the mean absolute deviation from the ball mean (column ``mad``)

    Returns
    -------
    pandas.DataFrame
        one row per admissible ball: ``x`` (and ``y``), ``radius``, ``mean``, ``min``, ``count`` [, ``mad``]

    Examples
    --------
    >>> d = Domain(1, 1, 8); g = sample(AnalyticFunction('Linear'), d)
    >>> t = ball_scan(g, 0.25); t[['x', 'mean', 'min']].values.tolist()
    [[-0.375, -0.375, -0.625], [-0.125, -0.125, -0.375], [0.125, 0.125, -0.125], [0.375, 0.375, 0.125]]
    """
    d = g.domain
    if mode not in ('grid', 'exact'): raise InputError('mode must be grid or exact, got %r' % (mode,))
    ok = admissible_centers(d, radius, margin) & eroded_valid(g, radius)
    idx = np.flatnonzero(ok.ravel())
    if idx.size == 0: raise InputError('no admissible balls; enlarge domain')
    j, fp = ball_footprint(d, radius)
    count = int(fp.sum())
    vals = g.values
    if mode == 'exact' and g.source is None: raise InputError('exact mode needs an analytic source')
    base = g.cell_means() if mode == 'exact' else vals
    if d.n == 1:
        mean = ndimage.correlate1d(base, np.ones(2 * j + 1), mode='nearest').ravel()[idx] / count
        low = ndimage.minimum_filter1d(vals, 2 * j + 1, mode='nearest').ravel()[idx]
    else:
        mean = ndimage.correlate(base, fp.astype(float), mode='constant').ravel()[idx] / count
        low = ndimage.minimum_filter(vals, footprint=fp, mode='constant', cval=np.inf).ravel()[idx]
    P = d.points()[idx]
    if mode == 'exact' and d.n == 1:
        f, c = g.source, P[:, 0]
        mean = f.cell_integrals((c - radius)[:, None], (c + radius)[:, None]) / (2 * radius)
        low = np.array([f.infimum_on_ball(Ball(x, radius)) for x in c])
    cols = {'x': P[:, 0]}
    if d.n == 2: cols['y'] = P[:, 1]
    cols.update(radius=radius, mean=mean, min=low, count=count)
    if mad:
        out = np.empty(idx.size)
        step = max(1, 2 ** 22 // count)
        for s in range(0, idx.size, step):
            w = _windowed(base, j, fp, idx[s:s + step])
            out[s:s + step] = np.mean(np.abs(w - mean[s:s + step, None]), axis=1)
        cols['mad'] = out
    logger.debug('ball scan r=%g: %d balls of %d cells', radius, idx.size, count)
    return pd.DataFrame(cols)


def eroded_valid(g, radius):
    """ Centers whose whole ball lies in the valid region of ``g``."""
    if g.valid.all(): return np.ones(g.domain.shape, dtype=bool)
    j, fp = ball_footprint(g.domain, radius)
    if g.n == 1: return ndimage.minimum_filter1d(g.valid.astype(np.uint8), 2 * j + 1, mode='constant', cval=0) > 0
    return ndimage.binary_erosion(g.valid, structure=fp, border_value=0)


def ball_of_row(row, n):
    """ The ``Ball`` a ``ball_scan`` row describes."""
    return Ball((row['x'],) if n == 1 else (row['x'], row['y']), row['radius'])


def mean_field(g, radius, margin=0.0, mode='grid', absolute=False):
    """ Ball means of one radius at every admissible center, as an array shaped like the domain (``-inf`` elsewhere).

    ``absolute`` averages ``|g|`` instead of ``g``. Exact mode in 1-D integrates the analytic source over each interval.
    """
    d = g.domain
    ok = admissible_centers(d, radius, margin) & eroded_valid(g, radius)
    out = np.full(d.shape, -np.inf)
    if not ok.any(): return out
    if mode == 'exact' and g.source is None: raise InputError('exact mode needs an analytic source')
    if mode == 'exact' and d.n == 1 and not absolute:
        c = d.centers()[ok]
        out[ok] = g.source.cell_integrals((c - radius)[:, None], (c + radius)[:, None]) / (2 * radius)
        return out
    base = g.cell_means() if mode == 'exact' else g.values
    if absolute: base = np.abs(base)
    j, fp = ball_footprint(d, radius)
    if d.n == 1: m = ndimage.correlate1d(base, np.ones(2 * j + 1), mode='nearest') / fp.sum()
    else: m = ndimage.correlate(base, fp.astype(float), mode='constant') / fp.sum()
    out[ok] = m[ok]
    return out


def linear_radii(d, max_fraction=0.5):
    """ Every multiple of the spacing up to ``max_fraction * L``; the rich family of maximal-function studies.

    >>> linear_radii(Domain(1, 1, 8))
    (0.25, 0.5)
    """
    k = int(math.floor(max_fraction * d.L / d.h * (1 + _TOL)))
    if k < 1: raise InputError('no radius fits; enlarge domain')
    return tuple(d.h * i for i in range(1, k + 1))
