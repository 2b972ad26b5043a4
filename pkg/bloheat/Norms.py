import math
import numpy as np
import pandas as pd
from scipy import integrate, ndimage

try: from bloheat.HeatSemigroup import *  # production:  if bloheat package is installed
except ImportError:   from HeatSemigroup import *  # development: if not installed and running from source

logger = logging.getLogger(__name__)

LATTICE_POINTS = 17  # per axis, sqrt(t)-ball infimum lattice


class NormEstimate(ResultSpec):
    """ A sup-over-balls (or over centers and times) functional with the witness that attains it.

    ``witness`` is a ``dict``: ``{'center': [...], 'radius': r}`` for ball functionals and ``{'x': [...], 't': t}``
    for heat functionals. The estimate is a lower bound of the supremum over all balls of the space.
    """
    def __init__(self, name, value, witness, mode, **kwargs):
        if not value >= -1e-12: raise NumericError('%s came out negative: %r' % (name, value))
        super().__init__(name=name, value=float(max(value, 0.0)), witness=witness, mode=mode, **kwargs)


def ball_table(g, radii=None, margin=0.0, mode='grid', mad=False):
    """ Per-ball means, minima and defects over every admissible ball of every radius (one ``ball_scan`` per radius).

    Radii default to the dyadic ladder of the domain. Row order is the enumeration order of ``enumerate_balls``.

    >>> g = sample(AnalyticFunction('Constant', c=2), Domain(1, 1, 16))
    >>> t = ball_table(g); len(t), float(t['defect'].max())
    (16, 0.0)
    """
    radii = dyadic_radii(g.domain) if radii is None else sorted(radii)
    parts = []
    for r in radii:
        try:
            parts.append(ball_scan(g, r, margin=margin, mode=mode, mad=mad))
        except InputError as e:
            logger.debug('radius %g skipped: %s', r, e)
    if not parts: raise InputError('no admissible balls; enlarge domain')
    t = pd.concat(parts, ignore_index=True)
    t['defect'] = t['mean'] - t['min']
    return t


def _witness_row(t, col):
    i = int(np.argmax(t[col].values))  # first maximum: lowest enumeration index wins
    return i, t.iloc[i]


def _ball_defect(f, b, mode):
    return mean_over_ball(f, b, mode) - essinf_over_ball(f, b, mode)


def _exact_mad(f, b):
    """ Exact mean absolute deviation of an analytic function from its mean on an interval."""
    if f.n != 1: raise InputError('exact mean absolute deviation is available for n = 1 only')
    a, c = b.interval
    m = f.ball_mean(b)
    pts = [v for v in f.breakpoints() if a < v < c]
    val, err = integrate.quad(lambda y: abs(f.values(np.array([[y]]))[0] - m), a, c, points=pts or None, limit=400)
    return val / (c - a)


def _ball_mad(f, b, mode):
    if isinstance(f, AnalyticFunction): return _exact_mad(f, b)
    m = mean_over_ball(f, b, mode)
    mask = b.contains(f.domain.points()).reshape(f.domain.shape) & f.valid
    vals = f.cell_means() if mode == 'exact' else f.values
    return float(np.mean(np.abs(vals[mask] - m)))


def _per_ball(name, fun, f, balls, mode):
    if not balls: raise InputError('ball list is empty')
    vals = Util.pmap(lambda b: fun(f, b, mode), balls)
    i = int(np.argmax(vals))
    return NormEstimate(name, vals[i], balls[i].as_dict(), mode, ball_count=len(balls))


def blo_norm(f, balls=None, mode='grid', radii=None, margin=0.0):
    """ BLO norm estimate: the largest ball mean minus ball infimum.

    Parameters
    ----------
    f : GridFunction, AnalyticFunction
        an ``AnalyticFunction`` is evaluated in exact mode and needs an explicit ball list
    balls : list of Ball, optional
        the ball family; if omitted, every admissible ball of ``radii`` (default dyadic) is scanned at once
    mode : {'grid', 'exact'}
    radii : iterable of float, optional
    margin : float

    Returns
    -------
    NormEstimate

    Examples
    --------
    >>> d = Domain(1, 4, 256); g = sample(AnalyticFunction('Constant', c=5), d)
    >>> blo_norm(g).value
    0.0
    >>> f = AnalyticFunction('NegLogAbs')
    >>> round(blo_norm(f, [Ball.from_interval(0, 1), Ball.from_interval(-1, 3)], mode='exact').value, 6)
    1.274653
    >>> blo_norm(f, [])
    Traceback (most recent call last):
    ...
    InputError: ball list is empty
    """
    if isinstance(f, AnalyticFunction): mode = 'exact'
    if balls is not None or isinstance(f, AnalyticFunction):
        est = _per_ball('blo_norm', _ball_defect, f, list(balls or []), mode)
    else:
        t = ball_table(f, radii, margin, mode)
        i, row = _witness_row(t, 'defect')
        est = NormEstimate('blo_norm', row['defect'], ball_of_row(row, f.n).as_dict(), mode, ball_count=len(t))
    logger.info('blo_norm %.6g over %d balls (%s)', est.value, est.ball_count, mode)
    return est


def bmo_norm(f, balls=None, mode='grid', radii=None, margin=0.0):
    """ BMO norm estimate: the largest mean absolute deviation from the ball mean.

    >>> d = Domain(1, 4, 256)
    >>> b1 = bmo_norm(sample(AnalyticFunction('NegLogAbs'), d)).value
    >>> b2 = bmo_norm(sample(AnalyticFunction('LogAbs'), d)).value
    >>> abs(b1 - b2) < 1e-12
    True
    """
    if isinstance(f, AnalyticFunction): mode = 'exact'
    if balls is not None or isinstance(f, AnalyticFunction):
        est = _per_ball('bmo_norm', _ball_mad, f, list(balls or []), mode)
    else:
        t = ball_table(f, radii, margin, mode, mad=True)
        i, row = _witness_row(t, 'mad')
        est = NormEstimate('bmo_norm', row['mad'], ball_of_row(row, f.n).as_dict(), mode, ball_count=len(t))
    logger.info('bmo_norm %.6g over %d balls (%s)', est.value, est.ball_count, mode)
    return est


def interval_defect(f, a, b, mode='exact', domain=None):
    """ Mean minus infimum of ``f`` on the single interval ``(a, b)``.

    Exact mode uses the closed-form interval mean and infimum; grid mode samples ``f`` on ``domain`` (or uses the
    given ``GridFunction``).

    >>> f = AnalyticFunction('NegLogAbs')
    >>> abs(interval_defect(f, 1, math.e) - neglog_interval_defect(1, math.e)) < 1e-12
    True
    """
    ball = Ball.from_interval(a, b)
    if mode == 'exact':
        src = f.source if isinstance(f, GridFunction) else f
        return src.ball_mean(ball) - src.infimum_on_ball(ball)
    g = f if isinstance(f, GridFunction) else sample(f, domain)
    return _ball_defect(g, ball, 'grid')


def ball_lattice(x, radius, n):
    """ Sample set of the ball ``B(x, radius)``: ``LATTICE_POINTS`` per axis, cut to the ball; row ``c`` is ``x``.

    >>> P, c = ball_lattice(0.5, 0.25, 1); len(P), float(P[c][0])
    (17, 0.5)
    """
    x = np.asarray(Util.to_point(x, n))
    u = np.linspace(-1.0, 1.0, LATTICE_POINTS) * radius
    if n == 1: off = u[:, None]
    else:
        off = np.stack(np.meshgrid(u, u, indexing='ij'), axis=-1).reshape(-1, 2)
        off = off[np.sum(off * off, axis=1) <= radius * radius * (1 + 1e-12)]
    c = int(np.flatnonzero(np.all(off == 0, axis=1))[0])
    return x + off, c


def heat_defect_detail(f, x, t, p=None):
    """ ``(defect, z)``: ``W_t f(x)`` minus the minimum of ``W_t f`` on the ``sqrt(t)``-ball lattice, and the minimizer."""
    t = float(t)
    if not t > 0: raise InputError('t must be positive, got %r' % (t,))
    P, c = ball_lattice(x, math.sqrt(t), f.n)
    vals = apply_heat_points(f, P, t, p)
    j = int(np.argmin(vals))
    return float(vals[c] - vals[j]), tuple(float(v) for v in P[j])


def heat_defect(f, x, t, p=None):
    """ ``W_t f(x) - inf_{z in B(x, sqrt t)} W_t f(z)``, the infimum taken over a 17-point-per-axis lattice that
    contains ``x``; never negative.

    >>> heat_defect(AnalyticFunction('Constant', c=-1), 0.3, 0.5) < 1e-14
    True
    >>> a = heat_defect(AnalyticFunction('NegLogAbs'), 0, 1e-2); b = heat_defect(AnalyticFunction('NegLogAbs'), 0, 1)
    >>> abs(a - b) < 1e-8
    True
    """
    return heat_defect_detail(f, x, t, p)[0]


def heat_blo_functional(f, tg, centers, p=None):
    """ Largest ``heat_defect`` over the (center, time) product grid.

    Parameters
    ----------
    f : AnalyticFunction
    tg : TimeGrid, iterable of float
    centers : iterable of points
    p : HeatParams, optional

    Returns
    -------
    NormEstimate
        witness ``{'x': center, 't': t}``; ties go to the first pair in center-major order
    """
    times = list(tg)
    pairs = [(Util.to_point(c, f.n), t) for c in centers for t in times]
    if not pairs: raise InputError('no admissible (center, t) pairs')
    vals = Util.pmap(lambda ct: heat_defect(f, ct[0], ct[1], p), pairs)
    i = int(np.argmax(vals))
    est = NormEstimate('heat_blo_functional', vals[i], {'x': list(pairs[i][0]), 't': pairs[i][1]}, 'analytic',
                       time_count=len(times), center_count=len(pairs) // len(times))
    logger.info('heat_blo_functional %.6g over %d pairs', est.value, len(pairs))
    return est


def heat_blo_functional_grid(g, tg, p=None, centers=None):
    """ Grid form of the heat functional: for every ``t``, ``W_t g`` on the grid minus its minimum over the
    ``sqrt(t)``-disk around each cell, maximized over the cells whose disk lies in the valid region.

    Times the grid cannot resolve are skipped. With ``centers`` the maximum runs only over the cells containing
    those points, the grid counterpart of the (center, time) product of ``heat_blo_functional``.

    >>> g = sample(AnalyticFunction('Constant', c=1), Domain(1, 2, 128))
    >>> heat_blo_functional_grid(g, TimeGrid(1e-3, 1e-2, 4)).value
    0.0
    """
    pick = None
    if centers is not None:
        pick = np.zeros(g.values.shape, dtype=bool)
        for c in centers: pick[g.domain.index_of(c)] = True
    best, count = None, 0
    for t in tg:
        try:
            u = apply_heat_grid(g, t, p)
        except InputError as e:
            logger.debug('t=%g skipped: %s', t, e)
            continue
        r = math.sqrt(t)
        j, fp = ball_footprint(g.domain, r)
        ok = eroded_valid(u, r)
        if pick is not None: ok = ok & pick
        if not ok.any(): continue
        if g.n == 1: low = ndimage.minimum_filter1d(u.values, 2 * j + 1, mode='nearest')
        else: low = ndimage.minimum_filter(u.values, footprint=fp, mode='nearest')
        dfc = np.where(ok, u.values - low, -np.inf)
        k = int(np.argmax(dfc))
        count += 1
        if best is None or dfc.flat[k] > best[0]:
            best = (float(dfc.flat[k]), g.domain.points()[k], t)
    if best is None: raise InputError('no admissible (center, t) pairs')
    return NormEstimate('heat_blo_functional_grid', best[0], {'x': best[1].tolist(), 't': best[2]}, 'grid',
                        time_count=count)


def perturbation_check(f, g, balls=None, mode='exact', domain=None, tol=1e-12):
    """ Checks ``||f - g||_BLO <= ||f||_BLO + 2 ||g||_inf`` on one ball family.

    Exact mode needs ``balls``; grid mode samples both functions on ``domain`` and scans the dyadic family when
    ``balls`` is omitted.

    >>> f, g = AnalyticFunction('NegLogAbs'), AnalyticFunction('Constant', c=0.75)
    >>> r = perturbation_check(f, g, [Ball.from_interval(-1, 3), Ball.from_interval(0.5, 2)])
    >>> r.passed, round(r.slack, 12)
    (True, 1.5)
    """
    if not f.is_BLO: raise InputError('perturbation_check needs a BLO function, got %s' % f.label())
    if not g.is_Linfty: raise InputError('perturbation_check needs a bounded perturbation, got %s' % g.label())
    diff = AnalyticFunction('Sum', n=f.n, base=f, bounded_part=g, weight=-1.0)
    if mode == 'exact':
        lhs, base = blo_norm(diff, balls, 'exact'), blo_norm(f, balls, 'exact')
    else:
        if domain is None: raise InputError('grid mode needs a domain')
        fg, gg = sample(f, domain), sample(g, domain)
        dg = GridFunction(domain, fg.values - gg.values, 'sample:' + diff.label(), source=diff)
        lhs, base = blo_norm(dg, balls, 'grid'), blo_norm(fg, balls, 'grid')
    rhs = base.value + 2 * g.sup_norm()
    return ResultSpec(name='perturbation_check', f=f.label(), g=g.label(), lhs=lhs.value, blo_f=base.value,
                      sup_g=g.sup_norm(), rhs=rhs, slack=rhs - lhs.value, passed=bool(lhs.value <= rhs + tol),
                      witness=lhs.witness, mode=mode)


def divergence_sequence(f, ks, cells_on_short_side=8):
    """ Mean minus infimum of ``f`` on the intervals ``(-1/k, 1)``, the infimum resolved on a lattice of spacing
    ``1 / (k * cells_on_short_side)`` aligned with the origin.

    For ``LogAbs`` the values grow like ``ln k`` without bound; the table is the report, never a norm.

    >>> t = divergence_sequence(AnalyticFunction('LogAbs'), [2, 4, 8])
    >>> bool(np.all(np.diff(t['defect']) > 0)), round(float(t['lattice_min'].iloc[0]), 12) == round(math.log(1 / 32), 12)
    (True, True)
    """
    if f.n != 1: raise InputError('divergence_sequence is defined for n = 1')
    rows = []
    for k in ks:
        if not k > 0: raise InputError('k must be positive, got %r' % (k,))
        ball = Ball.from_interval(-1.0 / k, 1.0)
        h = 1.0 / (k * cells_on_short_side)
        m = int(round((1.0 + 1.0 / k) / h))
        x = -1.0 / k + (np.arange(m) + 0.5) * h
        mean, low = f.ball_mean(ball), float(np.min(f.values(x[:, None])))
        rows.append({'k': k, 'mean': mean, 'lattice_min': low, 'defect': mean - low, 'spacing': h})
    return pd.DataFrame(rows)


def extension_drift(before, after):
    """ Relative change of a functional when its parameter range is extended (``Util.drift``)."""
    return Util.drift(before, after)
