import math
import numpy as np
import pandas as pd
from scipy import ndimage

try: from bloheat.Norms import *  # production:  if bloheat package is installed
except ImportError:   from Norms import *  # development: if not installed and running from source

logger = logging.getLogger(__name__)

OVERFLOW_GUARD = 700.0  # largest epsilon * |f| fed to exp
KAPPA = 2.0  # heat A1 constant <= KAPPA * maximal A1 constant
KAPPA_PRIME = {1: 6.0, 2: 13.0}  # maximal A1 constant <= KAPPA_PRIME[n] * heat A1 constant


class WeightFunction(SpecPrinter):
    """ The weight ``w = exp(epsilon * f)``.

    >>> w = WeightFunction(AnalyticFunction('NegLogAbs'), 0.5); round(w.evaluate(0.25), 12)
    2.0
    >>> WeightFunction(AnalyticFunction('Constant', c=1e4), 0.5).on(Domain(1, 1, 4))
    Traceback (most recent call last):
    ...
    NumericError: epsilon * max|f| = 5000 exceeds the overflow guard 700 for exp(0.5 * Constant)
    """
    def __init__(self, base, epsilon):
        if not Util.is_number(epsilon) or not epsilon > 0: raise InputError('epsilon must be positive, got %r' % (epsilon,))
        self.base, self.epsilon = base, float(epsilon)
        self.analytic = AnalyticFunction('ExpWeight', n=base.n, base=base, epsilon=self.epsilon)

    @property
    def n(self): return self.base.n

    def label(self):
        return 'exp(%g * %s)' % (self.epsilon, self.base.label())

    def evaluate(self, x):
        return self.analytic.evaluate(x)

    def on(self, d):
        """ Weight samples on ``d``; the overflow guard rejects ``epsilon * max|f| > 700``."""
        fg = sample(self.base, d)
        top = self.epsilon * float(np.max(np.abs(fg.values)))
        if top > OVERFLOW_GUARD:
            raise NumericError('epsilon * max|f| = %g exceeds the overflow guard %g for %s' % (top, OVERFLOW_GUARD, self.label()))
        return GridFunction(d, np.exp(self.epsilon * fg.values), 'sample:' + self.label(), source=self.analytic)


class A1Estimate(ResultSpec):
    """ An A1 constant ``sup_x (Mw)(x) / w(x)`` (or its heat analogue) with the point and ball or time attaining it."""
    def __init__(self, name, constant, witness_point, witness, mode, **kwargs):
        super().__init__(name=name, constant=float(constant), value=float(constant), witness_point=witness_point,
                         witness=witness, mode=mode, **kwargs)


class NFunctionalResult(ResultSpec):
    """ ``min_eps log(C0(eps)) / eps`` with the minimizing ``eps``, its ``C0`` and the full ``(eps, C0)`` table."""


def _balls_with(x, balls):
    x = Util.to_point(x)
    out = [b for b in balls if b.contains(np.array([x]))[0]]
    if not out: raise InputError('no admissible ball contains %s' % (x,))
    return out


def hl_maximal(w, x, balls_containing_x, mode='grid'):
    """ Hardy-Littlewood maximal function at ``x``: the largest average of ``|w|`` over the given balls containing ``x``.

    Balls not containing ``x`` are ignored. An ``AnalyticFunction`` is averaged exactly.

    >>> ind = AnalyticFunction('Indicator', center=0.0, radius=1.0)
    >>> hl_maximal(ind, 3.0, [Ball(1, 2), Ball(2, 1), Ball(3, 0.5)])
    0.5
    """
    balls = _balls_with(x, balls_containing_x)
    if isinstance(w, GridFunction):
        a = w.with_values(np.abs(w.values), 'abs:' + w.provenance)
        a.source = w.source if mode == 'exact' else None
        return max(mean_over_ball(a, b, mode) for b in balls)
    return max(abs(mean_over_ball(w, b, mode)) for b in balls)


def bennett_maximal(f, x, balls_containing_x, mode='grid'):
    """ Signed maximal function at ``x``: the largest plain mean of ``f`` over the given balls containing ``x``.

    >>> ind = AnalyticFunction('Indicator', center=0.0, radius=1.0)
    >>> bennett_maximal(ind, 0.0, [Ball(0, 0.5), Ball(0.5, 1)])
    1.0
    """
    return max(mean_over_ball(f, b, mode) for b in _balls_with(x, balls_containing_x))


def maximal_scan(g, radii=None, margin=0.0, signed=True, mode='grid', detail=False):
    """ Uncentered maximal function at every cell center: per radius, the ball means at admissible centers, spread by
    ``maximum_filter`` to every point the ball covers.

    Parameters
    ----------
    g : GridFunction
    radii : iterable of float, optional
        default ``linear_radii``
    margin : float
    signed : bool
        ``True`` averages ``g`` (Bennett), ``False`` averages ``|g|`` (Hardy-Littlewood)
    mode : {'grid', 'exact'}
    detail : bool
        also return the array of the radius attaining the maximum at each point

    Returns
    -------
    GridFunction
        valid where at least one admissible ball covers the point and the point is itself an admissible center;
        the shrinking balls around a valid point put the sample there among the candidates, so the scan never falls
        below the sampled values

    Examples
    --------
    >>> d = Domain(1, 2, 32); g = sample(AnalyticFunction('Constant', c=1.5), d)
    >>> m = maximal_scan(g); bool(np.allclose(m.values[m.valid], 1.5))
    True
    """
    d = g.domain
    radii = linear_radii(d) if radii is None else sorted(radii)
    best = np.full(d.shape, -np.inf)
    arg = np.zeros(d.shape)
    for r in radii:
        field = mean_field(g, r, margin, mode, absolute=not signed)
        if not np.isfinite(field).any(): continue
        j, fp = ball_footprint(d, r)
        if d.n == 1: spread = ndimage.maximum_filter1d(field, 2 * j + 1, mode='constant', cval=-np.inf)
        else: spread = ndimage.maximum_filter(field, footprint=fp, mode='constant', cval=-np.inf)
        better = spread > best
        best[better], arg[better] = spread[better], r
    valid = np.isfinite(best) & admissible_centers(d, 0.0, margin) & g.valid
    if not valid.any(): raise InputError('no admissible balls; enlarge domain')
    own = np.abs(g.values) if not signed else g.values
    best = np.where(valid, np.maximum(best, own), best)
    kind = 'bennett' if signed else 'hl'
    out = GridFunction(d, np.where(valid, best, 0.0), '%s_maximal:%s' % (kind, g.provenance), valid=valid)
    logger.debug('maximal scan (%s) over %d radii', kind, len(radii))
    return (out, arg) if detail else out


def _witness_ball(g, x_index, r, margin, mode, signed):
    """ The admissible ball of radius ``r`` covering the cell ``x_index`` with the largest mean."""
    d = g.domain
    field = mean_field(g, r, margin, mode, absolute=not signed)
    P = d.points()
    x = P[np.ravel_multi_index(x_index, d.shape)]
    cover = np.sum((P - x) ** 2, axis=1) <= (r * (1 + 1e-12)) ** 2
    flat = np.where(cover, field.ravel(), -np.inf)
    return {'center': P[int(np.argmax(flat))].tolist(), 'radius': r}


def bennett_blo_functional(f, d, radii=None, margin=0.0, mode='grid'):
    """ ``sup (M~f - f)`` on the grid, with ``M~`` the signed uncentered maximal function.

    >>> bennett_blo_functional(AnalyticFunction('Constant', c=2), Domain(1, 1, 16)).value
    0.0
    """
    g = sample(f, d) if isinstance(f, AnalyticFunction) else f
    m, arg = maximal_scan(g, radii, margin, signed=True, mode=mode, detail=True)
    diff = np.where(m.valid, m.values - g.values, -np.inf)
    k = np.unravel_index(int(np.argmax(diff)), d.shape)
    return NormEstimate('bennett_blo_functional', float(diff[k]), _witness_ball(g, k, float(arg[k]), margin, mode, True),
                        mode, witness_point=d.points()[np.ravel_multi_index(k, d.shape)].tolist(),
                        radius_count=len(linear_radii(d) if radii is None else list(radii)))


def a1_constant_maximal(w, d, radii=None, margin=0.0, mode='exact'):
    """ ``sup_x (Mw)(x) / w(x)`` over the cell centers of ``d``.

    Parameters
    ----------
    w : WeightFunction
    d : Domain
    radii : iterable of float, optional
        default every multiple of the spacing up to ``L/2``
    margin : float
    mode : {'exact', 'grid'}
        exact integrates ``w`` over each ball (1-D); grid averages the samples

    Returns
    -------
    A1Estimate

    Examples
    --------
    >>> w = WeightFunction(AnalyticFunction('NegLogAbs'), 0.5)
    >>> e = a1_constant_maximal(w, Domain(1, 1, 256)); abs(e.constant / (1 + math.sqrt(2)) - 1) < 0.03
    True
    """
    g = w.on(d)
    m, arg = maximal_scan(g, radii, margin, signed=False, mode=mode, detail=True)
    ratio = np.where(m.valid, m.values / g.values, -np.inf)
    k = np.unravel_index(int(np.argmax(ratio)), d.shape)
    x = d.points()[np.ravel_multi_index(k, d.shape)].tolist()
    est = A1Estimate('a1_constant_maximal', ratio[k], x, _witness_ball(g, k, float(arg[k]), margin, mode, False), mode,
                     weight=w.label())
    logger.info('A1 (maximal) of %s: %.6g at %s', w.label(), est.constant, x)
    return est


def a1_constant_heat(w, tg, d, p=None):
    """ ``sup_{t, x} W_t w(x) / w(x)`` over the times of ``tg`` and the cell centers of ``d``.

    >>> w = WeightFunction(AnalyticFunction('Constant', c=0.3), 2.0)
    >>> abs(a1_constant_heat(w, TimeGrid(1e-2, 1e-1, 4), Domain(1, 1, 8)).constant - 1) < 1e-12
    True
    """
    g = w.on(d)
    P = d.points()
    times = list(tg)
    best = (-np.inf, None, None)
    for t in times:
        ratio = apply_heat_points(w.analytic, P, t, p) / g.flat()
        i = int(np.argmax(ratio))
        if ratio[i] > best[0]: best = (float(ratio[i]), P[i].tolist(), t)
    est = A1Estimate('a1_constant_heat', best[0], best[1], {'t': best[2]}, 'analytic', weight=w.label(),
                     time_count=len(times))
    logger.info('A1 (heat) of %s: %.6g at x=%s t=%g', w.label(), est.constant, best[1], best[2])
    return est


def exp_a1_probe(f, epsilon_grid, threshold, d, radii_fraction=0.5, refinements=3, tol=0.05):
    """ Smallest ``epsilon`` of the grid for which ``exp(epsilon f)`` looks like an A1 weight.

    A weight passes when its maximal A1 constant is at most ``threshold`` on ``d`` and stays within ``tol`` (relative)
    between the last two of ``refinements`` grid doublings. Weights rejected by the overflow guard are skipped.

    Returns
    -------
    tuple
        ``(epsilon or None, A1Estimate)``; with no passing epsilon the estimate of the first admissible one carries
        ``note`` and the ``growth`` table of the refining sequence

    Examples
    --------
    >>> eps, est = exp_a1_probe(AnalyticFunction('Constant', c=1), [0.5, 1], 10, Domain(1, 1, 16))
    >>> eps, round(est.constant, 12)
    (0.5, 1.0)
    """
    eps_grid = [float(e) for e in epsilon_grid]
    if not eps_grid or not Util.is_monotonic(eps_grid) or eps_grid[0] <= 0:
        raise InputError('epsilon grid must be positive and ascending')
    first, admissible = None, 0
    for eps in eps_grid:
        w = WeightFunction(f, eps)
        try:
            seq, dd = [], d
            for _ in range(refinements):
                seq.append(a1_constant_maximal(w, dd, linear_radii(dd, radii_fraction)))
                dd = dd.refine()
        except (NumericError, InputError) as e:
            logger.info('epsilon %g rejected: %s', eps, e)
            continue
        admissible += 1
        consts = [e.constant for e in seq]
        drift = Util.drift(consts[-2], consts[-1]) if len(consts) > 1 else 0.0
        est = seq[-1].add(epsilon=eps, growth=consts, drift=drift)
        if consts[-1] <= threshold and drift < tol: return eps, est
        if first is None: first = est
    if not admissible: raise NumericError('every epsilon was rejected by the overflow guard')
    first.add(note='no epsilon passed: constants exceed %g or grow under refinement' % threshold)
    return None, first


def default_epsilon_grid(f, d, lo=1e-2, ppd=16):
    """ Log-spaced epsilons from ``lo`` up to the overflow guard ``700 / max|f|`` on ``d`` (at most 700 / 1e-12)."""
    top = float(np.max(np.abs(sample(f, d).values)))
    hi = OVERFLOW_GUARD / max(top, 1e-12)
    if hi <= lo: raise NumericError('overflow guard leaves no epsilon above %g' % lo)
    return [float(e) for e in Util.log_grid(lo, hi, ppd)]


def n_functional(f, epsilon_grid, tg, d, p=None):
    """ ``N(f) = min_eps log(C0(eps)) / eps`` with ``C0(eps)`` the heat A1 constant of ``exp(eps f)``.

    ``C0`` is clamped below at ``1 + 1e-12``. Epsilons whose weight overflows or is not locally integrable are skipped.

    Returns
    -------
    NFunctionalResult

    Examples
    --------
    >>> r = n_functional(AnalyticFunction('Constant', c=2), [0.5, 1.0], TimeGrid(1e-2, 1e-1, 4), Domain(1, 1, 8))
    >>> r.value <= 1e-9, r.best_C0 > 1
    (True, True)
    """
    rows = []
    for eps in epsilon_grid:
        w = WeightFunction(f, eps)
        try:
            c0 = a1_constant_heat(w, tg, d, p).constant
        except (NumericError, InputError) as e:
            logger.info('epsilon %g rejected: %s', eps, e)
            continue
        c0 = max(c0, 1 + 1e-12)
        rows.append((float(eps), c0, math.log(c0) / eps))
    if not rows: raise NumericError('no admissible epsilon for %s' % f.label())
    i = int(np.argmin([r[2] for r in rows]))
    eps, c0, val = rows[i]
    return NFunctionalResult(name='n_functional', value=val, best_epsilon=eps, best_C0=c0,
                             epsilon_grid=[r[0] for r in rows], C0=[r[1] for r in rows], function=f.label())


def a1_characterization(f, d, epsilon_grid, tg, p=None, threshold=10.0, balls_radii=None):
    """ The three equivalent conditions side by side: a finite BLO estimate, an A1 weight ``exp(eps f)`` found by the
    maximal search, and the heat A1 constant of the same weight; plus both comparison ratios against ``KAPPA`` and
    ``KAPPA_PRIME``.
    """
    blo = blo_norm(sample(f, d), radii=balls_radii)
    eps, est = exp_a1_probe(f, epsilon_grid, threshold, d)
    out = ResultSpec(name='a1_characterization', function=f.label(), blo_norm=blo.value, epsilon=eps,
                     a1_maximal=est.constant)
    out.epsilon = eps  # kept when no epsilon passes
    if eps is None:
        return out.add(note=est.note, verdict=False)
    w = WeightFunction(f, eps)
    mx = a1_constant_maximal(w, d)
    heat = a1_constant_heat(w, tg, d, p)
    return out.add(a1_maximal=mx.constant, a1_heat=heat.constant, heat_over_maximal=heat.constant / mx.constant,
                   maximal_over_heat=mx.constant / heat.constant,
                   verdict=bool(heat.constant <= KAPPA * mx.constant and mx.constant <= KAPPA_PRIME[f.n] * heat.constant))
