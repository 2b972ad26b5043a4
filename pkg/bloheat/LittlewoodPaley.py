import math
import numpy as np
import pandas as pd

try: from bloheat.MaximalWeights import *  # production:  if bloheat package is installed
except ImportError:   from MaximalWeights import *  # development: if not installed and running from source

logger = logging.getLogger(__name__)

TAIL_MARGIN = 1.25  # safety factor on the end-decade tail estimates


class SquareFunctionParams(ResultSpec):
    """ Truncation and lattice of the ``ds/s`` integral of the square function.

    The integrand is sampled on one log-spaced lattice from ``s_min`` to ``s_max`` with ``points_per_decade`` nodes
    per decade and integrated by the trapezoid rule in ``ln s``.

    >>> sp = SquareFunctionParams(1e-3, 1e1); len(sp.nodes()), sp.nodes()[0], sp.nodes()[-1]
    (65, 0.001, 10.0)
    >>> SquareFunctionParams(1, 1e-2)  # doctest: +ELLIPSIS
    Traceback (most recent call last):
    ...
    ConfigError: square function needs 0 < s_min < s_max, got 1, 0.01
    """
    def __init__(self, s_min=1e-4, s_max=1e2, points_per_decade=16, print_precision=9):
        super().__init__(print_precision=print_precision)
        self.add_verify(dtype=float, min=1e-12, max=None, dflt=1e-4, strict=True, s_min=s_min)
        self.add_verify(dtype=float, min=1e-12, max=1e8, dflt=1e2, strict=True, s_max=s_max)
        self.add_verify(dtype=int, min=4, max=256, dflt=16, strict=True, points_per_decade=points_per_decade)
        if not self.s_min < self.s_max:
            raise ConfigError('square function needs 0 < s_min < s_max, got %g, %g' % (self.s_min, self.s_max))

    def nodes(self):
        v = Util.log_grid(self.s_min, self.s_max, self.points_per_decade)
        v[0], v[-1] = self.s_min, self.s_max
        return [float(s) for s in v]

    def extended(self, decades=1):
        """ The range widened by ``decades`` on each side, same density."""
        k = 10.0 ** decades
        return SquareFunctionParams(self.s_min / k, self.s_max * k, self.points_per_decade)


def _nodes_between(sp, lo, hi):
    """ Lattice nodes strictly inside ``(lo, hi)`` with both ends added."""
    return [lo] + [s for s in sp.nodes() if lo < s < hi] + [hi]


def integrand_table(f, X, s_nodes, p=None):
    """ ``|s d/ds W_s f(x)|^2`` for every row ``x`` of ``X`` (columns) and every ``s`` of ``s_nodes`` (rows)."""
    X = np.asarray(X, dtype=float).reshape(-1, f.n)
    if np.any(f.hits_singularity(X)): raise InputError('evaluation point on the singular set of %s' % f.label())
    rows = Util.pmap(lambda s: apply_tdt_heat_points(f, X, s, p), list(s_nodes))
    logger.debug('square-function integrand: %d points x %d s-nodes', X.shape[0], len(rows))
    return np.asarray(rows) ** 2


def _log_trapezoid(s, v):
    """ Trapezoid rule in ``ln s`` along the first axis of ``v``."""
    w = np.diff(np.log(np.asarray(s)))
    v = np.asarray(v)
    out = np.tensordot(0.5 * w, v[:-1] + v[1:], axes=(0, 0))
    if np.any(out < -1e-300): raise NumericError('negative square-function quadrature')
    return out


def s_integral(f, x, lo, hi, sp, p=None):
    """ ``int_lo^hi |s d/ds W_s f(x)|^2 ds/s`` on the lattice of ``sp`` (with ``lo`` and ``hi`` added as nodes).

    Integrals over adjacent ranges whose common end is a lattice node add up exactly.

    >>> sp = SquareFunctionParams(1e-3, 1e1, 8); f = AnalyticFunction('GaussianBump', a=0.5); s = sp.nodes()
    >>> a, b = s_integral(f, 0.3, s[0], s[10], sp), s_integral(f, 0.3, s[10], s[-1], sp)
    >>> abs(a + b - s_integral(f, 0.3, s[0], s[-1], sp)) < 1e-14
    True
    """
    if not 0 < lo < hi: raise InputError('s-range needs 0 < lo < hi, got %r, %r' % (lo, hi))
    s = _nodes_between(sp, lo, hi)
    return float(_log_trapezoid(s, integrand_table(f, [Util.to_point(x, f.n)], s, p))[0])


def _tails(s, v):
    """ Estimates of the integral beyond each end over one halving/doubling: end-decade ceiling * ln 2 * margin."""
    ls = np.log10(np.asarray(s))
    low = v[ls <= ls[0] + 1].max(axis=0)
    high = v[ls >= ls[-1] - 1].max(axis=0)
    return low * math.log(2) * TAIL_MARGIN, high * math.log(2) * TAIL_MARGIN


def g_function(f, x, sp=None, p=None, full=False):
    """ Littlewood-Paley g-function ``(int |s d/ds W_s f(x)|^2 ds/s)^(1/2)``, truncated to ``[s_min, s_max]``.

    Parameters
    ----------
    f : AnalyticFunction
    x : float, tuple
        off the singular set of ``f``
    sp : SquareFunctionParams, optional
    p : HeatParams, optional
    full : bool
        return a ``ResultSpec`` carrying the tail estimates instead of the bare value

    Returns
    -------
    float, ResultSpec
        ``lower_tail`` / ``upper_tail`` estimate the increase of ``g^2`` when ``s_min`` is halved or ``s_max``
        doubled; ``truncated`` is always set, the integral is never extrapolated

    Examples
    --------
    >>> sp = SquareFunctionParams(1e-3, 1e1, 8)
    >>> g_function(AnalyticFunction('Constant', c=4), 0.2, sp) < 1e-12
    True
    >>> g_function(AnalyticFunction('Linear'), 0.2, sp) < 1e-12
    True
    >>> r = g_function(AnalyticFunction('NegLogAbs'), 0.5, sp, full=True); r.truncated, r.upper_tail > 0
    (True, True)
    """
    sp = SquareFunctionParams() if sp is None else sp
    s = sp.nodes()
    v = integrand_table(f, [Util.to_point(x, f.n)], s, p)
    g2 = float(_log_trapezoid(s, v)[0])
    val = math.sqrt(max(g2, 0.0))
    if not full: return val
    low, high = _tails(s, v)
    return ResultSpec(name='g_function', value=val, g_squared=g2, lower_tail=float(low[0]), upper_tail=float(high[0]),
                      ceiling=float(v.max()), truncated=True, s_min=sp.s_min, s_max=sp.s_max, x=list(Util.to_point(x, f.n)))


def truncated_g(f, x, r, sp=None, p=None):
    """ ``(int_{s_min}^{r^2} |s d/ds W_s f(x)|^2 ds/s)^(1/2)``; the upper limit is clipped to ``s_max``.

    >>> sp = SquareFunctionParams(1e-3, 1e1, 8); f = AnalyticFunction('GaussianBump', a=0.5)
    >>> truncated_g(f, 0.3, 0.5, sp) <= g_function(f, 0.3, sp)
    True
    >>> truncated_g(AnalyticFunction('Constant', c=1), 0.3, 0.5, sp) < 1e-12
    True
    """
    sp = SquareFunctionParams() if sp is None else sp
    if not Util.is_number(r) or not r > 0: raise InputError('r must be positive, got %r' % (r,))
    top = float(r) ** 2
    if top <= sp.s_min: return 0.0
    if top > sp.s_max:
        logger.info('truncated_g: r^2 = %g clipped to s_max = %g', top, sp.s_max)
        top = sp.s_max
    return math.sqrt(max(s_integral(f, x, sp.s_min, top, sp, p), 0.0))


def g_grid(f, d, sp=None, p=None, power=1):
    """ ``g(f)`` (``power=1``) or ``g(f)^2`` (``power=2``) at every cell center of ``d``, as a ``GridFunction``.

    >>> h = g_grid(AnalyticFunction('Constant', c=1), Domain(1, 1, 8), SquareFunctionParams(1e-2, 1, 4), power=2)
    >>> float(h.values.max()) < 1e-20
    True
    """
    if power not in (1, 2): raise InputError('power must be 1 or 2, got %r' % (power,))
    sp = SquareFunctionParams() if sp is None else sp
    s = sp.nodes()
    g2 = np.maximum(_log_trapezoid(s, integrand_table(f, d.points(), s, p)), 0.0)
    vals = g2 if power == 2 else np.sqrt(g2)
    return GridFunction(d, vals, '%s:%s' % ('g2' if power == 2 else 'g', f.label()))


def _ratio(a, b):
    if a <= 1e-12: return 0.0
    return a / b if b > 0 else math.inf


def _bmo_input(f, d, radii):
    if not f.is_BMO: raise InputError('square-function checks need a BMO function, got %s' % f.label())
    return bmo_norm(sample(f, d), radii=radii).value


def gsquared_blo_check(f, d, tg, sp=None, p=None, radii=None, centers=None):
    """ BLO size of ``h = g(f)^2`` against ``||f||_BMO^2``.

    ``h`` is materialized on ``d``; ``blo_norm(h)`` and the grid heat functional of ``h`` are divided by the squared
    BMO estimate of ``f`` on the same ball family. The heat functional runs over every admissible cell, or only over
    the cells containing ``centers`` when given. The integrand ceiling relative to ``||f||_BMO^2`` is reported as
    ``kernel_constant``.

    Returns
    -------
    ResultSpec

    Examples
    --------
    >>> r = gsquared_blo_check(AnalyticFunction('Constant', c=2), Domain(1, 4, 64), TimeGrid(1e-3, 1e-2, 4),
    ...                        SquareFunctionParams(1e-2, 1, 4))
    >>> r.blo_ratio, r.heat_ratio
    (0.0, 0.0)
    """
    sp = SquareFunctionParams() if sp is None else sp
    bmo = _bmo_input(f, d, radii)
    h = g_grid(f, d, sp, p, power=2)
    blo = blo_norm(h, radii=radii)
    heat = heat_blo_functional_grid(h, tg, p, centers)
    ceiling = float(integrand_table(f, d.points()[::max(1, d.size // 64)], sp.nodes(), p).max())
    out = ResultSpec(name='gsquared_blo_check', function=f.label(), bmo_f=bmo, blo_g2=blo.value, heat_g2=heat.value,
                     blo_ratio=_ratio(blo.value, bmo ** 2), heat_ratio=_ratio(heat.value, bmo ** 2),
                     kernel_constant=_ratio(math.sqrt(ceiling), bmo), witness=blo.witness, s_min=sp.s_min, s_max=sp.s_max)
    logger.info('[g(%s)]^2: BLO %.6g, BMO^2 %.6g', f.label(), blo.value, bmo ** 2)
    return out


def tdt_kernel_bounds(f, d, sp=None, p=None, radii=None, pairs=200, rng=None, decades=1, tol=0.05):
    """ The two bounds on ``v_s(x) = |s d/ds W_s f(x)|^2`` that drive the square-function estimates.

    Pointwise: ``sup_{x,s} sqrt(v_s(x)) <= c1 ||f||_BMO``. ``c1`` is measured on up to 64 cell centers of ``d`` and
    remeasured on ``sp`` widened by ``decades`` on both sides; ``pointwise_stable`` says the widening raised it by at
    most ``tol`` (relative).

    Lipschitz: ``|v_s(x) - v_s(z)| <= c2 ||f||_BMO^2 |x - z| / sqrt(s)``. ``c2`` is the largest ratio over ``pairs``
    random (x, z, s) triples drawn from the same points and lattice.

    Parameters
    ----------
    f : AnalyticFunction
        a BMO function
    d : Domain
    sp : SquareFunctionParams, optional
    p : HeatParams, optional
    radii : array_like, optional
        ball radii of the BMO estimate
    pairs : int
    rng : int, numpy.random.Generator, optional
    decades : int
    tol : float

    Returns
    -------
    ResultSpec
        ``pointwise_constant``, ``pointwise_stable``, ``lipschitz_constant``, ``lipschitz_finite`` and the
        ``witness`` triple of the Lipschitz ratio

    Examples
    --------
    >>> r = tdt_kernel_bounds(AnalyticFunction('Constant', c=2), Domain(1, 2, 16), SquareFunctionParams(1e-2, 1, 4))
    >>> r.pointwise_constant, r.lipschitz_constant, r.pointwise_stable, r.lipschitz_finite
    (0.0, 0.0, True, True)
    """
    sp = SquareFunctionParams() if sp is None else sp
    if not Util.is_number(pairs) or pairs < 1: raise InputError('pairs must be a positive integer, got %r' % (pairs,))
    bmo = _bmo_input(f, d, radii)
    X = d.points()[::max(1, d.size // 64)]
    X = X[~f.hits_singularity(X)]
    if len(X) < 2: raise InputError('fewer than two evaluation points off the singular set')
    s = np.asarray(sp.nodes())
    v = integrand_table(f, X, s, p)
    c1 = _ratio(math.sqrt(float(v.max())), bmo)
    wide = integrand_table(f, X, sp.extended(decades).nodes(), p)
    c1_wide = _ratio(math.sqrt(float(wide.max())), bmo)
    rng = np.random.default_rng(rng)
    i = rng.integers(0, len(X), pairs)
    k = (i + rng.integers(1, len(X), pairs)) % len(X)
    m = rng.integers(0, len(s), pairs)
    lhs = np.abs(v[m, i] - v[m, k])
    dist = np.linalg.norm(X[i] - X[k], axis=1)
    rhs = (bmo ** 2) * dist / np.sqrt(s[m])
    with np.errstate(divide='ignore', invalid='ignore'):
        q = np.where(lhs <= 1e-24, 0.0, lhs / rhs)
    j = int(np.argmax(q))
    c2 = float(q[j])
    out = ResultSpec(name='tdt_kernel_bounds', function=f.label(), bmo_f=bmo, pointwise_constant=c1,
                     pointwise_extended=c1_wide, pointwise_stable=bool(c1_wide <= c1 * (1 + tol) + 1e-12),
                     lipschitz_constant=c2, lipschitz_finite=bool(np.isfinite(c2)), pairs=int(pairs),
                     witness={'x': X[i[j]].tolist(), 'z': X[k[j]].tolist(), 's': float(s[m[j]])})
    logger.info('tdt kernel bounds of %s: pointwise %.4g, lipschitz %.4g', f.label(), c1, c2)
    return out


def g_blo_check(f, d, sp=None, p=None, radii=None, tol=1e-12):
    """ BLO size of ``g(f)`` against ``||f||_BMO``, with the per-ball inequality
    ``mean_B g - min_B g <= (mean_B g^2 - min_B g^2)^(1/2)`` checked on every ball of the family.

    Returns
    -------
    ResultSpec
        ``violations`` counts the balls where the inequality fails by more than ``tol`` (relative)

    Examples
    --------
    >>> r = g_blo_check(AnalyticFunction('Constant', c=2), Domain(1, 1, 16), SquareFunctionParams(1e-2, 1, 4))
    >>> r.blo_ratio, r.violations, r.passed
    (0.0, 0, True)
    """
    sp = SquareFunctionParams() if sp is None else sp
    bmo = _bmo_input(f, d, radii)
    g = g_grid(f, d, sp, p, power=1)
    g2 = g.with_values(g.values ** 2, 'g2:' + f.label())
    t1, t2 = ball_table(g, radii), ball_table(g2, radii)
    lhs = t1['defect'].values
    rhs = np.sqrt(np.maximum(t2['defect'].values, 0.0))
    excess = lhs - rhs - tol * (1 + np.abs(t1['mean'].values))
    bad = int(np.sum(excess > 0))
    i, row = int(np.argmax(lhs)), t1.iloc[int(np.argmax(lhs))]
    blo, blo2 = float(lhs[i]), float(t2['defect'].max())
    ratio, ratio2 = _ratio(blo, bmo), _ratio(blo2, bmo ** 2)
    out = ResultSpec(name='g_blo_check', function=f.label(), bmo_f=bmo, blo_g=blo, blo_g2=blo2, blo_ratio=ratio,
                     gsquared_ratio=ratio2, chain_holds=bool(ratio <= math.sqrt(ratio2) + 1e-9),
                     balls_tested=len(t1), violations=bad, max_excess=float(np.max(lhs - rhs)),
                     passed=bool(bad == 0), witness=ball_of_row(row, d.n).as_dict())
    if bad: logger.warning('g_blo_check: %d balls violate the square-root inequality', bad)
    return out


def square_function_table(f, X, sp=None, p=None):
    """ ``g``, ``g^2`` and both tail estimates for every row of ``X``, as a ``pandas.DataFrame``."""
    sp = SquareFunctionParams() if sp is None else sp
    X = np.asarray(X, dtype=float).reshape(-1, f.n)
    s = sp.nodes()
    v = integrand_table(f, X, s, p)
    g2 = np.maximum(_log_trapezoid(s, v), 0.0)
    low, high = _tails(s, v)
    cols = {'x': X[:, 0]}
    if f.n == 2: cols['y'] = X[:, 1]
    cols.update(g=np.sqrt(g2), g_squared=g2, lower_tail=low, upper_tail=high)
    return pd.DataFrame(cols)
