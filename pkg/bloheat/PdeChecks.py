import math
import numpy as np
import pandas as pd

try: from bloheat.LittlewoodPaley import *  # production:  if bloheat package is installed
except ImportError:   from LittlewoodPaley import *  # development: if not installed and running from source

logger = logging.getLogger(__name__)


class HeatSolutionSlice(SpecPrinter):
    """ The solution ``u(., t) = W_t f`` of the heat equation with initial data ``f``, at one time, on a grid.

    >>> s = solve_heat(AnalyticFunction('Constant', c=2), 0.1, Domain(1, 1, 8))
    >>> s.t, bool(np.allclose(s.values.values, 2, atol=1e-12))
    (0.1, True)
    """
    def __init__(self, initial, t, values):
        self.initial, self.t, self.values = initial, float(t), values

    @property
    def domain(self): return self.values.domain

    def at(self, x):
        return self.values.at(x)

    def deviation(self, points=None, p=None):
        """ Largest difference between the slice and a fresh single-point ``apply_heat`` at ``points`` (a handful of
        cell centers by default)."""
        d = self.domain
        P = d.points()[::max(1, d.size // 8)] if points is None else np.asarray(points, dtype=float).reshape(-1, d.n)
        return max(abs(apply_heat(self.initial, tuple(x), self.t, p) - self.values.at(tuple(x))) for x in P)


def solve_heat(f, t, d, p=None):
    """ ``u(., t) = W_t f`` at every cell center of ``d``.

    Parameters
    ----------
    f : AnalyticFunction
    t : float
        ``t > 0``
    d : Domain
    p : HeatParams, optional

    Returns
    -------
    HeatSolutionSlice

    Examples
    --------
    >>> g = AnalyticFunction('GaussianBump', a=0.5); s = solve_heat(g, 0.2, Domain(1, 1, 8))
    >>> abs(s.at(0.375) - heat_gaussian_oracle(0.5, 0.375, 0.2)) < 1e-12
    True
    """
    if not Util.is_number(t) or not t > 0: raise InputError('t must be positive, got %r' % (t,))
    u = apply_heat_points(f, d.points(), t, p)
    logger.debug('solved heat equation for %s at t=%g on %d cells', f.label(), t, d.size)
    return HeatSolutionSlice(f, t, GridFunction(d, u, 'heat(t=%g):%s' % (t, f.label())))


def regularity_defect(f, x, t, p=None):
    """ ``u(x, t) - inf_{z in B(x, sqrt t)} u(z, t)`` over the ball lattice; the same number as ``heat_defect``.

    >>> regularity_defect(AnalyticFunction('Constant', c=7), 0.1, 0.3) < 1e-13
    True
    """
    if not f.is_BLO: logger.info('regularity_defect of %s, which is not BLO', f.label())
    return heat_defect(f, x, t, p)


def _lattice_values(f, x, t, p):
    P, c = ball_lattice(x, math.sqrt(t), f.n)
    return apply_heat_points(f, P, t, p), c


def oscillation(f, x0, t, p=None):
    """ ``sup - inf`` of ``u(., t)`` over the lattice of ``B(x0, sqrt t)``.

    Never below ``regularity_defect(f, x0, t)``: both use the same sample set, which contains ``x0``.

    >>> f = AnalyticFunction('NegLogAbs')
    >>> oscillation(f, 0.2, 0.01) >= regularity_defect(f, 0.2, 0.01)
    True
    """
    if not Util.is_number(t) or not t > 0: raise InputError('t must be positive, got %r' % (t,))
    u, c = _lattice_values(f, x0, t, p)
    return float(np.max(u) - np.min(u))


def oscillation_chain(f, x0, t, p=None):
    """ ``oscillation(x0)`` next to ``2 max_z regularity_defect(z)`` over the lattice points ``z`` of ``B(x0, sqrt t)``.

    >>> r = oscillation_chain(AnalyticFunction('NegLogAbs'), 0.3, 0.01); r.holds
    True
    """
    t = float(t)
    P, c = ball_lattice(x0, math.sqrt(t), f.n)
    osc = oscillation(f, x0, t, p)
    defects = Util.pmap(lambda z: heat_defect(f, tuple(z), t, p), list(P))
    bound = 2 * max(defects)
    return ResultSpec(name='oscillation_chain', oscillation=osc, defect_bound=bound, holds=bool(osc <= bound + 1e-9),
                      x0=list(Util.to_point(x0, f.n)), t=t)


def pde_sweep(f, centers, tg, p=None):
    """ ``regularity_defect`` and ``oscillation`` for every (center, time) pair, as a ``pandas.DataFrame``
    (center-major order)."""
    times = list(tg)
    pairs = [(Util.to_point(c, f.n), t) for c in centers for t in times]
    if not pairs: raise InputError('no admissible (center, t) pairs')

    def one(ct):
        x, t = ct
        u, c = _lattice_values(f, x, t, p)
        return float(u[c] - np.min(u)), float(np.max(u) - np.min(u))

    vals = Util.pmap(one, pairs)
    tab = pd.DataFrame({'x': [c[0][0] for c in pairs], 't': [c[1] for c in pairs],
                        'defect': [v[0] for v in vals], 'oscillation': [v[1] for v in vals]})
    if f.n == 2: tab.insert(1, 'y', [c[0][1] for c in pairs])
    return tab


def heat_residual(f, d, t, delta=None, p=None):
    """ Finite-difference residual ``(u(t + delta) - u(t - delta)) / (2 delta) - Lap_h u(t)`` at the interior cells.

    The residual is ``O(delta^2 + h^2)``; it is a check on the solution formula, not a solver.

    Returns
    -------
    ResultSpec
        ``max_residual`` and the scale ``max |Lap_h u|`` it compares against

    Examples
    --------
    >>> r = heat_residual(AnalyticFunction('GaussianBump', a=0.5), Domain(1, 1, 32), 0.1)
    >>> r.max_residual < 1e-2 * r.scale
    True
    """
    if not Util.is_number(t) or not t > 0: raise InputError('t must be positive, got %r' % (t,))
    delta = 1e-3 * t if delta is None else float(delta)
    if not 0 < delta < t: raise InputError('delta must lie in (0, t), got %r' % (delta,))
    P, h = d.points(), d.h
    up, um, u = (apply_heat_points(f, P, s, p).reshape(d.shape) for s in (t + delta, t - delta, t))
    dt = (up - um) / (2 * delta)
    inner = (slice(1, -1),) * d.n
    lap = np.zeros(tuple(k - 2 for k in d.shape))
    for axis in range(d.n):
        lo = [slice(1, -1)] * d.n; lo[axis] = slice(0, -2)
        hi = [slice(1, -1)] * d.n; hi[axis] = slice(2, None)
        lap += (u[tuple(lo)] - 2 * u[inner] + u[tuple(hi)]) / (h * h)
    res = np.abs(dt[inner] - lap)
    return ResultSpec(name='heat_residual', function=f.label(), t=float(t), delta=delta, h=h,
                      max_residual=float(res.max()), scale=float(np.abs(lap).max()), cells=int(res.size))


def midpoint_chain(f, x0, t, p=None, pairs=1000, rng=None):
    """ ``|u(x) - u(y)|`` against the two-step bound through the midpoint ``m`` of ``x`` and ``y``, for random pairs in
    ``B(x0, sqrt t)``.

    ``m`` lies within ``sqrt t`` of both points, so ``u(x) - u(y) = (u(x) - u(m)) + (u(m) - u(y))`` is at most the
    defect at ``x`` plus the defect at ``m``. Defects are taken over the ball lattice joined with the points of the pair;
    ``lattice_bound`` repeats the bound with the lattice defects alone.

    Parameters
    ----------
    f : AnalyticFunction
    x0 : float, tuple
    t : float
    p : HeatParams, optional
    pairs : int
    rng : numpy.random.Generator, int, optional
        generator or seed (default seed 0)

    Returns
    -------
    pandas.DataFrame
        one row per pair: ``diff``, ``bound``, ``lattice_bound``, ``holds``

    Examples
    --------
    >>> t = midpoint_chain(AnalyticFunction('NegLogAbs'), 0.3, 0.01, pairs=20, rng=3); bool(t['holds'].all())
    True
    """
    if not Util.is_number(t) or not t > 0: raise InputError('t must be positive, got %r' % (t,))
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(0 if rng is None else rng)
    r, n = math.sqrt(t), f.n
    x0 = np.asarray(Util.to_point(x0, n))
    if n == 1: off = rng.uniform(-r, r, size=(2 * pairs, 1))
    else:
        rho, phi = r * np.sqrt(rng.uniform(0, 1, 2 * pairs)), rng.uniform(0, 2 * math.pi, 2 * pairs)
        off = np.stack([rho * np.cos(phi), rho * np.sin(phi)], axis=1)
    X, Y = x0 + off[:pairs], x0 + off[pairs:]
    M = 0.5 * (X + Y)

    def one(i):
        x, y, m = X[i], Y[i], M[i]
        ux, uy, um = apply_heat_points(f, np.array([x, y, m]), t, p)
        dx, dy, dm = (heat_defect(f, tuple(z), t, p) for z in (x, y, m))
        ax, ay = max(dx, ux - um), max(dy, uy - um)
        am = max(dm, um - ux, um - uy)
        return abs(ux - uy), max(ax, ay) + am, max(dx, dy) + dm

    vals = Util.pmap(one, range(pairs))
    tab = pd.DataFrame(vals, columns=['diff', 'bound', 'lattice_bound'])
    tab['holds'] = tab['diff'] <= tab['bound'] + 1e-12
    logger.debug('midpoint chain at t=%g: %d pairs, %d hold', t, pairs, int(tab['holds'].sum()))
    return tab


def value_range(f):
    """ ``(inf f, sup f)`` of a bounded function from its closed form.

    >>> value_range(AnalyticFunction('Sum', base=AnalyticFunction('Indicator', radius=1), bounded_part=AnalyticFunction('Constant', c=2)))
    (2.0, 3.0)
    """
    k, p = f.kind, f.params
    if not f.is_Linfty: raise InputError('maximum principle needs a bounded function, got %s' % f.label())
    if k == 'Constant': return p['c'], p['c']
    if k in ('Indicator', 'GaussianBump'): return 0.0, 1.0
    if k == 'BoundedSine': return -abs(p['amplitude']), abs(p['amplitude'])
    if k == 'Shifted': return value_range(f.base)
    if k == 'Scaled':
        lo, hi = value_range(f.base)
        return p['lam'] * lo, p['lam'] * hi
    if k == 'Sum':
        (a, b), (c, e) = value_range(f.base), value_range(f.bounded_part)
        w = p['weight']
        return a + min(w * c, w * e), b + max(w * c, w * e)
    if k == 'ExpWeight':
        lo, hi = value_range(f.base)
        return math.exp(p['epsilon'] * lo), math.exp(p['epsilon'] * hi)
    raise InputError('no closed-form range for %s' % f.label())


def maximum_principle(f, hs, tol=1e-9):
    """ ``inf f <= u <= sup f`` on the whole slice, to ``tol``.

    >>> maximum_principle(AnalyticFunction('Indicator', radius=0.5), solve_heat(AnalyticFunction('Indicator', radius=0.5), 0.01, Domain(1, 1, 16)))
    True
    """
    lo, hi = value_range(f)
    v = hs.values.values[hs.values.valid]
    ok = bool(np.all(v >= lo - tol) and np.all(v <= hi + tol))
    if not ok: logger.warning('maximum principle violated for %s at t=%g: [%g, %g] outside [%g, %g]',
                              f.label(), hs.t, v.min(), v.max(), lo, hi)
    return ok
