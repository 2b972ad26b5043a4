import math
import numpy as np
from scipy import ndimage, special

try: from bloheat.GridCore import *  # production:  if bloheat package is installed
except ImportError:   from GridCore import *  # development: if not installed and running from source

logger = logging.getLogger(__name__)

_GRADING = np.geomspace(0.15 ** 18, 1.0, 19)  # relative panel edges toward a singular endpoint


class HeatParams(ResultSpec):
    """ Quadrature settings of the heat semigroup.

    The convolution integral runs over the cube ``|y - x|_inf <= R sqrt(t)``. Panels of width ``panel_width * sqrt(t)``
    carry ``nodes`` Gauss-Legendre points (``nodes_2d`` and ``panel_width_2d`` in the plane); panels touching a singular
    point are graded geometrically and the innermost one is integrated exactly against the kernel value at its center.
    ``midpoint_on_cells`` replaces this by uniform cells of width ``sqrt(t) / cells_per_sqrt_t`` with the kernel and
    the function at cell centers (exact cell integrals on cells touching the singular point).

    >>> p = HeatParams(); p.truncation_multiple, p.quadrature
    (12.0, 'exact_cell_integrals')
    >>> HeatParams(truncation_multiple=4)  # doctest: +ELLIPSIS
    Traceback (most recent call last):
    ...
    ConfigError: bad spec truncation_multiple=4. Must be 8 <= float <= 40
    """
    QUADRATURES = ('exact_cell_integrals', 'midpoint_on_cells')

    def __init__(self, truncation_multiple=12.0, quadrature='exact_cell_integrals', tail_tolerance=1e-12,
                 nodes=16, panel_width=0.5, nodes_2d=8, panel_width_2d=1.0, cells_per_sqrt_t=64,
                 support_limit=1e6, print_precision=9):
        super().__init__(print_precision=print_precision)
        self.add_verify(dtype=float, min=8, max=40, dflt=12.0, strict=True, truncation_multiple=truncation_multiple)
        if quadrature not in self.QUADRATURES:
            raise ConfigError('bad spec quadrature=%s. Must be one of %s' % (quadrature, ', '.join(self.QUADRATURES)))
        self.quadrature = quadrature
        self.add_verify(dtype=float, min=0, max=1e-3, dflt=1e-12, strict=True, tail_tolerance=tail_tolerance)
        self.add_verify(dtype=int, min=2, max=64, dflt=16, strict=True, nodes=nodes)
        self.add_verify(dtype=float, min=1e-3, max=4, dflt=0.5, strict=True, panel_width=panel_width)
        self.add_verify(dtype=int, min=2, max=64, dflt=8, strict=True, nodes_2d=nodes_2d)
        self.add_verify(dtype=float, min=1e-3, max=4, dflt=1.0, strict=True, panel_width_2d=panel_width_2d)
        self.add_verify(dtype=int, min=4, max=4096, dflt=64, strict=True, cells_per_sqrt_t=cells_per_sqrt_t)
        self.add_verify(dtype=float, min=1, max=None, dflt=1e6, strict=True, support_limit=support_limit)
        tail = math.erfc(self.truncation_multiple / 2)
        if tail > self.tail_tolerance:
            logger.warning('gaussian tail mass %.3g beyond R=%g exceeds tail_tolerance %.3g',
                           tail, self.truncation_multiple, self.tail_tolerance)


class TimeGrid(SpecPrinter):
    """ Log-spaced times ``t_min, ..., t_max`` with ``points_per_decade`` points per decade.

    >>> tg = TimeGrid(1e-2, 1, 4); len(tg.values), tg.values[0], tg.values[-1]
    (9, 0.01, 1.0)
    >>> round(TimeGrid(1e-2, 1, 4).extended(1).t_min, 15)
    0.001
    """
    def __init__(self, t_min=1e-3, t_max=1.0, points_per_decade=10):
        if not (Util.is_number(t_min) and Util.is_number(t_max) and 0 < t_min < t_max):
            raise InputError('time grid needs 0 < t_min < t_max, got %r, %r' % (t_min, t_max))
        if isinstance(points_per_decade, bool) or not isinstance(points_per_decade, int) or points_per_decade < 4:
            raise InputError('points_per_decade must be an integer >= 4, got %r' % (points_per_decade,))
        self.t_min, self.t_max, self.points_per_decade = float(t_min), float(t_max), points_per_decade
        v = Util.log_grid(self.t_min, self.t_max, points_per_decade)
        v[0], v[-1] = self.t_min, self.t_max
        self.values = [float(t) for t in v]

    def __iter__(self): return iter(self.values)

    def __len__(self): return len(self.values)

    def extended(self, decades=1):
        """ The grid widened by ``decades`` on each side, same spacing."""
        s = 10.0 ** decades
        return TimeGrid(self.t_min / s, self.t_max * s, self.points_per_decade)


def _check_time(t, name='t'):
    if not Util.is_number(t) or not t > 0: raise InputError('%s must be positive, got %r' % (name, t))
    return float(t)


def heat_kernel(x, y, t, n=None):
    """ Gaussian heat kernel ``(4 pi t)^(-n/2) exp(-|x - y|^2 / (4t))``.

    >>> round(heat_kernel(0.3, 0.3, 1 / (4 * math.pi)), 12)
    1.0
    >>> round(heat_kernel(0, 2, 1), 7)
    0.1037769
    >>> heat_kernel(0, 0, 0)
    Traceback (most recent call last):
    ...
    InputError: t must be positive, got 0
    """
    t = _check_time(t)
    x, y = Util.to_point(x, n), Util.to_point(y, n)
    if len(x) != len(y): raise InputError('points %s and %s differ in dimension' % (x, y))
    r2 = sum((a - b) ** 2 for a, b in zip(x, y))
    return (4 * math.pi * t) ** (-0.5 * len(x)) * math.exp(-r2 / (4 * t))


def time_derivative_kernel(y, z, s, n=None):
    """ Kernel of ``s d/ds W_s``: ``W_s(y, z) (-n/2 + |y - z|^2 / (4s))``; integrates to zero in ``z``.

    >>> round(time_derivative_kernel(0, 0, 1 / (4 * math.pi)), 12)
    -0.5
    """
    s = _check_time(s, 's')
    y, z = Util.to_point(y, n), Util.to_point(z, n)
    r2 = sum((a - b) ** 2 for a, b in zip(y, z))
    return heat_kernel(y, z, s) * (-0.5 * len(y) + r2 / (4 * s))


def heat_gaussian_oracle(a, x, t, n=1):
    """ Closed form of ``W_t`` applied to ``exp(-|x|^2 / (4a))``: ``(a / (a + t))^(n/2) exp(-|x|^2 / (4(a + t)))``."""
    x = Util.to_point(x, n)
    u = a + t
    return (a / u) ** (0.5 * n) * math.exp(-sum(v * v for v in x) / (4 * u))


def tdt_gaussian_oracle(a, x, s, n=1):
    """ Closed form of ``s d/ds W_s`` applied to ``exp(-|x|^2 / (4a))``.

    >>> d = 1e-5; a, x, s = 0.7, 0.4, 0.3
    >>> fd = s * (heat_gaussian_oracle(a, x, s + d) - heat_gaussian_oracle(a, x, s - d)) / (2 * d)
    >>> abs(tdt_gaussian_oracle(a, x, s) - fd) < 1e-9
    True
    """
    x = Util.to_point(x, n)
    u, r2 = a + s, sum(v * v for v in x)
    return heat_gaussian_oracle(a, x, s, n) * s * (-0.5 * n / u + r2 / (4 * u * u))


def heat_neglog_oracle_2d(x, t):
    """ ``W_t`` applied to ``-ln|x|`` in the plane: ``-ln|x| - E_1(|x|^2 / 4t) / 2``; ``-ln(4t)/2 + gamma/2`` at 0.

    >>> round(heat_neglog_oracle_2d((0, 0), 0.25), 12) == round(0.5 * np.euler_gamma, 12)
    True
    """
    t = _check_time(t)
    x = Util.to_point(x, 2)
    r2 = x[0] ** 2 + x[1] ** 2
    if r2 == 0: return -0.5 * math.log(4 * t) + 0.5 * np.euler_gamma
    return -0.5 * math.log(r2) - 0.5 * float(special.exp1(r2 / (4 * t)))


def _axis_rule(f, axis, lo, hi, t, p):
    """ Composite rule on [lo, hi] for one axis: nodes, weights, node-to-panel map and panel edges.

    Panels break at the breakpoints of ``f``; panels next to the singular coordinate are graded (Gauss) and marked
    inner, to be integrated exactly.
    """
    s = f.singular_point
    sa = None if s is None else s[axis]
    mid_rule = p.quadrature == 'midpoint_on_cells'
    if mid_rule: w = math.sqrt(t) / p.cells_per_sqrt_t
    else: w = min(math.sqrt(t), f.length_scale()) * (p.panel_width if f.n == 1 else p.panel_width_2d)
    cuts = sorted({lo, hi} | {b for b in f.breakpoints(axis) if lo < b < hi})
    edges = [np.array([lo])]
    for u, v in zip(cuts, cuts[1:]):
        e = np.linspace(u, v, max(1, int(math.ceil((v - u) / w - 1e-9))) + 1)
        if not mid_rule and sa == u: e = np.concatenate(([u], u + (e[1] - u) * _GRADING, e[2:]))
        if not mid_rule and sa == v: e = np.concatenate((e[:-2], v - (v - e[-2]) * _GRADING[::-1], [v]))
        edges.append(e[1:])
    edges = np.concatenate(edges)
    a, b = edges[:-1], edges[1:]
    inner = np.zeros(a.size, dtype=bool) if sa is None else (a == sa) | (b == sa)
    if mid_rule:
        return 0.5 * (a + b), b - a, np.arange(a.size), a, b, inner
    X, W = np.polynomial.legendre.leggauss(p.nodes if f.n == 1 else p.nodes_2d)
    half, mid = 0.5 * (b - a), 0.5 * (a + b)
    nodes = (mid[:, None] + half[:, None] * X[None, :]).ravel()
    weights = (half[:, None] * W[None, :]).ravel()
    return nodes, weights, np.repeat(np.arange(a.size), X.size), a, b, inner


def _panel_integrals(f, lo, hi):
    """ Integral of ``f`` over each inner cell: exact when ``f`` allows, midpoint otherwise."""
    if f.integrable_exactly(): return f.cell_integrals(lo, hi)
    return f.values(0.5 * (lo + hi)) * np.prod(hi - lo, axis=1)


def _kernel_1d(d, t):
    return np.exp(-d * d / (4 * t)) / math.sqrt(4 * math.pi * t)


def _convolve_points(f, X, t, p, tdt=False):
    """ ``int K(x, y) f(y) dy`` for every row ``x`` of ``X``; ``K`` is the heat kernel, or the kernel of ``t d/dt W_t``.

    One composite rule covers the union of the truncation cubes, so ``f`` is evaluated once for all points.
    """
    p = HeatParams() if p is None else p
    t = _check_time(t)
    X = np.asarray(X, dtype=float).reshape(-1, f.n)
    H = p.truncation_multiple * math.sqrt(t)
    if np.max(np.abs(X)) + H > p.support_limit:
        raise InputError('truncation radius exceeds analytic support policy')
    rules = [_axis_rule(f, a, X[:, a].min() - H, X[:, a].max() + H, t, p) for a in range(f.n)]
    out = np.empty(X.shape[0])
    if f.n == 1:
        nodes, wts, pid, a, b, inner = rules[0]
        keep = ~inner[pid]
        fw = f.values(nodes[keep][:, None]) * wts[keep]
        y = nodes[keep]
        ilo, ihi = a[inner][:, None], b[inner][:, None]
        fin = _panel_integrals(f, ilo, ihi) if inner.any() else np.zeros(0)
        cin = 0.5 * (ilo + ihi)[:, 0]
        for i, x in enumerate(X[:, 0]):
            dy, dc = y - x, cin - x
            k, kc = _kernel_1d(dy, t), _kernel_1d(dc, t)
            if tdt: k, kc = k * (-0.5 + dy * dy / (4 * t)), kc * (-0.5 + dc * dc / (4 * t))
            out[i] = np.sum(k * fw) + np.sum(kc * fin)
        return out
    (nx, wx, px, ax, bx, ix), (ny, wy, py, ay, by, iy) = rules
    G = np.stack(np.meshgrid(nx, ny, indexing='ij'), axis=-1).reshape(-1, 2)
    F = f.values(G).reshape(nx.size, ny.size) * wx[:, None] * wy[None, :]
    F[np.ix_(ix[px], iy[py])] = 0.0
    cells = [((ax[i], ay[j]), (bx[i], by[j])) for i in np.flatnonzero(ix) for j in np.flatnonzero(iy)]
    if cells:
        clo, chi = np.array([c[0] for c in cells]), np.array([c[1] for c in cells])
        fin, cin = _panel_integrals(f, clo, chi), 0.5 * (clo + chi)
    logger.debug('heat quadrature t=%g: %d x %d nodes, %d points', t, nx.size, ny.size, X.shape[0])
    for i, (x, y) in enumerate(X):
        dx, dy = nx - x, ny - y
        K = _kernel_1d(dx, t)[:, None] * _kernel_1d(dy, t)[None, :]
        if tdt: K = K * (-1.0 + (dx[:, None] ** 2 + dy[None, :] ** 2) / (4 * t))
        v = np.sum(K * F)
        if cells:
            d2 = np.sum((cin - (x, y)) ** 2, axis=1)
            kc = np.exp(-d2 / (4 * t)) / (4 * math.pi * t)
            if tdt: kc = kc * (-1.0 + d2 / (4 * t))
            v += np.sum(kc * fin)
        out[i] = v
    return out


def apply_heat(f, x, t, p=None):
    """ ``W_t f(x)``, the heat semigroup applied to an analytic function at one point.

    Parameters
    ----------
    f : AnalyticFunction
    x : float, tuple
        evaluation point
    t : float
        time, ``t > 0``
    p : HeatParams, optional

    Returns
    -------
    float

    Examples
    --------
    >>> abs(apply_heat(AnalyticFunction('Constant', c=3), 0.2, 0.01) - 3) < 1e-12
    True
    >>> g = AnalyticFunction('GaussianBump', a=0.5)
    >>> abs(apply_heat(g, 0.3, 0.2) - heat_gaussian_oracle(0.5, 0.3, 0.2)) < 1e-12
    True
    >>> abs(apply_heat(AnalyticFunction('Linear'), 0.7, 2.0) - 0.7) < 1e-12
    True
    """
    return float(_convolve_points(f, [Util.to_point(x, f.n)], t, p)[0])


def _blocks(X, span):
    """ Groups of row indices of ``X`` falling in the same cube of side ``span``, in first-seen order."""
    groups = {}
    for i, k in enumerate(map(tuple, np.floor(X / span).astype(np.int64))): groups.setdefault(k, []).append(i)
    return [np.array(v) for v in groups.values()]


def apply_heat_points(f, X, t, p=None, tdt=False):
    """ ``W_t f`` (or ``t d/dt W_t f``) at every row of ``X`` (shape ``(m, n)``).

    Nearby points share one quadrature rule; distant groups get their own and run through ``Util.pmap``.
    """
    p = HeatParams() if p is None else p
    t = _check_time(t)
    X = np.asarray(X, dtype=float).reshape(-1, f.n)
    blocks = _blocks(X, 2 * p.truncation_multiple * math.sqrt(t))
    out = np.empty(X.shape[0])
    for idx, v in zip(blocks, Util.pmap(lambda idx: _convolve_points(f, X[idx], t, p, tdt), blocks)): out[idx] = v
    return out


def apply_tdt_heat(f, x, s, p=None):
    """ ``s d/ds W_s f(x)``, i.e. the integral of ``f`` against ``time_derivative_kernel``.

    >>> abs(apply_tdt_heat(AnalyticFunction('Constant', c=2), 0.1, 0.5)) < 1e-13
    True
    >>> g = AnalyticFunction('GaussianBump', a=0.5)
    >>> abs(apply_tdt_heat(g, 0.3, 0.2) - tdt_gaussian_oracle(0.5, 0.3, 0.2)) < 1e-12
    True
    """
    s = _check_time(s, 's')
    return float(_convolve_points(f, [Util.to_point(x, f.n)], s, p, tdt=True)[0])


def apply_tdt_heat_points(f, X, s, p=None):
    return apply_heat_points(f, X, _check_time(s, 's'), p, tdt=True)


def grid_heat_weights(h, t, R):
    """ Discrete heat kernel on spacing ``h`` out to ``R sqrt(t)``, normalized to unit sum."""
    K = int(math.ceil(R * math.sqrt(t) / h))
    j = np.arange(-K, K + 1) * h
    w = _kernel_1d(j, t)
    return w / np.sum(w), K


def apply_heat_grid(g, t, p=None):
    """ ``W_t`` on a grid function: one 1-D Gaussian pass per axis (the kernel factorizes).

    Cells closer than the kernel reach ``R sqrt(t)`` to the edge of the valid region become invalid. The discrete
    kernel is normalized, so constants are reproduced exactly.

    Parameters
    ----------
    g : GridFunction
    t : float
        ``t >= (h/4)^2``
    p : HeatParams, optional

    Returns
    -------
    GridFunction

    Examples
    --------
    >>> d = Domain(1, 2, 64); g = sample(AnalyticFunction('Constant', c=3), d)
    >>> u = apply_heat_grid(g, 0.01); bool(np.allclose(u.values[u.valid], 3, atol=1e-14)), int(u.valid.sum())
    (True, 24)
    >>> apply_heat_grid(g, 1e-5)
    Traceback (most recent call last):
    ...
    InputError: grid too coarse for t
    """
    p = HeatParams() if p is None else p
    t = _check_time(t)
    d = g.domain
    if t < (d.h / 4) ** 2: raise InputError('grid too coarse for t')
    w, K = grid_heat_weights(d.h, t, p.truncation_multiple)
    v = np.where(g.valid, g.values, 0.0)
    for axis in range(d.n):
        v = ndimage.convolve1d(v, w, axis=axis, mode='constant', cval=0.0)
    valid = g.valid
    for axis in range(d.n):
        valid = ndimage.minimum_filter1d(valid.astype(np.uint8), 2 * K + 1, axis=axis, mode='constant', cval=0) > 0
    if not valid.any(): raise InputError('heat kernel reach %d cells leaves no valid cells; enlarge domain' % K)
    logger.debug('grid heat t=%g: kernel %d taps, %d valid cells', t, 2 * K + 1, int(valid.sum()))
    return GridFunction(d, np.where(valid, v, 0.0), 'heat(t=%g):%s' % (t, g.provenance), valid=valid)


def semigroup_defect(g, s, t, p=None):
    """ Largest ``|W_s(W_t g) - W_{s+t} g|`` over the cells valid in both grid evaluations.

    >>> g = sample(AnalyticFunction('GaussianBump', a=0.2), Domain(1, 12.0, 2048))
    >>> semigroup_defect(g, 0.05, 0.1) < 1e-10
    True
    """
    composed, direct = apply_heat_grid(apply_heat_grid(g, t, p), s, p), apply_heat_grid(g, s + t, p)
    both = composed.valid & direct.valid
    if not both.any(): raise InputError('no cell valid for both evaluations; enlarge domain')
    return float(np.max(np.abs(composed.values[both] - direct.values[both])))
