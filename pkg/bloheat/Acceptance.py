import time
from scipy import integrate

try: from bloheat.Report import *  # production:  if bloheat package is installed
except ImportError:   from Report import *  # development: if not installed and running from source

logger = logging.getLogger(__name__)

NEGLOG_DOMAIN = (1, 4.0, 2 ** 14)  # n, L, N of the interval-defect table; endpoints snap to its cell edges


class Criterion(ResultSpec):
    """ One acceptance criterion: a title, the checked quantities and a verdict.

    >>> c = Criterion(3, 'divergence'); c.check('last_defect', 8.7, True).check('growth', -1.0, False).passed
    False
    >>> c.line()
    'FAIL criterion 3: divergence'
    """
    def __init__(self, number, title):
        super().__init__(name='criterion_%d' % number, number=number, title=title, passed=True)
        self._rows = []

    def __getstate__(self):
        return {k: v for k, v in self.__dict__.items() if not k.startswith('_')}

    @property
    def rows(self): return self._rows

    def check(self, quantity, value, ok, parameters=None, witness=None):
        ok = bool(ok)
        self._rows.append((quantity, float(value), parameters, witness, ok))
        if not ok:
            self.passed = False
            logger.warning('criterion %d: %s = %.9g out of bounds', self.number, quantity, value)
        return self

    def line(self):
        return '%s criterion %d: %s' % ('PASS' if self.passed else 'FAIL', self.number, self.title)


def _snap(v, h): return round(v / h) * h


def neglog_intervals(count=200, seed=0, h=None):
    """ ``count`` intervals ``(a, b)`` of length at least 1 inside ``[-3.5, 3.5]``, cycling through the three cases of
    the ``-ln|x|`` defect; every fifth case-(i) interval starts at 0. Ends are snapped to multiples of ``h``.

    >>> iv = neglog_intervals(6, h=2 ** -11); [neglog_case(a, b) for a, b in iv]
    ['i', 'ii', 'iii', 'i', 'ii', 'iii']
    >>> all(b - a >= 1 and -3.5 <= a and b <= 3.5 for a, b in iv)
    True
    """
    h = NEGLOG_DOMAIN[1] * 2 / NEGLOG_DOMAIN[2] if h is None else h
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        case = i % 3
        if case == 0:
            a = 0.0 if (i // 3) % 5 == 0 else rng.uniform(0.0, 2.5)
            b = rng.uniform(a + 1.0, 3.5)
        elif case == 1:
            b = -rng.uniform(0.0, 2.5)
            a = -rng.uniform(-b + 1.0, 3.5)
        else:
            a = -rng.uniform(0.05, 3.0)
            b = rng.uniform(max(0.05, 1.0 + a), 3.5)
        a, b = _snap(a, h), _snap(b, h)
        if b - a < 1.0: b += h
        out.append((float(a), float(b)))
    return out


def neglog_interval_table(count=200, seed=0):
    """ The three-case table of ``-ln|x|``: closed-form and grid-mode defects of every interval of
    ``neglog_intervals`` on the ``2**14``-cell grid of ``[-4, 4]``.

    Returns
    -------
    pandas.DataFrame
        columns ``a, b, defect_exact, defect_grid, abs_error``
    """
    d = Domain(*NEGLOG_DOMAIN)
    g = sample(AnalyticFunction('NegLogAbs'), d)
    rows = []
    for a, b in neglog_intervals(count, seed, d.h):
        exact, grid = neglog_interval_defect(a, b), interval_defect(g, a, b, mode='grid')
        rows.append({'a': a, 'b': b, 'defect_exact': exact, 'defect_grid': grid, 'abs_error': abs(grid - exact)})
    return pd.DataFrame(rows, columns=['a', 'b', 'defect_exact', 'defect_grid', 'abs_error'])


# ---------------------------------------------------------------- criteria
def interval_defect_exactness(cfg, c):
    f = AnalyticFunction('NegLogAbs')
    tab = neglog_interval_table(200, cfg.seed)
    i = int(tab['abs_error'].idxmax())
    c.check('grid_max_abs_error', tab['abs_error'].max(), tab['abs_error'].max() <= cfg.tolerance,
            {'N': NEGLOG_DOMAIN[2], 'intervals': len(tab)}, {'a': tab['a'][i], 'b': tab['b'][i]})
    err = [abs(interval_defect(f, a, b, 'exact') - e) for a, b, e in zip(tab['a'], tab['b'], tab['defect_exact'])]
    c.check('exact_max_abs_error', max(err), max(err) <= 1e-12)
    c.check('max_defect', tab['defect_exact'].max(), tab['defect_exact'].max() <= 2)
    cases = [neglog_case(a, b) for a, b in zip(tab['a'], tab['b'])]
    inner = tab[[k == 'i' and a > 0 for k, a in zip(cases, tab['a'])]]
    c.check('case_i_max', inner['defect_exact'].max(), (inner['defect_exact'] < 1).all(), {'count': len(inner)})
    origin = tab[tab['a'] == 0]
    dev = float((origin['defect_exact'] - 1).abs().max()) if len(origin) else math.inf
    c.check('origin_interval_deviation', dev, dev <= 1e-12, {'count': len(origin)})


def neglog_norm(cfg, c):
    est = blo_norm(sample(AnalyticFunction('NegLogAbs'), Domain(1, 4.0, 1024)), mode='exact')
    oracle = neglog_blo_norm_oracle()
    c.check('blo_norm', est.value, abs(est.value / oracle - 1) <= 0.02, {'oracle': oracle}, est.witness)


def log_divergence(cfg, c):
    tab = divergence_sequence(AnalyticFunction('LogAbs'), [2 ** j for j in range(1, 11)])
    growth = float(np.diff(tab['defect']).min())
    c.check('min_increment', growth, growth > 0, {'k_max': 2 ** 10})
    c.check('last_defect', tab['defect'].iloc[-1], tab['defect'].iloc[-1] > 5.0, witness={'a': -2.0 ** -10, 'b': 1.0})


def heat_engine(cfg, c):
    p = cfg.build_heat()
    one = AnalyticFunction('Constant', c=1.0)
    err = max(abs(apply_heat(one, 0.3, t, p) - 1) for t in Util.log_grid(1e-3, 1.0, 4))
    c.check('normalization', err, err <= 1e-10, {'t_min': 1e-3, 't_max': 1.0})
    a = 0.5
    g = sample(AnalyticFunction('GaussianBump', a=0.2), Domain(1, 12.0, 2048))
    err = max(semigroup_defect(g, s, t, p) for s, t in ((0.05, 0.1), (0.1, 0.2), (0.2, 0.05)))
    c.check('semigroup_law', err, err <= 1e-10, {'pairs': [[0.05, 0.1], [0.1, 0.2], [0.2, 0.05]], 'N': 2048})
    for n, pt in ((1, 0.7), (2, (0.3, -0.2))):
        g = AnalyticFunction('GaussianBump', n=n, a=a)
        err = max(abs(apply_heat(g, pt, tt, p) - heat_gaussian_oracle(a, pt, tt, n)) for tt in (1e-2, 0.1, 1.0))
        c.check('gaussian_oracle_n%d' % n, err, err <= 1e-8, {'a': a, 'x': pt})
    worst = 0.0
    for f, pt in ((AnalyticFunction('NegLogAbs'), 0.5), (AnalyticFunction('GaussianBump', a=a), 0.3)):
        for s in (1e-2, 0.1):
            dl = 1e-5 * s
            fd = s * (apply_heat(f, pt, s + dl, p) - apply_heat(f, pt, s - dl, p)) / (2 * dl)
            worst = max(worst, abs(apply_tdt_heat(f, pt, s, p) - fd) / max(abs(fd), 1e-2))
    c.check('tdt_vs_difference', worst, worst <= 1e-5, {'relative_step': 1e-5})


def heat_two_sidedness(cfg, c):
    p = cfg.build_heat()
    d = Domain(1, 4.0, 1024)
    tg = TimeGrid(1e-2, 1.0, 4)
    centers = np.arange(-20, 21) * 0.05
    family = (AnalyticFunction('NegLogAbs'), AnalyticFunction('Indicator', radius=1.0),
              AnalyticFunction('Sum', base=AnalyticFunction('NegLogAbs'),
                               bounded_part=AnalyticFunction('BoundedSine', amplitude=0.25, frequency=2.0)))
    for f in family:
        blo = blo_norm(sample(f, d))
        heat = heat_blo_functional(f, tg, centers, p)
        wide = heat_blo_functional(f, tg.extended(1), centers, p)
        ratio = heat.value / blo.value
        c.check('ratio:' + f.label(), ratio, 0.05 < ratio < 1.0, {'bracket': [0.05, 1.0]}, heat.witness)
        drift = extension_drift(heat.value, wide.value)
        c.check('drift:' + f.label(), drift, drift < 0.05, {'t_range': [tg.t_min / 10, tg.t_max * 10]}, wide.witness)


def a1_chain(cfg, c):
    p = cfg.build_heat()
    d = Domain(1, 1.0, 256)
    tg = TimeGrid(1e-4, 1e-1, 4)
    weights = [WeightFunction(AnalyticFunction('NegLogAbs'), al) for al in (0.25, 0.5, 0.75)]
    weights.append(WeightFunction(AnalyticFunction('Indicator', radius=0.5), 0.5))
    for w in weights:
        mx, heat = a1_constant_maximal(w, d), a1_constant_heat(w, tg, d, p)
        c.check('heat_over_maximal:' + w.label(), heat.constant / mx.constant, heat.constant <= KAPPA * mx.constant,
                {'kappa': KAPPA}, mx.witness)
        c.check('maximal_over_heat:' + w.label(), mx.constant / heat.constant,
                mx.constant <= KAPPA_PRIME[1] * heat.constant, {'kappa_prime': KAPPA_PRIME[1]}, heat.witness)
        if w.epsilon == 0.5 and w.base.kind == 'NegLogAbs':
            target = 1 + math.sqrt(2)
            c.check('power_half_maximal', mx.constant, abs(mx.constant / target - 1) <= 0.03, {'target': target},
                    mx.witness)


def n_functional_checks(cfg, c):
    p = cfg.build_heat()
    d, tg = Domain(1, 1.0, 64), TimeGrid(1e-3, 1e-1, 4)
    f = AnalyticFunction('NegLogAbs')
    grid = [float(e) for e in np.linspace(0.1, 0.9, 9)]
    r = n_functional(AnalyticFunction('Constant', c=1.0), grid, tg, d, p)
    c.check('constant', r.value, r.value <= 1e-9)
    base = n_functional(f, grid, tg, d, p)
    scaled = n_functional(AnalyticFunction('Scaled', base=f, lam=2.0), [e / 2 for e in grid], tg, d, p)
    err = abs(scaled.value - 2 * base.value)
    c.check('homogeneity', err, err <= 1e-10 * max(1.0, abs(base.value)), {'lam': 2.0})
    blo = blo_norm(sample(f, Domain(1, 4.0, 1024))).value
    fine = n_functional(f, [float(e) for e in np.linspace(0.1, 0.9, 17)], tg, d, p)
    ratio, ratio2 = base.value / blo, fine.value / blo
    c.check('ratio', ratio, math.isfinite(ratio) and ratio > 0, {'best_epsilon': base.best_epsilon})
    drift = extension_drift(ratio, ratio2)
    c.check('refinement_drift', drift, drift <= 0.10, {'epsilons': [9, 17]})


def _gaussian_g(a, x, lo, hi):
    """ ``g`` of the Gaussian bump from the closed-form integrand, by adaptive quadrature in ``ln s``."""
    val, _ = integrate.quad(lambda u: tdt_gaussian_oracle(a, x, math.exp(u)) ** 2, math.log(lo), math.log(hi),
                            limit=400, epsabs=1e-14, epsrel=1e-12)
    return math.sqrt(val)


def g_function_checks(cfg, c):
    p = cfg.build_heat()
    sp = SquareFunctionParams(1e-4, 1e1, 16)
    v = g_function(AnalyticFunction('Constant', c=1.0), 0.3, sp, p)
    c.check('constant', v, v <= 1e-12)
    wide = SquareFunctionParams(1e-6, 1e4, 32)
    a, x = 0.5, 0.3
    v, ref = g_function(AnalyticFunction('GaussianBump', a=a), x, wide, p), _gaussian_g(a, x, 1e-6, 1e4)
    c.check('gaussian_oracle', abs(v - ref) / ref, abs(v - ref) <= 1e-5 * ref, {'a': a, 'x': x})
    d, tg = Domain(1, 2.0, 64), TimeGrid(1e-3, 1e-2, 4)
    cases = ((AnalyticFunction('LogAbs'), SquareFunctionParams(1e-6, 1e6, 8)),
             (AnalyticFunction('BoundedSine', amplitude=0.5, frequency=3.0), SquareFunctionParams(1e-4, 1e1, 8)))
    for f, sp in cases:
        ext = sp.extended(math.log10(2))
        sq, sq2 = gsquared_blo_check(f, d, tg, sp, p), gsquared_blo_check(f, d, tg, ext, p)
        lin, lin2 = g_blo_check(f, d, sp, p), g_blo_check(f, d, ext, p)
        tag = f.label()
        c.check('gsquared_ratio:' + tag, sq.blo_ratio, math.isfinite(sq.blo_ratio), {'s_max': sp.s_max}, sq.witness)
        c.check('gsquared_drift:' + tag, extension_drift(sq.blo_ratio, sq2.blo_ratio),
                extension_drift(sq.blo_ratio, sq2.blo_ratio) <= 0.05, {'factor': 2})
        c.check('g_ratio:' + tag, lin.blo_ratio, math.isfinite(lin.blo_ratio), {'s_max': sp.s_max}, lin.witness)
        c.check('g_drift:' + tag, extension_drift(lin.blo_ratio, lin2.blo_ratio),
                extension_drift(lin.blo_ratio, lin2.blo_ratio) <= 0.05, {'factor': 2})
        c.check('square_root_violations:' + tag, lin.violations, lin.passed and lin.chain_holds,
                {'balls': lin.balls_tested})


def pde_checks(cfg, c):
    p = cfg.build_heat()
    f = AnalyticFunction('NegLogAbs')
    blo = blo_norm(sample(f, Domain(1, 4.0, 1024))).value
    parts = [pde_sweep(f, [math.sqrt(t) * k / 4 for k in range(-8, 9)], [t], p) for t in TimeGrid(1e-3, 1.0, 4)]
    tab = pd.concat(parts, ignore_index=True)
    c.check('min_defect', tab['defect'].min(), (tab['defect'] >= 0).all(), {'rows': len(tab)})
    tab['decade'] = np.floor(np.log10(tab['t']) + 1e-9).clip(upper=-1)
    for col in ('defect', 'oscillation'):
        per = (tab.groupby('decade')[col].max() / blo).values
        drift = float(per.max() / per.min() - 1)
        c.check('%s_ratio' % col, per.max(), bool(np.all(np.isfinite(per))), {'decades': len(per)})
        c.check('%s_drift' % col, drift, drift <= 0.05, {'decades': len(per)})
    for g in (AnalyticFunction('Indicator', radius=1.0), AnalyticFunction('BoundedSine', amplitude=0.5, frequency=3.0)):
        ok = maximum_principle(g, solve_heat(g, 0.01, Domain(1, 2.0, 64), p))
        c.check('maximum_principle:' + g.label(), 0.0 if ok else 1.0, ok, {'t': 0.01})
    chain = midpoint_chain(f, 0.3, 0.01, p, pairs=cfg.pde['pairs'], rng=cfg.seed)
    c.check('midpoint_chain_failures', (~chain['holds']).sum(), chain['holds'].all(), {'pairs': len(chain),
            'seed': cfg.seed})
    osc = oscillation_chain(f, 0.3, 0.01, p)
    c.check('oscillation_chain', osc.oscillation, osc.holds, {'bound': osc.defect_bound})


def perturbation_checks(cfg, c):
    d = Domain(1, 2.0, 16)
    balls = enumerate_balls(d, dyadic_radii(d))
    neglog = AnalyticFunction('NegLogAbs')
    fs = (neglog, AnalyticFunction('Indicator', radius=1.0), AnalyticFunction('Constant', c=1.0),
          AnalyticFunction('Sum', base=neglog, bounded_part=AnalyticFunction('BoundedSine', amplitude=0.25,
                                                                             frequency=2.0)))
    gs = (AnalyticFunction('Constant', c=0.75), AnalyticFunction('BoundedSine', amplitude=0.5, frequency=3.0),
          AnalyticFunction('Indicator', center=0.5, radius=0.25))
    for f in fs:
        for g in gs:
            r = perturbation_check(f, g, balls, 'exact')
            c.check('slack:%s-%s' % (f.label(), g.label()), r.slack, r.passed and r.slack >= -1e-12,
                    {'lhs': r.lhs, 'rhs': r.rhs}, r.witness)


CRITERIA = (
    (1, 'interval defect of -ln|x| in three cases', interval_defect_exactness),
    (2, 'BLO norm of -ln|x| against its oracle', neglog_norm),
    (3, 'divergence of ln|x| on (-1/k, 1)', log_divergence),
    (4, 'heat engine correctness', heat_engine),
    (5, 'heat functional against BLO norm', heat_two_sidedness),
    (6, 'heat and maximal A1 constants', a1_chain),
    (7, 'N functional', n_functional_checks),
    (8, 'g-function of BMO functions', g_function_checks),
    (9, 'regularity of heat solutions', pde_checks),
    (10, 'bounded perturbations', perturbation_checks),
)


def reproduce(cfg, only=None):
    """ Runs the acceptance criteria (all, or the numbers in ``only``) and collects them in a ``Report``.

    A library error inside a criterion fails that criterion and the run moves on.

    Returns
    -------
    tuple
        ``(criteria, report)``
    """
    out = []
    report = Report('reproduce', cfg.digest())
    for number, title, run in CRITERIA:
        if only is not None and number not in only: continue
        c = Criterion(number, title)
        t0 = time.perf_counter()
        try:
            run(cfg, c)
        except BloError as e:
            logger.error('criterion %d: %s failed: %s', number, run.__name__, e)
            c.check('error:' + run.__name__, math.nan, False, {'message': str(e)})
        logger.info('%s (%.1f s)', c.line(), time.perf_counter() - t0)
        for q, v, par, wit, ok in c.rows:
            report.add('c%d.%s' % (number, q), v, par, wit, 'PASS' if ok else 'FAIL')
        out.append(c)
    return out, report
