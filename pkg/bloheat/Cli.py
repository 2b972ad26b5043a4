import sys
import argparse

try: from bloheat.Acceptance import *  # production:  if bloheat package is installed
except ImportError:   from Acceptance import *  # development: if not installed and running from source

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2
COMMANDS = ('norms', 'heat-char', 'weights', 'nfunc', 'gfunc', 'pde', 'example-neglog', 'reproduce')


class _Step:
    """ Records on the report the library operation running inside a subcommand, for the error message."""
    def __init__(self, report, op): self.report, self.op = report, op

    def __enter__(self): self.report.step = self.op

    def __exit__(self, *exc): return False


def _centers(cfg, d):
    """ ``pde.centers`` points per axis, evenly spread over the middle half of the box."""
    u = np.linspace(-d.L / 2, d.L / 2, cfg.pde['centers'])
    if d.n == 1: return [(float(v),) for v in u]
    return [(float(a), float(b)) for a in u for b in u]


def _setup(cfg):
    return cfg.build_function(), cfg.build_domain(), cfg.build_time_grid(), cfg.build_heat()


def cmd_norms(cfg, report):
    f, d, tg, p = _setup(cfg)
    radii, margin = cfg.build_radii(d), cfg.radii['margin']
    with _Step(report, 'sample'): g = sample(f, d)
    with _Step(report, 'blo_norm'): report.add_result(blo_norm(g, radii=radii, margin=margin), parameters={'function': f.label()})
    with _Step(report, 'bmo_norm'): report.add_result(bmo_norm(g, radii=radii, margin=margin), parameters={'function': f.label()})
    with _Step(report, 'bennett_blo_functional'):
        report.add_result(bennett_blo_functional(f, d, margin=margin), parameters={'function': f.label()})
    return True


def cmd_heat_char(cfg, report):
    f, d, tg, p = _setup(cfg)
    with _Step(report, 'blo_norm'): blo = blo_norm(sample(f, d), radii=cfg.build_radii(d), margin=cfg.radii['margin'])
    with _Step(report, 'heat_blo_functional'): heat = heat_blo_functional(f, tg, _centers(cfg, d), p)
    report.add_result(blo, parameters={'function': f.label()})
    report.add_result(heat, parameters={'function': f.label()})
    report.add('heat_over_blo', heat.value / blo.value if blo.value > 0 else 0.0,
               {'function': f.label(), 't_min': tg.t_min, 't_max': tg.t_max}, heat.witness)
    return True


def cmd_weights(cfg, report):
    f, d, tg, p = _setup(cfg)
    for eps in cfg.epsilon_grid:
        w = WeightFunction(f, eps)
        try:
            with _Step(report, 'a1_constant_maximal'): mx = a1_constant_maximal(w, d, margin=cfg.radii['margin'])
            with _Step(report, 'a1_constant_heat'): heat = a1_constant_heat(w, tg, d, p)
        except (NumericError, InputError) as e:
            logger.warning('epsilon %g skipped: %s', eps, e)
            continue
        report.add_result(mx, parameters={'epsilon': eps})
        report.add_result(heat, parameters={'epsilon': eps})
    with _Step(report, 'exp_a1_probe'):
        eps, est = exp_a1_probe(f, cfg.epsilon_grid, cfg.weights['threshold'], d,
                                refinements=cfg.weights['refinements'])
    report.add('exp_a1_probe', est.constant, {'epsilon': eps, 'threshold': cfg.weights['threshold'],
                                              'growth': est.growth}, est.witness)
    with _Step(report, 'a1_characterization'):
        ch = a1_characterization(f, d, cfg.epsilon_grid, tg, p, cfg.weights['threshold'], cfg.build_radii(d))
    report.add('a1_characterization', float(ch.verdict), {k: v for k, v in vars(ch).items()
                                                          if not k.startswith('_') and k not in ('name', 'verdict')})
    return True


def cmd_nfunc(cfg, report):
    f, d, tg, p = _setup(cfg)
    with _Step(report, 'n_functional'): nf = n_functional(f, cfg.epsilon_grid, tg, d, p)
    with _Step(report, 'blo_norm'): blo = blo_norm(sample(f, d), radii=cfg.build_radii(d), margin=cfg.radii['margin'])
    report.add('n_functional', nf.value, {'best_epsilon': nf.best_epsilon, 'best_C0': nf.best_C0,
                                          'epsilon_grid': nf.epsilon_grid, 'C0': nf.C0, 'function': nf.function})
    report.add_result(blo, parameters={'function': f.label()})
    report.add('n_over_blo', nf.value / blo.value if blo.value > 0 else 0.0, {'function': f.label()}, blo.witness)
    return True


def cmd_gfunc(cfg, report):
    f, d, tg, p = _setup(cfg)
    sp, radii = cfg.build_square_function(), cfg.build_radii(d)
    with _Step(report, 'g_function'):
        for x in _centers(cfg, d):
            if f.hits_singularity(np.array([x]))[0]: continue
            r = g_function(f, x, sp, p, full=True)
            report.add('g_function', r.value, {'lower_tail': r.lower_tail, 'upper_tail': r.upper_tail,
                                               's_min': sp.s_min, 's_max': sp.s_max}, {'x': r.x}, 'truncated')
    with _Step(report, 'gsquared_blo_check'): sq = gsquared_blo_check(f, d, tg, sp, p, radii)
    report.add_result(sq, 'gsquared_blo_ratio', field='blo_ratio')
    with _Step(report, 'tdt_kernel_bounds'): kb = tdt_kernel_bounds(f, d, sp, p, radii, rng=cfg.seed)
    report.add('tdt_pointwise_constant', kb.pointwise_constant, {'extended': kb.pointwise_extended},
               flags='' if kb.pointwise_stable else 'unstable')
    report.add('tdt_lipschitz_constant', kb.lipschitz_constant, {'pairs': kb.pairs, 'seed': cfg.seed}, kb.witness)
    with _Step(report, 'g_blo_check'): chk = g_blo_check(f, d, sp, p, radii)
    report.add_result(chk, 'g_blo_ratio', flags='' if chk.passed else 'violations', field='blo_ratio')
    return chk.passed


def cmd_pde(cfg, report):
    f, d, tg, p = _setup(cfg)
    with _Step(report, 'pde_sweep'): tab = pde_sweep(f, _centers(cfg, d), tg, p)
    for t, part in tab.groupby('t', sort=True):
        for col in ('defect', 'oscillation'):
            i = part[col].idxmax()
            x = [part['x'][i]] + ([part['y'][i]] if 'y' in part else [])
            report.add('max_' + col, part[col][i], {'t': t, 'centers': len(part)}, {'x': x, 't': t})
    ok = bool((tab['defect'] >= 0).all())
    if f.is_Linfty:
        with _Step(report, 'maximum_principle'): mp = maximum_principle(f, solve_heat(f, tg.t_min, d, p))
        report.add('maximum_principle', float(mp), {'t': tg.t_min}, flags='' if mp else 'violated')
        ok = ok and mp
    x0 = _centers(cfg, d)[0]
    with _Step(report, 'midpoint_chain'):
        chain = midpoint_chain(f, x0, tg.t_min, p, pairs=cfg.pde['pairs'], rng=cfg.seed)
    report.add('midpoint_chain_failures', float((~chain['holds']).sum()),
               {'pairs': len(chain), 'seed': cfg.seed}, {'x': list(x0), 't': tg.t_min})
    return ok and bool(chain['holds'].all())


def cmd_example_neglog(cfg, report):
    with _Step(report, 'interval_defect'): tab = neglog_interval_table(200, cfg.seed)
    report.table = tab
    worst = float(tab['abs_error'].max())
    if worst > cfg.tolerance: logger.error('largest grid error %.3g exceeds tolerance %.3g', worst, cfg.tolerance)
    return worst <= cfg.tolerance


def cmd_reproduce(cfg, report):
    crit, rep = reproduce(cfg)
    for c in crit: print(c.line())
    report.rows = rep.rows
    return all(c.passed for c in crit)


HANDLERS = {'norms': cmd_norms, 'heat-char': cmd_heat_char, 'weights': cmd_weights, 'nfunc': cmd_nfunc,
            'gfunc': cmd_gfunc, 'pde': cmd_pde, 'example-neglog': cmd_example_neglog, 'reproduce': cmd_reproduce}


def run(config_path=None, subcommand='reproduce', output=None, fmt=None, threads=None, seed=None):
    """ Runs one subcommand against a configuration and writes its report.

    ``reproduce`` prints one PASS/FAIL line per criterion on standard output and writes its report only to a file
    (``--output`` or ``output.path``).

    Returns
    -------
    int
        0 on success, 1 on a library error or a failed check, 2 on an invalid configuration
    """
    if subcommand not in HANDLERS: raise InputError('unknown subcommand %r' % (subcommand,))
    overrides = {}
    if output is not None or fmt is not None:
        overrides['output'] = {k: v for k, v in (('path', output), ('format', fmt)) if v is not None}
    if threads is not None: overrides['threads'] = threads
    if seed is not None: overrides['seed'] = seed
    try:
        cfg = ExperimentConfig(config_path, overrides)
    except ConfigError as e:
        logger.error('invalid configuration %s: %s', config_path or 'default', e)
        print('bloheat: config error: %s' % e, file=sys.stderr)
        return EXIT_CONFIG
    Util.threads = cfg.threads
    report = Report(subcommand, cfg.digest())
    try:
        ok = HANDLERS[subcommand](cfg, report)
    except BloError as e:
        op = report.step or subcommand
        logger.error('%s failed in %s: %s', subcommand, op, e)
        print('bloheat: %s failed in %s: %s' % (subcommand, op, e), file=sys.stderr)
        return EXIT_FAILED
    path, fmt = cfg.output['path'], cfg.output['format']
    if subcommand != 'reproduce' or path is not None:
        report.write(path, fmt)
    if not ok: logger.warning('%s: at least one check failed', subcommand)
    return EXIT_OK if ok else EXIT_FAILED


def parser():
    p = argparse.ArgumentParser(prog='bloheat', description='Heat-semigroup experiments on BLO functions')
    p.add_argument('--config', default=None, help='YAML experiment file merged over the defaults')
    p.add_argument('--output', default=None, help='report path (standard output if omitted)')
    p.add_argument('--format', dest='fmt', choices=('csv', 'json'), default=None)
    p.add_argument('--threads', type=int, default=None)
    p.add_argument('--seed', type=int, default=None)
    p.add_argument('-v', '--verbose', action='count', default=0, help='-v for INFO, -vv for DEBUG')
    p.add_argument('command', choices=COMMANDS)
    return p


def main(argv=None):
    args = parser().parse_args(argv)
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, stream=sys.stderr, format='%(asctime)s %(name)s %(levelname)s %(message)s')
    return run(args.config, args.command, args.output, args.fmt, args.threads, args.seed)


if __name__ == '__main__':
    sys.exit(main())
