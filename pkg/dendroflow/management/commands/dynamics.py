"""
Django management command to iterate the exact pruning maps
"""

import math

from django.core.management.base import CommandError

from dendroflow.chains import EhmcParams
from dendroflow.pruning_dynamics import (
    dss_residual,
    ehmc_to_gw,
    exponential_cf,
    gamma_cf,
    gw_p2_step,
    horizontal_probability,
    iterate_ehmc,
    uniform_cf,
)

from ._common import DendroflowCommand
from .simulate import parse_params

DENSITIES = {
    'exponential': lambda params: exponential_cf(params.get('lambda', 1.0)),
    'uniform': lambda params: uniform_cf(params.get('h', 1.0)),
    'gamma': lambda params: gamma_cf(params.get('shape', 2.0), params.get('scale', 1.0)),
}


class Command(DendroflowCommand):
    help = 'Iterate the pruning map of exponential-mixture chains or Galton-Watson trees'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            'mode',
            choices=['ehmc', 'gw', 'dss'],
            help='ehmc: chain parameters; gw: branching probability; dss: self-similarity residual',
        )
        parser.add_argument('--p', type=float, default=0.5, help='Up-jump probability (ehmc)')
        parser.add_argument('--lambda-u', type=float, default=1.0, help='Up-jump rate (ehmc)')
        parser.add_argument('--lambda-d', type=float, default=1.0, help='Down-jump rate (ehmc)')
        parser.add_argument('--p2', type=float, default=0.5, help='Branching probability (gw)')
        parser.add_argument('--steps', type=int, default=5, help='Number of prunings to iterate')
        parser.add_argument(
            '--density',
            choices=sorted(DENSITIES),
            default='exponential',
            help='Jump density for dss',
        )
        parser.add_argument(
            '--param',
            action='append',
            default=[],
            metavar='KEY=VALUE',
            help='Density parameter for dss: lambda, h, shape or scale',
        )

    def run(self, *args, **options):
        if options['steps'] < 0:
            raise CommandError(f"--steps cannot be negative: {options['steps']}", returncode=2)
        mode = options['mode']

        if mode == 'ehmc':
            e = EhmcParams(p=options['p'], lambda_u=options['lambda_u'], lambda_d=options['lambda_d'])
            rows = iterate_ehmc(e, options['steps'])
            for row in rows:
                row['eta_predicted'] = 1.0 / row['p_min'] if row['p_min'] > 0 else math.inf
                row['p_from_branching'] = horizontal_probability(e, row['m'])
            g = ehmc_to_gw(e)
            self.stderr.write(f"Excursion tree: binary Galton-Watson p2={g.p2:.12g}, mu={g.mu:.12g}")
            self.emit(options, 'dynamics_ehmc', rows=rows)
            return

        if mode == 'gw':
            p2 = options['p2']
            rows = []
            for m in range(options['steps'] + 1):
                rows.append({'m': m, 'p2': p2, 'p0': 1.0 - p2})
                p2 = gw_p2_step(p2)
            self.emit(options, 'dynamics_gw', rows=rows)
            return

        params = parse_params(options['param'])
        fhat = DENSITIES[options['density']](params)
        residual = dss_residual(fhat)
        self.emit(options, 'dss', rows=[{'density': fhat.name, 'residual': residual}])
