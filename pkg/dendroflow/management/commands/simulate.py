"""
Django management command to simulate chains, fBm paths and Galton-Watson trees
"""

from django.core.management.base import CommandError

from dendroflow.chains import (
    KERNEL_KEYS,
    GwParams,
    gen_chain,
    gen_fbm,
    gen_gw_tree,
    kernel_from_config,
    sample_excursion,
)
from dendroflow.formats import dump_tree, format_series_csv
from dendroflow.utils import get_dendroflow_setting, make_generator

from ._common import DendroflowCommand

PROCESSES = sorted(KERNEL_KEYS) + ['fbm', 'gw']


def parse_params(pairs):
    """Turn ``['sigma=1', 'p=0.3']`` into a dict of floats."""
    params = {}
    for pair in pairs or []:
        key, sep, value = pair.partition('=')
        if not sep or not key:
            raise CommandError(f"--param expects KEY=VALUE, got {pair!r}", returncode=2)
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise CommandError(f"--param {key} is not a number: {value!r}", returncode=2)
    return params


class Command(DendroflowCommand):
    help = 'Simulate a Markov chain, an fBm path or a Galton-Watson tree'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            'process',
            choices=PROCESSES,
            help='Process to simulate',
        )
        parser.add_argument(
            '--param',
            action='append',
            default=[],
            metavar='KEY=VALUE',
            help='Process parameter, e.g. sigma=1, p=0.3, H=0.7 or p2=0.5 (repeatable)',
        )
        parser.add_argument(
            '--length',
            type=int,
            default=1000,
            help='Chain length N, or the number of fBm increments (a power of two)',
        )
        parser.add_argument(
            '--excursion',
            action='store_true',
            help='Emit the first positive excursion of a fresh chain instead of the chain',
        )
        parser.add_argument(
            '--max-nodes',
            type=int,
            default=None,
            help='Node cap for Galton-Watson trees (default: the GW_MAX_NODES setting)',
        )
        parser.add_argument(
            '--name',
            type=str,
            default=None,
            help='Output file stem (default: the process name)',
        )

    def run(self, *args, **options):
        process = options['process']
        params = parse_params(options['param'])
        seed = options['seed'] or 0
        name = options['name'] or process

        if process == 'gw':
            g = GwParams(p2=params.pop('p2', 0.5), mu=params.pop('mu', 1.0))
            self._reject_extra(process, params)
            max_nodes = options['max_nodes'] or int(get_dendroflow_setting('GW_MAX_NODES'))
            tree = gen_gw_tree(g, max_nodes, seed)
            self.emit(options, name, text=dump_tree(tree), extension='txt')
            return

        if process == 'fbm':
            H = params.pop('H', 0.5)
            self._reject_extra(process, params)
            series = gen_fbm(H, options['length'], seed)
        else:
            kernel = kernel_from_config({'kind': process, **params})
            if options['excursion']:
                max_steps = int(get_dendroflow_setting('MAX_EXCURSION_STEPS'))
                series = sample_excursion(kernel, make_generator(seed), max_steps)
                if series is None:
                    raise CommandError(f"excursion still open after {max_steps} steps")
            else:
                series = gen_chain(kernel, options['length'], seed)

        if options['format'] == 'json':
            self.emit(options, name, data={'process': process, 'seed': seed, 'values': series.values})
        else:
            self.emit(options, name, text=format_series_csv(series), extension='csv')

    def _reject_extra(self, process, params):
        if params:
            raise CommandError(
                f"Unknown parameter(s) for {process}: {', '.join(sorted(params))}", returncode=2
            )
