"""
Django management command to prune a series or a tree
"""

from django.core.management.base import CommandError

from dendroflow.formats import dump_tree, format_series_csv, read_series, read_tree
from dendroflow.horton import prune
from dendroflow.level_set import prune_series
from dendroflow.tree_core import contract

from ._common import DendroflowCommand


class Command(DendroflowCommand):
    help = 'Replace a series by its local minima (or prune a tree) K times'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            'input',
            type=str,
            help='Series CSV or, with --tree, a tree file',
        )
        parser.add_argument(
            '--tree',
            action='store_true',
            help='Read the input as a tree file and prune the tree',
        )
        parser.add_argument(
            '--times',
            type=int,
            default=1,
            metavar='K',
            help='Number of prunings (default 1)',
        )
        parser.add_argument(
            '--name',
            type=str,
            default='pruned',
            help='Output file stem',
        )

    def run(self, *args, **options):
        times = options['times']
        if times < 0:
            raise CommandError(f"--times cannot be negative: {times}", returncode=2)

        if options['tree']:
            tree = read_tree(options['input'])
            for _ in range(times):
                tree = contract(prune(tree))
            self.emit(options, options['name'], text=dump_tree(tree), extension='txt')
            return

        series = read_series(options['input'])
        for _ in range(times):
            series = prune_series(series)
        if options['format'] == 'json':
            self.emit(options, options['name'], data={'values': series.values})
        else:
            self.emit(options, options['name'], text=format_series_csv(series), extension='csv')
