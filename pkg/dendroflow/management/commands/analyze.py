"""
Django management command to analyze a series or a tree file
"""

import logging

from django.core.management.base import CommandError

from dendroflow.exceptions import NonBinaryTreeError
from dendroflow.formats import (
    dump_tree,
    harris_csv,
    horton_rows,
    horton_summary,
    read_series,
    read_tree,
    tokunaga_rows,
)
from dendroflow.horton import (
    assign_orders,
    branch_decomposition,
    horton_stats,
    prune,
    tokunaga_matrix,
)
from dendroflow.level_set import level_set_tree, prune_series
from dendroflow.tree_core import contract

from ._common import DendroflowCommand

logger = logging.getLogger(__name__)


class Command(DendroflowCommand):
    help = 'Build the level-set tree of a series and report Horton and Tokunaga statistics'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            'input',
            type=str,
            help='Series CSV (one value column, or t,value) or, with --tree, a tree file',
        )
        parser.add_argument(
            '--tree',
            action='store_true',
            help='Read the input as a tree file instead of a series',
        )
        parser.add_argument(
            '--prune',
            type=int,
            default=0,
            metavar='K',
            help='Apply K prunings before analysis',
        )
        parser.add_argument(
            '--all-branches',
            action='store_true',
            help='Count incomplete (boundary) branches in the Tokunaga matrix',
        )
        parser.add_argument(
            '--name',
            type=str,
            default='analysis',
            help='Output file stem',
        )

    def run(self, *args, **options):
        k = options['prune']
        if k < 0:
            raise CommandError(f"--prune cannot be negative: {k}", returncode=2)

        if options['tree']:
            tree = read_tree(options['input'])
            for _ in range(k):
                tree = contract(prune(tree))
        else:
            series = read_series(options['input'])
            for _ in range(k):
                series = prune_series(series)
            logger.info(f"Analyzing {len(series)} values from {options['input']}")
            tree = level_set_tree(series)

        ordered = assign_orders(tree)
        branches = branch_decomposition(ordered)
        stats = horton_stats(branches)
        try:
            tokunaga = tokunaga_matrix(
                ordered, complete_only=not options['all_branches'], branches=branches
            )
        except NonBinaryTreeError as e:
            self.stderr.write(self.style.WARNING(f"Tokunaga matrix skipped: {e}"))
            tokunaga = None

        stem = options['name']
        if options['format'] == 'json':
            self.emit(
                options,
                stem,
                data={
                    'tree': dump_tree(tree),
                    'size': tree.size,
                    'summary': horton_summary(stats),
                    'horton': horton_rows(stats),
                    'tokunaga': tokunaga_rows(tokunaga) if tokunaga else None,
                },
            )
            return

        sections = [
            ('tree', dict(text=dump_tree(tree), extension='txt')),
            ('summary', dict(rows=[horton_summary(stats)])),
            ('horton', dict(rows=horton_rows(stats))),
        ]
        if tokunaga is not None:
            sections.append(('tokunaga', dict(rows=tokunaga_rows(tokunaga))))
        sections.append(('harris', dict(text=harris_csv(tree), extension='csv')))
        for section, payload in sections:
            if not options['out']:
                self.stdout.write(f"# {section}")
            self.emit(options, f"{stem}_{section}", **payload)
