"""
Shared plumbing for the dendroflow management commands
"""

import os

from django.core.management.base import BaseCommand, CommandError

from dendroflow.exceptions import DendroflowError
from dendroflow.formats import dumps_json, rows_to_csv, write_text
from dendroflow.utils import get_dendroflow_setting


class DendroflowCommand(BaseCommand):
    """
    Base command: common flags and translation of dendroflow errors.

    Subclasses implement ``run(**options)`` instead of ``handle``.
    """

    def add_arguments(self, parser):
        parser.add_argument(
            '--seed',
            type=int,
            default=None,
            help='Master seed (non-negative integer)',
        )
        parser.add_argument(
            '--threads',
            type=int,
            default=None,
            help='Worker processes; falls back to DENDROFLOW_THREADS, then the THREADS setting (0 = one per CPU)',
        )
        parser.add_argument(
            '--format',
            choices=['csv', 'json'],
            default=None,
            help='Output format (default: the FORMAT setting, csv)',
        )
        parser.add_argument(
            '--out',
            type=str,
            default=None,
            help='Output directory; results go to stdout when omitted',
        )

    def handle(self, *args, **options):
        """Handle the command execution."""
        if options.get('threads') is not None and options['threads'] < 0:
            raise CommandError(f"--threads cannot be negative: {options['threads']}", returncode=2)
        if options.get('seed') is not None and options['seed'] < 0:
            raise CommandError(f"--seed must be non-negative: {options['seed']}", returncode=2)
        options['format'] = options.get('format') or get_dendroflow_setting('FORMAT')
        try:
            self.run(*args, **options)
        except DendroflowError as e:
            raise CommandError(str(e), returncode=e.exit_code)

    def run(self, *args, **options):
        raise NotImplementedError

    def emit(self, options, name, rows=None, data=None, text=None, extension='txt'):
        """
        Write one result either to ``<out>/<name>.<ext>`` or to stdout.

        ``rows`` render as CSV or JSON according to ``--format``; ``data`` is
        always JSON and ``text`` is written as is.
        """
        if text is None:
            if rows is not None and options['format'] == 'csv':
                text, extension = rows_to_csv(rows), 'csv'
            else:
                text, extension = dumps_json(rows if rows is not None else data), 'json'

        out = options.get('out')
        if out:
            path = write_text(os.path.join(out, f"{name}.{extension}"), text)
            self.stdout.write(self.style.SUCCESS(f"✓ Wrote {path}"))
            return path
        self.stdout.write(text, ending='')
        return None
