"""
Django management command to run experiment config files
"""

import dataclasses
import logging

from django.core.management.base import CommandError
from django.db import DatabaseError

from dendroflow.experiments import load_config, run_experiment
from dendroflow.formats import dumps_json, write_report
from dendroflow.utils import get_dendroflow_setting

from ._common import DendroflowCommand

logger = logging.getLogger(__name__)


class Command(DendroflowCommand):
    help = 'Run experiment configs; exits nonzero when an acceptance check fails'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            'action',
            choices=['run', 'check'],
            help='run: execute the configs; check: validate them only',
        )
        parser.add_argument(
            'configs',
            nargs='+',
            help='Experiment .cfg files',
        )

    def run(self, *args, **options):
        configs = [load_config(path) for path in options['configs']]
        if options['action'] == 'check':
            for cfg in configs:
                self.stdout.write(self.style.SUCCESS(f"✓ {cfg.source}: {cfg.operation} ({cfg.name})"))
            return

        failed = []
        for cfg in configs:
            overrides = {}
            if options['seed'] is not None:
                overrides['seed'] = options['seed']
            if options['threads'] is not None:
                overrides['threads'] = options['threads']
            if overrides:
                cfg = dataclasses.replace(cfg, **overrides)

            report = run_experiment(cfg)
            if options['out']:
                for path in write_report(report, options['out']):
                    self.stdout.write(f"  {path}")
            else:
                self.stdout.write(dumps_json(report.to_dict()), ending='')

            if get_dendroflow_setting('SAVE_TO_DATABASE'):
                self.save_run(report, cfg)

            self.print_checks(report)
            if not report.passed:
                failed.append(report.name)

        if failed:
            raise CommandError(f"Acceptance checks failed: {', '.join(failed)}", returncode=1)

    def print_checks(self, report):
        """Print one line per acceptance check."""
        label = f"{report.name} [{report.operation}]"
        if report.partial:
            self.stdout.write(self.style.WARNING(f"! {label}: partial result"))
        for check in report.checks:
            line = f"{label} {check.name} = {check.value:.6g} (expected {check.expected})"
            if check.passed:
                self.stdout.write(self.style.SUCCESS(f"✓ {line}"))
            else:
                self.stdout.write(self.style.ERROR(f"✗ {line}"))
        for note in report.notes:
            self.stdout.write(f"  note: {note}")

    def save_run(self, report, cfg):
        """Record the run; a missing table is reported, not fatal."""
        from dendroflow.models import ExperimentRun

        try:
            ExperimentRun.record(report, seed=cfg.seed, source=cfg.source or '')
        except DatabaseError as e:
            logger.warning(f"Could not record run {report.name}: {e}")
            self.stderr.write(self.style.WARNING(f"Run history not saved ({e}); run 'migrate' first"))
