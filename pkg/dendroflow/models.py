"""
Django models for experiment run history
"""

from django.db import models
from django.utils import timezone


class ExperimentRun(models.Model):
    """One execution of an experiment config, with its report."""

    OPERATION_CHOICES = [
        ('horton_tokunaga', 'Horton and Tokunaga laws'),
        ('forest', 'Forest of excursions'),
        ('basin_counts', 'Basin counts'),
        ('gw_equivalence', 'Galton-Watson shapes'),
        ('asymmetric_decay', 'Asymmetric decay'),
        ('fbm_conjecture', 'fBm conjecture'),
        ('pruning_commutation', 'Structural checks'),
        ('minima_jumps', 'Minima jumps'),
        ('dss', 'Self-similarity residual'),
    ]

    name = models.CharField(max_length=255)
    operation = models.CharField(max_length=30, choices=OPERATION_CHOICES)
    seed = models.BigIntegerField(default=0)
    source = models.CharField(max_length=500, blank=True)

    config = models.JSONField(default=dict, blank=True)
    report = models.JSONField(default=dict, blank=True)

    passed = models.BooleanField(default=False)
    partial = models.BooleanField(default=False)
    wall_time = models.FloatField(null=True, blank=True)

    # Timestamps
    created_at = models.DateTimeField(default=timezone.now)
    finished_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        ordering = ['-created_at']
        indexes = [
            models.Index(fields=['operation', 'created_at'], name='dendroflow_run_op_idx'),
            models.Index(fields=['name', 'created_at'], name='dendroflow_run_name_idx'),
        ]

    def __str__(self):
        status = 'passed' if self.passed else 'failed'
        return f"{self.name} ({self.operation}) - {status}"

    @classmethod
    def record(cls, report, seed=0, source=''):
        """Store a finished :class:`~dendroflow.experiments.ExperimentReport`."""
        from .formats import to_jsonable

        return cls.objects.create(
            name=report.name,
            operation=report.operation,
            seed=seed,
            source=source or '',
            config=to_jsonable(report.config),
            report=to_jsonable(report.to_dict()),
            passed=report.passed,
            partial=report.partial,
            wall_time=report.wall_time,
            finished_at=timezone.now(),
        )

    @property
    def failed_checks(self):
        """Names of the acceptance checks that did not pass."""
        return [check['name'] for check in self.report.get('checks', []) if not check.get('passed')]
