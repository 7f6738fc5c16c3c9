"""
Tests for dendroflow.models module
"""

from django.test import TestCase

from dendroflow.experiments import CheckResult, Estimate, ExperimentReport
from dendroflow.models import ExperimentRun


def make_report(passed=True):
    return ExperimentReport(
        name='basins',
        operation='basin_counts',
        config={'name': 'basins', 'seed': 5},
        estimates={'basins_2_1': Estimate(4.02, 0.03, 1200)},
        checks=(
            CheckResult('basins_2_1', '4 +/- 0.1', 4.02, True),
            CheckResult('basins_3_1', '16 +/- 0.5', float('nan'), passed),
        ),
        wall_time=1.25,
    )


class TestExperimentRun(TestCase):
    """Test the run history model"""

    def test_record(self):
        """Test storing a finished report"""
        run = ExperimentRun.record(make_report(), seed=5, source='configs/acceptance_basins.cfg')
        run.refresh_from_db()
        self.assertEqual(run.name, 'basins')
        self.assertEqual(run.operation, 'basin_counts')
        self.assertEqual(run.seed, 5)
        self.assertTrue(run.passed)
        self.assertFalse(run.partial)
        self.assertEqual(run.wall_time, 1.25)
        self.assertIsNotNone(run.finished_at)
        self.assertEqual(run.config, {'name': 'basins', 'seed': 5})
        self.assertEqual(run.report['estimates']['basins_2_1'], {'value': 4.02, 'stderr': 0.03, 'n': 1200})
        self.assertIsNone(run.report['checks'][1]['value'])

    def test_failed_checks(self):
        """Test the names of failed checks"""
        run = ExperimentRun.record(make_report(passed=False))
        self.assertFalse(run.passed)
        self.assertEqual(run.failed_checks, ['basins_3_1'])
        self.assertEqual(ExperimentRun.record(make_report()).failed_checks, [])

    def test_str(self):
        """Test the string form"""
        self.assertEqual(str(ExperimentRun.record(make_report())), 'basins (basin_counts) - passed')
        self.assertEqual(str(ExperimentRun.record(make_report(False))), 'basins (basin_counts) - failed')
