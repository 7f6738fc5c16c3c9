"""
Tests for dendroflow.experiments module
"""

import glob
import math
import os
import tempfile

from django.test import SimpleTestCase, override_settings

from dendroflow.chains import EhmcParams, ExponentialMixtureKernel, GaussianKernel
from dendroflow.exceptions import DendroflowValidationError, ExperimentConfigError
from dendroflow.experiments import (
    OTHER_SHAPES,
    SINGLE_LEAF,
    AcceptanceCheck,
    Estimate,
    ExperimentConfig,
    _excursion_shape_task,
    config_from_sections,
    conjectured_c,
    conjectured_eta,
    evaluate_checks,
    fit_tokunaga,
    load_config,
    ordering_chain_holds,
    parse_check,
    ratio_estimate,
    run_experiment,
    side_branch_counts,
)
from dendroflow.horton import assign_orders, tokunaga_matrix
from dendroflow.level_set import level_set_tree

CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'configs')
NESTED = [9, 2, 8, 4, 9, 1, 9, 3, 9, 5, 9]


def sections(operation='horton_tokunaga', process=None, **experiment):
    result = {'experiment': {'operation': operation, **experiment}}
    if process is not None:
        result['process'] = process
    return result


class TestConfigParsing(SimpleTestCase):
    """Test experiment config validation"""

    def test_minimal_config(self):
        """Test defaults and settings-driven fills"""
        cfg = config_from_sections(sections(process={'kind': 'gaussian', 'sigma': '2'}))
        self.assertEqual(cfg.name, 'horton_tokunaga')
        self.assertEqual(cfg.kernel, GaussianKernel(2.0))
        self.assertEqual(cfg.batches, 20)
        self.assertEqual(cfg.max_steps, 100000)
        self.assertEqual(cfg.length, 10000)
        self.assertTrue(cfg.complete_only)
        self.assertEqual(cfg.checks, ())

    @override_settings(DENDROFLOW_BATCHES=8, DENDROFLOW_MAX_EXCURSION_STEPS=500)
    def test_settings_fill_missing_fields(self):
        """Test batches and max_steps taken from settings"""
        cfg = config_from_sections(sections('dss'))
        self.assertEqual(cfg.batches, 8)
        self.assertEqual(cfg.max_steps, 500)
        cfg = config_from_sections(sections('dss', batches='3'))
        self.assertEqual(cfg.batches, 3)

    def test_typed_fields(self):
        """Test integer, boolean and choice fields"""
        cfg = config_from_sections(
            sections(
                'forest',
                process={'kind': 'ehmc', 'p': '0.4'},
                excursions='50',
                complete_only='no',
                forest_mode='ladder',
                seed='0',
                threads='2',
            )
        )
        self.assertEqual(cfg.excursions, 50)
        self.assertFalse(cfg.complete_only)
        self.assertEqual(cfg.forest_mode, 'ladder')
        self.assertEqual(cfg.threads, 2)
        self.assertEqual(cfg.kernel, ExponentialMixtureKernel(EhmcParams(0.4, 1.0, 1.0)))

    def test_schema_errors(self):
        """Test the message for each kind of invalid field"""
        gaussian = {'kind': 'gaussian'}
        cases = [
            ({'experiment': {}}, "experiment.operation: required"),
            (sections(process=gaussian, length='-5'), "experiment.length: must be a positive integer, got '-5'"),
            (sections(process=gaussian, length='abc'), "experiment.length: must be an integer, got 'abc'"),
            ({**sections(process=gaussian), 'foo': {}}, "[foo]: unknown section"),
            (sections(process=gaussian, key='1'), "experiment.key: unknown field"),
            (sections(), "[process]: required"),
            (sections('fbm_conjecture', process={'kind': 'fbm', 'H': '1.5'}, length='1024'), "process.H: must lie in (0, 1), got '1.5'"),
            (sections('fbm_conjecture', process=gaussian, length='1024'), "process.kind: fbm_conjecture needs kind = fbm"),
            (sections(process={'kind': 'fbm', 'H': '0.5'}), "process.kind: fbm is only valid for fbm_conjecture, not horton_tokunaga"),
            (sections('gw_equivalence', process=gaussian), "process.kind: gw_equivalence needs kind = ehmc"),
            (sections('fbm_conjecture', process={'kind': 'fbm', 'H': '0.5'}, length='1000'), "experiment.length: fBm paths need a power of two, got 1000"),
        ]
        for raw, message in cases:
            with self.subTest(message=message):
                with self.assertRaises(ExperimentConfigError) as ctx:
                    config_from_sections(raw)
                self.assertIn(message, ctx.exception.errors)
                self.assertEqual(ctx.exception.exit_code, 2)

    def test_errors_are_collected(self):
        """Test that every invalid field is reported at once"""
        raw = sections(process={'kind': 'cauchy'}, length='0', seed='-1')
        raw['acceptance'] = {'eta_1': 'about four'}
        with self.assertRaises(ExperimentConfigError) as ctx:
            config_from_sections(raw, source='bad.cfg')
        errors = ctx.exception.errors
        self.assertEqual(len(errors), 4)
        self.assertTrue(any(error.startswith('acceptance.eta_1:') for error in errors))
        self.assertTrue(any(error.startswith('process:') for error in errors))
        self.assertIn('bad.cfg', str(ctx.exception))
        self.assertEqual(ctx.exception.detail, {'source': 'bad.cfg'})

    def test_acceptance_section(self):
        """Test that acceptance lines become checks"""
        raw = sections(process={'kind': 'gaussian'})
        raw['acceptance'] = {'eta_1': '4 +/- 0.2', 'T_1_2': '> 0.5'}
        cfg = config_from_sections(raw)
        self.assertEqual(
            cfg.checks,
            (AcceptanceCheck('eta_1', 'range', 4.0, 0.2), AcceptanceCheck('T_1_2', 'gt', 0.5)),
        )
        self.assertEqual(cfg.to_dict()['checks'], {'eta_1': '4 +/- 0.2', 'T_1_2': '> 0.5'})

    def test_to_dict_process(self):
        """Test the process echo for kernels, fBm and no process"""
        cfg = config_from_sections(sections(process={'kind': 'laplace', 'lambda': '2'}))
        self.assertEqual(cfg.to_dict()['process'], {'kind': 'laplace', 'lambda': 2.0})
        cfg = config_from_sections(sections('fbm_conjecture', process={'kind': 'fbm', 'H': '0.3'}, length='64'))
        self.assertEqual(cfg.to_dict()['process'], {'kind': 'fbm', 'H': 0.3})
        self.assertIsNone(config_from_sections(sections('dss')).to_dict()['process'])


class TestParseCheck(SimpleTestCase):
    """Test acceptance line parsing"""

    def test_forms(self):
        """Test the three accepted forms"""
        self.assertEqual(parse_check('x', '4 +/- 0.2'), AcceptanceCheck('x', 'range', 4.0, 0.2))
        self.assertEqual(parse_check('x', '> 0.01'), AcceptanceCheck('x', 'gt', 0.01))
        self.assertEqual(parse_check('x', '<1e-12'), AcceptanceCheck('x', 'lt', 1e-12))

    def test_invalid(self):
        """Test lines that are rejected"""
        for raw in ('4', '4 +/- -1', '>= 3', '', 'four +/- 1'):
            with self.subTest(raw=raw):
                with self.assertRaises(ValueError):
                    parse_check('x', raw)

    def test_describe_and_holds(self):
        """Test tolerance text and evaluation"""
        check = AcceptanceCheck('x', 'range', 4.0, 0.2)
        self.assertEqual(check.describe(), '4 +/- 0.2')
        self.assertTrue(check.holds(4.1))
        self.assertFalse(check.holds(4.3))
        self.assertFalse(check.holds(math.nan))
        bound = AcceptanceCheck('x', 'gt', 0.01)
        self.assertEqual(bound.describe(), '> 0.01')
        self.assertFalse(bound.holds(0.01))
        self.assertTrue(AcceptanceCheck('x', 'lt', 1.0).holds(0.5))


class TestLoadConfig(SimpleTestCase):
    """Test reading config files"""

    def test_shipped_configs(self):
        """Test that every shipped config loads"""
        paths = sorted(glob.glob(os.path.join(CONFIG_DIR, '*.cfg')))
        self.assertGreater(len(paths), 0)
        for path in paths:
            with self.subTest(config=os.path.basename(path)):
                cfg = load_config(path)
                self.assertEqual(cfg.source, path)

    def test_missing_file(self):
        """Test a path that does not exist"""
        with self.assertRaises(ExperimentConfigError) as ctx:
            load_config('/nonexistent/experiment.cfg')
        self.assertTrue(ctx.exception.errors[0].startswith('cannot read file'))

    def test_malformed_and_invalid_files(self):
        """Test syntax errors and schema errors from disk"""
        with tempfile.TemporaryDirectory() as directory:
            malformed = os.path.join(directory, 'malformed.cfg')
            with open(malformed, 'w', encoding='utf-8') as fh:
                fh.write("operation = dss\n")
            with self.assertRaises(ExperimentConfigError) as ctx:
                load_config(malformed)
            self.assertTrue(ctx.exception.errors[0].startswith('malformed file'))

            invalid = os.path.join(directory, 'invalid.cfg')
            with open(invalid, 'w', encoding='utf-8') as fh:
                fh.write("[experiment]\noperation = horton_tokunaga\nlength = -5\n\n[process]\nkind = gaussian\n")
            with self.assertRaises(ExperimentConfigError) as ctx:
                load_config(invalid)
            self.assertEqual(ctx.exception.errors, ["experiment.length: must be a positive integer, got '-5'"])

    def test_shipped_branch_counting(self):
        """Test which shipped configs count incomplete branches"""
        self.assertTrue(ExperimentConfig().complete_only)
        self.assertTrue(load_config(os.path.join(CONFIG_DIR, 'acceptance_horton_tokunaga.cfg')).complete_only)
        for name in ('acceptance_forest.cfg', 'fbm_h03.cfg', 'fbm_h05.cfg', 'fbm_h07.cfg'):
            with self.subTest(name=name):
                self.assertFalse(load_config(os.path.join(CONFIG_DIR, name)).complete_only)


class TestEstimators(SimpleTestCase):
    """Test estimates and checks"""

    def test_ratio_estimate(self):
        """Test the ratio of sums and its batch standard error"""
        estimate = ratio_estimate([3, 5], [1, 1])
        self.assertEqual(estimate.value, 4.0)
        self.assertAlmostEqual(estimate.stderr, 1.0)
        self.assertEqual(estimate.n, 2)

    def test_ratio_estimate_empty_denominator(self):
        """Test nan values without denominators"""
        estimate = ratio_estimate([1, 2], [0, 0])
        self.assertTrue(math.isnan(estimate.value))
        self.assertEqual(estimate.n, 0)
        single = ratio_estimate([6, 1], [2, 0])
        self.assertEqual(single.value, 3.5)
        self.assertTrue(math.isnan(single.stderr))

    def test_interval(self):
        """Test the normal interval"""
        low, high = Estimate(2.0, 0.5, 10).interval
        self.assertAlmostEqual(low, 1.02)
        self.assertAlmostEqual(high, 2.98)

    def test_evaluate_checks(self):
        """Test passing, failing and missing estimates"""
        checks = (
            AcceptanceCheck('a', 'range', 1.0, 0.5),
            AcceptanceCheck('b', 'gt', 3.0),
            AcceptanceCheck('missing', 'lt', 1.0),
        )
        estimates = {'a': Estimate(1.2), 'b': Estimate(2.0)}
        with self.assertLogs('dendroflow.experiments', level='WARNING') as logs:
            results = evaluate_checks(checks, estimates)
        self.assertEqual([r.passed for r in results], [True, False, False])
        self.assertTrue(math.isnan(results[2].value))
        self.assertIn('missing', logs.output[0])

    def test_fit_tokunaga(self):
        """Test the geometric fit of pooled coefficients"""
        a, c = fit_tokunaga({1: 1.0, 2: 2.0, 3: 4.0})
        self.assertAlmostEqual(a, 1.0)
        self.assertAlmostEqual(c, 2.0)
        self.assertTrue(math.isnan(fit_tokunaga({1: 1.0})[1]))

    def test_conjecture(self):
        """Test the conjectured fBm values"""
        self.assertEqual(conjectured_c(0.5), 2.0)
        self.assertAlmostEqual(conjectured_eta(0.5), 4.0)
        self.assertAlmostEqual(conjectured_eta(0.3), 2.3 + math.sqrt(2.09))


class TestSeriesSideCounts(SimpleTestCase):
    """Test side-branch classification on the series"""

    def test_nested_example(self):
        """Test series-side counts against the tree"""
        counts = side_branch_counts(NESTED)
        self.assertEqual(counts, {(1, 2): 2})
        tm = tokunaga_matrix(assign_orders(level_set_tree(NESTED)), complete_only=False)
        self.assertEqual(counts, tm.side_counts)
        self.assertTrue(ordering_chain_holds(NESTED))

    def test_monotone_series(self):
        """Test series without minima"""
        self.assertEqual(side_branch_counts([0, 1, 2]), {})
        self.assertTrue(ordering_chain_holds([0, 1, 2]))


class TestRuns(SimpleTestCase):
    """Small runs of every operation"""

    def run_config(self, **kwargs):
        kwargs.setdefault('seed', 7)
        kwargs.setdefault('batches', 4)
        kwargs.setdefault('threads', 1)
        return run_experiment(ExperimentConfig(**kwargs))

    def test_dss(self):
        """Test self-similarity residuals"""
        report = self.run_config(
            operation='dss',
            checks=(AcceptanceCheck('residual_exponential', 'lt', 1e-12), AcceptanceCheck('residual_uniform', 'gt', 1e-2)),
        )
        self.assertEqual(
            set(report.estimates),
            {'residual_exponential', 'residual_exponential_rate_3', 'residual_uniform', 'residual_gamma_2'},
        )
        self.assertTrue(report.passed)
        self.assertGreater(report.wall_time, 0.0)

    def test_pruning_commutation(self):
        """Test that structural checks never fail"""
        report = self.run_config(operation='pruning_commutation', kernel=GaussianKernel(), length=300, replicates=20)
        for key in ('commutation', 'orders', 'merges', 'side_branches', 'ordering'):
            with self.subTest(check=key):
                self.assertEqual(report.estimates[f'{key}_failures'].value, 0.0)

    def test_horton_tokunaga(self):
        """Test Horton ratios and the local maxima count"""
        report = self.run_config(
            operation='horton_tokunaga', kernel=GaussianKernel(), length=4000, replicates=8, max_order=3
        )
        self.assertEqual(report.estimates['maxima_expected'].value, 999.5)
        self.assertAlmostEqual(report.estimates['maxima_mean'].value, 999.5, delta=60)
        self.assertTrue(3.0 < report.estimates['eta_1'].value < 5.0)
        self.assertIn('T_1_2', report.estimates)
        self.assertEqual(report.tables['branches'][0]['order'], 1)
        self.assertEqual(report.notes, [])

    def test_asymmetric_kernel_note(self):
        """Test the warning for an asymmetric kernel"""
        kernel = ExponentialMixtureKernel(EhmcParams(0.4, 1.0, 1.0))
        with self.assertLogs('dendroflow.experiments', level='WARNING'):
            report = self.run_config(operation='horton_tokunaga', kernel=kernel, length=500, replicates=4)
        self.assertIn('not symmetric', report.notes[0])

    def test_forest_modes(self):
        """Test both forest modes on a downward-drifting chain"""
        kernel = ExponentialMixtureKernel(EhmcParams(0.4, 1.0, 1.0))
        for mode in ('independent', 'ladder'):
            with self.subTest(mode=mode):
                report = self.run_config(
                    operation='forest',
                    kernel=kernel,
                    forest_mode=mode,
                    excursions=200,
                    length=200000,
                    complete_only=False,
                )
                self.assertFalse(report.partial)
                self.assertEqual(report.estimates['excursions'].value, 200.0)
                self.assertIn('eta_1', report.estimates)

    def test_forest_partial(self):
        """Test that a short ladder path flags the report partial"""
        kernel = ExponentialMixtureKernel(EhmcParams(0.4, 1.0, 1.0))
        report = self.run_config(operation='forest', kernel=kernel, forest_mode='ladder', excursions=1000, length=100)
        self.assertTrue(report.partial)
        self.assertLess(report.estimates['excursions'].value, 1000)

    def test_basin_counts(self):
        """Test order-1 basins per order-2 basin"""
        report = self.run_config(
            operation='basin_counts', kernel=GaussianKernel(), length=5000, replicates=4, max_order=3
        )
        per_basin = report.estimates['basins_2_1']
        self.assertTrue(2.0 < per_basin.value < 6.0)
        self.assertAlmostEqual(report.estimates['interior_minima_2'].value, per_basin.value - 1.0)
        self.assertEqual(report.tables['basins'][0]['predicted'], 4)

    def test_gw_equivalence(self):
        """Test excursion shapes against the critical law"""
        report = self.run_config(
            operation='gw_equivalence',
            kernel=ExponentialMixtureKernel(),
            excursions=400,
            max_leaves=3,
            min_cell_count=5,
            max_steps=10000,
        )
        self.assertEqual(report.estimates['p0_expected'].value, 0.5)
        self.assertAlmostEqual(report.estimates['p_single_leaf'].value, 0.5, delta=0.1)
        self.assertIn('chi2_pvalue', report.estimates)
        self.assertIn('generated', report.tables['shapes'][0])

    def test_gw_equivalence_supercritical(self):
        """Test that a supercritical excursion law is rejected"""
        with self.assertRaises(DendroflowValidationError):
            self.run_config(operation='gw_equivalence', kernel=ExponentialMixtureKernel(EhmcParams(0.8, 1.0, 1.0)))

    def test_censored_excursions_in_both_tallies(self):
        """Test that censored excursions count as 'other' before and after pruning"""
        observed, pruned, censored = _excursion_shape_task(ExponentialMixtureKernel(), 3, 0, 300, 'philox', 6, 3)
        self.assertGreater(censored, 0)
        self.assertEqual(sum(observed.values()), 300)
        self.assertGreaterEqual(pruned[OTHER_SHAPES], censored)
        # only single-leaf excursions vanish under pruning
        self.assertEqual(sum(pruned.values()), sum(observed.values()) - observed[SINGLE_LEAF])

    def test_gw_equivalence_censored_note(self):
        """Test the pruned shape table with every excursion censored"""
        report = self.run_config(
            operation='gw_equivalence', kernel=ExponentialMixtureKernel(), excursions=40, max_steps=1, max_leaves=2, min_cell_count=1
        )
        pruned_rows = {row['shape']: row['observed'] for row in report.tables['pruned_shapes']}
        self.assertEqual(pruned_rows[OTHER_SHAPES], 40)
        self.assertTrue(any(note.startswith("40 excursions censored at 1 steps") for note in report.notes))

    def test_minima_jumps(self):
        """Test the pruned jump law and the (A, gamma) map"""
        report = self.run_config(
            operation='minima_jumps', kernel=ExponentialMixtureKernel(), length=5000, replicates=2
        )
        self.assertEqual(report.estimates['p_min'].value, 0.25)
        self.assertLess(report.estimates['agamma_product_error'].value, 1e-9)
        self.assertEqual(report.estimates['fixed_point_error'].value, 0.0)
        self.assertIn('ks_pvalue', report.estimates)

    def test_asymmetric_decay(self):
        """Test the dynamics table next to the Horton ratios"""
        report = self.run_config(
            operation='asymmetric_decay',
            kernel=ExponentialMixtureKernel(EhmcParams(0.4, 1.0, 1.0)),
            length=5000,
            replicates=4,
            max_order=3,
        )
        self.assertTrue(all(key.startswith('eta_') for key in report.estimates))
        rows = report.tables['dynamics']
        self.assertEqual(len(rows), 7)
        self.assertIn('eta_predicted', rows[1])

    def test_fbm_conjecture(self):
        """Test the exploratory fBm report"""
        report = self.run_config(
            operation='fbm_conjecture', hurst=0.5, length=1024, replicates=4, max_order=3, complete_only=False
        )
        self.assertTrue(report.exploratory)
        self.assertEqual(report.estimates['c_conjectured'].value, 2.0)
        self.assertAlmostEqual(report.estimates['eta_conjectured'].value, 4.0)
        self.assertTrue(report.notes[0].startswith('EXPLORATORY'))

    def test_missing_process(self):
        """Test operations run without their process"""
        with self.assertRaises(DendroflowValidationError):
            self.run_config(operation='horton_tokunaga')
        with self.assertRaises(DendroflowValidationError):
            self.run_config(operation='minima_jumps', kernel=GaussianKernel())
        with self.assertRaises(DendroflowValidationError):
            self.run_config(operation='nope')

    def test_reproducible_across_threads(self):
        """Test that the worker count does not change a report"""
        single = self.run_config(operation='horton_tokunaga', kernel=GaussianKernel(), length=500, replicates=6)
        pooled = self.run_config(
            operation='horton_tokunaga', kernel=GaussianKernel(), length=500, replicates=6, threads=2
        )
        self.assertEqual(single.to_dict(), pooled.to_dict())
