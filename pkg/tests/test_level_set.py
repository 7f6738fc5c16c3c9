"""
Tests for dendroflow.level_set module
"""

import numpy as np
from django.test import SimpleTestCase
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from dendroflow.exceptions import DegenerateSeriesError, DendroflowValidationError
from dendroflow.horton import assign_orders, pruning_commutes
from dendroflow.level_set import (
    Basin,
    BasinLink,
    Extremum,
    Series,
    basin_chain,
    basin_decomposition,
    boundary_extrema,
    descending_ladder,
    extreme_function,
    level_set_tree,
    local_extrema,
    local_maxima_count,
    minima_hierarchy,
    minima_jumps,
    minimum_order,
    opposite_minima,
    order_maxima,
    prune_series,
    pseudo_distance,
    side_branch_order,
    up_run_lengths,
)
from dendroflow.tree_core import shape_signature

TENT = [0, 2, 1, 3, 0]
ZIGZAG = [3, 1, 4, 2, 5, 0, 6]
# T_1 = [1, 3, 5, 7, 9], T_2 = [5]
NESTED = [9, 2, 8, 4, 9, 1, 9, 3, 9, 5, 9]


class TestSeries(SimpleTestCase):
    """Test the series value type"""

    def test_values_are_read_only(self):
        """Test that series values cannot be modified in place"""
        s = Series([1, 2, 3])
        with self.assertRaises(ValueError):
            s.values[0] = 5.0

    def test_rejects_non_finite(self):
        """Test that nan and inf are rejected"""
        for bad in ([1.0, float('nan')], [float('inf'), 0.0]):
            with self.subTest(values=bad):
                with self.assertRaises(DendroflowValidationError):
                    Series(bad)

    def test_shift_and_transform(self):
        """Test monotone transforms return new series"""
        s = Series(TENT)
        self.assertEqual(s.shifted(1.0), Series([1, 3, 2, 4, 1]))
        self.assertEqual(s.transformed(np.exp), Series(np.exp(TENT)))
        self.assertEqual(len(s), 5)


class TestExtrema(SimpleTestCase):
    """Test local and boundary extrema"""

    def test_local_extrema(self):
        """Test internal extrema in order"""
        self.assertEqual(
            local_extrema(TENT),
            [Extremum(1, 2.0, 'max'), Extremum(2, 1.0, 'min'), Extremum(3, 3.0, 'max')],
        )
        self.assertEqual(local_maxima_count(TENT), 2)

    def test_plateau_reports_leftmost_point(self):
        """Test that a constant run is represented by its leftmost index"""
        self.assertEqual(
            local_extrema([0, 2, 2, 1, 3]),
            [Extremum(1, 2.0, 'max'), Extremum(3, 1.0, 'min')],
        )

    def test_boundary_extrema(self):
        """Test classification of the two ends"""
        left, right = boundary_extrema(TENT)
        self.assertEqual((left.kind, right.kind), ('min', 'min'))
        left, right = boundary_extrema([3, 1, 2])
        self.assertEqual((left.kind, right.kind), ('max', 'max'))
        self.assertEqual(boundary_extrema([1, 1, 1]), (None, None))


class TestLevelSetTree(SimpleTestCase):
    """Test level-set tree construction"""

    def test_tent(self):
        """Test a single minimum between two maxima"""
        t = level_set_tree(TENT)
        self.assertEqual(t.size, 3)
        self.assertEqual(shape_signature(t), '(()())')
        self.assertEqual([n.parent_edge_length for n in t.nodes], [1.0, 1.0, 2.0])

        ot = assign_orders(t)
        self.assertEqual(ot.omega, 2)
        self.assertEqual(ot.orders, (2, 1, 1))

    def test_boundary_maxima_are_leaves(self):
        """Test that maxima at the ends become leaves and the ghost edge has length 1"""
        t = level_set_tree(ZIGZAG)
        self.assertEqual(len(t.leaves()), 4)
        self.assertEqual(t.size, 7)
        self.assertEqual(t.ghost_edge_length, 1.0)
        self.assertEqual(shape_signature(t), '((()(()()))())')
        self.assertEqual(assign_orders(t).omega, 2)

    def test_ghost_edge_to_lower_boundary(self):
        """Test that the ghost edge reaches the lower end when it is the global minimum"""
        t = level_set_tree([0, 3, 1, 4, 2])
        self.assertEqual(t.ghost_edge_length, 1.0)
        t = level_set_tree([0, 3, 2, 4, 1])
        self.assertEqual(t.ghost_edge_length, 2.0)

    def test_single_maximum(self):
        """Test a tent with no internal minimum"""
        t = level_set_tree([1, 2, 0])
        self.assertEqual(t.size, 1)
        self.assertEqual(t.ghost_edge_length, 2.0)

    def test_equal_minima_merge(self):
        """Test that equal minima not separated by a lower one share a vertex"""
        t = level_set_tree([0, 2, 1, 3, 1, 2, 0])
        self.assertEqual(t.size, 4)
        self.assertEqual(len(t.nodes[t.root].children), 3)
        self.assertFalse(t.is_binary())

    def test_degenerate_series(self):
        """Test that series without internal extrema are rejected"""
        for values in ([1, 1, 1], [1, 2, 3], [3, 2], [5], []):
            with self.subTest(values=values):
                with self.assertRaises(DegenerateSeriesError):
                    level_set_tree(values)

    def test_monotone_invariance(self):
        """Test that increasing transforms keep the shape"""
        x = np.array(ZIGZAG, dtype=float)
        expected = shape_signature(level_set_tree(x))
        for label, func in (('shift', lambda v: v + 7.5), ('exp', np.exp), ('cube', lambda v: v ** 3)):
            with self.subTest(transform=label):
                self.assertEqual(shape_signature(level_set_tree(func(x))), expected)


class TestExtremeFunction(SimpleTestCase):
    """Test the extreme function and its pseudo-metric"""

    def test_excursion_matches_harris_path(self):
        """Test that an excursion's extreme function starts at 0"""
        f = extreme_function(TENT)
        self.assertEqual(f.start_abscissa, 0.0)
        self.assertEqual(f.base_level, 0.0)
        self.assertEqual(
            f.breakpoints,
            ((0.0, 0.0), (2.0, 2.0), (3.0, 1.0), (5.0, 3.0), (8.0, 0.0)),
        )

    def test_start_and_base(self):
        """Test the start abscissa of a series with boundary maxima"""
        f = extreme_function(ZIGZAG)
        self.assertEqual(f.base_level, -1.0)
        self.assertEqual(f.start_abscissa, 4.0)
        self.assertEqual(f.domain, (4.0, 25.0))

    def test_pseudo_distance(self):
        """Test the pseudo-metric against tree path lengths"""
        f = extreme_function(TENT)
        t = level_set_tree(TENT)
        self.assertAlmostEqual(pseudo_distance(f, 2.0, 5.0), t.path_length(1, 2))
        self.assertAlmostEqual(pseudo_distance(f, 5.0, 2.0), 3.0)
        self.assertEqual(pseudo_distance(f, 3.0, 3.0), 0.0)
        self.assertEqual(pseudo_distance(f, 0.0, 8.0), 0.0)

    def test_pseudo_distance_triangle_inequality(self):
        """Test the triangle inequality on a grid"""
        f = extreme_function(ZIGZAG)
        grid = np.linspace(*f.domain, 13)
        for a in grid:
            for b in grid:
                for c in grid:
                    self.assertLessEqual(
                        pseudo_distance(f, a, c),
                        pseudo_distance(f, a, b) + pseudo_distance(f, b, c) + 1e-9,
                    )

    def test_outside_domain(self):
        """Test that abscissae outside the domain are rejected"""
        f = extreme_function(TENT)
        with self.assertRaises(DendroflowValidationError):
            f.evaluate(9.0)
        with self.assertRaises(DendroflowValidationError):
            pseudo_distance(f, -1.0, 2.0)


class TestPruning(SimpleTestCase):
    """Test series pruning and derived sequences"""

    def test_prune_series(self):
        """Test the series of internal minima"""
        self.assertEqual(prune_series(ZIGZAG), Series([1, 2, 0]))
        self.assertEqual(len(prune_series([1, 2, 0])), 0)
        np.testing.assert_array_equal(minima_jumps(ZIGZAG), [1.0, -2.0])

    def test_pruning_commutes(self):
        """Test that series and tree pruning agree on fixed examples"""
        for values in (ZIGZAG, NESTED, TENT, [0, 5, 1, 3, 2, 4]):
            with self.subTest(values=values):
                self.assertTrue(pruning_commutes(values))

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(-1000, 1000), min_size=3, max_size=60, unique=True))
    def test_pruning_commutes_on_distinct_values(self, values):
        """Test that pruning commutes with the level-set tree for distinct values"""
        try:
            level_set_tree(values)
        except DegenerateSeriesError:
            assume(False)
        self.assertTrue(pruning_commutes(values))

    def test_up_run_lengths(self):
        """Test rise lengths from each minimum to the next maximum"""
        np.testing.assert_array_equal(up_run_lengths([0, 1, 2, 1, 2, 3, 0]), [2])
        self.assertEqual(len(up_run_lengths([1, 2, 3])), 0)


class TestDescendingLadder(SimpleTestCase):
    """Test excursions along the running minimum"""

    def setUp(self):
        """Set up a path with two excursions, two falls and a trailing rise"""
        self.values = [0, 2, 1, 3, -1, 1, -1, -2, 0.5]

    def test_decomposition(self):
        """Test excursions, falls and the trailing segment"""
        ladder = descending_ladder(self.values)
        self.assertEqual(ladder.excursions, (Series([0, 2, 1, 3, 0]), Series([0, 2, 0])))
        self.assertEqual(ladder.falls, (1.0, 1.0))
        self.assertEqual(ladder.spans, ((0.0, 3.75), (4.0, 6.0)))
        self.assertEqual(ladder.floors, (0.0, -1.0))
        self.assertEqual(ladder.trailing_segment, Series([0, 2.5]))
        self.assertEqual(ladder.trailing_floor, -2.0)

    def test_discrete_crossing(self):
        """Test that without interpolation the excursion closes at the first sample below"""
        ladder = descending_ladder(self.values, interpolate=False)
        self.assertEqual(ladder.spans[0], (0.0, 4.0))
        self.assertEqual(ladder.excursions, descending_ladder(self.values).excursions)

    def test_no_trailing_segment(self):
        """Test a path that ends on its running minimum"""
        ladder = descending_ladder([0, 1, 0, -1])
        self.assertEqual(ladder.excursions, (Series([0, 1, 0]),))
        self.assertIsNone(ladder.trailing_segment)

    def test_empty(self):
        """Test the empty path"""
        ladder = descending_ladder([])
        self.assertEqual(ladder.excursions, ())
        self.assertIsNone(ladder.trailing_segment)


class TestBasins(SimpleTestCase):
    """Test the minima hierarchy and basins"""

    def test_minima_hierarchy(self):
        """Test nested index sets of order-j minima"""
        levels = minima_hierarchy(NESTED)
        self.assertEqual(len(levels), 2)
        np.testing.assert_array_equal(levels[0], [1, 3, 5, 7, 9])
        np.testing.assert_array_equal(levels[1], [5])
        self.assertEqual(len(minima_hierarchy(NESTED, max_order=1)), 1)

    def test_minimum_order(self):
        """Test the order of a minimum"""
        levels = minima_hierarchy(NESTED)
        self.assertEqual(minimum_order(5, levels), 2)
        self.assertEqual(minimum_order(1, levels), 1)
        self.assertEqual(minimum_order(2, levels), 0)

    def test_order_maxima(self):
        """Test apex sets of orders 1 and 2"""
        np.testing.assert_array_equal(order_maxima(NESTED, 1), [0, 2, 4, 6, 8, 10])
        np.testing.assert_array_equal(order_maxima(NESTED, 2), [3, 9])

    def test_order_one_basins(self):
        """Test basins between consecutive minima"""
        decomposition = basin_decomposition(NESTED, 1)
        self.assertEqual(
            decomposition.basins,
            (Basin(1, 3, 2), Basin(3, 5, 4), Basin(5, 7, 6), Basin(7, 9, 8)),
        )
        self.assertEqual(decomposition.incomplete_left, (0, 1))
        self.assertEqual(decomposition.incomplete_right, (9, 10))

    def test_higher_order_basins(self):
        """Test orders with one bound or none"""
        decomposition = basin_decomposition(NESTED, 2)
        self.assertEqual(decomposition.basins, ())
        self.assertEqual(decomposition.incomplete_left, (0, 5))
        self.assertEqual(decomposition.incomplete_right, (5, 10))

        decomposition = basin_decomposition(NESTED, 3)
        self.assertEqual(decomposition.basins, ())
        self.assertEqual(decomposition.incomplete_left, (0, 10))
        self.assertIsNone(decomposition.incomplete_right)

        with self.assertRaises(DendroflowValidationError):
            basin_decomposition(NESTED, 0)

    def test_basin_chain(self):
        """Test enclosing basins of a side-branching minimum"""
        x = np.array(NESTED, dtype=float)
        chain = basin_chain(x, 1)
        self.assertEqual(chain, [BasinLink(2, 0, 5, True, False), BasinLink(3, 0, 10, True, True)])
        self.assertEqual(side_branch_order(x, 1, chain), 2)
        self.assertEqual(opposite_minima(x, 1), [(2, 1.0), (3, 9.0)])

        chain = basin_chain(x, 7)
        self.assertEqual(chain, [BasinLink(2, 5, 10, False, True)])
        self.assertEqual(side_branch_order(x, 7, chain), 2)

    def test_merge_vertices(self):
        """Test that apex minima one order up are merges"""
        for k in (3, 5, 9):
            with self.subTest(k=k):
                self.assertIsNone(basin_chain(NESTED, k))
                self.assertIsNone(opposite_minima(NESTED, k))

    def test_basin_chain_needs_a_minimum(self):
        """Test that a maximum has no basin chain"""
        with self.assertRaises(DendroflowValidationError):
            basin_chain(NESTED, 2)
