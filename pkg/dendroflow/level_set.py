"""
Level-set trees of finite time series.

A series is a finite sequence of doubles read as a linearly interpolated
path. Its level-set tree has a leaf for every local maximum (boundary maxima
included) and an internal vertex for every internal local minimum; edge
lengths are value differences. Constant runs are represented by their
leftmost point.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import DegenerateSeriesError, DendroflowValidationError
from .tree_core import Tree, tree_from_children

logger = logging.getLogger(__name__)

MIN = 'min'
MAX = 'max'


class Series:
    """Finite real-valued series with read-only values."""

    __slots__ = ('values',)

    def __init__(self, values: Union[Sequence[float], np.ndarray]):
        array = np.array(values, dtype=float).ravel()
        if not np.all(np.isfinite(array)):
            raise DendroflowValidationError("series values must be finite")
        array.flags.writeable = False
        self.values = array

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values.tolist())

    def __getitem__(self, item):
        return self.values[item]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Series):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def __repr__(self) -> str:
        return f"Series(n={len(self)})"

    def shifted(self, c: float) -> "Series":
        return Series(self.values + c)

    def transformed(self, func: Callable[[np.ndarray], np.ndarray]) -> "Series":
        return Series(func(self.values))


SeriesLike = Union[Series, Sequence[float], np.ndarray]


def as_series(s: SeriesLike) -> Series:
    return s if isinstance(s, Series) else Series(s)


class Extremum(NamedTuple):
    index: int
    value: float
    kind: str


def _run_starts(x: np.ndarray) -> np.ndarray:
    """Leftmost index of every run of equal values."""
    if len(x) == 0:
        return np.empty(0, dtype=int)
    return np.flatnonzero(np.concatenate(([True], x[1:] != x[:-1])))


def _turning_points(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Indices of the extremal sequence (endpoints plus internal extrema).

    Returns:
        ``(indices, is_max)`` where ``is_max`` flags the internal entries
        (endpoints are flagged separately by the callers)
    """
    starts = _run_starts(x)
    if len(starts) < 3:
        return starts, np.zeros(len(starts), dtype=bool)
    direction = np.sign(np.diff(x[starts]))
    turn = np.flatnonzero(direction[1:] != direction[:-1]) + 1
    indices = np.concatenate(([starts[0]], starts[turn], [starts[-1]]))
    is_max = np.concatenate(([False], direction[turn - 1] > 0, [False]))
    return indices, is_max


def _internal_minima(x: np.ndarray) -> np.ndarray:
    indices, is_max = _turning_points(x)
    if len(indices) < 3:
        return np.empty(0, dtype=int)
    inner = indices[1:-1]
    return inner[~is_max[1:-1]]


def _internal_maxima(x: np.ndarray) -> np.ndarray:
    indices, is_max = _turning_points(x)
    if len(indices) < 3:
        return np.empty(0, dtype=int)
    return indices[1:-1][is_max[1:-1]]


def local_extrema(s: SeriesLike) -> List[Extremum]:
    """
    Internal local extrema in order; plateaus report their leftmost point.

    Boundary values are classified by :func:`boundary_extrema`.
    """
    x = as_series(s).values
    indices, is_max = _turning_points(x)
    return [
        Extremum(int(i), float(x[i]), MAX if flag else MIN)
        for i, flag in zip(indices[1:-1], is_max[1:-1])
    ]


def boundary_extrema(s: SeriesLike) -> Tuple[Optional[Extremum], Optional[Extremum]]:
    """Left and right boundary values with their kind; ``None`` for a constant series."""
    x = as_series(s).values
    starts = _run_starts(x)
    if len(starts) < 2:
        return None, None
    left_kind = MAX if x[starts[0]] > x[starts[1]] else MIN
    right_kind = MAX if x[starts[-1]] > x[starts[-2]] else MIN
    return (
        Extremum(0, float(x[0]), left_kind),
        Extremum(len(x) - 1, float(x[-1]), right_kind),
    )


def local_maxima_count(s: SeriesLike) -> int:
    """Number of internal local maxima."""
    return len(_internal_maxima(as_series(s).values))


def _alternating_extrema(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Maxima (boundary maxima included) and the internal minima between them."""
    indices, _ = _turning_points(x)
    if len(indices) < 3:
        raise DegenerateSeriesError()
    values = x[indices]
    if values[0] < values[1]:
        values = values[1:]
    if values[-1] < values[-2]:
        values = values[:-1]
    return values[0::2], values[1::2]


def _ghost_length(root_value: float, has_minima: bool, x: np.ndarray) -> float:
    floor = min(x[0], x[-1])
    if has_minima and root_value <= floor:
        return 1.0
    return float(root_value - floor)


def level_set_tree(s: SeriesLike) -> Tree:
    """
    Level-set tree of a series.

    Built as a Cartesian tree over the internal minima with the maxima as
    leaves; equal minima not separated by a lower one merge into a single
    vertex (the tree is then non-binary). The root is the lowest internal
    minimum. The ghost edge spans down to the lower boundary value when the
    global minimum sits on the boundary, and has length 1 otherwise.

    Raises:
        DegenerateSeriesError: If the series has no internal local extremum
    """
    x = as_series(s).values
    maxima, minima = _alternating_extrema(x)

    values = maxima.tolist()
    children: List[List[int]] = [[] for _ in values]
    stack: List[int] = []
    current = 0
    for i, level in enumerate(minima.tolist()):
        while stack and values[stack[-1]] > level:
            top = stack.pop()
            children[top].append(current)
            current = top
        if stack and values[stack[-1]] == level:
            children[stack[-1]].append(current)
        else:
            values.append(level)
            children.append([current])
            stack.append(len(values) - 1)
        current = i + 1
    while stack:
        top = stack.pop()
        children[top].append(current)
        current = top
    root = current

    lengths = [0.0] * len(values)
    for parent, kids in enumerate(children):
        for kid in kids:
            lengths[kid] = values[kid] - values[parent]

    ghost = _ghost_length(values[root], len(minima) > 0, x)
    return tree_from_children(children, lengths, root, ghost)


@dataclass(frozen=True)
class ExtremeFunction:
    """
    Linear extreme function: +-1 slope interpolation of the extremal sequence.

    Heights are measured from ``base_level`` (the bottom of the ghost edge), so
    on a positive excursion the function coincides with the Harris path of the
    level-set tree.
    """

    start_abscissa: float
    breakpoints: Tuple[Tuple[float, float], ...]
    base_level: float
    values: Tuple[float, ...] = field(repr=False)

    @property
    def abscissae(self) -> np.ndarray:
        return np.array([a for a, _ in self.breakpoints])

    @property
    def heights(self) -> np.ndarray:
        return np.array([h for _, h in self.breakpoints])

    @property
    def domain(self) -> Tuple[float, float]:
        return self.breakpoints[0][0], self.breakpoints[-1][0]

    @property
    def span(self) -> float:
        start, end = self.domain
        return end - start

    def evaluate(self, a: float) -> float:
        self._check(a)
        return float(np.interp(a, self.abscissae, self.heights))

    def _check(self, a: float) -> None:
        start, end = self.domain
        if not start <= a <= end:
            raise DendroflowValidationError(
                f"abscissa {a} outside extreme function domain [{start}, {end}]"
            )


def extreme_function(s: SeriesLike) -> ExtremeFunction:
    """
    Extreme function of a series, starting at s0 = w + X(L) - root value.

    Raises:
        DegenerateSeriesError: If the series has no internal local extremum
    """
    x = as_series(s).values
    indices, _ = _turning_points(x)
    if len(indices) < 3:
        raise DegenerateSeriesError()

    values = x[indices]
    maxima, minima = _alternating_extrema(x)
    root_value = float(minima.min()) if len(minima) else float(maxima[0])
    base = root_value - _ghost_length(root_value, len(minima) > 0, x)

    heights = values - base
    abscissae = heights[0] + np.concatenate(([0.0], np.cumsum(np.abs(np.diff(values)))))
    return ExtremeFunction(
        start_abscissa=float(heights[0]),
        breakpoints=tuple(zip(abscissae.tolist(), heights.tolist())),
        base_level=float(base),
        values=tuple(values.tolist()),
    )


def pseudo_distance(f: ExtremeFunction, a: float, b: float) -> float:
    """
    Pseudo-metric d(a, b) = (f(a) - m) + (f(b) - m), m the infimum of f between a and b.

    Raises:
        DendroflowValidationError: If a or b is outside the domain of f
    """
    fa, fb = f.evaluate(a), f.evaluate(b)
    lo, hi = min(a, b), max(a, b)
    xs, hs = f.abscissae, f.heights
    inside = hs[(xs > lo) & (xs < hi)]
    floor = min(fa, fb, float(inside.min()) if len(inside) else np.inf)
    return (fa - floor) + (fb - floor)


def prune_series(s: SeriesLike) -> Series:
    """Sequence of internal local minima values; may be empty."""
    x = as_series(s).values
    return Series(x[_internal_minima(x)])


def minima_jumps(s: SeriesLike) -> np.ndarray:
    """Differences between consecutive internal local minima."""
    return np.diff(prune_series(s).values)


def up_run_lengths(s: SeriesLike) -> np.ndarray:
    """Number of steps from each internal local minimum to the following local maximum."""
    x = as_series(s).values
    indices, is_max = _turning_points(x)
    if len(indices) < 3:
        return np.empty(0, dtype=int)
    inner, inner_max = indices[1:-1], is_max[1:-1]
    starts = np.flatnonzero(~inner_max[:-1] & inner_max[1:])
    return inner[starts + 1] - inner[starts]


@dataclass(frozen=True)
class LadderDecomposition:
    """
    Excursions above the running minimum, falls along it, and the trailing rise.

    ``spans`` holds the start and end abscissa of each excursion and
    ``floors`` the running-minimum level it sits on.
    """

    excursions: Tuple[Series, ...]
    falls: Tuple[float, ...]
    trailing_segment: Optional[Series]
    spans: Tuple[Tuple[float, float], ...] = ()
    floors: Tuple[float, ...] = ()
    trailing_floor: Optional[float] = None


def descending_ladder(s: SeriesLike, interpolate: bool = True) -> LadderDecomposition:
    """
    Split a series along its descending ladder.

    Each excursion is shifted to start and end at 0. When the path crosses
    below the running minimum between samples the excursion closes at the
    crossing: the abscissa is linearly interpolated when ``interpolate`` is
    set, otherwise the first sample below the floor is taken. A final rise
    that never returns to the running minimum is reported as trailing.
    """
    x = as_series(s).values
    n = len(x)
    if n == 0:
        return LadderDecomposition((), (), None)

    running_min = np.minimum.accumulate(x)
    on_floor = np.flatnonzero(x == running_min)

    excursions: List[Series] = []
    falls: List[float] = []
    spans: List[Tuple[float, float]] = []
    floors: List[float] = []
    fall = 0.0
    for a, b in zip(on_floor[:-1].tolist(), on_floor[1:].tolist()):
        level = x[a]
        if b == a + 1:
            fall += level - x[b]
            continue
        if fall > 0.0:
            falls.append(fall)
            fall = 0.0
        if x[b] == level:
            values = x[a:b + 1] - level
            end = float(b)
        else:
            values = np.concatenate((x[a:b] - level, [0.0]))
            if interpolate:
                end = (b - 1) + (x[b - 1] - level) / (x[b - 1] - x[b])
            else:
                end = float(b)
            fall += level - x[b]
        excursions.append(Series(values))
        spans.append((float(a), float(end)))
        floors.append(float(level))
    if fall > 0.0:
        falls.append(fall)

    last = int(on_floor[-1])
    trailing = Series(x[last:] - x[last]) if last < n - 1 else None
    return LadderDecomposition(
        excursions=tuple(excursions),
        falls=tuple(falls),
        trailing_segment=trailing,
        spans=tuple(spans),
        floors=tuple(floors),
        trailing_floor=float(x[last]),
    )


def minima_hierarchy(s: SeriesLike, max_order: Optional[int] = None) -> List[np.ndarray]:
    """
    Index sets of order-j local minima, ``[T_1, T_2, ...]``.

    T_1 holds the internal local minima; T_{j+1} the internal local minima of
    the values at T_j.
    """
    x = as_series(s).values
    levels: List[np.ndarray] = []
    indices = _internal_minima(x)
    while len(indices) and (max_order is None or len(levels) < max_order):
        levels.append(indices)
        indices = indices[_internal_minima(x[indices])]
    return levels


def order_maxima(s: SeriesLike, order: int, levels: Optional[List[np.ndarray]] = None) -> np.ndarray:
    """Apex set S_r: local maxima (boundary maxima included) of the order-(r-1) minima."""
    x = as_series(s).values
    if order == 1:
        candidates = np.arange(len(x))
    else:
        levels = levels if levels is not None else minima_hierarchy(x, order - 1)
        if len(levels) < order - 1:
            return np.empty(0, dtype=int)
        candidates = levels[order - 2]
    values = x[candidates]
    indices, is_max = _turning_points(values)
    if len(indices) < 2:
        return candidates[indices]
    flags = is_max.copy()
    flags[0] = values[indices[0]] > values[indices[1]]
    flags[-1] = values[indices[-1]] > values[indices[-2]]
    return candidates[indices[flags]]


class Basin(NamedTuple):
    left: int
    right: int
    apex: int


@dataclass(frozen=True)
class BasinDecomposition:
    """Complete order-r basins plus the boundary segments outside them."""

    order: int
    basins: Tuple[Basin, ...]
    incomplete_left: Optional[Tuple[int, int]]
    incomplete_right: Optional[Tuple[int, int]]


def _between(indices: np.ndarray, left: int, right: int) -> np.ndarray:
    """Entries of a sorted index array strictly between ``left`` and ``right``."""
    return indices[np.searchsorted(indices, left, 'right'):np.searchsorted(indices, right, 'left')]


def _apex(x: np.ndarray, levels: List[np.ndarray], order: int, left: int, right: int) -> int:
    if order == 1:
        return left + 1 + int(np.argmax(x[left + 1:right]))
    inside = _between(levels[order - 2], left, right)
    return int(inside[np.argmax(x[inside])])


def basin_decomposition(s: SeriesLike, order: int) -> BasinDecomposition:
    """Basins of the given order: stretches between consecutive order-r minima."""
    if order < 1:
        raise DendroflowValidationError(f"basin order must be positive, got {order}")
    x = as_series(s).values
    levels = minima_hierarchy(x, order)
    bounds = levels[order - 1] if len(levels) >= order else np.empty(0, dtype=int)
    last = len(x) - 1
    if len(bounds) == 0:
        return BasinDecomposition(order, (), (0, last), None)

    basins = tuple(
        Basin(int(a), int(b), _apex(x, levels, order, int(a), int(b)))
        for a, b in zip(bounds[:-1], bounds[1:])
    )
    return BasinDecomposition(
        order=order,
        basins=basins,
        incomplete_left=(0, int(bounds[0])),
        incomplete_right=(int(bounds[-1]), last),
    )


def minimum_order(k: int, levels: List[np.ndarray]) -> int:
    """Largest j such that index ``k`` belongs to T_j (0 if not a minimum)."""
    order = 0
    for j, indices in enumerate(levels, start=1):
        position = np.searchsorted(indices, k)
        if position < len(indices) and indices[position] == k:
            order = j
        else:
            break
    return order


class BasinLink(NamedTuple):
    """
    The order-j basin holding a minimum, seen from that minimum.

    ``adjacent`` is the basin bound on the same side of the apex, ``opposite``
    the bound on the far side. A bound flagged as boundary is a series end
    standing in for a missing order-j minimum.
    """

    order: int
    adjacent: int
    opposite: int
    adjacent_is_boundary: bool
    opposite_is_boundary: bool


def basin_chain(
    s: SeriesLike, k: int, levels: Optional[List[np.ndarray]] = None
) -> Optional[List[BasinLink]]:
    """
    Enclosing basins of the internal minimum ``k`` for every order above its own.

    The chain ends at the first order whose opposite bound is a series end.

    Returns:
        The links in increasing order, or ``None`` when k is itself the apex
        of its basin one order up (a merge of two equal-order branches)

    Raises:
        DendroflowValidationError: If k is not an internal local minimum
    """
    x = as_series(s).values
    levels = levels if levels is not None else minima_hierarchy(x)
    own = minimum_order(k, levels)
    if own == 0:
        raise DendroflowValidationError(f"index {k} is not an internal local minimum")

    last = len(x) - 1
    chain: List[BasinLink] = []
    j = own + 1
    while True:
        bounds = levels[j - 1] if j - 1 < len(levels) else np.empty(0, dtype=int)
        position = int(np.searchsorted(bounds, k))
        left_missing, right_missing = position == 0, position == len(bounds)
        left = 0 if left_missing else int(bounds[position - 1])
        right = last if right_missing else int(bounds[position])
        apex = _apex(x, levels, j, left, right)
        if apex == k:
            if j == own + 1:
                return None
            raise DendroflowValidationError(f"minimum {k} is an apex above its own order")
        if k < apex:
            link = BasinLink(j, left, right, left_missing, right_missing)
        else:
            link = BasinLink(j, right, left, right_missing, left_missing)
        chain.append(link)
        if link.opposite_is_boundary:
            return chain
        j += 1


def opposite_minima(
    s: SeriesLike, k: int, levels: Optional[List[np.ndarray]] = None
) -> Optional[List[Tuple[int, float]]]:
    """
    Opposite-minimum values ``[(j, M^(j)_k), ...]`` for the orders above that of minimum k.

    Series ends stand in for missing minima. ``None`` marks a merge vertex,
    see :func:`basin_chain`.
    """
    x = as_series(s).values
    chain = basin_chain(x, k, levels)
    if chain is None:
        return None
    return [(link.order, float(x[link.opposite])) for link in chain]


def side_branch_order(x: np.ndarray, k: int, chain: List[BasinLink]) -> int:
    """Order of the branch a side-branching minimum sits on: first order whose opposite is at or below it."""
    for link in chain:
        if x[link.opposite] <= x[k]:
            return link.order
    return chain[-1].order
