"""
Horton-Strahler orders, pruning, branches and Tokunaga side-branch counts.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import stats

from .exceptions import DegenerateSeriesError, DendroflowValidationError, NonBinaryTreeError
from .level_set import SeriesLike, as_series, level_set_tree, prune_series
from .tree_core import Tree, compact, contract, shape, tree_from_children

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OrderedTree:
    """A tree together with the Horton-Strahler order of every node."""

    tree: Tree
    orders: Tuple[int, ...]
    omega: int

    def order_of(self, node: int) -> int:
        return self.orders[node]


def assign_orders(t: Tree) -> OrderedTree:
    """
    Horton-Strahler orders.

    Leaves get 1; a vertex whose maximal child order is attained by two or
    more children gets that order plus one, otherwise the maximum. On binary
    trees this is the usual recursion; on general trees it reproduces the
    round in which iterated pruning removes the vertex.
    """
    if t.is_empty:
        return OrderedTree(tree=t, orders=(), omega=0)

    orders = [0] * t.size
    for v in t.postorder():
        kids = t.nodes[v].children
        if not kids:
            orders[v] = 1
            continue
        child_orders = [orders[c] for c in kids]
        top = max(child_orders)
        orders[v] = top + 1 if child_orders.count(top) > 1 else top
    return OrderedTree(tree=t, orders=tuple(orders), omega=orders[t.root])


def _pruned_mask(t: Tree) -> List[bool]:
    """True for the nodes removed by one pruning: leaves and single-child chains above them."""
    removed = [False] * t.size
    for v in t.postorder():
        kids = t.nodes[v].children
        removed[v] = not kids or (len(kids) == 1 and removed[kids[0]])
    return removed


def prune(t: Tree) -> Tree:
    """Remove all leaves together with the single-child chains that end in them."""
    if t.is_empty:
        return t
    removed = _pruned_mask(t)
    pruned, _ = compact(t, [not flag for flag in removed])
    return pruned


def pruning_orders(t: Tree) -> Tuple[int, ...]:
    """Orders by literal iterated pruning: a node removed in round r has order r."""
    orders = [0] * t.size
    current, origin = t, list(range(t.size))
    round_number = 0
    while not current.is_empty:
        round_number += 1
        removed = _pruned_mask(current)
        for v, flag in enumerate(removed):
            if flag:
                orders[origin[v]] = round_number
        current, kept = compact(current, [not flag for flag in removed])
        origin = [origin[v] for v in kept]
    return tuple(orders)


def pruning_commutes(s: SeriesLike) -> bool:
    """
    Check that pruning the series and pruning its tree give the same shape.

    Single-child chains left by tree pruning are contracted before comparing.
    A degenerate pruned series matches a pruned tree with at most one vertex.
    """
    s = as_series(s)
    pruned_tree = contract(prune(level_set_tree(s)))
    try:
        series_tree = level_set_tree(prune_series(s))
    except DegenerateSeriesError:
        return pruned_tree.size <= 1
    return shape(series_tree) == shape(pruned_tree)


@dataclass(frozen=True)
class Branch:
    """Maximal chain of same-order vertices, listed from initial to terminal vertex."""

    order: int
    nodes: Tuple[int, ...]
    magnitude: int
    complete: bool

    @property
    def initial(self) -> int:
        return self.nodes[0]

    @property
    def terminal(self) -> int:
        return self.nodes[-1]


@dataclass(frozen=True)
class BranchSet:
    """Branches of an ordered tree with per-order counts and mean magnitudes."""

    ordered: OrderedTree
    branches: Tuple[Branch, ...]
    branch_of_node: Tuple[int, ...]

    @property
    def omega(self) -> int:
        return self.ordered.omega

    @property
    def counts(self) -> Dict[int, int]:
        counts = {r: 0 for r in range(1, self.omega + 1)}
        for branch in self.branches:
            counts[branch.order] += 1
        return counts

    @property
    def complete_counts(self) -> Dict[int, int]:
        counts = {r: 0 for r in range(1, self.omega + 1)}
        for branch in self.branches:
            if branch.complete:
                counts[branch.order] += 1
        return counts

    @property
    def mean_magnitudes(self) -> Dict[int, float]:
        totals = {r: 0 for r in range(1, self.omega + 1)}
        for branch in self.branches:
            totals[branch.order] += branch.magnitude
        counts = self.counts
        return {r: totals[r] / counts[r] for r in totals if counts[r]}


def _spine(t: Tree, side: int) -> set:
    nodes = set()
    v = t.root
    while True:
        nodes.add(v)
        kids = t.nodes[v].children
        if not kids:
            return nodes
        v = kids[side]


def branch_decomposition(ot: OrderedTree) -> BranchSet:
    """
    Split an ordered tree into branches.

    A branch starts at a vertex whose order differs from its parent's (or at
    the root) and follows the unique same-order child down. Branches touching
    the leftmost or rightmost root-to-leaf path belong to boundary basins and
    are flagged incomplete.
    """
    t = ot.tree
    if t.is_empty:
        return BranchSet(ordered=ot, branches=(), branch_of_node=())

    leaf_count = [0] * t.size
    for v in t.postorder():
        kids = t.nodes[v].children
        leaf_count[v] = sum(leaf_count[c] for c in kids) if kids else 1

    boundary = _spine(t, 0) | _spine(t, -1)
    orders = ot.orders
    branch_of_node = [-1] * t.size
    branches: List[Branch] = []
    for v in t.preorder():
        parent = t.nodes[v].parent
        if parent is not None and orders[parent] == orders[v]:
            continue
        path = [v]
        w = v
        while True:
            same = [c for c in t.nodes[w].children if orders[c] == orders[v]]
            if not same:
                break
            w = same[0]
            path.append(w)
        for u in path:
            branch_of_node[u] = len(branches)
        branches.append(
            Branch(
                order=orders[v],
                nodes=tuple(path),
                magnitude=leaf_count[v],
                complete=boundary.isdisjoint(path),
            )
        )
    return BranchSet(ordered=ot, branches=tuple(branches), branch_of_node=tuple(branch_of_node))


@dataclass(frozen=True)
class TokunagaMatrix:
    """
    Side-branch counts.

    Attributes:
        side_counts: N_ij, order-i side branches joining order-j branches (i < j)
        branch_counts: N_j, the order-j branches counted as denominators
        merge_counts: N_ii, order-i branches merging into an order-(i+1) terminal vertex
        per_branch: tau^k_ij for every counted order-j branch k
        complete_only: Whether only complete branches were counted
    """

    side_counts: Dict[Tuple[int, int], int]
    branch_counts: Dict[int, int]
    merge_counts: Dict[int, int]
    per_branch: Dict[Tuple[int, int], Tuple[int, ...]]
    complete_only: bool
    omega: int

    def ratio(self, i: int, j: int) -> float:
        """T_ij = N_ij / N_j; the diagonal is 2 by convention."""
        if i == j:
            return 2.0
        denominator = self.branch_counts.get(j, 0)
        if not denominator:
            return math.nan
        return self.side_counts.get((i, j), 0) / denominator

    @property
    def ratios(self) -> Dict[Tuple[int, int], float]:
        return {
            (i, j): self.ratio(i, j)
            for j in range(2, self.omega + 1)
            for i in range(1, j)
            if self.branch_counts.get(j)
        }


def tokunaga_matrix(
    ot: OrderedTree, complete_only: bool = True, branches: Optional[BranchSet] = None
) -> TokunagaMatrix:
    """
    Count side branches per pair of orders.

    Every vertex of an order-j branch except its terminal vertex has exactly
    one side child of lower order; the initial vertex is included.

    Raises:
        NonBinaryTreeError: If an internal node does not have two children
    """
    t = ot.tree
    for v, node in enumerate(t.nodes):
        if len(node.children) not in (0, 2):
            raise NonBinaryTreeError(node=v)

    branches = branches if branches is not None else branch_decomposition(ot)
    orders = ot.orders
    tau: Dict[Tuple[int, int], List[int]] = {}
    branch_counts = {j: 0 for j in range(1, ot.omega + 1)}
    merge_counts = {i: 0 for i in range(1, ot.omega)}

    for branch in branches.branches:
        if complete_only and not branch.complete:
            continue
        j = branch.order
        slot = branch_counts[j]
        branch_counts[j] += 1
        for v in branch.nodes[:-1]:
            side = next(c for c in t.nodes[v].children if orders[c] < j)
            column = tau.setdefault((orders[side], j), [])
            column.extend([0] * (slot + 1 - len(column)))
            column[slot] += 1
        if j > 1:
            merge_counts[j - 1] += sum(
                1 for c in t.nodes[branch.terminal].children if orders[c] == j - 1
            )

    per_branch = {
        key: tuple(column + [0] * (branch_counts[key[1]] - len(column)))
        for key, column in tau.items()
    }
    side_counts = {key: sum(column) for key, column in per_branch.items()}
    return TokunagaMatrix(
        side_counts=side_counts,
        branch_counts=branch_counts,
        merge_counts=merge_counts,
        per_branch=per_branch,
        complete_only=complete_only,
        omega=ot.omega,
    )


@dataclass(frozen=True)
class HortonStats:
    """Horton ratios and the fitted Horton exponents."""

    omega: int
    counts: Dict[int, int]
    magnitudes: Dict[int, float]
    eta: Dict[int, float]
    magnitude_ratios: Dict[int, float]
    r_b: Optional[float]
    r_m: Optional[float]
    alpha: Optional[float]
    fit_orders: Tuple[int, ...]


def fit_orders(omega: int) -> Tuple[int, ...]:
    """Orders used by the Horton fits: 1..omega-2, widened to 1..2 when omega is 3."""
    if omega < 3:
        return ()
    return tuple(range(1, max(2, omega - 2) + 1))


def horton_stats(bs: BranchSet) -> HortonStats:
    """
    Horton ratios eta_r = N_r/N_{r+1}, magnitude ratios and log-linear fits.

    Fits are withheld for trees of order below 3.
    """
    omega = bs.omega
    counts = bs.counts
    magnitudes = bs.mean_magnitudes
    eta = {r: counts[r] / counts[r + 1] for r in range(1, omega) if counts[r + 1]}
    magnitude_ratios = {
        r: magnitudes[r + 1] / magnitudes[r] for r in range(1, omega) if r + 1 in magnitudes
    }

    orders = fit_orders(omega)
    r_b = r_m = alpha = None
    if orders:
        x = np.array(orders, dtype=float)
        r_b = math.exp(-stats.linregress(x, np.log([counts[r] for r in orders])).slope)
        r_m = math.exp(stats.linregress(x, np.log([magnitudes[r] for r in orders])).slope)
        if r_m != 1.0:
            alpha = math.log(r_b) / math.log(r_m)
    else:
        logger.debug(f"Horton fits withheld for tree of order {omega}")

    return HortonStats(
        omega=omega,
        counts=counts,
        magnitudes=magnitudes,
        eta=eta,
        magnitude_ratios=magnitude_ratios,
        r_b=r_b,
        r_m=r_m,
        alpha=alpha,
        fit_orders=orders,
    )


def predicted_rb(a: float, c: float) -> float:
    """Horton ratio implied by Tokunaga parameters (a, c)."""
    if not (a > 0 and c > 0):
        raise DendroflowValidationError(f"Tokunaga parameters must be positive: a={a}, c={c}")
    total = 2.0 + c + a
    return (total + math.sqrt(total * total - 8.0 * c)) / 2.0


def tokunaga_tree(a: int, c: int, omega: int, length: float = 1.0) -> Tree:
    """
    Deterministic binary tree with exactly a*c^(k-1) order-(j-k) side branches per order-j branch.

    Side branches are attached below the branch's initial vertex in
    increasing order; all edges get ``length``.
    """
    if omega < 1:
        raise DendroflowValidationError(f"tree order must be positive, got {omega}")
    side = {k: int(round(a * c ** (k - 1))) for k in range(1, omega)}

    children: List[List[int]] = []

    def add(kids: List[int]) -> int:
        children.append(kids)
        return len(children) - 1

    # Build bottom-up by order so each order-j branch copies the same recipe.
    def build(order: int) -> int:
        if order == 1:
            return add([])
        current = add([build(order - 1), build(order - 1)])
        for lower in range(1, order):
            for _ in range(side[order - lower]):
                current = add([build(lower), current])
        return current

    root = build(omega)
    return tree_from_children(children, [length] * len(children), root, length)
