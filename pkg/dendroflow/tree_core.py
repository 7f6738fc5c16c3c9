"""
Rooted planar trees with edge lengths.

Trees are stored as an arena: ``Tree.nodes[i]`` is the :class:`Node` with
integer handle ``i``. Children are kept in planar (left to right) order and
every node carries the length of the edge to its parent; the root carries the
length of the ghost edge that hangs below it.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .exceptions import DendroflowValidationError, TreeConstructionError

logger = logging.getLogger(__name__)


class Node(NamedTuple):
    """A tree vertex: parent handle, ordered child handles, parental edge length."""

    parent: Optional[int]
    children: Tuple[int, ...]
    parent_edge_length: float

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def is_root(self) -> bool:
        return self.parent is None


@dataclass(frozen=True)
class Tree:
    """
    Immutable rooted planar tree.

    Attributes:
        nodes: Arena of nodes indexed by handle
        root: Handle of the root, ``None`` for the empty tree
        ghost_edge_length: Length of the edge below the root
    """

    nodes: Tuple[Node, ...]
    root: Optional[int]
    ghost_edge_length: float

    @classmethod
    def empty(cls, ghost_edge_length: float = 1.0) -> "Tree":
        return cls(nodes=(), root=None, ghost_edge_length=ghost_edge_length)

    @property
    def is_empty(self) -> bool:
        return self.root is None

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def length(self) -> float:
        """Total length of all edges, ghost edge included."""
        if self.is_empty:
            return 0.0
        return math.fsum(node.parent_edge_length for node in self.nodes)

    def is_binary(self) -> bool:
        return all(len(node.children) in (0, 2) for node in self.nodes)

    def leaves(self) -> List[int]:
        """Leaf handles in planar (left to right) order."""
        return [v for v in self.preorder() if not self.nodes[v].children]

    def preorder(self) -> List[int]:
        if self.is_empty:
            return []
        order = []
        stack = [self.root]
        while stack:
            v = stack.pop()
            order.append(v)
            stack.extend(reversed(self.nodes[v].children))
        return order

    def postorder(self) -> List[int]:
        # Reverse of a root-right-left preorder.
        if self.is_empty:
            return []
        order = []
        stack = [self.root]
        while stack:
            v = stack.pop()
            order.append(v)
            stack.extend(self.nodes[v].children)
        order.reverse()
        return order

    def depths(self) -> np.ndarray:
        """Distance of every node from the bottom of the ghost edge."""
        depth = np.zeros(self.size)
        for v in self.preorder():
            node = self.nodes[v]
            base = 0.0 if node.parent is None else depth[node.parent]
            depth[v] = base + node.parent_edge_length
        return depth

    def path_length(self, u: int, v: int) -> float:
        """Length of the tree path between nodes ``u`` and ``v``."""
        ancestors: Dict[int, float] = {}
        distance = 0.0
        w: Optional[int] = u
        while w is not None:
            ancestors[w] = distance
            node = self.nodes[w]
            distance += node.parent_edge_length
            w = node.parent

        distance = 0.0
        w = v
        while w not in ancestors:
            node = self.nodes[w]
            distance += node.parent_edge_length
            w = node.parent
        return ancestors[w] + distance


@dataclass(frozen=True)
class HarrisPath:
    """Breakpoints ``(abscissa, height)`` of a +-1 slope excursion."""

    breakpoints: Tuple[Tuple[float, float], ...]

    @property
    def abscissae(self) -> np.ndarray:
        return np.array([x for x, _ in self.breakpoints])

    @property
    def heights(self) -> np.ndarray:
        return np.array([h for _, h in self.breakpoints])

    @property
    def span(self) -> float:
        if not self.breakpoints:
            return 0.0
        return self.breakpoints[-1][0] - self.breakpoints[0][0]


Edge = Tuple[Optional[int], Optional[float]]


def build_tree(edges: Sequence[Edge], ghost_length: float) -> Tree:
    """
    Build and validate a tree from a parent list.

    Entry ``i`` of ``edges`` is ``(parent, edge_length)`` for node ``i``. The
    root is the single entry whose parent is ``None``; its length is the ghost
    edge and may be given as ``None``. Children keep their input order.

    Args:
        edges: Parent index and parental edge length per node
        ghost_length: Length of the ghost edge below the root

    Returns:
        Validated Tree (node handles equal input positions)

    Raises:
        TreeConstructionError: On cycles, nonpositive lengths, bad parent
            indices, several roots or disconnected nodes
    """
    ghost_length = _checked_length(ghost_length, None, "ghost edge length")
    n = len(edges)
    if n == 0:
        raise TreeConstructionError("edge list is empty")

    roots = []
    children: List[List[int]] = [[] for _ in range(n)]
    for i, (parent, length) in enumerate(edges):
        if parent is None:
            if length is not None and float(length) != ghost_length:
                raise TreeConstructionError(
                    f"root edge length {length} differs from ghost length {ghost_length}",
                    node=i,
                )
            roots.append(i)
            continue
        if not isinstance(parent, (int, np.integer)) or not 0 <= parent < n:
            raise TreeConstructionError(f"parent index {parent!r} out of range", node=i)
        if parent == i:
            raise TreeConstructionError("cycle detected: node is its own parent", node=i)
        _checked_length(length, i, "edge length")
        children[int(parent)].append(i)

    if not roots:
        raise TreeConstructionError("cycle detected: no node without parent", node=_cycle_member(edges, 0))
    if len(roots) > 1:
        raise TreeConstructionError("disconnected node: more than one root", node=roots[1])

    root = roots[0]
    seen = [False] * n
    stack = [root]
    while stack:
        v = stack.pop()
        seen[v] = True
        stack.extend(children[v])

    if not all(seen):
        stray = seen.index(False)
        raise TreeConstructionError("cycle detected", node=_cycle_member(edges, stray))

    nodes = tuple(
        Node(
            parent=None if parent is None else int(parent),
            children=tuple(children[i]),
            parent_edge_length=ghost_length if parent is None else float(length),
        )
        for i, (parent, length) in enumerate(edges)
    )
    return Tree(nodes=nodes, root=root, ghost_edge_length=ghost_length)


def _checked_length(length: Optional[float], node: Optional[int], what: str) -> float:
    if length is None:
        raise TreeConstructionError(f"{what} is missing", node=node)
    value = float(length)
    if not math.isfinite(value) or value <= 0.0:
        raise TreeConstructionError(f"nonpositive {what} {length}", node=node)
    return value


def _cycle_member(edges: Sequence[Edge], start: int) -> int:
    visited = set()
    v: Optional[int] = start
    while v is not None and v not in visited:
        visited.add(v)
        v = edges[v][0]
    return start if v is None else int(v)


def tree_from_children(
    children: Sequence[Sequence[int]],
    lengths: Sequence[float],
    root: int,
    ghost_length: float,
) -> Tree:
    """
    Assemble a tree from trusted child lists, relabelling nodes in preorder.

    ``lengths[v]`` is the parental edge length of ``v``; the root's entry is
    ignored in favour of ``ghost_length``.
    """
    order = []
    stack = [root]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(reversed(children[v]))

    label = {old: new for new, old in enumerate(order)}
    nodes = []
    parent_of = {root: None}
    for old in order:
        kids = children[old]
        for kid in kids:
            parent_of[kid] = label[old]
        nodes.append(
            Node(
                parent=parent_of[old],
                children=tuple(label[kid] for kid in kids),
                parent_edge_length=ghost_length if old == root else float(lengths[old]),
            )
        )
    return Tree(nodes=tuple(nodes), root=0, ghost_edge_length=float(ghost_length))


def compact(t: Tree, keep: Sequence[bool]) -> Tuple[Tree, List[int]]:
    """
    Rebuild ``t`` on the kept nodes (an ancestor-closed set).

    Returns:
        The compacted tree and, for each new handle, the old handle it came from
    """
    if t.is_empty or not keep[t.root]:
        return Tree.empty(t.ghost_edge_length), []

    children = {v: [c for c in t.nodes[v].children if keep[c]] for v in range(t.size) if keep[v]}
    lengths = {v: t.nodes[v].parent_edge_length for v in children}
    compacted = tree_from_children(children, lengths, t.root, t.ghost_edge_length)
    kept = []
    stack = [t.root]
    while stack:
        v = stack.pop()
        kept.append(v)
        stack.extend(reversed(children[v]))
    return compacted, kept


def contract(t: Tree) -> Tree:
    """
    Series reduction: merge each single-child vertex into its child.

    Edge lengths along a merged chain are summed; a single-child root hands
    its ghost edge to the child.
    """
    if t.is_empty:
        return t

    def skip_chain(v: int, carried: float) -> Tuple[int, float]:
        while len(t.nodes[v].children) == 1:
            v = t.nodes[v].children[0]
            carried += t.nodes[v].parent_edge_length
        return v, carried

    root, ghost = skip_chain(t.root, t.ghost_edge_length)
    children: Dict[int, List[int]] = {}
    lengths: Dict[int, float] = {root: ghost}
    stack = [root]
    while stack:
        v = stack.pop()
        kids = []
        for c in t.nodes[v].children:
            end, length = skip_chain(c, t.nodes[c].parent_edge_length)
            kids.append(end)
            lengths[end] = length
            stack.append(end)
        children[v] = kids
    return tree_from_children(children, lengths, root, ghost)


def harris_path(t: Tree) -> HarrisPath:
    """
    Depth-first contour of ``t`` as a +-1 slope excursion.

    The walk climbs the ghost edge, visits children left to right (each edge
    twice) and descends the ghost edge back to height 0. Only slope changes
    and the two endpoints are kept as breakpoints.
    """
    if t.is_empty:
        return HarrisPath(breakpoints=())

    depth = t.depths()
    heights = [0.0, depth[t.root]]
    stack: List[Tuple[int, int]] = [(t.root, 0)]
    while stack:
        v, i = stack.pop()
        kids = t.nodes[v].children
        if i < len(kids):
            stack.append((v, i + 1))
            heights.append(depth[kids[i]])
            stack.append((kids[i], 0))
        elif stack:
            heights.append(depth[stack[-1][0]])
    heights.append(0.0)

    h = np.asarray(heights)
    x = np.concatenate(([0.0], np.cumsum(np.abs(np.diff(h)))))
    direction = np.sign(np.diff(h))
    turning = np.flatnonzero(direction[1:] != direction[:-1]) + 1
    keep = np.concatenate(([0], turning, [len(h) - 1]))
    return HarrisPath(breakpoints=tuple(zip(x[keep].tolist(), h[keep].tolist())))


def shape(t: Tree) -> Tree:
    """Combinatorial shape: same planar structure, every length (ghost included) set to 1."""
    if t.is_empty:
        return Tree.empty(1.0)
    children = {v: list(t.nodes[v].children) for v in range(t.size)}
    return tree_from_children(children, [1.0] * t.size, t.root, 1.0)


def shape_signature(t: Tree) -> str:
    """Balanced-parenthesis code of the planar shape (empty tree -> '')."""
    if t.is_empty:
        return ''
    parts = []
    stack: List[Tuple[int, bool]] = [(t.root, False)]
    while stack:
        v, closing = stack.pop()
        if closing:
            parts.append(')')
            continue
        parts.append('(')
        stack.append((v, True))
        stack.extend((c, False) for c in reversed(t.nodes[v].children))
    return ''.join(parts)


def catalan_count(n: int) -> int:
    """
    Number of planar binary trees with ``n`` leaves, C_{n-1}.

    Raises:
        DendroflowValidationError: If n < 1
    """
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise DendroflowValidationError(f"catalan_count needs n >= 1, got {n!r}")
    n = int(n)
    return math.comb(2 * n - 2, n - 1) // n


def enumerate_binary_shapes(n: int) -> List[str]:
    """Signatures of every planar binary tree with ``n`` leaves."""
    if n < 1:
        raise DendroflowValidationError(f"enumerate_binary_shapes needs n >= 1, got {n}")
    table: Dict[int, List[str]] = {1: ['()']}
    for leaves in range(2, n + 1):
        table[leaves] = [
            f"({left}{right})"
            for k in range(1, leaves)
            for left in table[k]
            for right in table[leaves - k]
        ]
    return table[n]


def iter_edges(t: Tree) -> Iterator[Tuple[int, Optional[int], float, int]]:
    """Yield ``(node, parent, edge_length, child_rank)`` in handle order; ranks start at 1."""
    for v, node in enumerate(t.nodes):
        rank = 0 if node.parent is None else t.nodes[node.parent].children.index(v) + 1
        yield v, node.parent, node.parent_edge_length, rank
