"""
Text formats: the tree file, series CSV, statistics tables and report files.

CSV output uses LF line endings and ``CSV_DIGITS`` significant digits so that
identical inputs give byte-identical files on every platform.
"""

import csv
import io
import json
import logging
import math
import os
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np

from .exceptions import SeriesParseError, TreeConstructionError
from .horton import HortonStats, TokunagaMatrix
from .level_set import Series, SeriesLike, as_series
from .tree_core import Tree, build_tree, harris_path, iter_edges, tree_from_children
from .utils import format_number

logger = logging.getLogger(__name__)

TREE_HEADER = 'ghost'


def dump_tree(t: Tree) -> str:
    """
    Serialize a tree.

    The first line is ``ghost <length>``; each following line is
    ``<node> <parent> <edge_length> <child_rank>`` with parent -1 and rank 0
    for the root.
    """
    lines = [f"{TREE_HEADER} {format_number(t.ghost_edge_length)}"]
    for v, parent, length, rank in iter_edges(t):
        lines.append(f"{v} {-1 if parent is None else parent} {format_number(length)} {rank}")
    return '\n'.join(lines) + '\n'


def load_tree(text: str) -> Tree:
    """
    Parse the output of :func:`dump_tree`.

    Children are ordered by their rank column and nodes are relabelled in
    preorder, so a dumped tree loads back identical.

    Raises:
        TreeConstructionError: On malformed lines or an invalid tree
    """
    rows = [line.split() for line in text.splitlines() if line.strip() and not line.lstrip().startswith('#')]
    if not rows or rows[0][0] != TREE_HEADER or len(rows[0]) != 2:
        raise TreeConstructionError(f"tree file must start with '{TREE_HEADER} <length>'")
    try:
        ghost = float(rows[0][1])
    except ValueError:
        raise TreeConstructionError(f"bad ghost length {rows[0][1]!r}")
    if len(rows) == 1:
        return Tree.empty(ghost)

    records = {}
    for number, fields in enumerate(rows[1:], start=2):
        if len(fields) != 4:
            raise TreeConstructionError(f"line {number}: expected 4 fields, got {len(fields)}")
        try:
            v, parent, rank = int(fields[0]), int(fields[1]), int(fields[3])
            length = float(fields[2])
        except ValueError:
            raise TreeConstructionError(f"line {number}: malformed record {' '.join(fields)!r}")
        if v in records:
            raise TreeConstructionError(f"line {number}: duplicate node", node=v)
        records[v] = (parent, length, rank)

    if sorted(records) != list(range(len(records))):
        raise TreeConstructionError("node ids must be 0..n-1")
    edges = [
        (None, None) if records[v][0] < 0 else (records[v][0], records[v][1])
        for v in range(len(records))
    ]
    validated = build_tree(edges, ghost)

    children = [
        sorted(node.children, key=lambda c: records[c][2]) for node in validated.nodes
    ]
    lengths = [node.parent_edge_length for node in validated.nodes]
    return tree_from_children(children, lengths, validated.root, ghost)


def read_tree(path: str) -> Tree:
    try:
        with open(path, encoding='utf-8') as fh:
            text = fh.read()
    except OSError as e:
        raise TreeConstructionError(f"cannot read {path}: {e.strerror}")
    return load_tree(text)


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def parse_series(text: str) -> Series:
    """
    Parse a series from CSV text.

    One column holds the values; two columns are read as ``t,value``. A
    non-numeric first line is taken as a header, blank lines and ``#``
    comments are skipped.

    Raises:
        SeriesParseError: With the offending line number, or for an empty input
    """
    values: List[float] = []
    width: Optional[int] = None
    seen_data = False
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        fields = [field.strip() for field in line.split(',')]
        if not seen_data and not all(_is_number(field) for field in fields):
            seen_data = True
            width = len(fields)
            if width not in (1, 2):
                raise SeriesParseError(f"expected 1 or 2 columns, got {width}", line_number=number)
            continue
        seen_data = True
        if width is None:
            width = len(fields)
            if width not in (1, 2):
                raise SeriesParseError(f"expected 1 or 2 columns, got {width}", line_number=number)
        if len(fields) != width:
            raise SeriesParseError(f"expected {width} column(s), got {len(fields)}", line_number=number)
        bad = [field for field in fields if not _is_number(field)]
        if bad:
            raise SeriesParseError(f"not a number: {bad[0]!r}", line_number=number)
        value = float(fields[-1])
        if not math.isfinite(value):
            raise SeriesParseError(f"value must be finite, got {fields[-1]!r}", line_number=number)
        values.append(value)

    if not values:
        raise SeriesParseError("series file holds no values")
    return Series(values)


def read_series(path: str) -> Series:
    try:
        with open(path, encoding='utf-8') as fh:
            text = fh.read()
    except OSError as e:
        raise SeriesParseError(f"cannot read {path}: {e.strerror}")
    return parse_series(text)


def format_series_csv(s: SeriesLike) -> str:
    x = as_series(s).values
    return rows_to_csv([{'t': t, 'value': float(v)} for t, v in enumerate(x)], columns=('t', 'value'))


def harris_csv(t: Tree) -> str:
    """Harris-path breakpoints as ``t,value`` CSV, readable by :func:`parse_series`."""
    rows = [{'t': x, 'value': h} for x, h in harris_path(t).breakpoints]
    return rows_to_csv(rows, columns=('t', 'value'))


def rows_to_csv(rows: Sequence[Mapping[str, Any]], columns: Optional[Iterable[str]] = None) -> str:
    """Render dict rows as CSV; columns default to first-seen key order."""
    if columns is None:
        ordered: Dict[str, None] = {}
        for row in rows:
            ordered.update(dict.fromkeys(row))
        columns = list(ordered)
    columns = list(columns)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row.get(column)) for column in columns])
    return buffer.getvalue()


def _csv_cell(value: Any) -> str:
    if value is None:
        return ''
    if isinstance(value, str):
        return value
    if isinstance(value, (list, tuple)):
        return ' '.join(_csv_cell(item) for item in value)
    if isinstance(value, (bool, np.bool_, int, np.integer)):
        return format_number(value)
    value = float(value)
    if math.isnan(value):
        return 'nan'
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    return format_number(value)


def horton_rows(hs: HortonStats) -> List[Dict[str, Any]]:
    return [
        {
            'order': r,
            'count': hs.counts[r],
            'magnitude': hs.magnitudes.get(r),
            'eta': hs.eta.get(r),
            'magnitude_ratio': hs.magnitude_ratios.get(r),
        }
        for r in range(1, hs.omega + 1)
    ]


def horton_summary(hs: HortonStats) -> Dict[str, Any]:
    return {
        'omega': hs.omega,
        'r_b': hs.r_b,
        'r_m': hs.r_m,
        'alpha': hs.alpha,
        'fit_orders': list(hs.fit_orders),
    }


def tokunaga_rows(tm: TokunagaMatrix) -> List[Dict[str, Any]]:
    return [
        {
            'i': i,
            'j': j,
            'side_count': tm.side_counts.get((i, j), 0),
            'branch_count': tm.branch_counts.get(j, 0),
            'T': tm.ratio(i, j),
        }
        for j in range(2, tm.omega + 1)
        for i in range(1, j)
    ]


def to_jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become null."""
    if isinstance(value, Mapping):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def dumps_json(data: Any) -> str:
    return json.dumps(to_jsonable(data), indent=2, sort_keys=True) + '\n'


def write_text(path: str, text: str) -> str:
    """Write ``text`` with LF line endings, creating parent directories."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as fh:
        fh.write(text)
    logger.info(f"Wrote {path}")
    return path


def write_report(report, out_dir: str) -> List[str]:
    """
    Write an experiment report as ``<name>.json`` plus one CSV per table.

    Returns:
        Paths written, in order
    """
    paths = [
        write_text(os.path.join(out_dir, f"{report.name}.json"), dumps_json(report.to_dict())),
        write_text(os.path.join(out_dir, f"{report.name}_estimates.csv"), rows_to_csv(report.estimate_rows())),
    ]
    if report.checks:
        checks = [check.to_dict() for check in report.checks]
        paths.append(write_text(os.path.join(out_dir, f"{report.name}_checks.csv"), rows_to_csv(checks)))
    for table, rows in sorted(report.tables.items()):
        if rows:
            paths.append(write_text(os.path.join(out_dir, f"{report.name}_{table}.csv"), rows_to_csv(rows)))
    return paths
