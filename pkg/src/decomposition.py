"""Orientation digraphs and M-sum decomposition for gridwqo.

Every line (column or row) of a partial multiplication matrix carries an
orientation from its sign: columns with c_i = +1 run left to right, rows with
r_j = +1 run bottom to top, and the reverse for -1. Points sharing a line are
totally ordered by it, which gives the orientation digraph.
"""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass
from functools import cached_property
import itertools
import logging

import networkx as nx

from src.core import Permutation
from src.gridding import GriddedPermutation, restrict
from src.matrix import Cell, CycleDescriptor, GriddingMatrix, Vertex, lines_of, shared_line

logger = logging.getLogger(__name__)

Lines = dict[Vertex, list[Hashable]]


class DecompositionError(ValueError):
    """Raised when a decomposition operation's preconditions fail."""


def _require_pmm(matrix: GriddingMatrix) -> None:
    if matrix.pmm is None:
        raise DecompositionError("Matrix has no row and column sequences; normalize it first")


def orientation_lines(gridded: GriddedPermutation) -> dict[Vertex, list[int]]:
    """
    Points of each nonempty line in orientation order.

    Raises:
        DecompositionError: If the matrix carries no sequences
    """
    _require_pmm(gridded.matrix)
    pmm = gridded.matrix.pmm
    assert pmm is not None
    lines: dict[Vertex, list[int]] = defaultdict(list)
    for index, (col, _) in enumerate(gridded.cells, start=1):
        lines[("c", col)].append(index)
    by_value = sorted(range(1, len(gridded) + 1), key=gridded.value_of)
    for index in by_value:
        lines[("r", gridded.cell_of(index)[1])].append(index)
    for (kind, number), points in lines.items():
        sign = pmm.column_sign(number) if kind == "c" else pmm.row_sign(number)
        if sign < 0:
            points.reverse()
    return dict(lines)


def assemble(
    matrix: GriddingMatrix,
    cell_of: Mapping[Hashable, Cell],
    lines: Mapping[Vertex, Sequence[Hashable]],
) -> tuple[GriddedPermutation, dict[Hashable, int]]:
    """
    Turn per-line orientation orders back into a gridded permutation.

    Positions come from reading columns left to right, values from reading
    rows bottom to top, each line laid out according to its sign.

    Returns:
        (gridded permutation, map from point id to 1-based position)
    """
    pmm = matrix.pmm
    assert pmm is not None
    position_order: list[Hashable] = []
    for i in range(1, matrix.cols + 1):
        points = list(lines.get(("c", i), ()))
        position_order.extend(points if pmm.column_sign(i) > 0 else reversed(points))
    value_order: list[Hashable] = []
    for j in range(1, matrix.rows + 1):
        points = list(lines.get(("r", j), ()))
        value_order.extend(points if pmm.row_sign(j) > 0 else reversed(points))

    value_of = {point: v for v, point in enumerate(value_order, start=1)}
    position_of = {point: p for p, point in enumerate(position_order, start=1)}
    perm = Permutation(tuple(value_of[point] for point in position_order))
    cells = tuple(cell_of[point] for point in position_order)
    return GriddedPermutation(perm, matrix, cells), position_of


@dataclass(frozen=True)
class OrientationDigraph:
    """Orientation digraph of a gridded permutation, stored as per-line total orders."""

    gridded: GriddedPermutation
    lines: tuple[tuple[Vertex, tuple[int, ...]], ...]

    @cached_property
    def rank(self) -> dict[tuple[Vertex, int], int]:
        """Index of each point within each of its lines."""
        return {
            (line, point): k for line, points in self.lines for k, point in enumerate(points)
        }

    def edges(self) -> set[tuple[int, int]]:
        """All pairs x -> y with x before y on a common line."""
        result: set[tuple[int, int]] = set()
        for _, points in self.lines:
            result.update(itertools.combinations(points, 2))
        return result

    def has_edge(self, x: int, y: int) -> bool:
        for line in lines_of(self.gridded.cell_of(x)):
            rx, ry = self.rank.get((line, x)), self.rank.get((line, y))
            if ry is not None and rx is not None and rx < ry:
                return True
        return False

    def successors(self, x: int) -> list[int]:
        result: list[int] = []
        for line, points in self.lines:
            key = (line, x)
            if key in self.rank:
                result.extend(points[self.rank[key] + 1 :])
        return sorted(set(result))

    def line_order(self, line: Vertex) -> tuple[int, ...]:
        return dict(self.lines).get(line, ())

    def to_networkx(self, closed: bool = True) -> nx.DiGraph:
        """
        Materialise the digraph.

        With ``closed=False`` only consecutive pairs in each line are added,
        which has the same reachability.
        """
        graph = nx.DiGraph()
        graph.add_nodes_from(range(1, len(self.gridded) + 1))
        if closed:
            graph.add_edges_from(self.edges())
        else:
            for _, points in self.lines:
                graph.add_edges_from(itertools.pairwise(points))
        return graph


def orientation_digraph(gridded: GriddedPermutation) -> OrientationDigraph:
    """Build the orientation digraph of a gridded permutation over a PMM."""
    lines = orientation_lines(gridded)
    return OrientationDigraph(
        gridded=gridded,
        lines=tuple(sorted((line, tuple(points)) for line, points in lines.items())),
    )


def m_sum(first: GriddedPermutation, second: GriddedPermutation) -> GriddedPermutation:
    """
    The M-sum: on every shared line, the first summand's points precede the second's.

    Raises:
        DecompositionError: On differing matrices or missing sequences
    """
    if first.matrix != second.matrix:
        raise DecompositionError("M-sum needs a common matrix")
    matrix = first.matrix if first.matrix.pmm is not None else second.matrix
    _require_pmm(matrix)

    lines: Lines = defaultdict(list)
    cell_of: dict[Hashable, Cell] = {}
    for tag, part in (("first", first), ("second", second)):
        for line, points in orientation_lines(part).items():
            lines[line].extend((tag, p) for p in points)
        for k, cell in enumerate(part.cells, start=1):
            cell_of[(tag, k)] = cell
    gridded, _ = assemble(matrix, cell_of, lines)
    return gridded


def _components(digraph: OrientationDigraph) -> list[set[int]]:
    return [set(c) for c in nx.strongly_connected_components(digraph.to_networkx(closed=False))]


def is_indivisible(gridded: GriddedPermutation) -> bool:
    """True when the orientation digraph is strongly connected and nonempty."""
    digraph = orientation_digraph(gridded)
    if len(gridded) == 0:
        return False
    return len(_components(digraph)) == 1


def decompose(gridded: GriddedPermutation) -> list[GriddedPermutation]:
    """
    Split into M-indivisible parts.

    Parts are the strongly connected components, listed in topological order
    of the condensation (sources first, ties broken by least position), so
    folding them with m_sum rebuilds the input.
    """
    digraph = orientation_digraph(gridded)
    if len(gridded) == 0:
        return []
    graph = digraph.to_networkx(closed=False)
    sccs = [set(c) for c in nx.strongly_connected_components(graph)]
    condensed = nx.condensation(graph, scc=sccs)
    order = nx.lexicographical_topological_sort(
        condensed, key=lambda node: min(condensed.nodes[node]["members"])
    )
    parts = [restrict(gridded, sorted(condensed.nodes[node]["members"])) for node in order]
    logger.debug("Decomposed length %d into %d parts", len(gridded), len(parts))
    return parts


def last_points(gridded: GriddedPermutation) -> dict[Cell, int]:
    """The last point in orientation of every nonempty cell."""
    lines = orientation_lines(gridded)
    result: dict[Cell, int] = {}
    for i in range(1, gridded.matrix.cols + 1):
        for point in lines.get(("c", i), []):
            result[gridded.cell_of(point)] = point
    return result


def last_points_cycle(gridded: GriddedPermutation) -> tuple[int, ...]:
    """
    A shortest directed cycle among the last points of the nonempty cells.

    Raises:
        DecompositionError: If the input is not a non-singleton indivisible
    """
    if len(gridded) < 2 or not is_indivisible(gridded):
        raise DecompositionError("Last points are only defined for non-singleton indivisibles")
    alpha = sorted(last_points(gridded).values())
    digraph = orientation_digraph(gridded)
    induced = nx.DiGraph()
    induced.add_nodes_from(alpha)
    induced.add_edges_from(
        (x, y) for x in alpha for y in alpha if x != y and digraph.has_edge(x, y)
    )

    best: list[int] | None = None
    for start in alpha:
        for pred in sorted(induced.predecessors(start)):
            path = nx.shortest_path(induced, start, pred)
            if best is None or len(path) < len(best):
                best = path
    if best is None:
        raise DecompositionError("Last points contain no directed cycle")
    return tuple(best)


def last_points_indivisible(gridded: GriddedPermutation) -> GriddedPermutation:
    """The indivisible subpermutation formed by a directed cycle of last points."""
    return restrict(gridded, last_points_cycle(gridded))


def validate_cycle(matrix: GriddingMatrix, cycle: CycleDescriptor) -> None:
    """
    Check that a cycle's cells are nonzero and consecutive cells share a line.

    Raises:
        DecompositionError: If the cycle does not fit the matrix
    """
    cells = cycle.cells
    if len(cells) < 4 or len(set(cells)) != len(cells):
        raise DecompositionError("A cycle needs at least four distinct cells")
    for i, j in cells:
        if not (1 <= i <= matrix.cols and 1 <= j <= matrix.rows) or matrix.entry(i, j) == 0:
            raise DecompositionError(f"Cycle cell ({i},{j}) is not a nonzero entry")
    try:
        for k in range(len(cells)):
            shared_line(cells[k - 1], cells[k])
    except ValueError as e:
        raise DecompositionError(str(e)) from e


def _one_per_cell(matrix: GriddingMatrix, cells: Iterable[Cell]) -> GriddedPermutation:
    ordered = list(cells)
    size = len(ordered)
    lines: Lines = defaultdict(list)
    for k in range(size):
        lines[shared_line(ordered[k], ordered[(k + 1) % size])].extend([k, (k + 1) % size])
    gridded, _ = assemble(matrix, dict(enumerate(ordered)), lines)
    return gridded


def minimal_indivisibles(
    matrix: GriddingMatrix, cycle: CycleDescriptor
) -> tuple[GriddedPermutation, GriddedPermutation]:
    """The two one-point-per-cell indivisibles of a cycle, one per traversal direction."""
    _require_pmm(matrix)
    validate_cycle(matrix, cycle)
    forward = cycle.cells
    backward = (forward[0], *reversed(forward[1:]))
    return _one_per_cell(matrix, forward), _one_per_cell(matrix, backward)
