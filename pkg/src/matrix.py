"""Gridding matrices for gridwqo.

Handles parsing and printing of {-1, 0, 1} matrices, their row-column graphs,
cycle census, partial multiplication sequences, doubling and normalisation.

Indexing follows the usual plotting convention: ``entry(i, j)`` is column i
counted from the left and row j counted from the bottom. Text forms list rows
top to bottom.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import StrEnum
import logging
import math
import re

import networkx as nx

logger = logging.getLogger(__name__)

Cell = tuple[int, int]
# ("c", i) is column vertex i, ("r", j) is row vertex j
Vertex = tuple[str, int]

ROW_SPLIT = re.compile(r"\s*(?:\n|/)\s*")
ALLOWED_ENTRIES = {-1, 0, 1}


class MatrixError(ValueError):
    """Raised when matrix text or structure is invalid."""


class UnsupportedClassError(ValueError):
    """Raised when an operation is not defined for the matrix's cycle class."""


class MatrixClass(StrEnum):
    """Most specific cycle census label of a row-column graph."""

    ACYCLIC = "Acyclic"
    CYCLIC = "Cyclic"
    UNICYCLIC = "Unicyclic"
    PSEUDOFOREST = "Pseudoforest"
    POLYCYCLIC = "Polycyclic"


@dataclass(frozen=True)
class PMMSequences:
    """Column and row sign sequences with entry(i, j) = columns[i] * rows[j]."""

    columns: tuple[int, ...]
    rows: tuple[int, ...]

    def column_sign(self, i: int) -> int:
        return self.columns[i - 1]

    def row_sign(self, j: int) -> int:
        return self.rows[j - 1]


@dataclass(frozen=True)
class GriddingMatrix:
    """
    An m x n matrix over {-1, 0, 1}.

    ``entries[i - 1][j - 1]`` holds entry(i, j). The optional ``pmm`` field
    does not take part in equality, so a matrix compares equal to itself with
    sequences attached.
    """

    cols: int
    rows: int
    entries: tuple[tuple[int, ...], ...]
    pmm: PMMSequences | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.cols < 1 or self.rows < 1:
            raise MatrixError("Matrix must have at least one row and one column")
        if len(self.entries) != self.cols or any(len(col) != self.rows for col in self.entries):
            raise MatrixError("Entry array does not match matrix dimensions")
        if any(e not in ALLOWED_ENTRIES for col in self.entries for e in col):
            raise MatrixError("Matrix entries must be -1, 0 or 1")
        if self.pmm is not None:
            for (i, j), sign in self.nonzero_cells().items():
                if sign != self.pmm.column_sign(i) * self.pmm.row_sign(j):
                    raise MatrixError(f"Sequences do not factor entry ({i},{j})")

    @classmethod
    def from_rows_top_down(cls, rows: list[list[int]]) -> GriddingMatrix:
        """Build a matrix from rows written top to bottom, as printed."""
        if not rows or not rows[0]:
            raise MatrixError("Matrix text is empty")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise MatrixError("Ragged rows: every row needs the same number of entries")
        height = len(rows)
        entries = tuple(
            tuple(rows[height - j][i - 1] for j in range(1, height + 1))
            for i in range(1, width + 1)
        )
        return cls(cols=width, rows=height, entries=entries)

    @classmethod
    def zeros(cls, cols: int, rows: int) -> GriddingMatrix:
        return cls(cols=cols, rows=rows, entries=tuple((0,) * rows for _ in range(cols)))

    def entry(self, i: int, j: int) -> int:
        return self.entries[i - 1][j - 1]

    def nonzero_cells(self) -> dict[Cell, int]:
        """Map each nonzero cell to its sign, in (column, row) order."""
        return {
            (i, j): self.entries[i - 1][j - 1]
            for i in range(1, self.cols + 1)
            for j in range(1, self.rows + 1)
            if self.entries[i - 1][j - 1] != 0
        }

    def with_pmm(self, pmm: PMMSequences) -> GriddingMatrix:
        return GriddingMatrix(self.cols, self.rows, self.entries, pmm)

    def restricted_to(self, cells: frozenset[Cell]) -> GriddingMatrix:
        """Copy of this matrix with every entry outside ``cells`` zeroed."""
        entries = tuple(
            tuple(
                self.entries[i - 1][j - 1] if (i, j) in cells else 0
                for j in range(1, self.rows + 1)
            )
            for i in range(1, self.cols + 1)
        )
        return GriddingMatrix(self.cols, self.rows, entries, self.pmm)

    def rows_top_down(self) -> list[list[int]]:
        return [
            [self.entry(i, j) for i in range(1, self.cols + 1)]
            for j in range(self.rows, 0, -1)
        ]


@dataclass(frozen=True)
class CycleDescriptor:
    """
    A cycle of the row-column graph.

    ``cells`` lists the traversed nonzero entries in canonical order: starting
    at the lexicographically least cell and stepping first to its smaller
    neighbour. ``vertices[k]`` is the line shared by ``cells[k - 1]`` and
    ``cells[k]``.
    """

    vertices: tuple[Vertex, ...]
    cells: tuple[Cell, ...]
    sign: int

    @property
    def length(self) -> int:
        return len(self.cells)

    def label_of(self, cell: Cell) -> int:
        """1-based position of a cell in the canonical labelling."""
        return self.cells.index(cell) + 1


@dataclass
class RowColumnGraph:
    """Bipartite graph on column and row vertices, one signed edge per nonzero entry."""

    graph: nx.Graph

    @property
    def edges(self) -> list[tuple[int, int, int]]:
        """Edges as (column, row, sign) triples, sorted."""
        result = []
        for u, v, data in self.graph.edges(data=True):
            col, row = (u, v) if u[0] == "c" else (v, u)
            result.append((col[1], row[1], data["sign"]))
        return sorted(result)


def parse_matrix(text: str) -> GriddingMatrix:
    """
    Parse a matrix written rows top to bottom.

    Rows are separated by newlines or ``/``; entries by whitespace. The
    typographic minus sign is accepted.

    Raises:
        MatrixError: On ragged rows, empty input, or entries outside {-1, 0, 1}
    """
    cleaned = text.replace("−", "-").strip()
    rows: list[list[int]] = []
    for raw in ROW_SPLIT.split(cleaned):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            row = [int(token) for token in line.split()]
        except ValueError as e:
            raise MatrixError(f"Illegal matrix entry in row {line!r}") from e
        if any(v not in ALLOWED_ENTRIES for v in row):
            raise MatrixError(f"Illegal matrix entry in row {line!r}")
        rows.append(row)
    return GriddingMatrix.from_rows_top_down(rows)


def format_matrix(matrix: GriddingMatrix) -> str:
    """Render rows top to bottom with right-aligned columns."""
    return "\n".join(" ".join(f"{e:>2}" for e in row) for row in matrix.rows_top_down())


def row_column_graph(matrix: GriddingMatrix) -> RowColumnGraph:
    """Build the signed bipartite row-column graph of a matrix."""
    graph = nx.Graph()
    graph.add_nodes_from(("c", i) for i in range(1, matrix.cols + 1))
    graph.add_nodes_from(("r", j) for j in range(1, matrix.rows + 1))
    for (i, j), sign in matrix.nonzero_cells().items():
        graph.add_edge(("c", i), ("r", j), sign=sign)
    return RowColumnGraph(graph)


def shared_line(a: Cell, b: Cell) -> Vertex:
    """The column or row vertex two distinct cells have in common."""
    if a[0] == b[0]:
        return ("c", a[0])
    if a[1] == b[1]:
        return ("r", a[1])
    raise MatrixError(f"Cells {a} and {b} share no line")


def lines_of(cell: Cell) -> tuple[Vertex, Vertex]:
    return ("c", cell[0]), ("r", cell[1])


def other_line(cell: Cell, line: Vertex) -> Vertex:
    column, row = lines_of(cell)
    return row if line == column else column


def _edge_cell(u: Vertex, v: Vertex) -> Cell:
    col, row = (u, v) if u[0] == "c" else (v, u)
    return (col[1], row[1])


def _canonical_cycle(matrix: GriddingMatrix, cells: list[Cell]) -> CycleDescriptor:
    size = len(cells)
    start = cells.index(min(cells))
    forward = [cells[(start + k) % size] for k in range(size)]
    backward = [cells[(start - k) % size] for k in range(size)]
    ordered = forward if forward[1] < backward[1] else backward
    vertices = tuple(shared_line(ordered[k - 1], ordered[k]) for k in range(size))
    sign = math.prod(matrix.entry(i, j) for i, j in ordered)
    return CycleDescriptor(vertices=vertices, cells=tuple(ordered), sign=sign)


def _cells_from_node_cycle(nodes: list[Vertex]) -> list[Cell]:
    return [_edge_cell(nodes[k], nodes[(k + 1) % len(nodes)]) for k in range(len(nodes))]


def classify(matrix: GriddingMatrix) -> MatrixClass:
    """Return the most specific cycle class of the matrix's row-column graph."""
    graph = row_column_graph(matrix).graph
    cyclic_components = []
    for component in nx.connected_components(graph):
        sub = graph.subgraph(component)
        edges, nodes = sub.number_of_edges(), sub.number_of_nodes()
        if edges > nodes:
            return MatrixClass.POLYCYCLIC
        if edges == nodes:
            cyclic_components.append(sub)

    if not cyclic_components:
        return MatrixClass.ACYCLIC
    if len(cyclic_components) > 1:
        return MatrixClass.PSEUDOFOREST
    only = cyclic_components[0]
    pure_cycle = all(degree == 2 for _, degree in only.degree())
    if pure_cycle and only.number_of_edges() == graph.number_of_edges():
        return MatrixClass.CYCLIC
    return MatrixClass.UNICYCLIC


def components(matrix: GriddingMatrix) -> list[frozenset[Cell]]:
    """Cell sets of the connected components of G_M that carry at least one edge."""
    graph = row_column_graph(matrix).graph
    result = []
    for component in nx.connected_components(graph):
        sub = graph.subgraph(component)
        if sub.number_of_edges():
            result.append(frozenset(_edge_cell(u, v) for u, v in sub.edges()))
    return sorted(result, key=min)


def cycles(matrix: GriddingMatrix) -> list[CycleDescriptor]:
    """
    One descriptor per cyclic component, ordered by least cell.

    Raises:
        UnsupportedClassError: If some component holds more than one cycle
    """
    if classify(matrix) is MatrixClass.POLYCYCLIC:
        raise UnsupportedClassError("Cycle census is undefined for polycyclic matrices")
    graph = row_column_graph(matrix).graph
    result = []
    for component in nx.connected_components(graph):
        sub = graph.subgraph(component)
        if sub.number_of_edges() != sub.number_of_nodes():
            continue
        basis = nx.cycle_basis(sub)
        result.append(_canonical_cycle(matrix, _cells_from_node_cycle(basis[0])))
    return sorted(result, key=lambda c: c.cells[0])


def _tree_path(parent: dict[Vertex, Vertex | None], node: Vertex) -> list[Vertex]:
    path = [node]
    while (up := parent[path[-1]]) is not None:
        path.append(up)
    return path


def pmm_sequences(matrix: GriddingMatrix) -> PMMSequences | CycleDescriptor:
    """
    Propagate signs over each component of G_M.

    The lowest-numbered column vertex of every component is seeded with +1,
    then c_i * r_j = entry(i, j) fixes the rest. Vertices with no edges get +1.

    Returns:
        The sequences on success, otherwise a cycle of sign -1 witnessing the
        conflict
    """
    graph = row_column_graph(matrix).graph
    sign: dict[Vertex, int] = {}
    parent: dict[Vertex, Vertex | None] = {}
    order = [("c", i) for i in range(1, matrix.cols + 1)] + [
        ("r", j) for j in range(1, matrix.rows + 1)
    ]
    for root in order:
        if root in sign:
            continue
        sign[root] = 1
        parent[root] = None
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in sorted(graph.adj[u]):
                weight = graph.edges[u, v]["sign"]
                if v not in sign:
                    sign[v] = weight * sign[u]
                    parent[v] = u
                    queue.append(v)
                elif sign[u] * sign[v] != weight:
                    up_u, up_v = _tree_path(parent, u), _tree_path(parent, v)
                    common = next(x for x in up_u if x in set(up_v))
                    nodes = up_u[: up_u.index(common) + 1] + list(
                        reversed(up_v[: up_v.index(common)])
                    )
                    witness = _canonical_cycle(matrix, _cells_from_node_cycle(nodes))
                    logger.debug("Negative cycle through %s", witness.cells)
                    return witness

    return PMMSequences(
        columns=tuple(sign[("c", i)] for i in range(1, matrix.cols + 1)),
        rows=tuple(sign[("r", j)] for j in range(1, matrix.rows + 1)),
    )


def ensure_pmm(matrix: GriddingMatrix) -> GriddingMatrix:
    """
    Return the matrix with sequences attached, computing them when absent.

    Raises:
        MatrixError: If the matrix has a negative cycle
    """
    if matrix.pmm is not None:
        return matrix
    result = pmm_sequences(matrix)
    if isinstance(result, CycleDescriptor):
        raise MatrixError(
            f"Matrix has a negative cycle through {list(result.cells)}; normalize it first"
        )
    return matrix.with_pmm(result)


def double(matrix: GriddingMatrix) -> GriddingMatrix:
    """
    Replace every entry by a 2x2 block.

    0 becomes the zero block, 1 the increasing diagonal pair
    (2i-1, 2j-1), (2i, 2j) and -1 the decreasing pair (2i-1, 2j), (2i, 2j-1).
    """
    grid = [[0] * (2 * matrix.rows) for _ in range(2 * matrix.cols)]
    for (i, j), value in matrix.nonzero_cells().items():
        if value == 1:
            grid[2 * i - 2][2 * j - 2] = 1
            grid[2 * i - 1][2 * j - 1] = 1
        else:
            grid[2 * i - 2][2 * j - 1] = -1
            grid[2 * i - 1][2 * j - 2] = -1
    return GriddingMatrix(
        cols=2 * matrix.cols,
        rows=2 * matrix.rows,
        entries=tuple(tuple(col) for col in grid),
    )


def normalize_to_pmm(matrix: GriddingMatrix) -> tuple[GriddingMatrix, bool]:
    """
    Return an equivalent partial multiplication matrix.

    Returns:
        (matrix with sequences, doubled) where doubled tells whether the
        doubling had to be applied to clear negative cycles

    Raises:
        UnsupportedClassError: For polycyclic input
    """
    if classify(matrix) is MatrixClass.POLYCYCLIC:
        raise UnsupportedClassError("Polycyclic matrices cannot be normalized")
    result = pmm_sequences(matrix)
    if isinstance(result, PMMSequences):
        return matrix.with_pmm(result), False

    doubled = double(matrix)
    logger.info("Doubling %dx%d matrix to clear negative cycles", matrix.cols, matrix.rows)
    sequences = pmm_sequences(doubled)
    if isinstance(sequences, CycleDescriptor):
        raise MatrixError("Doubled matrix still has a negative cycle")
    return doubled.with_pmm(sequences), True
