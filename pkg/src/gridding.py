"""Gridded permutations and grid class membership for gridwqo.

A gridding assigns every point of a permutation to a cell of a matrix in a
way realisable by vertical and horizontal cut lines. Cuts are given as
"after position k" and "after value k".
"""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass
import itertools
import logging

from src.config import Budget, check_budget
from src.core import Embedding, Permutation, iter_embeddings, pattern_of
from src.matrix import Cell, CycleDescriptor, GriddingMatrix

logger = logging.getLogger(__name__)


class GriddingError(ValueError):
    """Raised when a cell assignment is not a valid gridding."""


@dataclass(frozen=True)
class GriddedPermutation:
    """
    A permutation with a cell for each point.

    ``cells[k]`` is the (column, row) cell of the point at 1-based position
    k + 1.
    """

    perm: Permutation
    matrix: GriddingMatrix
    cells: tuple[Cell, ...]

    def __post_init__(self) -> None:
        self._validate()

    def _validate(self) -> None:
        perm, matrix, cells = self.perm, self.matrix, self.cells
        if len(cells) != len(perm):
            raise GriddingError("One cell is needed per point")

        columns = [c for c, _ in cells]
        if any(a > b for a, b in itertools.pairwise(columns)):
            raise GriddingError("Columns are not a staircase in position order")
        rows_by_value = [0] * len(perm)
        for (_, row), value in zip(cells, perm.values, strict=True):
            rows_by_value[value - 1] = row
        if any(a > b for a, b in itertools.pairwise(rows_by_value)):
            raise GriddingError("Rows are not a staircase in value order")

        last_value: dict[Cell, int] = {}
        for cell, value in zip(cells, perm.values, strict=True):
            i, j = cell
            if not (1 <= i <= matrix.cols and 1 <= j <= matrix.rows):
                raise GriddingError(f"Cell {cell} lies outside the matrix")
            sign = matrix.entry(i, j)
            if sign == 0:
                raise GriddingError(f"Point placed in zero cell {cell}")
            previous = last_value.get(cell)
            if previous is not None and (value - previous) * sign < 0:
                kind = "increasing" if sign == 1 else "decreasing"
                raise GriddingError(f"Cell {cell} must be {kind}")
            last_value[cell] = value

    def __len__(self) -> int:
        return len(self.perm)

    def cell_of(self, index: int) -> Cell:
        """Cell of the point at 1-based position ``index``."""
        return self.cells[index - 1]

    def value_of(self, index: int) -> int:
        return self.perm.values[index - 1]

    def points_in(self, cell: Cell) -> list[int]:
        """1-based positions of the points in a cell, left to right."""
        return [k for k, c in enumerate(self.cells, start=1) if c == cell]

    def index_of_value(self, value: int) -> int:
        return self.perm.values.index(value) + 1

    def delete_point(self, index: int) -> GriddedPermutation:
        return restrict(self, [k for k in range(1, len(self) + 1) if k != index])


def restrict(
    gridded: GriddedPermutation, indices: list[int] | tuple[int, ...]
) -> GriddedPermutation:
    """Gridded subpermutation on the given 1-based positions, keeping cells."""
    chosen = sorted(set(indices))
    return GriddedPermutation(
        perm=pattern_of(gridded.perm.values[k - 1] for k in chosen),
        matrix=gridded.matrix,
        cells=tuple(gridded.cells[k - 1] for k in chosen),
    )


def _check_cuts(cuts: tuple[int, ...], expected: int, length: int, kind: str) -> None:
    if len(cuts) != expected:
        raise GriddingError(f"Expected {expected} {kind} cuts, got {len(cuts)}")
    if any(not 0 <= c <= length for c in cuts):
        raise GriddingError(f"{kind.capitalize()} cuts must lie in 0..{length}")
    if any(a > b for a, b in itertools.pairwise(cuts)):
        raise GriddingError(f"{kind.capitalize()} cuts must be weakly increasing")


def make_gridded(
    perm: Permutation,
    matrix: GriddingMatrix,
    v_lines: tuple[int, ...],
    h_lines: tuple[int, ...],
) -> GriddedPermutation:
    """
    Grid a permutation by explicit cut lines.

    Args:
        perm: Permutation to grid
        matrix: Gridding matrix
        v_lines: m-1 vertical cuts, each "after position k"
        h_lines: n-1 horizontal cuts, each "after value k"

    Raises:
        GriddingError: If the cuts are malformed or a cell breaks its sign
    """
    length = len(perm)
    _check_cuts(tuple(v_lines), matrix.cols - 1, length, "vertical")
    _check_cuts(tuple(h_lines), matrix.rows - 1, length, "horizontal")
    cells = tuple(
        (
            1 + sum(1 for cut in v_lines if cut < position),
            1 + sum(1 for cut in h_lines if cut < value),
        )
        for position, value in enumerate(perm.values, start=1)
    )
    return GriddedPermutation(perm, matrix, cells)


def cuts_of(gridded: GriddedPermutation) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Canonical cut lines realising a gridding."""
    v_lines = tuple(
        sum(1 for c, _ in gridded.cells if c <= col) for col in range(1, gridded.matrix.cols)
    )
    h_lines = tuple(
        sum(1 for _, r in gridded.cells if r <= row) for row in range(1, gridded.matrix.rows)
    )
    return v_lines, h_lines


def _row_assignments(
    entries: list[list[int]],
    col_of_value: list[int],
    pos_of_value: list[int],
    rows: int,
) -> Iterator[list[int]]:
    """
    Yield row-of-value lists for every feasible choice of horizontal cuts.

    Rows fill from the bottom; within a row every value is checked against
    the last point already placed in the same cell, so an infeasible prefix
    stops further extension of that row.
    """
    length = len(col_of_value)
    row_of_value = [0] * length

    def fill(row: int, low: int) -> Iterator[list[int]]:
        last_pos: dict[int, int] = {}
        value = low
        if row == rows:
            while value < length:
                if not _place(entries, row, col_of_value[value], pos_of_value[value], last_pos):
                    return
                row_of_value[value] = row
                value += 1
            yield row_of_value
            return
        while True:
            yield from fill(row + 1, value)
            if value == length:
                return
            if not _place(entries, row, col_of_value[value], pos_of_value[value], last_pos):
                return
            row_of_value[value] = row
            value += 1

    yield from fill(1, 0)


def _place(
    entries: list[list[int]], row: int, col: int, pos: int, last_pos: dict[int, int]
) -> bool:
    sign = entries[col - 1][row - 1]
    if sign == 0:
        return False
    previous = last_pos.get(col)
    if previous is not None and (pos - previous) * sign < 0:
        return False
    last_pos[col] = pos
    return True


def iter_cell_assignments(
    perm: Permutation,
    matrix: GriddingMatrix,
    budget: Budget | None = None,
) -> Iterator[tuple[Cell, ...]]:
    """
    Yield cell assignments of every gridding, possibly with repeats.

    Vertical cut tuples are enumerated outright; horizontal cuts are found
    by backtracking row by row.
    """
    length = len(perm)
    entries = [list(col) for col in matrix.entries]
    pos_of_value = [0] * length
    for position, value in enumerate(perm.values):
        pos_of_value[value - 1] = position

    for v_lines in itertools.combinations_with_replacement(range(length + 1), matrix.cols - 1):
        check_budget(budget)
        col_of_pos = [1 + sum(1 for cut in v_lines if cut <= p) for p in range(length)]
        col_of_value = [col_of_pos[pos_of_value[v]] for v in range(length)]
        for row_of_value in _row_assignments(entries, col_of_value, pos_of_value, matrix.rows):
            yield tuple(
                (col_of_pos[p], row_of_value[perm.values[p] - 1]) for p in range(length)
            )


def enumerate_griddings(
    perm: Permutation,
    matrix: GriddingMatrix,
    budget: Budget | None = None,
) -> set[GriddedPermutation]:
    """All distinct M-griddings of perm, deduplicated by cell assignment."""
    assignments = set(iter_cell_assignments(perm, matrix, budget))
    logger.debug("Found %d griddings of %s", len(assignments), perm)
    return {GriddedPermutation(perm, matrix, cells) for cells in assignments}


def count_griddings(perm: Permutation, matrix: GriddingMatrix, budget: Budget | None = None) -> int:
    return len(set(iter_cell_assignments(perm, matrix, budget)))


def member(
    perm: Permutation,
    matrix: GriddingMatrix,
    budget: Budget | None = None,
) -> GriddedPermutation | None:
    """Return a witness gridding if perm lies in Grid(M), stopping at the first."""
    for cells in iter_cell_assignments(perm, matrix, budget):
        return GriddedPermutation(perm, matrix, cells)
    return None


def gridded_contains(pattern: GriddedPermutation, host: GriddedPermutation) -> Embedding | None:
    """
    Find an embedding that maps every pattern point into the same cell.

    Raises:
        GriddingError: If the two gridded permutations use different matrices
    """
    if pattern.matrix != host.matrix:
        raise GriddingError("Gridded containment needs a common matrix")

    def same_cell(t: int, j: int) -> bool:
        return pattern.cells[t] == host.cells[j]

    return next(iter_embeddings(pattern.perm, host.perm, same_cell), None)


def misplaced_points(gridded: GriddedPermutation, cycle: CycleDescriptor) -> tuple[int, ...]:
    """Positions of the points gridded into cells off the given cycle."""
    on_cycle = set(cycle.cells)
    return tuple(k for k, cell in enumerate(gridded.cells, start=1) if cell not in on_cycle)
