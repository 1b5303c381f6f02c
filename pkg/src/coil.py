"""Coils for gridwqo.

A coil spirals around a cycle of the row-column graph: v_1, v_2, ... visit the
cycle's cells in order, each new point placed immediately after its
predecessor on the line they share and at the front of its other line.
Points are handled as abstract ids held in per-line orientation orders;
``assemble`` turns the orders into a permutation at the end.

Also here: coil recognition, BFS coil decompositions of indivisibles, the
acyclic regridding they induce, end-inflation, coil types, and the
reversible (body, a, b) encoding of indivisibles.
"""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Hashable
from dataclasses import dataclass
from enum import StrEnum
import logging

from src.core import Permutation, contains
from src.decomposition import (
    Lines,
    assemble,
    is_indivisible,
    last_points,
    last_points_cycle,
    orientation_digraph,
    orientation_lines,
    validate_cycle,
)
from src.gridding import GriddedPermutation, gridded_contains, restrict
from src.matrix import (
    Cell,
    CycleDescriptor,
    GriddingMatrix,
    MatrixClass,
    PMMSequences,
    Vertex,
    classify,
    cycles,
    lines_of,
    normalize_to_pmm,
    other_line,
    pmm_sequences,
    shared_line,
)

logger = logging.getLogger(__name__)


class CoilError(ValueError):
    """Raised when a coil operation's preconditions fail."""


class Chirality(StrEnum):
    """A follows the canonical cell labelling of the cycle, B runs against it."""

    A = "A"
    B = "B"


@dataclass(frozen=True)
class CoilCertificate:
    """Parameters of a gridded coil plus the positions of v_1..v_n."""

    cycle: CycleDescriptor
    start: int
    chirality: Chirality
    length: int
    order: tuple[int, ...]


@dataclass(frozen=True)
class CoilMatch:
    """The longest coil found inside a permutation."""

    length: int
    chirality: Chirality
    start: int
    cycle: CycleDescriptor


def coil_labels(
    cycle: CycleDescriptor, start: int, chirality: Chirality, length: int
) -> tuple[int, ...]:
    """Canonical cell labels visited by v_1..v_length."""
    size = cycle.length
    step = 1 if chirality is Chirality.A else -1
    return tuple((start - 1 + step * t) % size + 1 for t in range(length))


def coil_cells(
    cycle: CycleDescriptor, start: int, chirality: Chirality, length: int
) -> tuple[Cell, ...]:
    return tuple(cycle.cells[label - 1] for label in coil_labels(cycle, start, chirality, length))


def _require_pmm(matrix: GriddingMatrix) -> None:
    if matrix.pmm is None:
        raise CoilError("Matrix has no row and column sequences; normalize it first")


def _spiral(
    matrix: GriddingMatrix, cells: tuple[Cell, ...]
) -> tuple[GriddedPermutation, tuple[int, ...]]:
    """Place one point per entry of ``cells`` by the coil insertion rule."""
    lines: Lines = defaultdict(list)
    column, row = lines_of(cells[0])
    lines[column].append(1)
    lines[row].append(1)
    for t in range(2, len(cells) + 1):
        cell = cells[t - 1]
        line = shared_line(cells[t - 2], cell)
        order = lines[line]
        order.insert(order.index(t - 1) + 1, t)
        lines[other_line(cell, line)].insert(0, t)
    cell_of = {t: cells[t - 1] for t in range(1, len(cells) + 1)}
    gridded, position_of = assemble(matrix, cell_of, lines)
    return gridded, tuple(position_of[t] for t in range(1, len(cells) + 1))


def build_coil(
    matrix: GriddingMatrix,
    cycle: CycleDescriptor,
    start: int,
    chirality: Chirality,
    length: int,
) -> tuple[GriddedPermutation, CoilCertificate]:
    """
    Build the gridded coil with the given start cell, chirality and length.

    Args:
        matrix: Partial multiplication matrix containing the cycle
        cycle: Cycle to spiral around
        start: Canonical label (1..ℓ) of the cell holding v_1
        chirality: Direction of travel around the cycle
        length: Number of points, greater than the cycle length

    Raises:
        CoilError: If the matrix has no sequences, the start label is out of
            range, the cycle does not fit, or the length is too short
    """
    _require_pmm(matrix)
    try:
        validate_cycle(matrix, cycle)
    except ValueError as e:
        raise CoilError(str(e)) from e
    if not 1 <= start <= cycle.length:
        raise CoilError(f"Start cell must be in 1..{cycle.length}, got {start}")
    if length <= cycle.length:
        raise CoilError(f"Coil length must exceed the cycle length {cycle.length}")

    gridded, order = _spiral(matrix, coil_cells(cycle, start, chirality, length))
    certificate = CoilCertificate(cycle, start, chirality, length, order)
    return gridded, certificate


def all_coils(
    matrix: GriddingMatrix, cycle: CycleDescriptor, length: int
) -> list[tuple[GriddedPermutation, CoilCertificate]]:
    """The 2ℓ coils of a length, chirality A first."""
    return [
        build_coil(matrix, cycle, start, chirality, length)
        for chirality in Chirality
        for start in range(1, cycle.length + 1)
    ]


def verify_coil(gridded: GriddedPermutation, certificate: CoilCertificate) -> bool:
    """Check the four coil conditions of a certificate in the orientation digraph."""
    order, size, n = certificate.order, certificate.cycle.length, certificate.length
    if len(order) != n or n <= size or sorted(order) != list(range(1, len(gridded) + 1)):
        return False
    cells = coil_cells(certificate.cycle, certificate.start, certificate.chirality, n)
    if any(gridded.cell_of(order[t]) != cells[t] for t in range(n)):
        return False

    digraph = orientation_digraph(gridded)

    def edge(i: int, j: int) -> bool:
        return digraph.has_edge(order[i - 1], order[j - 1])

    if not all(edge(i - 1, i) for i in range(2, n + 1)):
        return False
    if not all(edge(i, i - size - 1) for i in range(size + 2, n + 1)):
        return False
    return edge(size + 1, 1)


def is_gridded_coil(gridded: GriddedPermutation) -> CoilCertificate | None:
    """Certificate if the gridded permutation equals a constructed coil of its matrix."""
    _require_pmm(gridded.matrix)
    if classify(gridded.matrix) is MatrixClass.POLYCYCLIC:
        return None
    for cycle in cycles(gridded.matrix):
        if len(gridded) <= cycle.length:
            continue
        for candidate, certificate in all_coils(gridded.matrix, cycle, len(gridded)):
            if candidate == gridded:
                return certificate
    return None


def coil_type(certificate: CoilCertificate) -> tuple[int, int, int]:
    """Canonical labels of the cells of the first, second and last coil points."""
    labels = coil_labels(
        certificate.cycle, certificate.start, certificate.chirality, certificate.length
    )
    return labels[0], labels[1], labels[-1]


def end_inflate(gridded: GriddedPermutation, certificate: CoilCertificate) -> GriddedPermutation:
    """
    Inflate v_1 and v_n of a coil to monotone pairs.

    Each twin sits immediately after its original on both of its lines, so
    the pair forms 12 or 21 according to the sign of the cell.

    Raises:
        CoilError: If the certificate does not describe the gridded permutation
    """
    if not verify_coil(gridded, certificate):
        raise CoilError("Certificate does not describe this gridded permutation")
    n = len(gridded)
    lines: Lines = {line: list(points) for line, points in orientation_lines(gridded).items()}
    cell_of: dict[Hashable, Cell] = {k: gridded.cell_of(k) for k in range(1, n + 1)}
    for twin, original in ((n + 1, certificate.order[0]), (n + 2, certificate.order[-1])):
        cell_of[twin] = cell_of[original]
        for line in lines_of(gridded.cell_of(original)):
            order = lines[line]
            order.insert(order.index(original) + 1, twin)
    inflated, _ = assemble(gridded.matrix, cell_of, lines)
    return inflated


def longest_coil_contained(perm: Permutation, matrix: GriddingMatrix) -> CoilMatch | None:
    """
    The longest coil of the normalized matrix that perm contains.

    Relies on each coil being a prefix of the longer coils with the same
    start and chirality.

    Raises:
        UnsupportedClassError: For polycyclic matrices
    """
    normal, _ = normalize_to_pmm(matrix)
    best: CoilMatch | None = None
    for cycle in cycles(normal):
        for chirality in Chirality:
            for start in range(1, cycle.length + 1):
                length = cycle.length + 1
                while length <= len(perm):
                    coil, _ = build_coil(normal, cycle, start, chirality, length)
                    if contains(coil.perm, perm) is None:
                        break
                    length += 1
                found = length - 1
                if found > cycle.length and (best is None or found > best.length):
                    best = CoilMatch(found, chirality, start, cycle)
    return best


@dataclass(frozen=True)
class CoilDecomposition:
    """
    BFS layering B_1..B_k of an indivisible from a seed z_1.

    ``boxes[i - 1]`` lists the positions in B_i in orientation order, so its
    first entry is v_i. ``cycle_cells[(i - 1) % ℓ]`` is the cell of B_i.
    """

    gridded: GriddedPermutation
    seed: int
    boxes: tuple[tuple[int, ...], ...]
    cycle_cells: tuple[Cell, ...]

    @property
    def k(self) -> int:
        return len(self.boxes)

    @property
    def coil_points(self) -> tuple[int, ...]:
        return tuple(box[0] for box in self.boxes)

    def cell_of_box(self, i: int) -> Cell:
        return self.cycle_cells[(i - 1) % len(self.cycle_cells)]

    def conditions(self) -> frozenset[str]:
        """Which of the goodness conditions "a", "b", "c" hold."""
        size, boxes = len(self.cycle_cells), self.boxes
        held: set[str] = set()
        if all(len(box) == 1 for box in boxes[:size]):
            held.add("a")
        if self.k > size and len(boxes[size]) >= 2:
            held.add("b")
        digraph = orientation_digraph(self.gridded)
        for i in range(1, min(size, self.k - 1) + 1):
            target = boxes[i][0]
            if any(digraph.has_edge(x, target) for x in boxes[i - 1][1:]):
                held.add("c")
                break
        return frozenset(held)

    def is_good(self) -> bool:
        return bool(self.conditions())


def _require_cyclic_indivisible(gridded: GriddedPermutation) -> CycleDescriptor:
    _require_pmm(gridded.matrix)
    if classify(gridded.matrix) is not MatrixClass.CYCLIC:
        raise CoilError("Coil decompositions need a cyclic matrix")
    if len(gridded) < 2 or not is_indivisible(gridded):
        raise CoilError("Coil decompositions need a non-singleton indivisible")
    return cycles(gridded.matrix)[0]


def coil_decomposition(gridded: GriddedPermutation, seed: int | None = None) -> CoilDecomposition:
    """
    Partition an indivisible by directed distance from a seed.

    Args:
        gridded: Non-singleton indivisible over a cyclic PMM
        seed: Position of a last point of a cycle cell; by default the point
            of the last-points cycle lying in the least cell

    Raises:
        CoilError: If preconditions fail or a layer leaves its expected cell
    """
    cycle = _require_cyclic_indivisible(gridded)
    lasts = last_points(gridded)
    if seed is None:
        seed = min(last_points_cycle(gridded), key=gridded.cell_of)
    seed_cell = gridded.cell_of(seed)
    if lasts.get(seed_cell) != seed:
        raise CoilError(f"Seed {seed} is not the last point of its cell")

    digraph = orientation_digraph(gridded)
    column_order = [p for line, points in digraph.lines if line[0] == "c" for p in points]
    column_rank = {point: k for k, point in enumerate(column_order)}
    distance = {seed: 0}
    frontier = [seed]
    while frontier:
        following = []
        for x in frontier:
            for y in digraph.successors(x):
                if y not in distance:
                    distance[y] = distance[x] + 1
                    following.append(y)
        frontier = following

    k = max(distance.values()) + 1
    layers: list[list[int]] = [[] for _ in range(k)]
    for point, d in distance.items():
        layers[d].append(point)
    boxes = tuple(tuple(sorted(layer, key=column_rank.__getitem__)) for layer in layers)

    size = cycle.length
    at = cycle.cells.index(seed_cell)
    following_cell = gridded.cell_of(boxes[1][0])
    step = 1 if cycle.cells[(at + 1) % size] == following_cell else -1
    cycle_cells = tuple(cycle.cells[(at + step * t) % size] for t in range(size))
    for i, box in enumerate(boxes, start=1):
        expected = cycle_cells[(i - 1) % size]
        if any(gridded.cell_of(p) != expected for p in box):
            raise CoilError(f"Layer {i} is not contained in cell {expected}")

    logger.debug("Seed %d gives %d boxes", seed, k)
    return CoilDecomposition(gridded, seed, boxes, cycle_cells)


def good_coil_decomposition(gridded: GriddedPermutation) -> CoilDecomposition:
    """
    A coil decomposition satisfying at least one goodness condition.

    Every last point of a cycle cell is tried as seed, in canonical cell
    order. A decomposition with all of its first ℓ boxes singleton is
    preferred; otherwise the first one meeting any condition is returned.

    Raises:
        CoilError: If no seed qualifies
    """
    cycle = _require_cyclic_indivisible(gridded)
    lasts = last_points(gridded)
    candidates = [coil_decomposition(gridded, lasts[cell]) for cell in cycle.cells]
    for decomposition in candidates:
        if "a" in decomposition.conditions():
            return decomposition
    for decomposition in candidates:
        if decomposition.is_good():
            return decomposition
    raise CoilError("internal error: no seed yields a good coil decomposition")


def _box_grid(
    gridded: GriddedPermutation,
    boxes: list[tuple[int, ...]],
    box_cells: list[Cell],
) -> tuple[GriddingMatrix, GriddedPermutation, tuple[Cell, ...]]:
    """
    Regrid consecutive boxes so that each box gets a cell of its own.

    Consecutive boxes sharing a column (row) of M share one refined column
    (row); a box's other line gets a refined line to itself. An empty box is
    placed first in the orientation of its own line.

    Returns:
        (path matrix N, body gridded over N, N-cell of each box)
    """
    matrix = gridded.matrix
    pmm = matrix.pmm
    assert pmm is not None
    count = len(boxes)
    digraph = orientation_digraph(gridded)
    rank = digraph.rank

    def group_key(t: int, axis: int) -> tuple[str, int]:
        here = box_cells[t][axis]
        if t > 0 and box_cells[t - 1][axis] == here:
            return ("pair", t - 1)
        if t + 1 < count and box_cells[t + 1][axis] == here:
            return ("pair", t)
        return ("solo", t)

    refined: list[dict[tuple[str, int], int]] = []
    for axis, kind, size in ((0, "c", matrix.cols), (1, "r", matrix.rows)):
        members: dict[tuple[str, int], list[int]] = defaultdict(list)
        line_of_group: dict[tuple[str, int], int] = {}
        for t in range(count):
            key = group_key(t, axis)
            members[key].extend(boxes[t])
            line_of_group[key] = box_cells[t][axis]
        index: dict[tuple[str, int], int] = {}
        next_index = 1
        for number in range(1, size + 1):
            line: Vertex = (kind, number)
            groups = [g for g, at in line_of_group.items() if at == number]
            groups.sort(key=lambda g: min((rank[(line, p)] for p in members[g]), default=-1))
            sign = pmm.column_sign(number) if kind == "c" else pmm.row_sign(number)
            if sign < 0:
                groups.reverse()
            for g in groups:
                index[g] = next_index
                next_index += 1
        refined.append(index)

    n_cells = tuple(
        (refined[0][group_key(t, 0)], refined[1][group_key(t, 1)]) for t in range(count)
    )
    grid = [[0] * len(refined[1]) for _ in range(len(refined[0]))]
    for t, (i, j) in enumerate(n_cells):
        grid[i - 1][j - 1] = matrix.entry(*box_cells[t])
    path_matrix = GriddingMatrix(
        cols=len(refined[0]), rows=len(refined[1]), entries=tuple(tuple(c) for c in grid)
    )
    sequences = pmm_sequences(path_matrix)
    assert isinstance(sequences, PMMSequences)
    path_matrix = path_matrix.with_pmm(sequences)

    cell_of_point = {p: n_cells[t] for t in range(count) for p in boxes[t]}
    points = sorted(cell_of_point)
    sub = restrict(gridded, points)
    body = GriddedPermutation(sub.perm, path_matrix, tuple(cell_of_point[p] for p in points))
    return path_matrix, body, n_cells


def regrid_to_acyclic(
    gridded: GriddedPermutation, decomposition: CoilDecomposition | None = None
) -> tuple[GriddingMatrix, GriddedPermutation]:
    """
    Regrid an indivisible so every box of its coil decomposition is a cell.

    The resulting matrix N has one nonzero entry per box and its row-column
    graph is a path.
    """
    if decomposition is None:
        if len(gridded) == 1:
            raise CoilError("A singleton has no coil decomposition")
        decomposition = good_coil_decomposition(gridded)
    boxes = list(decomposition.boxes)
    box_cells = [decomposition.cell_of_box(i) for i in range(1, len(boxes) + 1)]
    path_matrix, body, _ = _box_grid(gridded, boxes, box_cells)
    return path_matrix, body


@dataclass(frozen=True)
class IndivisibleCode:
    """
    The (body, a, b) encoding of an indivisible.

    ``body`` holds boxes B_{i-1}..B_{j+1} gridded one box per cell of an
    acyclic matrix; ``a`` and ``b`` count the coil points before and after the
    body. The remaining fields let decoding place the missing coil points:
    the original matrix, the cells of the cycle in decomposition order, the
    index of the body's first box, and the M-cell and N-cell of every body
    box.
    """

    body: GriddedPermutation
    a: int
    b: int
    matrix: GriddingMatrix
    cycle_cells: tuple[Cell, ...]
    first_box: int
    box_cells: tuple[Cell, ...]
    body_cells: tuple[Cell, ...]

    def dominated_by(self, other: IndivisibleCode) -> bool:
        """Componentwise dominance of codes that share their acyclic matrix."""
        if self.body.matrix != other.body.matrix or self.body_cells != other.body_cells:
            return False
        if self.a > other.a or self.b > other.b:
            return False
        return gridded_contains(self.body, other.body) is not None


def encode_indivisible(gridded: GriddedPermutation, seed: int | None = None) -> IndivisibleCode:
    """
    Encode an indivisible over a cyclic PMM.

    Args:
        gridded: Indivisible over a cyclic PMM
        seed: Seed of the coil decomposition to encode from; by default a
            good decomposition is chosen

    Raises:
        CoilError: If the input is not an indivisible over a cyclic matrix, or
            the seeded decomposition is not good
    """
    matrix = gridded.matrix
    _require_pmm(matrix)
    if classify(matrix) is not MatrixClass.CYCLIC:
        raise CoilError("Encoding needs a cyclic matrix")
    if len(gridded) == 1:
        cell = gridded.cells[0]
        grid = [[0] * matrix.rows for _ in range(matrix.cols)]
        grid[cell[0] - 1][cell[1] - 1] = matrix.entry(*cell)
        single = GriddingMatrix(matrix.cols, matrix.rows, tuple(tuple(c) for c in grid), matrix.pmm)
        body = GriddedPermutation(gridded.perm, single, (cell,))
        return IndivisibleCode(body, 0, 0, matrix, (), 1, (cell,), (cell,))

    if seed is None:
        decomposition = good_coil_decomposition(gridded)
    else:
        decomposition = coil_decomposition(gridded, seed)
        if not decomposition.is_good():
            raise CoilError(f"Seed {seed} does not give a good coil decomposition")
    m = decomposition.k
    wide = [i for i, box in enumerate(decomposition.boxes, start=1) if len(box) > 1]
    first, last = (wide[0], wide[-1]) if wide else (2, 2)

    boxes = [decomposition.boxes[t - 1] for t in range(first - 1, min(last + 1, m) + 1)]
    if last == m:
        boxes.append(())
    box_cells = [decomposition.cell_of_box(t) for t in range(first - 1, last + 2)]
    _, body, n_cells = _box_grid(gridded, boxes, box_cells)
    return IndivisibleCode(
        body=body,
        a=first - 1,
        b=m - last,
        matrix=matrix,
        cycle_cells=decomposition.cycle_cells,
        first_box=first - 1,
        box_cells=tuple(box_cells),
        body_cells=n_cells,
    )


def decode_indivisible(code: IndivisibleCode) -> GriddedPermutation:
    """
    Rebuild the indivisible from its code.

    Leading coil points are re-inserted one at a time, each immediately before
    its successor on their shared line and last on its other line; trailing
    points follow the coil construction rule.
    """
    matrix = code.matrix
    if code.a == 0:
        return GriddedPermutation(code.body.perm, matrix, code.box_cells[:1])

    m_cell_of_n = dict(zip(code.body_cells, code.box_cells, strict=True))
    body = code.body
    cell_of: dict[Hashable, Cell] = {
        q: m_cell_of_n[body.cell_of(q)] for q in range(1, len(body) + 1)
    }
    m_body = GriddedPermutation(
        body.perm, matrix, tuple(cell_of[q] for q in range(1, len(body) + 1))
    )
    lines: Lines = defaultdict(list)
    for line, points in orientation_lines(m_body).items():
        lines[line].extend(points)

    size = len(code.cycle_cells)
    head = next(q for q in range(1, len(body) + 1) if body.cell_of(q) == code.body_cells[0])
    index = code.first_box
    for step in range(code.a - 1):
        new: Hashable = ("lead", step)
        cell = code.cycle_cells[(index - 2) % size]
        line = shared_line(cell, cell_of[head])
        lines[line].insert(lines[line].index(head), new)
        lines[other_line(cell, line)].append(new)
        cell_of[new] = cell
        head, index = new, index - 1

    if code.b >= 1:
        tail: Hashable = next(
            q for q in range(1, len(body) + 1) if body.cell_of(q) == code.body_cells[-1]
        )
        index = code.first_box + len(code.body_cells) - 1
        for step in range(code.b - 1):
            new = ("trail", step)
            cell = code.cycle_cells[index % size]
            line = shared_line(cell_of[tail], cell)
            lines[line].insert(lines[line].index(tail) + 1, new)
            lines[other_line(cell, line)].insert(0, new)
            cell_of[new] = cell
            tail, index = new, index + 1

    rebuilt, _ = assemble(matrix, cell_of, lines)
    return rebuilt
