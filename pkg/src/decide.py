"""Decision procedures and antichains for gridwqo.

Decides labelled well quasi-order for finitely based subclasses of grid
classes by testing long coils against the basis, generates and verifies
antichains built from coils, searches for bases, and builds the bicyclic
family of permutations that shows some subclasses are not finitely based.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from enum import StrEnum
import itertools
import logging

from src.coil import (
    Chirality,
    CoilCertificate,
    all_coils,
    build_coil,
    coil_labels,
    coil_type,
    end_inflate,
)
from src.config import DEFAULT_MAX_BASIS_LENGTH, Budget, BudgetExceeded, check_budget
from src.core import (
    Embedding,
    LabelledPermutation,
    Permutation,
    contains,
    delete_point,
    is_embedding,
    labelled_contains,
)
from src.gridding import GriddedPermutation, count_griddings, member
from src.matrix import (
    CycleDescriptor,
    GriddingMatrix,
    MatrixClass,
    UnsupportedClassError,
    classify,
    cycles,
    normalize_to_pmm,
    parse_matrix,
)

logger = logging.getLogger(__name__)

END_MARK = "∘"
INNER_MARK = "•"

BICYCLIC_MATRIX = parse_matrix("-1 0 0 1 1 / 0 -1 1 0 0 / -1 1 -1 0 0 / 1 0 0 -1 0")
BICYCLIC_SUBMATRIX = parse_matrix(
    "0 -1 0 0 1 1 / 0 0 -1 1 0 0 / -1 0 1 -1 0 0 / 0 1 0 0 -1 0"
)


class DecisionError(ValueError):
    """Raised when a decision or antichain operation gets invalid input."""


class Verdict(StrEnum):
    LWQO = "LWQO"
    NOT_LWQO = "NOT_LWQO"


@dataclass(frozen=True)
class Witness:
    """A basis element found inside one coil."""

    start: int
    coil: Permutation
    pattern: Permutation
    embedding: Embedding


@dataclass(frozen=True)
class ChiralityEvidence:
    """
    Outcome for one chirality of one cycle.

    An alive chirality lists its coils, all of which avoid the basis; a
    blocked one carries a witness embedding.
    """

    chirality: Chirality
    alive: bool
    coils: tuple[Permutation, ...] = ()
    witness: Witness | None = None


@dataclass(frozen=True)
class ComponentEvidence:
    cycle: CycleDescriptor
    bound: int
    chiralities: tuple[ChiralityEvidence, ...]

    @property
    def verdict(self) -> Verdict:
        return Verdict.NOT_LWQO if any(c.alive for c in self.chiralities) else Verdict.LWQO


@dataclass(frozen=True)
class LwqoVerdict:
    answer: Verdict
    basis: tuple[Permutation, ...]
    dropped: tuple[Permutation, ...]
    doubled: bool
    components: tuple[ComponentEvidence, ...] = field(default_factory=tuple)


def _coil_bound(basis: Sequence[Permutation], size: int) -> int:
    if not basis:
        return size + 1
    n = max(len(b) for b in basis)
    return (n + 5) * size + n


def _quick_witness(
    matrix: GriddingMatrix,
    cycle: CycleDescriptor,
    chirality: Chirality,
    basis: Sequence[Permutation],
    coils: Sequence[tuple[GriddedPermutation, CoilCertificate]],
    bound: int,
    budget: Budget | None,
) -> Witness | None:
    """
    Look for a basis element in a short prefix of a long coil.

    A coil is a prefix of every longer coil with the same start and
    chirality, so an embedding into the short coil lifts to the long one.
    """
    size = cycle.length
    for pattern in basis:
        short_length = min(bound, max(len(pattern), size + 1) + 2 * size)
        for start, (long_coil, long_cert) in enumerate(coils, start=1):
            check_budget(budget)
            short_coil, short_cert = build_coil(matrix, cycle, start, chirality, short_length)
            found = contains(pattern, short_coil.perm)
            if found is None:
                continue
            vertex_of = {pos: t for t, pos in enumerate(short_cert.order)}
            lifted = Embedding(
                tuple(sorted(long_cert.order[vertex_of[p]] for p in found.indices))
            )
            if is_embedding(pattern, long_coil.perm, lifted):
                return Witness(start, long_coil.perm, pattern, lifted)
    return None


def _full_witness(
    coils: Sequence[Permutation],
    basis: Sequence[Permutation],
    workers: int,
    budget: Budget | None,
) -> Witness | None:
    """Test every (coil, basis element) pair; the least pair in (basis, start) order wins."""
    tasks = [(b, s) for b in range(len(basis)) for s in range(len(coils))]
    if workers <= 1:
        for b, s in tasks:
            check_budget(budget)
            found = contains(basis[b], coils[s])
            if found is not None:
                return Witness(s + 1, coils[s], basis[b], found)
        return None

    hits: dict[tuple[int, int], Embedding] = {}
    with ProcessPoolExecutor(max_workers=workers) as executor:
        future_to_task = {
            executor.submit(contains, basis[b], coils[s]): (b, s) for b, s in tasks
        }
        for future in as_completed(future_to_task):
            check_budget(budget)
            result = future.result()
            if result is not None:
                hits[future_to_task[future]] = result
    if not hits:
        return None
    b, s = min(hits)
    return Witness(s + 1, coils[s], basis[b], hits[(b, s)])


def decide_lwqo(
    matrix: GriddingMatrix,
    basis: Iterable[Permutation],
    jobs: int = 1,
    budget: Budget | None = None,
) -> LwqoVerdict:
    """
    Decide whether the subclass of Grid(M) avoiding a basis is lwqo.

    The class is not lwqo exactly when, for some cycle, all coils of one
    chirality of length (n + 5)ℓ + n avoid every basis element, where n is
    the longest basis length.

    Args:
        matrix: Non-polycyclic gridding matrix
        basis: Forbidden permutations; those outside Grid(M) are dropped
        jobs: Worker processes for the containment grid
        budget: Optional wall-clock budget

    Raises:
        UnsupportedClassError: For polycyclic matrices
        BudgetExceeded: When the budget runs out
    """
    if classify(matrix) is MatrixClass.POLYCYCLIC:
        raise UnsupportedClassError("lwqo is only decided for non-polycyclic matrices")

    kept: list[Permutation] = []
    dropped: list[Permutation] = []
    for element in dict.fromkeys(basis):
        check_budget(budget)
        if member(element, matrix, budget) is None:
            logger.warning("Dropping basis element %s: not in the grid class", element)
            dropped.append(element)
        else:
            kept.append(element)
    kept.sort(key=lambda p: (len(p), p.values))

    normal, doubled = normalize_to_pmm(matrix)
    evidence: list[ComponentEvidence] = []
    for cycle in cycles(normal):
        bound = _coil_bound(kept, cycle.length)
        logger.debug("Cycle %s: testing coils of length %d", cycle.cells, bound)
        per_chirality: list[ChiralityEvidence] = []
        for chirality in Chirality:
            coils = [
                build_coil(normal, cycle, start, chirality, bound)
                for start in range(1, cycle.length + 1)
            ]
            perms = [coil.perm for coil, _ in coils]
            witness: Witness | None = None
            if kept:
                witness = _quick_witness(normal, cycle, chirality, kept, coils, bound, budget)
                if witness is None:
                    witness = _full_witness(perms, kept, jobs, budget)
            if witness is None:
                per_chirality.append(ChiralityEvidence(chirality, True, tuple(perms)))
                break
            per_chirality.append(ChiralityEvidence(chirality, False, witness=witness))
        evidence.append(ComponentEvidence(cycle, bound, tuple(per_chirality)))

    answer = (
        Verdict.NOT_LWQO
        if any(c.verdict is Verdict.NOT_LWQO for c in evidence)
        else Verdict.LWQO
    )
    return LwqoVerdict(answer, tuple(kept), tuple(dropped), doubled, tuple(evidence))


def replay_verdict(verdict: LwqoVerdict) -> bool:
    """Re-run every containment recorded as evidence."""
    for component in verdict.components:
        for item in component.chiralities:
            if item.alive:
                if len(item.coils) != component.cycle.length:
                    return False
                if any(len(c) != component.bound for c in item.coils):
                    return False
                if any(contains(b, c) is not None for c in item.coils for b in verdict.basis):
                    return False
            else:
                w = item.witness
                if w is None or not is_embedding(w.pattern, w.coil, w.embedding):
                    return False
        if component.verdict is Verdict.LWQO and len(component.chiralities) != len(Chirality):
            return False
    expected = (
        Verdict.NOT_LWQO
        if any(c.verdict is Verdict.NOT_LWQO for c in verdict.components)
        else Verdict.LWQO
    )
    return expected is verdict.answer


def _require_cyclic_pmm(matrix: GriddingMatrix) -> CycleDescriptor:
    if matrix.pmm is None or classify(matrix) is not MatrixClass.CYCLIC:
        raise DecisionError("Expected a cyclic partial multiplication matrix")
    return cycles(matrix)[0]


def unique_gridding_threshold(size: int) -> int:
    """Coil length from which every coil of a cycle of this length grids uniquely."""
    return (size + 1) * size * size + 1


@dataclass(frozen=True)
class AntichainFamily:
    matrix: GriddingMatrix
    coil_type: tuple[int, int, int]
    members: tuple[GriddedPermutation, ...]

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(len(m) for m in self.members)


def antichain_family(
    matrix: GriddingMatrix, type_: tuple[int, int, int], count: int
) -> AntichainFamily:
    """
    End-inflated coils of one type, from the unique-gridding threshold on.

    Raises:
        DecisionError: If the matrix is not a cyclic PMM or the type is invalid
    """
    cycle = _require_cyclic_pmm(matrix)
    size = cycle.length
    s1, s2, final = type_
    if not (1 <= s1 <= size and 1 <= final <= size):
        raise DecisionError(f"Invalid coil type {type_}")
    if s2 == s1 % size + 1:
        chirality = Chirality.A
    elif s2 == (s1 - 2) % size + 1:
        chirality = Chirality.B
    else:
        raise DecisionError(f"Invalid coil type {type_}: cell {s2} does not follow cell {s1}")

    length = unique_gridding_threshold(size)
    while coil_labels(cycle, s1, chirality, length)[-1] != final:
        length += 1

    members = []
    for k in range(count):
        gridded, certificate = build_coil(matrix, cycle, s1, chirality, length + k * size)
        members.append(end_inflate(gridded, certificate))
    return AntichainFamily(matrix, type_, tuple(members))


@dataclass(frozen=True)
class AntichainCheck:
    ok: bool
    pair: tuple[Permutation, Permutation] | None = None


def check_antichain(perms: Sequence[Permutation]) -> AntichainCheck:
    """Report the first comparable pair (smaller, larger), if any."""
    for a, b in itertools.combinations(perms, 2):
        if contains(a, b) is not None:
            return AntichainCheck(False, (a, b))
        if contains(b, a) is not None:
            return AntichainCheck(False, (b, a))
    return AntichainCheck(True)


def _cell_labelled(
    gridded: GriddedPermutation, certificate: CoilCertificate, alphabet: frozenset[object]
) -> LabelledPermutation:
    ends = {certificate.order[0], certificate.order[-1]}
    labels = tuple(
        (gridded.cell_of(k), END_MARK if k in ends else INNER_MARK)
        for k in range(1, len(gridded) + 1)
    )
    return LabelledPermutation(gridded.perm, labels, alphabet)


def check_labelled_coil_antichain(
    matrix: GriddingMatrix,
    lengths: Sequence[int],
    start: int = 1,
    chirality: Chirality = Chirality.A,
) -> bool:
    """
    Check that end-labelled coils of the given lengths are pairwise incomparable.

    Each point is labelled by its cell together with a mark: ∘ on the first
    and last coil points, • elsewhere.

    Raises:
        DecisionError: On a non-cyclic matrix, repeated lengths, or lengths
            not exceeding the cycle length
    """
    cycle = _require_cyclic_pmm(matrix)
    if len(set(lengths)) != len(lengths):
        raise DecisionError("Coil lengths must be distinct")
    if any(n <= cycle.length for n in lengths):
        raise DecisionError(f"Coil lengths must exceed {cycle.length}")

    alphabet = frozenset((cell, mark) for cell in cycle.cells for mark in (END_MARK, INNER_MARK))
    labelled = [
        _cell_labelled(*build_coil(matrix, cycle, start, chirality, n), alphabet)
        for n in sorted(lengths)
    ]
    for shorter, longer in itertools.combinations(labelled, 2):
        if labelled_contains(shorter, longer) is not None:
            return False
    return True


def is_basis_element(
    perm: Permutation, matrix: GriddingMatrix, budget: Budget | None = None
) -> bool:
    """True when perm lies outside Grid(M) but every one-point deletion lies inside."""
    if member(perm, matrix, budget) is not None:
        return False
    return all(
        member(delete_point(perm, i), matrix, budget) is not None
        for i in range(1, len(perm) + 1)
    )


def basis_search(
    matrix: GriddingMatrix,
    max_len: int,
    limit: int = DEFAULT_MAX_BASIS_LENGTH,
    jobs: int = 1,
    budget: Budget | None = None,
) -> set[Permutation]:
    """
    All basis elements of Grid(M) up to a length.

    Works level by level: a permutation is only tested for membership when
    all of its one-point deletions are members.

    Raises:
        BudgetExceeded: If max_len exceeds the configured limit or time runs out
    """
    if max_len > limit:
        raise BudgetExceeded(
            f"Basis search length {max_len} exceeds the length limit "
            f"max_basis_length={limit}, not a time budget"
        )

    basis: set[Permutation] = set()
    previous = {Permutation(())}
    for n in range(1, max_len + 1):
        candidates = [
            perm
            for perm in Permutation.all_of_length(n)
            if all(delete_point(perm, i) in previous for i in range(1, n + 1))
        ]
        check_budget(budget)
        verdicts = _membership(candidates, matrix, jobs, budget)
        previous = {perm for perm, inside in zip(candidates, verdicts, strict=True) if inside}
        found = {perm for perm, inside in zip(candidates, verdicts, strict=True) if not inside}
        logger.debug("Length %d: %d members, %d basis elements", n, len(previous), len(found))
        basis |= found
    return basis


def _is_member(perm: Permutation, matrix: GriddingMatrix) -> bool:
    return member(perm, matrix) is not None


def _membership(
    perms: list[Permutation], matrix: GriddingMatrix, jobs: int, budget: Budget | None
) -> list[bool]:
    if jobs <= 1:
        return [member(p, matrix, budget) is not None for p in perms]
    results: dict[int, bool] = {}
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        future_to_index = {
            executor.submit(_is_member, p, matrix): k for k, p in enumerate(perms)
        }
        for future in as_completed(future_to_index):
            check_budget(budget)
            results[future_to_index[future]] = future.result()
    return [results[k] for k in range(len(perms))]


@dataclass(frozen=True)
class Counterexample:
    perm: Permutation
    matrix: GriddingMatrix
    submatrix: GriddingMatrix


def bicyclic_counterexample(k: int) -> Counterexample:
    """
    The k-th member of an infinite antichain of basis elements.

    The permutation has length 4k + 4. It is a spiral of length 4k + 2
    around the four-cell cycle of its gridding, with one point in each of the
    two leaf cells.

    Raises:
        DecisionError: If k < 1
    """
    if k < 1:
        raise DecisionError("k must be at least 1")
    small = range(1, 2 * k, 2)
    large = range(4 * k - 1, 2 * k + 1, -2)
    middle = [v for pair in itertools.zip_longest(small, large) for v in pair if v is not None]
    pairs = [v for t in range(1, k + 1) for v in (2 * k + 4 - 2 * t, 2 * k + 4 + 2 * t)]
    values = [2 * k + 1, 4 * k + 1, *middle, 2 * k + 4, *pairs, 2, 4 * k + 3]
    return Counterexample(Permutation(tuple(values)), BICYCLIC_MATRIX, BICYCLIC_SUBMATRIX)


@dataclass(frozen=True)
class SurveyReport:
    """Lengths of end-inflated coils avoiding the basis, grouped by coil type."""

    bound: int
    threshold: int
    alive: dict[tuple[int, int, int], tuple[int, ...]]
    alive_at_bound: frozenset[tuple[int, int, int]]


def end_inflated_survey(
    matrix: GriddingMatrix,
    basis: Sequence[Permutation],
    length_bound: int,
    budget: Budget | None = None,
) -> SurveyReport:
    """
    Bounded probe of which end-inflated coils avoid a basis.

    Only lengths from the unique-gridding threshold up to the bound are
    examined. A type is alive at the bound when its longest examined member
    avoids the basis.
    """
    cycle = _require_cyclic_pmm(matrix)
    size = cycle.length
    threshold = unique_gridding_threshold(size)
    if length_bound < threshold + 2:
        logger.warning(
            "Bound %d is below the smallest end-inflated coil length %d",
            length_bound,
            threshold + 2,
        )
        return SurveyReport(length_bound, threshold, {}, frozenset())

    alive: dict[tuple[int, int, int], list[int]] = {}
    longest: dict[tuple[int, int, int], int] = {}
    for chirality in Chirality:
        for start in range(1, size + 1):
            for n in range(threshold, length_bound - 1):
                check_budget(budget)
                gridded, certificate = build_coil(matrix, cycle, start, chirality, n)
                inflated = end_inflate(gridded, certificate)
                kind = coil_type(certificate)
                longest[kind] = n + 2
                if all(contains(b, inflated.perm) is None for b in basis):
                    alive.setdefault(kind, []).append(n + 2)

    at_bound = frozenset(kind for kind, lengths in alive.items() if lengths[-1] == longest[kind])
    return SurveyReport(
        length_bound, threshold, {kind: tuple(v) for kind, v in sorted(alive.items())}, at_bound
    )


@dataclass(frozen=True)
class ProbeRow:
    start: int
    chirality: Chirality
    length: int
    perm: Permutation
    griddings: int


def unique_gridding_probe(
    matrix: GriddingMatrix, lengths: Iterable[int], budget: Budget | None = None
) -> list[ProbeRow]:
    """Gridding counts of every coil of each given length."""
    cycle = _require_cyclic_pmm(matrix)
    rows = []
    for n in lengths:
        for gridded, certificate in all_coils(matrix, cycle, n):
            rows.append(
                ProbeRow(
                    certificate.start,
                    certificate.chirality,
                    n,
                    gridded.perm,
                    count_griddings(gridded.perm, matrix, budget),
                )
            )
    return rows
