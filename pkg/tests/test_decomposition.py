"""Tests for src/decomposition.py.

Tests orientation digraphs, M-sums, decomposition into indivisibles, last
points and minimal indivisibles.
"""

from functools import reduce

from hypothesis import assume, given, settings
from hypothesis import strategies as st
import networkx as nx
import pytest

from src.coil import Chirality, all_coils, build_coil
from src.core import Permutation
from src.decomposition import (
    DecompositionError,
    decompose,
    is_indivisible,
    last_points,
    last_points_cycle,
    last_points_indivisible,
    m_sum,
    minimal_indivisibles,
    orientation_digraph,
    validate_cycle,
)
from src.gridding import GriddedPermutation, enumerate_griddings, make_gridded, restrict
from src.matrix import (
    CycleDescriptor,
    GriddingMatrix,
    components,
    cycles,
    double,
    ensure_pmm,
    parse_matrix,
)
from tests.conftest import M3_TEXT, MSM_TEXT, gridded_of_length

INCREASING = ensure_pmm(parse_matrix("1"))
SIXTEEN_POINT_PERM = Permutation.parse("2 16 14 11 3 6 4 7 1 8 12 5 9 13 10 15")


def singleton(matrix: GriddingMatrix, cell: tuple[int, int]) -> GriddedPermutation:
    return GriddedPermutation(Permutation((1,)), matrix, (cell,))


def part_key(gridded: GriddedPermutation) -> tuple[tuple[int, ...], tuple[tuple[int, int], ...]]:
    return gridded.perm.values, gridded.cells


class TestOrientationDigraph:
    """Tests for orientation digraphs."""

    def test_skew_merged_example(self, msm: GriddingMatrix) -> None:
        """Test 415362 gridded in the skew-merged matrix has the eleven expected edges."""
        gridded = make_gridded(Permutation.parse("4 1 5 3 6 2"), msm, (2,), (3,))
        digraph = orientation_digraph(gridded)

        by_value = {(gridded.value_of(x), gridded.value_of(y)) for x, y in digraph.edges()}

        assert by_value == {
            (1, 2), (1, 3), (2, 3), (2, 5), (2, 6), (3, 5),
            (4, 1), (5, 4), (6, 3), (6, 5), (6, 4),
        }  # fmt: skip

    def test_singleton(self, msm: GriddingMatrix) -> None:
        """Test a single point has no edges."""
        assert orientation_digraph(singleton(msm, (1, 1))).edges() == set()

    def test_increasing_pair(self) -> None:
        """Test two points in an increasing cell point lower to upper."""
        gridded = GriddedPermutation(Permutation((1, 2)), INCREASING, ((1, 1), (1, 1)))
        digraph = orientation_digraph(gridded)

        assert digraph.edges() == {(1, 2)}
        assert digraph.has_edge(1, 2)
        assert not digraph.has_edge(2, 1)
        assert digraph.successors(1) == [2]

    def test_needs_sequences(self) -> None:
        """Test a matrix without sequences is refused."""
        gridded = GriddedPermutation(Permutation((1,)), parse_matrix("1"), ((1, 1),))

        with pytest.raises(DecompositionError, match="normalize"):
            orientation_digraph(gridded)

    def test_networkx_views_agree(self, msm: GriddingMatrix) -> None:
        """Test the closed and consecutive-pair graphs have the same reachability."""
        gridded = make_gridded(Permutation.parse("4 1 5 3 6 2"), msm, (2,), (3,))
        digraph = orientation_digraph(gridded)

        closed = nx.transitive_closure(digraph.to_networkx(closed=True))
        sparse = nx.transitive_closure(digraph.to_networkx(closed=False))
        assert set(closed.edges()) == set(sparse.edges())


class TestMSum:
    """Tests for M-sums."""

    def test_two_singletons(self) -> None:
        """Test the first summand precedes the second in an increasing cell."""
        one = singleton(INCREASING, (1, 1))

        result = m_sum(one, one)

        assert result.perm == Permutation((1, 2))
        assert not is_indivisible(result)

    def test_empty_is_identity(self, msm: GriddingMatrix) -> None:
        """Test the empty gridded permutation is a neutral element."""
        empty = GriddedPermutation(Permutation(()), msm, ())
        tau = make_gridded(Permutation.parse("4 1 5 3 6 2"), msm, (2,), (3,))

        assert m_sum(empty, tau) == tau
        assert m_sum(tau, empty) == tau

    def test_matrix_mismatch(self, msm: GriddingMatrix, m3: GriddingMatrix) -> None:
        """Test summands must share their matrix."""
        with pytest.raises(DecompositionError, match="common matrix"):
            m_sum(singleton(msm, (1, 1)), singleton(m3, (1, 1)))


class TestDecompose:
    """Tests for decomposition into indivisibles."""

    def test_sixteen_point_example(self, m3: GriddingMatrix) -> None:
        """Test the sixteen-point example splits into parts of sizes 9, 1 and 6."""
        gridded = make_gridded(SIXTEEN_POINT_PERM, m3, (5, 10), (4, 10))

        parts = decompose(gridded)

        assert sorted(part.perm.values for part in parts) == sorted(
            [
                Permutation.parse("2 9 7 1 3 4 6 5 8").values,
                (1,),
                Permutation.parse("5 1 4 2 6 3").values,
            ]
        )
        assert all(is_indivisible(part) for part in parts)
        assert reduce(m_sum, parts) == gridded

    @settings(max_examples=40, deadline=None)
    @given(
        first=st.integers(min_value=1, max_value=5).flatmap(
            lambda n: st.permutations(list(range(1, n + 1)))
        ),
        second=st.integers(min_value=1, max_value=5).flatmap(
            lambda n: st.permutations(list(range(1, n + 1)))
        ),
        choice=st.integers(min_value=0, max_value=100),
    )
    def test_parts_of_a_sum(self, first: list[int], second: list[int], choice: int) -> None:
        """Test the parts of an M-sum are the parts of its summands together."""
        matrix = ensure_pmm(parse_matrix(MSM_TEXT))
        summands = []
        for values in (first, second):
            griddings = sorted(
                enumerate_griddings(Permutation(tuple(values)), matrix), key=lambda g: g.cells
            )
            assume(griddings)
            summands.append(griddings[choice % len(griddings)])
        a, b = summands

        parts = decompose(m_sum(a, b))

        assert sorted(map(part_key, parts)) == sorted(map(part_key, decompose(a) + decompose(b)))

    @pytest.mark.slow
    def test_parts_stay_in_one_component(self) -> None:
        """Test every part lies inside a single component of a two-component matrix."""
        matrix = ensure_pmm(double(parse_matrix("1 1 / 1 1")))
        blocks = components(matrix)
        assert len(blocks) == 2

        for gridded in gridded_of_length(matrix, 5):
            for part in decompose(gridded):
                assert any(set(part.cells) <= block for block in blocks)

    def test_indivisible_is_single_part(self, msm: GriddingMatrix) -> None:
        """Test an indivisible decomposes into itself."""
        forward, _ = minimal_indivisibles(msm, cycles(msm)[0])

        assert decompose(forward) == [forward]

    def test_empty(self, msm: GriddingMatrix) -> None:
        """Test the empty gridded permutation has no parts."""
        assert decompose(GriddedPermutation(Permutation(()), msm, ())) == []
        assert not is_indivisible(GriddedPermutation(Permutation(()), msm, ()))

    def test_singleton_is_indivisible(self, msm: GriddingMatrix) -> None:
        """Test singletons are indivisible."""
        assert is_indivisible(singleton(msm, (2, 1)))

    @pytest.mark.slow
    @pytest.mark.parametrize("text", [MSM_TEXT, M3_TEXT])
    def test_interior_removal_splits_exactly(self, text: str) -> None:
        """Test removing v_i leaves v_1..v_{i-1} and v_{i+1}..v_n, short sides as singletons."""
        matrix = ensure_pmm(parse_matrix(text))
        (cycle,) = cycles(matrix)
        for length in range(cycle.length + 1, 16):
            for coil, certificate in all_coils(matrix, cycle, length):
                assert is_indivisible(coil)
                for i in range(2, length):
                    left, right = certificate.order[: i - 1], certificate.order[i:]
                    expected = [
                        part_key(piece)
                        for side in (left, right)
                        for piece in (
                            [restrict(coil, side)]
                            if len(side) > cycle.length
                            else [restrict(coil, [p]) for p in side]
                        )
                    ]

                    parts = decompose(coil.delete_point(certificate.order[i - 1]))

                    assert sorted(part_key(p) for p in parts) == sorted(expected)

    @settings(max_examples=40, deadline=None)
    @given(
        values=st.integers(min_value=1, max_value=6).flatmap(
            lambda n: st.permutations(list(range(1, n + 1)))
        ),
        choice=st.integers(min_value=0, max_value=100),
    )
    def test_parts_rebuild_input(self, values: list[int], choice: int) -> None:
        """Test folding the parts with m_sum gives back the input."""
        matrix = ensure_pmm(parse_matrix("-1 1 / 1 -1"))
        griddings = sorted(
            enumerate_griddings(Permutation(tuple(values)), matrix), key=lambda g: g.cells
        )
        assume(griddings)
        gridded = griddings[choice % len(griddings)]

        parts = decompose(gridded)

        assert sum(len(p) for p in parts) == len(gridded)
        assert all(is_indivisible(p) for p in parts)
        assert reduce(m_sum, parts) == gridded


class TestLastPoints:
    """Tests for last points and minimal indivisibles."""

    def test_minimal_indivisibles_skew_merged(self, msm: GriddingMatrix) -> None:
        """Test the two minimal indivisibles are 2413 and 3142."""
        forward, backward = minimal_indivisibles(msm, cycles(msm)[0])

        assert forward.perm == Permutation.parse("2 4 1 3")
        assert backward.perm == Permutation.parse("3 1 4 2")
        assert is_indivisible(forward)
        assert is_indivisible(backward)

    def test_minimal_indivisibles_m3(self, m3: GriddingMatrix) -> None:
        """Test the six-cycle gives two six-point indivisibles."""
        pair = minimal_indivisibles(m3, cycles(m3)[0])

        assert [len(g) for g in pair] == [6, 6]
        assert all(is_indivisible(g) for g in pair)
        assert all(len(set(g.cells)) == 6 for g in pair)

    def test_minimal_is_its_own_last_points(self, msm: GriddingMatrix) -> None:
        """Test a minimal indivisible is a fixed point."""
        for minimal in minimal_indivisibles(msm, cycles(msm)[0]):
            assert last_points_indivisible(minimal) == minimal

    def test_coil_last_points_are_first_points(self, m3: GriddingMatrix) -> None:
        """Test the first six points of a coil are the last points of their cells."""
        coil, certificate = build_coil(m3, cycles(m3)[0], 1, Chirality.A, 19)

        assert set(last_points(coil).values()) == set(certificate.order[:6])
        assert set(last_points_cycle(coil)) == set(certificate.order[:6])

    def test_singleton_rejected(self, msm: GriddingMatrix) -> None:
        """Test last points need a non-singleton indivisible."""
        with pytest.raises(DecompositionError, match="non-singleton"):
            last_points_cycle(singleton(msm, (1, 1)))

    def test_bad_cycle(self, msm: GriddingMatrix) -> None:
        """Test cycles must use nonzero cells that share lines in turn."""
        bad = CycleDescriptor(vertices=(), cells=((1, 1), (2, 2), (1, 2), (2, 1)), sign=1)

        with pytest.raises(DecompositionError, match="share no line"):
            validate_cycle(msm, bad)
        with pytest.raises(DecompositionError, match="four distinct"):
            validate_cycle(msm, CycleDescriptor((), ((1, 1), (1, 2)), 1))

    @pytest.mark.slow
    def test_last_points_cycle_has_four_points(self, msm: GriddingMatrix) -> None:
        """Test every small non-singleton indivisible has a four-point last-points cycle."""
        checked = 0
        for gridded in gridded_of_length(msm, 6):
            if len(gridded) > 1 and is_indivisible(gridded):
                assert len(last_points_cycle(gridded)) == 4
                checked += 1

        assert checked > 0
