"""Pytest fixtures for gridwqo test suite."""

from collections.abc import Iterator
from pathlib import Path

import pytest

from src.core import Permutation
from src.gridding import GriddedPermutation, enumerate_griddings, member
from src.matrix import GriddingMatrix, ensure_pmm, parse_matrix

M3_TEXT = "-1 0 1 / 0 1 1 / 1 -1 0"
MSM_TEXT = "-1 1 / 1 -1"
MPRIME_TEXT = "-1 -1 / 1 1"
NEGATIVE_TEXT = "1 -1 / 1 1"
A4_TEXT = "0 -1 1 1 / -1 1 -1 0"
FOREST_TEXT = "1 1 0 / 0 -1 1"

MATRICES_DIR = Path(__file__).resolve().parent.parent / "matrices"


def gridded_of_length(matrix: GriddingMatrix, max_length: int) -> Iterator[GriddedPermutation]:
    """Yield every gridded permutation over a matrix with 1..max_length points.

    Members of length n are grown from members of length n - 1 by inserting
    the value n at every position, since the class is closed downward.
    """
    layer = [Permutation(())]
    for n in range(1, max_length + 1):
        grown = {
            Permutation(perm.values[:k] + (n,) + perm.values[k:])
            for perm in layer
            for k in range(n)
        }
        layer = sorted((p for p in grown if member(p, matrix) is not None), key=lambda p: p.values)
        for perm in layer:
            yield from sorted(enumerate_griddings(perm, matrix), key=lambda g: g.cells)


@pytest.fixture
def m3() -> GriddingMatrix:
    """Return the six-cycle matrix with its row and column sequences."""
    return ensure_pmm(parse_matrix(M3_TEXT))


@pytest.fixture
def msm() -> GriddingMatrix:
    """Return the skew-merged matrix with its row and column sequences."""
    return ensure_pmm(parse_matrix(MSM_TEXT))


@pytest.fixture
def mprime() -> GriddingMatrix:
    return ensure_pmm(parse_matrix(MPRIME_TEXT))


@pytest.fixture
def negative() -> GriddingMatrix:
    """Return a 2x2 matrix whose only cycle has sign -1."""
    return parse_matrix(NEGATIVE_TEXT)


@pytest.fixture
def forest() -> GriddingMatrix:
    return parse_matrix(FOREST_TEXT)


@pytest.fixture
def matrix_file(tmp_path: Path):  # type: ignore[no-untyped-def]
    """Return a factory writing matrix text to a file under tmp_path."""

    def write(name: str, text: str) -> Path:
        path = tmp_path / f"{name}.txt"
        path.write_text(text.replace(" / ", "\n") + "\n")
        return path

    return write
