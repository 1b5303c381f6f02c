"""Permutations and pattern containment for gridwqo.

Zero-knowledge module for one-line permutations, plain and labelled pattern
containment, and point deletion. Knows nothing about grids or matrices;
every other module builds on these values.
"""

from __future__ import annotations

from collections.abc import Callable, Hashable, Iterable, Iterator
from dataclasses import dataclass
import itertools
import re

TOKEN_SPLIT = re.compile(r"[\s,]+")


class PermutationError(ValueError):
    """Raised when a sequence is not a permutation or an index is out of range."""


class LabelError(ValueError):
    """Raised when labelled permutations cannot be compared."""


@dataclass(frozen=True)
class Permutation:
    """A permutation of 1..n in one-line notation."""

    values: tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.values) != list(range(1, len(self.values) + 1)):
            raise PermutationError(f"Not a permutation of 1..{len(self.values)}: {self.values}")

    @classmethod
    def parse(cls, text: str) -> Permutation:
        """
        Parse the spaced one-line form, e.g. ``"3 5 1 6 4 8 2 7"``.

        Commas are accepted as separators. The empty string gives the empty
        permutation.

        Raises:
            PermutationError: If a token is not an integer or the values do
                not form a permutation.
        """
        tokens = [t for t in TOKEN_SPLIT.split(text.strip()) if t]
        try:
            values = tuple(int(t) for t in tokens)
        except ValueError as e:
            raise PermutationError(f"Invalid permutation text: {text!r}") from e
        return cls(values)

    @classmethod
    def all_of_length(cls, n: int) -> Iterator[Permutation]:
        """Yield every permutation of length n in lexicographic order."""
        for values in itertools.permutations(range(1, n + 1)):
            yield cls(values)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[int]:
        return iter(self.values)

    def __str__(self) -> str:
        return " ".join(str(v) for v in self.values)

    def delete_point(self, index: int) -> Permutation:
        """Remove the point at 1-based position ``index`` and standardise."""
        return delete_point(self, index)

    def reverse(self) -> Permutation:
        return Permutation(self.values[::-1])

    def complement(self) -> Permutation:
        n = len(self.values)
        return Permutation(tuple(n + 1 - v for v in self.values))

    def inverse(self) -> Permutation:
        result = [0] * len(self.values)
        for position, value in enumerate(self.values, start=1):
            result[value - 1] = position
        return Permutation(tuple(result))


@dataclass(frozen=True)
class Embedding:
    """Strictly increasing 1-based host positions, one per pattern point."""

    indices: tuple[int, ...]


@dataclass(frozen=True)
class LabelledPermutation:
    """A permutation with one label token per point, drawn from a finite antichain."""

    perm: Permutation
    labels: tuple[Hashable, ...]
    alphabet: frozenset[Hashable]

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.perm):
            raise LabelError(
                f"Expected {len(self.perm)} labels, got {len(self.labels)}"
            )
        stray = [label for label in self.labels if label not in self.alphabet]
        if stray:
            raise LabelError(f"Labels outside the alphabet: {stray!r}")


def pattern_of(values: Iterable[int]) -> Permutation:
    """Return the permutation order-isomorphic to a sequence of distinct integers."""
    seq = list(values)
    ranks = {v: r for r, v in enumerate(sorted(seq), start=1)}
    if len(ranks) != len(seq):
        raise PermutationError(f"Values are not distinct: {seq}")
    return Permutation(tuple(ranks[v] for v in seq))


def delete_point(perm: Permutation, index: int) -> Permutation:
    """
    Erase one point of a permutation.

    Args:
        perm: Permutation to shrink
        index: 1-based position of the point to erase

    Returns:
        The permutation order-isomorphic to the remaining points

    Raises:
        PermutationError: If index is outside 1..len(perm)
    """
    if not 1 <= index <= len(perm):
        raise PermutationError(f"Index {index} out of range for length {len(perm)}")
    return pattern_of(perm.values[: index - 1] + perm.values[index:])


def _neighbour_bounds(pattern: tuple[int, ...]) -> tuple[list[int | None], list[int | None]]:
    """For each pattern index t, the earlier indices holding the nearest lower and upper values."""
    lower: list[int | None] = []
    upper: list[int | None] = []
    for t, value in enumerate(pattern):
        below = [(pattern[s], s) for s in range(t) if pattern[s] < value]
        above = [(pattern[s], s) for s in range(t) if pattern[s] > value]
        lower.append(max(below)[1] if below else None)
        upper.append(min(above)[1] if above else None)
    return lower, upper


def iter_embeddings(
    pattern: Permutation,
    host: Permutation,
    accept: Callable[[int, int], bool] | None = None,
) -> Iterator[Embedding]:
    """
    Yield every embedding of pattern in host in lexicographic order.

    Backtracks over the pattern left to right. Each candidate host value is
    pruned to the open interval spanned by the already matched points whose
    pattern values are nearest below and above.

    Args:
        pattern: Permutation to find
        host: Permutation to search
        accept: Optional extra filter called with (pattern index, host index),
            both 0-based; used for labelled and gridded containment

    Yields:
        Embedding for each occurrence
    """
    k, n = len(pattern), len(host)
    if k == 0:
        yield Embedding(())
        return
    if k > n:
        return

    p, h = pattern.values, host.values
    lower, upper = _neighbour_bounds(p)
    chosen = [0] * k
    next_start = [0] * k
    t = 0
    while t >= 0:
        lo_idx, hi_idx = lower[t], upper[t]
        lo_val = h[chosen[lo_idx]] if lo_idx is not None else 0
        hi_val = h[chosen[hi_idx]] if hi_idx is not None else n + 1
        limit = n - (k - t)
        j = next_start[t]
        while j <= limit:
            if lo_val < h[j] < hi_val and (accept is None or accept(t, j)):
                break
            j += 1
        else:
            t -= 1
            continue

        chosen[t] = j
        next_start[t] = j + 1
        if t == k - 1:
            yield Embedding(tuple(c + 1 for c in chosen))
        else:
            t += 1
            next_start[t] = j + 1


def contains(pattern: Permutation, host: Permutation) -> Embedding | None:
    """Return the lexicographically least embedding of pattern in host, if any."""
    return next(iter_embeddings(pattern, host), None)


def avoids(perm: Permutation, patterns: Iterable[Permutation]) -> bool:
    """True when perm contains none of the given patterns."""
    return all(contains(p, perm) is None for p in patterns)


def count_embeddings(pattern: Permutation, host: Permutation) -> int:
    """Count distinct embeddings of pattern in host."""
    return sum(1 for _ in iter_embeddings(pattern, host))


def is_embedding(pattern: Permutation, host: Permutation, embedding: Embedding) -> bool:
    """Check that an embedding really is an occurrence of pattern in host."""
    indices = embedding.indices
    if len(indices) != len(pattern):
        return False
    if any(not 1 <= i <= len(host) for i in indices):
        return False
    if any(a >= b for a, b in itertools.pairwise(indices)):
        return False
    return pattern_of(host.values[i - 1] for i in indices) == pattern


def labelled_contains(
    pattern: LabelledPermutation, host: LabelledPermutation
) -> Embedding | None:
    """
    Find a label-preserving embedding of one labelled permutation in another.

    Labels form an antichain, so a pattern point may only land on a host point
    carrying the identical token.

    Raises:
        LabelError: If the two permutations use different alphabets
    """
    if pattern.alphabet != host.alphabet:
        raise LabelError("Labelled permutations use different label alphabets")

    def same_label(t: int, j: int) -> bool:
        return pattern.labels[t] == host.labels[j]

    return next(iter_embeddings(pattern.perm, host.perm, same_label), None)
