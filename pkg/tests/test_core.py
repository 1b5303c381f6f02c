"""Tests for src/core.py.

Covers permutation parsing, point deletion and plain and labelled pattern
containment.
"""

from hypothesis import given, settings
from hypothesis import strategies as st
import pytest

from src.core import (
    Embedding,
    LabelError,
    LabelledPermutation,
    Permutation,
    PermutationError,
    avoids,
    contains,
    count_embeddings,
    delete_point,
    is_embedding,
    iter_embeddings,
    labelled_contains,
    pattern_of,
)

PI_1 = Permutation((3, 5, 1, 6, 4, 8, 2, 7))
LAMBDA = Permutation((3, 5, 1, 6, 4, 7, 2))

permutations = st.integers(min_value=0, max_value=8).flatmap(
    lambda n: st.permutations(list(range(1, n + 1)))
).map(lambda values: Permutation(tuple(values)))


class TestPermutation:
    """Tests for the Permutation value type."""

    def test_parse_spaced_and_commas(self) -> None:
        """Test spaced and comma separated forms parse to the same value."""
        assert Permutation.parse("3 5 1 6 4 8 2 7") == PI_1
        assert Permutation.parse("3,5,1,6,4,8,2,7") == PI_1

    def test_parse_empty(self) -> None:
        """Test the empty string gives the empty permutation."""
        assert len(Permutation.parse("")) == 0

    def test_rejects_non_permutation(self) -> None:
        """Test repeated or missing values are rejected."""
        with pytest.raises(PermutationError, match="Not a permutation"):
            Permutation((1, 1))
        with pytest.raises(PermutationError, match="Not a permutation"):
            Permutation((1, 3))

    def test_rejects_bad_token(self) -> None:
        """Test non-integer tokens raise PermutationError."""
        with pytest.raises(PermutationError, match="Invalid permutation"):
            Permutation.parse("1 two 3")

    def test_str_is_spaced(self) -> None:
        """Test the text form round-trips through parse."""
        assert str(PI_1) == "3 5 1 6 4 8 2 7"

    def test_symmetries(self) -> None:
        """Test reverse, complement and inverse on a small example."""
        perm = Permutation((2, 4, 1, 3))

        assert perm.reverse() == Permutation((3, 1, 4, 2))
        assert perm.complement() == Permutation((3, 1, 4, 2))
        assert perm.inverse() == Permutation((3, 1, 4, 2))

    def test_all_of_length(self) -> None:
        """Test enumeration yields n! distinct permutations."""
        perms = list(Permutation.all_of_length(4))

        assert len(perms) == 24
        assert len(set(perms)) == 24
        assert perms[0] == Permutation((1, 2, 3, 4))


class TestDeletePoint:
    """Tests for delete_point."""

    def test_standardises(self) -> None:
        """Test deletion re-ranks the remaining values."""
        assert delete_point(Permutation((3, 1, 2)), 1) == Permutation((1, 2))

    def test_first_point_of_long_example(self) -> None:
        """Test deleting the first point of 35164872."""
        assert delete_point(PI_1, 1) == Permutation((4, 1, 5, 3, 7, 2, 6))

    def test_singleton_becomes_empty(self) -> None:
        """Test deleting the only point leaves the empty permutation."""
        assert delete_point(Permutation((1,)), 1) == Permutation(())

    def test_out_of_range(self) -> None:
        """Test indices outside 1..n raise."""
        with pytest.raises(PermutationError, match="out of range"):
            delete_point(PI_1, 9)
        with pytest.raises(PermutationError, match="out of range"):
            PI_1.delete_point(0)

    def test_pattern_of_rejects_repeats(self) -> None:
        """Test pattern_of needs distinct values."""
        with pytest.raises(PermutationError, match="not distinct"):
            pattern_of([4, 4])


class TestContains:
    """Tests for plain pattern containment."""

    def test_simple_embedding(self) -> None:
        """Test 21 embeds in 312 at the first two positions."""
        assert contains(Permutation((2, 1)), Permutation((3, 1, 2))) == Embedding((1, 2))

    def test_reflexive(self) -> None:
        """Test a permutation embeds in itself by the identity."""
        perm = Permutation((2, 1, 4, 3))

        assert contains(perm, perm) == Embedding((1, 2, 3, 4))

    def test_absent(self) -> None:
        """Test 12 is absent from a decreasing permutation."""
        assert contains(Permutation((1, 2)), Permutation((3, 2, 1))) is None

    def test_longer_pattern_absent(self) -> None:
        """Test a pattern longer than the host never embeds."""
        assert contains(PI_1, LAMBDA) is None

    def test_unique_embedding_in_long_example(self) -> None:
        """Test 3516472 occurs exactly once in 35164872."""
        assert contains(LAMBDA, PI_1) is not None
        assert count_embeddings(LAMBDA, PI_1) == 1

    def test_counts(self) -> None:
        """Test embedding counts on tiny hosts."""
        assert count_embeddings(Permutation((1,)), Permutation((3, 2, 1))) == 3
        assert count_embeddings(Permutation((1, 2)), Permutation((1, 2, 3))) == 3
        assert count_embeddings(Permutation(()), Permutation((1, 2))) == 1

    def test_avoids(self) -> None:
        """Test avoids checks every pattern."""
        host = Permutation((2, 4, 1, 3))

        assert avoids(host, [Permutation((3, 2, 1)), Permutation((1, 2, 3))])
        assert not avoids(host, [Permutation((3, 2, 1)), Permutation((2, 1))])

    def test_is_embedding(self) -> None:
        """Test embedding verification rejects wrong or malformed indices."""
        host = Permutation((3, 1, 2))

        assert is_embedding(Permutation((2, 1)), host, Embedding((1, 3)))
        assert not is_embedding(Permutation((2, 1)), host, Embedding((2, 3)))
        assert not is_embedding(Permutation((2, 1)), host, Embedding((3, 1)))
        assert not is_embedding(Permutation((2, 1)), host, Embedding((1, 4)))

    @settings(max_examples=60, deadline=None)
    @given(perm=permutations, data=st.data())
    def test_subsequence_always_embeds(self, perm: Permutation, data: st.DataObject) -> None:
        """Test the pattern of any subsequence embeds at a valid occurrence."""
        chosen = data.draw(st.sets(st.integers(min_value=1, max_value=max(len(perm), 1))))
        indices = sorted(i for i in chosen if i <= len(perm))
        pattern = pattern_of(perm.values[i - 1] for i in indices)

        found = contains(pattern, perm)

        assert found is not None
        assert is_embedding(pattern, perm, found)

    @settings(max_examples=60, deadline=None)
    @given(pattern=permutations, host=permutations)
    def test_symmetries_preserve_containment(
        self, pattern: Permutation, host: Permutation
    ) -> None:
        """Test containment is invariant under reverse, complement and inverse."""
        expected = contains(pattern, host) is not None

        assert (contains(pattern.reverse(), host.reverse()) is not None) == expected
        assert (contains(pattern.complement(), host.complement()) is not None) == expected
        assert (contains(pattern.inverse(), host.inverse()) is not None) == expected

    @settings(max_examples=40, deadline=None)
    @given(pattern=permutations, host=permutations)
    def test_embeddings_are_lexicographic(self, pattern: Permutation, host: Permutation) -> None:
        """Test every enumerated embedding is valid and they come in order."""
        found = [e.indices for e in iter_embeddings(pattern, host)]

        assert found == sorted(set(found))
        assert all(is_embedding(pattern, host, Embedding(e)) for e in found)

    @settings(max_examples=60, deadline=None)
    @given(host=permutations, data=st.data())
    def test_containment_is_transitive(self, host: Permutation, data: st.DataObject) -> None:
        """Test a pattern of a pattern of host is found in host."""

        def sub_pattern(perm: Permutation) -> Permutation:
            indices = data.draw(st.sets(st.integers(min_value=1, max_value=max(len(perm), 1))))
            return pattern_of(perm.values[i - 1] for i in sorted(indices) if i <= len(perm))

        middle = sub_pattern(host)
        pattern = sub_pattern(middle)

        assert contains(middle, host) is not None
        assert contains(pattern, middle) is not None
        assert contains(pattern, host) is not None

    @settings(max_examples=60, deadline=None)
    @given(first=permutations, second=permutations, third=permutations)
    def test_containment_chains_on_random_triples(
        self, first: Permutation, second: Permutation, third: Permutation
    ) -> None:
        """Test containment composes on unrelated triples."""
        if contains(first, second) is not None and contains(second, third) is not None:
            assert contains(first, third) is not None


class TestLabelledContains:
    """Tests for label-preserving containment."""

    ALPHABET = frozenset({"o", "x"})

    def labelled(self, values: tuple[int, ...], labels: tuple[str, ...]) -> LabelledPermutation:
        return LabelledPermutation(Permutation(values), labels, self.ALPHABET)

    def test_matching_label(self) -> None:
        """Test a point embeds onto a host point with the same label."""
        found = labelled_contains(self.labelled((1,), ("x",)), self.labelled((1, 2), ("x", "o")))

        assert found == Embedding((1,))

    def test_label_mismatch(self) -> None:
        """Test labels form an antichain: no embedding on mismatch."""
        pattern = self.labelled((1, 2), ("o", "o"))
        host = self.labelled((1, 2), ("x", "o"))

        assert labelled_contains(pattern, host) is None

    def test_different_alphabets(self) -> None:
        """Test comparing labelled permutations over different alphabets raises."""
        other = LabelledPermutation(Permutation((1,)), ("z",), frozenset({"z"}))

        with pytest.raises(LabelError, match="different label alphabets"):
            labelled_contains(other, self.labelled((1,), ("x",)))

    def test_label_validation(self) -> None:
        """Test label count and alphabet are checked."""
        with pytest.raises(LabelError, match="Expected 2 labels"):
            self.labelled((1, 2), ("x",))
        with pytest.raises(LabelError, match="outside the alphabet"):
            self.labelled((1,), ("q",))
