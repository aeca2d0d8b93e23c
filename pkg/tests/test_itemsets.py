from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minhashlaw.errors import EmptyInputError, UndefinedSimilarityError, UniverseMismatchError
from minhashlaw.itemsets import (
    ItemSet,
    Universe,
    build_representation_matrix,
    build_rum_matrix,
    jaccard,
    matrix_similarity,
    shingle,
    shingle_many,
    shingle_strings,
    simM_to_sim,
    sim_to_simM,
)

from .oracles import jaccard_sets


def subset_pairs(max_n=8):
    return st.integers(1, max_n).flatmap(
        lambda n: st.tuples(
            st.just(n),
            st.sets(st.integers(1, n)),
            st.sets(st.integers(1, n)),
        ).filter(lambda t: t[1] or t[2])
    )


def test_shingles_of_short_text():
    assert shingle_strings("abcd", 3) == {"abc", "bcd"}


def test_normalization_lowercases_and_collapses_whitespace():
    assert shingle_strings("A  b\n\tC", 3) == {"a b", " b ", "b c"}


def test_text_shorter_than_p_is_rejected():
    with pytest.raises(EmptyInputError):
        shingle_strings("ab", 3)
    with pytest.raises(ValueError):
        shingle_strings("abc", 0)


def test_shared_universe_similarity():
    a, b = shingle_many(["abcd", "bcde"], 3)
    assert a.universe is b.universe
    assert jaccard(a, b) == Fraction(1, 3)


def test_shingle_builds_sorted_universe():
    s = shingle("cab", 2)
    assert s.universe.labels == ("ab", "ca")
    assert len(s) == 2


def test_itemset_json_round_trip():
    u = Universe(("x", "y", "z"))
    s = u.itemset([3, 1])
    back = ItemSet.from_json(s.to_json())
    assert back == s
    assert back.members == (1, 3)
    assert back.labels() == ["x", "z"]


def test_itemset_rejects_out_of_range_members():
    with pytest.raises(UniverseMismatchError):
        Universe.of_size(3).itemset([4])


def test_universe_mismatch_detected():
    a = Universe.of_size(3).itemset([1])
    b = Universe(("p", "q", "r")).itemset([1])
    with pytest.raises(UniverseMismatchError):
        jaccard(a, b)


def test_two_empty_sets_have_no_similarity():
    u = Universe.of_size(2)
    with pytest.raises(UndefinedSimilarityError):
        jaccard(u.itemset([]), u.itemset([]))


def test_plain_matrix_example():
    u = Universe.of_size(3)
    a, b = u.itemset([1, 2]), u.itemset([2, 3])
    m = build_representation_matrix(u, [a, b])
    assert m.cells.tolist() == [[1, 0], [1, 1], [0, 1]]
    assert m.row_classes(1, 2) == (1, 1, 1, 0)
    assert matrix_similarity(m, 1, 2) == Fraction(1, 3)


def test_doubled_matrix_example():
    u = Universe.of_size(3)
    m = build_rum_matrix(u.itemset([1, 2]), u.itemset([2, 3]))
    assert m.n_rows == 4
    assert m.row_elements.tolist() == [1, 2, 2, 3]
    assert m.column(1).tolist() == [1, 1, 1, 0]
    assert m.column(2).tolist() == [0, 1, 1, 1]
    assert matrix_similarity(m, 1, 2) == Fraction(1, 2)


def test_doubled_matrix_edge_cases():
    u = Universe.of_size(4)
    a = u.itemset([1, 2])
    assert matrix_similarity(build_rum_matrix(a, a), 1, 2) == 1
    assert matrix_similarity(build_rum_matrix(a, u.itemset([3, 4])), 1, 2) == 0
    with pytest.raises(EmptyInputError):
        build_rum_matrix(u.itemset([]), u.itemset([]))


def test_bad_row_order_rejected():
    u = Universe.of_size(3)
    with pytest.raises(ValueError):
        build_representation_matrix(u, [u.itemset([1])], [1, 1, 2])
    with pytest.raises(ValueError):
        build_representation_matrix(u, [u.itemset([1])], [1, 2])


def test_matrix_is_read_only():
    u = Universe.of_size(2)
    m = build_representation_matrix(u, [u.itemset([1])])
    with pytest.raises(ValueError):
        m.cells[0, 0] = 0


def test_conversion_examples():
    assert sim_to_simM(Fraction(1, 3)) == Fraction(1, 2)
    assert simM_to_sim(Fraction(1, 2)) == Fraction(1, 3)
    assert sim_to_simM(0) == 0 and sim_to_simM(1) == 1
    with pytest.raises(ValueError):
        sim_to_simM(Fraction(3, 2))


@settings(max_examples=200, deadline=None)
@given(subset_pairs())
def test_plain_matrix_similarity_is_jaccard(case):
    n, a, b = case
    u = Universe.of_size(n)
    A, B = u.itemset(a), u.itemset(b)
    m = build_representation_matrix(u, [A, B])
    assert matrix_similarity(m, 1, 2) == jaccard(A, B) == jaccard_sets(a, b)


@settings(max_examples=200, deadline=None)
@given(subset_pairs(), st.randoms(use_true_random=False))
def test_doubled_matrix_similarity_is_simM(case, rnd):
    n, a, b = case
    u = Universe.of_size(n)
    A, B = u.itemset(a), u.itemset(b)
    sigma = list(range(1, len(a) + len(b) + 1))
    rnd.shuffle(sigma)
    m = build_rum_matrix(A, B, sigma)
    assert matrix_similarity(m, 1, 2) == sim_to_simM(jaccard(A, B))
    assert simM_to_sim(matrix_similarity(m, 1, 2)) == jaccard(A, B)


@settings(max_examples=100, deadline=None)
@given(subset_pairs(), st.randoms(use_true_random=False))
def test_similarity_ignores_row_order(case, rnd):
    n, a, b = case
    u = Universe.of_size(n)
    m = build_representation_matrix(u, [u.itemset(a), u.itemset(b)])
    sigma = list(range(1, n + 1))
    rnd.shuffle(sigma)
    assert matrix_similarity(m.reordered(sigma), 1, 2) == matrix_similarity(m, 1, 2)


@settings(max_examples=200, deadline=None)
@given(subset_pairs())
def test_jaccard_symmetric_and_one_only_on_equality(case):
    n, a, b = case
    u = Universe.of_size(n)
    A, B = u.itemset(a), u.itemset(b)
    assert jaccard(A, B) == jaccard(B, A)
    assert (jaccard(A, B) == 1) == (a == b)


@given(st.fractions(0, 1))
def test_conversions_invert_each_other(s):
    assert simM_to_sim(sim_to_simM(s)) == s
    assert sim_to_simM(simM_to_sim(s)) == s


def test_rum_matrix_layout_tracks_row_order():
    u = Universe.of_size(3)
    m = build_rum_matrix(u.itemset([1, 2]), u.itemset([2, 3]), [4, 3, 2, 1])
    assert m.row_elements.tolist() == [3, 2, 2, 1]
    assert np.array_equal(m.row_order, [4, 3, 2, 1])
