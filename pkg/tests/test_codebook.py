import itertools
import math

import numpy as np
import pytest

from gsmhp.codebook import build_codebook, num_spatial_schemes, selection_matrix
from gsmhp.params import FeasibilityError, SystemGeometry


def largest_power_of_two_at_most(n: int) -> int:
    """Oracle by doubling; no bit tricks, no floating log."""
    p = 1
    while 2 * p <= n:
        p *= 2
    return p


def test_num_spatial_schemes_examples():
    assert num_spatial_schemes(16, 14) == 64
    assert num_spatial_schemes(2, 1) == 2
    assert num_spatial_schemes(4, 2) == 4


def test_num_spatial_schemes_exhaustive_small():
    for n_m in range(2, 13):
        for n_rf in range(1, n_m):
            subsets = sum(1 for _ in itertools.combinations(range(n_m), n_rf))
            assert num_spatial_schemes(n_m, n_rf) == largest_power_of_two_at_most(subsets)


@pytest.mark.parametrize("n_m,n_rf", [(4, 4), (4, 5), (4, 0)])
def test_num_spatial_schemes_feasibility(n_m, n_rf):
    with pytest.raises(FeasibilityError):
        num_spatial_schemes(n_m, n_rf)


def test_build_codebook_4_choose_2():
    geom = SystemGeometry.make(n_m=4, n_k=2, n_rf=2, n_s=2)
    book = build_codebook(geom)
    assert book.m_count == 4
    assert [book.pattern(m) for m in range(4)] == [(0, 1), (0, 2), (0, 3), (1, 2)]


def test_build_codebook_2_choose_1():
    geom = SystemGeometry.make(n_m=2, n_k=2, n_rf=1, n_s=1)
    book = build_codebook(geom)
    assert [book.pattern(m) for m in range(2)] == [(0,), (1,)]


def test_build_codebook_reference_configuration():
    geom = SystemGeometry.make(n_m=16, n_k=8, n_rf=14, n_s=8)
    book = build_codebook(geom)
    assert book.m_count == 64
    patterns = {book.pattern(m) for m in range(64)}
    assert len(patterns) == 64
    assert all(len(p) == 14 for p in patterns)
    # first M subsets in lexicographic order
    expected = list(itertools.islice(itertools.combinations(range(16), 14), 64))
    assert [book.pattern(m) for m in range(64)] == expected


def test_build_codebook_rejects_infeasible_geometry():
    geom = SystemGeometry(n_t=8, n_m=4, n_k=2, n_rf=4, n_s=2, rows_l=4, cols_r=2)
    with pytest.raises(FeasibilityError):
        build_codebook(geom)


def test_patterns_are_strictly_increasing_rows():
    geom = SystemGeometry.make(n_m=7, n_k=3, n_rf=3, n_s=2)
    book = build_codebook(geom)
    assert np.all(np.diff(book.patterns, axis=1) > 0)
    assert book.m_count == largest_power_of_two_at_most(math.comb(7, 3))


def test_selection_matrix_group_rows():
    geom = SystemGeometry.make(n_m=2, n_k=2, n_rf=1, n_s=1)
    book = build_codebook(geom)
    np.testing.assert_array_equal(selection_matrix(book, 0), [[1], [1], [0], [0]])
    np.testing.assert_array_equal(selection_matrix(book, 1), [[0], [0], [1], [1]])


def test_selection_matrix_index_range():
    geom = SystemGeometry.make(n_m=2, n_k=2, n_rf=1, n_s=1)
    book = build_codebook(geom)
    with pytest.raises(IndexError):
        selection_matrix(book, 2)


def test_selection_matrix_structure_random_geometries():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n_m = int(rng.integers(2, 9))
        n_rf = int(rng.integers(1, n_m))
        n_k = int(rng.integers(1, 5))
        geom = SystemGeometry.make(n_m=n_m, n_k=n_k, n_rf=n_rf, n_s=1)
        book = build_codebook(geom)
        for m in range(min(book.m_count, 8)):
            c_m = selection_matrix(book, m)
            np.testing.assert_array_equal(c_m.sum(axis=0), np.full(n_rf, n_k))
            np.testing.assert_array_equal(c_m.T @ c_m, n_k * np.eye(n_rf))
            assert c_m.sum() == n_rf * n_k
            # chain j feeds exactly the rows of its pattern group
            for j, g in enumerate(book.pattern(m)):
                rows = np.flatnonzero(c_m[:, j])
                np.testing.assert_array_equal(
                    rows, np.arange(g * n_k, (g + 1) * n_k))


def test_active_antennas_matches_selection_matrix():
    geom = SystemGeometry.make(n_m=5, n_k=3, n_rf=2, n_s=2)
    book = build_codebook(geom)
    for m in range(book.m_count):
        c_m = selection_matrix(book, m)
        np.testing.assert_array_equal(
            np.sort(book.active_antennas(m)),
            np.flatnonzero(c_m.sum(axis=1)))


def test_activation_onehot():
    geom = SystemGeometry.make(n_m=4, n_k=2, n_rf=2, n_s=2)
    book = build_codebook(geom)
    onehot = book.activation_onehot()
    assert onehot.shape == (4, 4)
    np.testing.assert_array_equal(onehot.sum(axis=1), np.full(4, 2))
    for m in range(4):
        np.testing.assert_array_equal(np.flatnonzero(onehot[m]), book.patterns[m])


def test_describe_lists_every_pattern():
    geom = SystemGeometry.make(n_m=4, n_k=2, n_rf=2, n_s=2)
    text = build_codebook(geom).describe()
    assert "M=4" in text and "(1, 2)" in text
