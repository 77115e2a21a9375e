import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from lapspec.eigensolve import top_k_eigenvalues
from lapspec.errors import InvalidDimensionError
from lapspec.rand_models import (
    DiagonalVector, SeedPath, SymmetricMatrix, build_reducer, laplacian_of, max_diagonal,
    sample_goe, sample_reduced_model, sample_reduction_chain, sample_surrogate, sigma_and_sqrt,
)
from lapspec.stats import ks_two_sample

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


# -- seeds -------------------------------------------------------------------

def test_same_seed_path_gives_identical_matrices():
    a = sample_goe(30, SeedPath(5, (1, 2)))
    b = sample_goe(30, SeedPath(5, (1, 2)))
    assert np.array_equal(a.entries, b.entries)


def test_distinct_lanes_look_independent():
    x = SeedPath(9, (0,)).generator().standard_normal(20_000)
    y = SeedPath(9, (1,)).generator().standard_normal(20_000)
    # correlation of independent N(0,1) streams is ~N(0, 1/m)
    assert abs(np.corrcoef(x, y)[0, 1]) < 4 / np.sqrt(x.size)
    assert ks_two_sample(x, y).passed


def test_seed_path_rejects_out_of_range():
    with pytest.raises(ValueError):
        SeedPath(2 ** 64)
    with pytest.raises(ValueError):
        SeedPath(1, (-1,))


# -- storage -----------------------------------------------------------------

@given(arrays(float, (6, 6), elements=finite))
def test_symmetric_matrix_is_exactly_symmetric(a):
    s = SymmetricMatrix(a)
    assert np.array_equal(s.entries, s.entries.T)
    assert s.entry(4, 1) == s.entry(1, 4) == a[4, 1]


def test_from_lower_round_trip():
    s = sample_goe(7, 3)
    assert np.array_equal(SymmetricMatrix.from_lower(s.lower(), 7).entries, s.entries)
    with pytest.raises(InvalidDimensionError):
        SymmetricMatrix.from_lower(np.zeros(5), 3)


def test_storage_is_read_only():
    s = sample_goe(4, 1)
    with pytest.raises(ValueError):
        s.entries[0, 0] = 1.0


# -- GOE -----------------------------------------------------------------------

def test_goe_rejects_zero_dimension():
    with pytest.raises(InvalidDimensionError):
        sample_goe(0, 1)


def test_goe_one_by_one_has_variance_two():
    draws = np.array([sample_goe(1, SeedPath(11, (i,))).entry(0, 0) for i in range(100_000)])
    assert abs(draws.var() / 2.0 - 1) < 0.05


def test_goe_off_diagonal_variance_window():
    # pooled over 10^4 draws of n=100: 4950 * 10^4 entries, window from chi-square concentration
    n, draws = 100, 10_000
    iu = np.triu_indices(n, 1)
    total, count, diag_total = 0.0, 0, 0.0
    for i in range(draws):
        a = sample_goe(n, SeedPath(12, (i,))).entries
        total += float(np.sum(a[iu] ** 2))
        diag_total += float(np.sum(np.diagonal(a) ** 2))
        count += iu[0].size
    var = total / count
    assert 0.0097 <= var <= 0.0103
    # diagonal: 10^6 entries of variance 2/n, 3 standard errors of the variance estimator
    dvar = diag_total / (n * draws)
    assert abs(dvar - 2 / n) <= 3 * (2 / n) * np.sqrt(2 / (n * draws))


# -- Laplacian -----------------------------------------------------------------

def test_laplacian_two_by_two():
    a, b, c = 0.3, -1.7, 2.5
    L = laplacian_of(np.array([[a, b], [b, c]])).entries
    assert np.array_equal(L, np.array([[b, -b], [-b, b]]))
    assert max_diagonal(L) == b


def test_laplacian_of_zero():
    assert np.array_equal(laplacian_of(np.zeros((4, 4))).entries, np.zeros((4, 4)))


def test_laplacian_annihilates_ones_five_by_five():
    L = laplacian_of(sample_goe(5, 77)).entries
    assert np.max(np.abs(L @ np.ones(5))) <= 1e-13


@settings(max_examples=50)
@given(st.integers(2, 40), st.integers(0, 2 ** 32))
def test_laplacian_row_sums_vanish(n, seed):
    A = sample_goe(n, seed)
    L = laplacian_of(A).entries
    assert np.max(np.abs(L.sum(axis=1))) <= 1e-13 * n * max(1.0, np.max(np.abs(A.entries)))


# -- surrogate -----------------------------------------------------------------

def test_surrogate_structure():
    D, A, L = sample_surrogate(9, 4)
    assert np.array_equal(L.entries, np.diag(D.values) - A.entries)
    assert L.trace() == pytest.approx(D.values.sum() - A.trace(), abs=1e-14)
    assert np.array_equal(L.entries, L.entries.T)
    with pytest.raises(InvalidDimensionError):
        sample_surrogate(0, 1)


def test_surrogate_scalar_variance():
    vals = np.array([sample_surrogate(1, SeedPath(13, (i,)))[2].entry(0, 0) for i in range(100_000)])
    assert 2.94 <= vals.var() <= 3.06


# -- reducer -------------------------------------------------------------------

def test_reducer_two():
    r = build_reducer(2)
    assert np.allclose(r.e, [2 ** -0.5, 2 ** -0.5], atol=1e-15, rtol=0)


def test_reducer_rejects_small():
    with pytest.raises(InvalidDimensionError):
        build_reducer(1)


@settings(max_examples=40)
@given(st.integers(2, 80))
def test_reducer_orthogonal_with_e_last(n):
    r = build_reducer(n)
    h = r.matrix
    assert np.max(np.abs(h.T @ h - np.eye(n))) <= 1e-12 * n
    assert np.max(np.abs(h[:, -1] - 1 / np.sqrt(n))) <= 1e-15


@settings(max_examples=30)
@given(st.integers(2, 30), st.integers(0, 2 ** 32))
def test_conjugation_matches_dense_product(n, seed):
    r = build_reducer(n)
    m = sample_goe(n, seed).entries
    assert np.allclose(r.conjugate(m), r.matrix.T @ m @ r.matrix, atol=1e-12, rtol=0)
    d = np.arange(n, dtype=float)
    assert np.allclose(r.conjugate(d), r.matrix.T @ np.diag(d) @ r.matrix, atol=1e-12, rtol=0)


@settings(max_examples=30)
@given(st.integers(3, 30), st.integers(0, 2 ** 32))
def test_reduction_spectral_identities(n, seed):
    r = build_reducer(n)
    L = laplacian_of(sample_goe(n, seed)).entries
    full = np.linalg.eigvalsh(L)
    assert np.allclose(np.linalg.eigvalsh(r.conjugate(L)), full, atol=1e-10, rtol=0)
    merged = np.sort(np.append(np.linalg.eigvalsh(r.reduce(L)), 0.0))
    assert np.allclose(merged, full, atol=1e-10, rtol=0)


def test_reducer_four_preserves_laplacian_spectrum():
    r = build_reducer(4)
    L = laplacian_of(sample_goe(4, 2024)).entries
    assert np.allclose(np.linalg.eigvalsh(r.matrix.T @ L @ r.matrix), np.linalg.eigvalsh(L),
                       atol=1e-10, rtol=0)


# -- reduced model ---------------------------------------------------------------

def test_reduced_model_shape_and_symmetry():
    w = sample_reduced_model(12, 3)
    assert w.dim == 11
    assert np.array_equal(w.entries, w.entries.T)
    with pytest.raises(InvalidDimensionError):
        sample_reduced_model(1, 3)


def test_reduction_chain_pieces_are_consistent():
    s = sample_reduction_chain(40, 8)
    n = 40
    c = np.sqrt((n - 1) / n)
    assert np.allclose(s.W_prime - s.W, (1 - c) * s.reducer.reduce(s.D_tilde) + s.g * np.eye(n - 1))
    assert np.allclose(s.A[:-1, :-1], c * s.A_prime)
    assert s.truncated.shape == (n - 1, n - 1) and s.augmented.shape == (n, n)


@pytest.mark.slow
def test_reduced_model_top_eigenvalue_matches_laplacian():
    n, draws = 1000, 300
    w = [top_k_eigenvalues(sample_reduced_model(n, SeedPath(14, (0, i))), 1, "lapack").values[0]
         for i in range(draws)]
    l = [top_k_eigenvalues(laplacian_of(sample_goe(n, SeedPath(14, (1, i)))), 1, "lapack").values[0]
         for i in range(draws)]
    assert ks_two_sample(w, l).passed


# -- covariance ------------------------------------------------------------------

@pytest.mark.parametrize("n", [2, 3, 10, 257])
def test_sigma_closed_forms(n):
    sigma, root = sigma_and_sqrt(n)
    s = sigma.entries
    assert s[0, 0] == (n - 1) / n and (n == 1 or s[0, 1] == 1 / n)
    assert np.max(np.abs(root.entries @ root.entries - s)) <= 1e-12
    ev = np.linalg.eigvalsh(s)
    expected = np.sort(np.append(np.full(n - 1, (n - 2) / n), (2 * n - 2) / n))
    assert np.allclose(ev, expected, atol=1e-12, rtol=0)


def test_sigma_two_by_two():
    sigma, _ = sigma_and_sqrt(2)
    assert np.array_equal(sigma.entries, np.full((2, 2), 0.5))
    assert np.allclose(np.linalg.eigvalsh(sigma.entries), [0.0, 1.0], atol=1e-15)
    with pytest.raises(InvalidDimensionError):
        sigma_and_sqrt(1)


# -- diagonal helpers ------------------------------------------------------------

def test_max_diagonal():
    assert max_diagonal(np.eye(5)) == 1.0
    m = sample_goe(10, 99).entries
    assert max_diagonal(m) == max(m[i, i] for i in range(10))


def test_diagonal_vector():
    d = DiagonalVector([1.0, 2.0, 3.0])
    assert d.dim == 3
    assert np.array_equal(d.as_matrix().entries, np.diag([1.0, 2.0, 3.0]))
    with pytest.raises(InvalidDimensionError):
        DiagonalVector([])
