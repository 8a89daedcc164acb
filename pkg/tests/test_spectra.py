import math

import numpy as np
import pytest
import scipy.linalg as sla

from polymerlab.errors import DegenerateInstanceError, RangeError, StructuralError
from polymerlab.lattice import build_hex_from_square, build_square_lattice, hex_adjacency, square_adjacency
from polymerlab.spectra import (
    SpectralSummary,
    bottom_k_log_product,
    eigenvalues_hex,
    inverse_singular_values,
    log_top_inverse_singular_values,
    log_top_inverse_singular_values_dense,
    singular_values_square,
    smallest_positive_eigenvalue,
    spectral_summary,
)
from polymerlab.verify import duality_error
from polymerlab.weights import assign_weights, sample_hex


def test_two_by_two_hex():
    assert eigenvalues_hex(np.array([[0.0, 3.0], [3.0, 0.0]])).tolist() == pytest.approx([3.0, -3.0])


def test_non_symmetric_rejected():
    with pytest.raises(StructuralError):
        eigenvalues_hex(np.array([[0.0, 1.0], [2.0, 0.0]]))


def test_unit_lattice_duality():
    sq = build_square_lattice(2, 1.0, 1.0, 1.0)
    ev = eigenvalues_hex(hex_adjacency(build_hex_from_square(sq), dense=True))
    sv = sla.svdvals(square_adjacency(sq, dense=True).toarray())
    assert np.sort(np.abs(ev)) == pytest.approx(np.sort(np.concatenate([sv, sv])), rel=1e-12)


@pytest.mark.parametrize("n", [2, 5, 9, 14, 20])
def test_duality_random(iid_model, mixed_model, n):
    for model in (iid_model, mixed_model):
        assert duality_error(sample_hex(model, n)) < 1e-8


def test_spectrum_symmetric(iid_model):
    ev = eigenvalues_hex(hex_adjacency(sample_hex(iid_model, 6), dense=True))
    assert ev == pytest.approx(-ev[::-1], abs=1e-10 * np.abs(ev).max())


def test_singular_values_small_cases():
    assert singular_values_square(np.array([[-4.0]])).tolist() == [4.0]
    s = singular_values_square(np.diag([2.0, 0.5]))
    assert s.tolist() == [2.0, 0.5]
    assert inverse_singular_values(s).tolist() == [2.0, 0.5]


def test_singular_values_degenerate():
    with pytest.raises(DegenerateInstanceError):
        singular_values_square(np.zeros((2, 2)))


def test_inverse_product_is_inverse_determinant(mixed_model):
    lat = assign_weights(mixed_model, 3)
    s = singular_values_square(square_adjacency(lat, dense=True))
    logprod = np.sum(np.log(inverse_singular_values(s)))
    assert logprod == pytest.approx(-np.log(np.abs(lat.loops)).sum(), rel=1e-8)


@pytest.mark.parametrize("n", [2, 4, 8])
def test_product_identity(iid_model, n):
    lat = assign_weights(iid_model, n)
    s = singular_values_square(square_adjacency(lat, dense=True))
    assert np.log(s).sum() == pytest.approx(np.log(np.abs(lat.loops)).sum(), rel=1e-6, abs=1e-9)


def test_smallest_positive_eigenvalue_examples():
    assert smallest_positive_eigenvalue([-3.0, -1.0, 1.0, 3.0]) == 1.0
    assert smallest_positive_eigenvalue([-2.0, 0.0, 2.0]) == 2.0
    with pytest.raises(DegenerateInstanceError):
        smallest_positive_eigenvalue([-1.0, 0.0])


def test_smallest_positive_matches_svd(mixed_model):
    lat = assign_weights(mixed_model, 4)
    ev = eigenvalues_hex(hex_adjacency(build_hex_from_square(lat), dense=True))
    smin = sla.svdvals(square_adjacency(lat, dense=True).toarray()).min()
    assert smallest_positive_eigenvalue(ev) == pytest.approx(smin, rel=1e-8)


def test_bottom_k_examples():
    assert bottom_k_log_product([1.0, 2.0, 4.0], 2) == pytest.approx(math.log(2.0))
    assert bottom_k_log_product([-4.0, -1.0, 1.0, 4.0], 1) == pytest.approx(
        math.log(smallest_positive_eigenvalue([-4.0, -1.0, 1.0, 4.0]))
    )
    with pytest.raises(RangeError):
        bottom_k_log_product([-1.0, 1.0], 2)


def test_bottom_k_matches_inverse_singular_values(mixed_model):
    lat = assign_weights(mixed_model, 4)
    ev = eigenvalues_hex(hex_adjacency(build_hex_from_square(lat), dense=True))
    A = square_adjacency(lat, dense=True).toarray()
    s = np.sort(sla.svdvals(A))
    # dense solvers resolve small values only to about eps * ||A|| in absolute terms
    floor = 64 * np.finfo(float).eps * np.abs(ev).max()
    assert np.sort(ev[ev > 0])[:2] == pytest.approx(s[:2], abs=floor)
    log_tol = floor / s[0] + floor / s[1]
    assert bottom_k_log_product(ev, 2) == pytest.approx(np.sum(np.log(s[:2])), abs=log_tol)
    # the path-sum oracle for A^{-1} has no such floor
    top = log_top_inverse_singular_values_dense(lat, 2)
    assert bottom_k_log_product(ev, 2) == pytest.approx(-top.sum(), abs=log_tol)


@pytest.mark.parametrize("n", [3, 8, 16, 32])
def test_iterative_matches_dense(mixed_model, n):
    lat = assign_weights(mixed_model, n)
    it = log_top_inverse_singular_values(lat, k=2)
    de = log_top_inverse_singular_values_dense(lat, k=2)
    assert it[0] == pytest.approx(de[0], abs=1e-7)
    if n <= 4:
        # a direct SVD of A resolves sigma_min only while it stays well above eps * ||A||
        A = square_adjacency(lat, dense=True).toarray()
        assert it[0] == pytest.approx(-math.log(sla.svdvals(A).min()), abs=1e-6)


def test_iterative_monotone_and_info(iid_model):
    lat = assign_weights(iid_model, 10)
    est, info = log_top_inverse_singular_values(lat, k=4, return_info=True)
    assert np.all(np.diff(est) <= 1e-12)
    assert info["converged"]
    assert info["resolved"][0]


def test_iterative_range_errors(iid_model):
    lat = assign_weights(iid_model, 2)
    with pytest.raises(RangeError):
        log_top_inverse_singular_values(lat, k=5)
    with pytest.raises(RangeError):
        log_top_inverse_singular_values(lat, k=0)


def test_sparse_eigen_path(mixed_model):
    lat = assign_weights(mixed_model, 6)
    H = hex_adjacency(build_hex_from_square(lat), dense=False)
    near = eigenvalues_hex(H, k=4, dense=False)
    full = eigenvalues_hex(H, dense=True)
    assert np.sort(np.abs(near))[:2] == pytest.approx(np.sort(np.abs(full))[:2], rel=1e-6)


def test_summary_round_trip_and_identity(mixed_model):
    lat = assign_weights(mixed_model, 5)
    s = spectral_summary(lat, k_max=2)
    assert len(s.eigenvalues) == 50 and len(s.singular_values) == 25
    assert s.lambda_min_pos == pytest.approx(min(s.singular_values), rel=1e-8)
    assert s.bottom_k_log_products[2] == pytest.approx(-sum(s.log_inverse_singular_values), rel=1e-12)
    back = SpectralSummary.from_dict(s.to_dict())
    assert back.log_inverse_singular_values == s.log_inverse_singular_values
    assert back.spectrum_csv().splitlines()[0] == "index,value"


def test_log_domain_survives_underflow(mixed_model):
    s = spectral_summary(assign_weights(mixed_model, 200), k_max=1)
    assert s.log_lambda_min_pos < -745
    assert s.lambda_min_pos == 0.0
