import math
import warnings
from math import comb

import numpy as np
import pytest

from polymerlab import polymer

from polymerlab.errors import RangeError, RefusedError, StructuralError
from polymerlab.lattice import build_square_lattice, square_adjacency
from polymerlab.polymer import (
    EndpointSpec,
    brute_force_Z,
    brute_force_Zk,
    f_matrix,
    f_table,
    inverse_residual,
    lgv_determinant,
    max_ZST,
    nonintersecting_Z,
    partition_function,
    path_weight,
    transfer_weights_to_edges,
)
from polymerlab.combinatorics.paths import LatticePath
from polymerlab.signedlog import PrecisionWarning
from polymerlab.verify import sandwich_slacks
from polymerlab.weights import assign_weights


def unit(n, edge=1.0):
    return build_square_lattice(n, 1.0, edge, edge)


# -- single paths ----------------------------------------------------------------


def test_trivial_path_weight():
    lat = build_square_lattice(1, 5.0)
    assert path_weight(LatticePath.point((1, 1)), lat).isclose(math.log(5.0) and 5.0)
    assert partition_function(lat, (1, 1), (1, 1)).logmag == pytest.approx(math.log(5.0))


def test_unit_corner_counts():
    assert partition_function(unit(2), (1, 1), (2, 2)).to_float() == pytest.approx(2.0)
    assert brute_force_Z(unit(2), (1, 1), (2, 2)).to_float() == pytest.approx(2.0)
    # minus-one edges: every corner-to-corner path has an even number of edges
    assert partition_function(unit(2, -1.0), (1, 1), (2, 2)).to_float() == pytest.approx(2.0)
    for n in range(1, 7):
        assert partition_function(unit(n), (1, 1), (n, n)).to_float() == pytest.approx(comb(2 * n - 2, n - 1))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_dp_matches_enumeration(mixed_model, iid_model, signed_model, n):
    for model in (mixed_model, iid_model, signed_model):
        lat = assign_weights(model, n)
        for u in [(1, 1), (2, 1), (1, 2)]:
            for v in [(n, n), (n, 1), (2, n)]:
                if not lat.contains(u) or not lat.contains(v):
                    continue
                dp = partition_function(lat, u, v)
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", PrecisionWarning)
                    bf = brute_force_Z(lat, u, v)
                assert dp.isclose(bf, rtol=1e-10) or (bf.is_zero() and dp.is_zero())


def test_mixed_corner_positive(mixed_model):
    for n in (2, 5, 10, 40):
        assert partition_function(assign_weights(mixed_model, n), (1, 1), (n, n)).sign == 1


# -- f tables and the inverse -------------------------------------------------------


def test_f_table_support_and_diagonal(iid_model):
    lat = assign_weights(iid_model, 5)
    t = f_table(lat, (2, 3))
    for x in range(1, 6):
        for y in range(1, 6):
            if x < 2 or y < 3:
                assert t[(x, y)].is_zero()
    assert t[(2, 3)].to_float() * lat.loops[2, 1] == pytest.approx(1.0, rel=1e-15)


@pytest.mark.parametrize("n", [1, 2, 4, 8])
def test_inverse_identity(mixed_model, iid_model, n):
    for model in (mixed_model, iid_model):
        lat = assign_weights(model, n)
        if n <= 4:
            assert inverse_residual(lat, exact=True) == (0.0, 0.0)
        A = square_adjacency(lat, dense=True).toarray()
        F = f_matrix(lat)
        # F A = I in floating point, relative to the size of the entries involved
        scale = np.abs(F) @ np.abs(A)
        assert np.all(np.abs(F @ A - np.eye(n * n)) <= 1e-12 * np.maximum(scale, 1.0))


def test_partition_table_csv(iid_model):
    text = f_table(assign_weights(iid_model, 3), (1, 1)).to_csv()
    lines = text.splitlines()
    assert lines[0] == "x,y,sign,logmag" and len(lines) == 10


# -- LGV ---------------------------------------------------------------------------------


def test_lgv_k1_is_partition_function(iid_model):
    lat = assign_weights(iid_model, 4)
    spec = EndpointSpec(((2, 1),), ((3, 4),))
    assert lgv_determinant(lat, spec).isclose(partition_function(lat, (2, 1), (3, 4)), rtol=1e-12)


def test_lgv_unit_corner():
    assert lgv_determinant(unit(2), EndpointSpec.corner(2, 2)).to_float() == pytest.approx(1.0)
    assert brute_force_Zk(unit(2), EndpointSpec.corner(2, 2)).to_float() == pytest.approx(1.0)
    for n in range(1, 7):
        assert nonintersecting_Z(unit(n), n).to_float() == pytest.approx(1.0)
    for n in range(1, 4):
        assert brute_force_Zk(unit(n), EndpointSpec.corner(n, n)).to_float() == pytest.approx(1.0)


def test_lgv_matches_brute_force_n4(mixed_model, signed_model):
    for model in (mixed_model, signed_model):
        for r in range(10):
            lat = assign_weights(model, 4, r)
            spec = EndpointSpec.corner(4, 2)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", PrecisionWarning)
                assert lgv_determinant(lat, spec).isclose(brute_force_Zk(lat, spec), rtol=1e-6)


def test_lgv_matches_brute_force_n3_tight(iid_model):
    rng = np.random.default_rng(4)
    for r in range(20):
        lat = assign_weights(iid_model, 3, r)
        cells = [(x, y) for x in range(1, 4) for y in range(1, 4)]
        S = [cells[i] for i in rng.choice(9, 2, replace=False)]
        T = [cells[i] for i in rng.choice(9, 2, replace=False)]
        spec = EndpointSpec(tuple(S), tuple(T))
        a, b = lgv_determinant(lat, spec), brute_force_Zk(lat, spec)
        assert a.isclose(b, rtol=1e-9)


def test_lgv_exact_zero():
    # the only tuples would need a path to pass through another path's endpoint
    lat = assign_weights(__import__("polymerlab").weights.WeightModel.mixed(0.5, 0), 3, 5)
    spec = EndpointSpec(((2, 1), (2, 2), (2, 3)), ((3, 2), (3, 3), (2, 3)))
    assert brute_force_Zk(lat, spec).is_zero()
    assert lgv_determinant(lat, spec).is_zero()


def test_lgv_sign_follows_order(iid_model):
    lat = assign_weights(iid_model, 4)
    spec = EndpointSpec.corner(4, 2)
    swapped = EndpointSpec(spec.S, spec.T[::-1])
    assert lgv_determinant(lat, swapped).isclose(-lgv_determinant(lat, spec), rtol=1e-12)


def test_lgv_range_error(iid_model):
    lat = assign_weights(iid_model, 2)
    with pytest.raises(RangeError):
        lgv_determinant(lat, EndpointSpec(((1, 1), (1, 2), (2, 1)), ((2, 2), (2, 1), (1, 2))))
    with pytest.raises(RangeError):
        EndpointSpec.corner(2, 3)


def test_endpoint_spec_validation():
    with pytest.raises(StructuralError):
        EndpointSpec(((1, 1), (1, 1)), ((2, 2), (2, 1)))
    with pytest.raises(StructuralError):
        EndpointSpec(((1, 1),), ((2, 2), (2, 1)))


def test_nonintersecting_k1(mixed_model):
    lat = assign_weights(mixed_model, 6)
    assert nonintersecting_Z(lat, 1).isclose(partition_function(lat, (1, 1), (6, 6)), rtol=1e-14)


def test_large_corner_determinant_is_finite(mixed_model):
    # cancels far below double precision; the decimal fallback must handle it silently
    with warnings.catch_warnings():
        warnings.simplefilter("error", PrecisionWarning)
        z = nonintersecting_Z(assign_weights(mixed_model, 64), 3)
    assert z.sign == 1 and np.isfinite(z.logmag) and z.logmag > 100


def test_decimal_refinement_matches_exact(mixed_model):
    lat = assign_weights(mixed_model, 10, 2)
    spec = EndpointSpec.corner(10, 3)
    exact = polymer._exact_lgv(lat, spec)
    refined = polymer._refined_lgv(lat, spec, 1e-20)
    assert refined.sign == exact.sign
    assert abs(refined.logmag - exact.logmag) < 1e-12 * abs(exact.logmag)


# -- weight transfer -----------------------------------------------------------------------


def test_transfer_unit_unchanged():
    lat = unit(3)
    assert transfer_weights_to_edges(lat).same_weights(lat)


def test_transfer_identities(mixed_model):
    lat = assign_weights(mixed_model, 3)
    moved = transfer_weights_to_edges(lat)
    w = lat.loop_weights
    for k, S in ((1, [(1, 1)]), (2, [(1, 1), (1, 2)])):
        d = nonintersecting_Z(lat, k).logmag - nonintersecting_Z(moved, k).logmag
        assert abs(d - sum(math.log(w[y - 1, x - 1]) for x, y in S)) < 1e-10
    assert np.all(moved.loop_weights == 1.0)


# -- exhaustive oracles --------------------------------------------------------------------


def test_oracles_refuse_large_sizes(iid_model):
    lat = assign_weights(iid_model, 7)
    with pytest.raises(RefusedError):
        brute_force_Z(lat, (1, 1), (7, 7))
    with pytest.raises(RefusedError):
        max_ZST(lat, 1)


def test_max_zst_unit_k1_is_corner():
    for n in range(2, 5):
        val, spec = max_ZST(unit(n), 1)
        assert spec == EndpointSpec(((1, 1),), ((n, n),))
        assert val.to_float() == pytest.approx(comb(2 * n - 2, n - 1))


@pytest.mark.parametrize("n,k", [(2, 1), (3, 1), (3, 2), (4, 2)])
def test_sandwich(mixed_model, signed_model, n, k):
    for model in (mixed_model, signed_model):
        for r in range(3):
            lower, upper = sandwich_slacks(assign_weights(model, n, r), k)
            assert lower >= -1e-9 and upper >= -1e-9
