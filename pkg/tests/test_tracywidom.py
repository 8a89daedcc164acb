import numpy as np
import pytest

from polymerlab.tracywidom import (
    GRID,
    PUBLISHED_MOMENTS,
    TWReference,
    fredholm_cdf,
    fredholm_pdf,
    load_reference,
    painleve_cdf,
    tw_gue_cdf,
    tw_gue_ppf,
)

# median of F_GUE from the Fredholm oracle (F(x) = 0.5 to 1e-12)
GUE_MEDIAN = -1.8049124089


@pytest.fixture(scope="module")
def ref():
    return load_reference()


def test_table_grid_and_tails(ref):
    assert ref.x[0] == GRID[0] and ref.x[-1] == GRID[1]
    assert np.allclose(np.diff(ref.x), GRID[2])
    assert np.all(np.diff(ref.cdf) > 0)
    assert ref.cdf[0] < 1e-5 and ref.cdf[-1] > 1 - 1e-5
    assert tw_gue_cdf(-6.0) + (1 - tw_gue_cdf(4.0)) < 1e-4


def test_clamped_outside_grid(ref):
    assert tw_gue_cdf(-50.0) == pytest.approx(ref.cdf[0])
    assert tw_gue_cdf(50.0) == pytest.approx(ref.cdf[-1])
    assert np.all((tw_gue_cdf(np.linspace(-10, 10, 101)) >= 0) & (tw_gue_cdf(np.linspace(-10, 10, 101)) <= 1))


def test_interpolant_monotone_between_nodes():
    x = np.linspace(-6, 4, 4001)
    assert np.all(np.diff(tw_gue_cdf(x)) >= 0)


def test_two_oracles_agree():
    s = np.array([-4.5, -3.0, -2.0, -1.0, 0.0, 1.5])
    assert np.allclose(fredholm_cdf(s), painleve_cdf(s), atol=1e-10)


@pytest.mark.parametrize("s", [-5.0, -3.37, -2.0, -1.23, 0.0, 0.77, 2.5])
def test_table_matches_painleve_oracle(s):
    assert tw_gue_cdf(s) == pytest.approx(float(painleve_cdf(np.array([s]))), abs=1e-7)


def test_median(ref):
    assert float(fredholm_cdf(np.array([GUE_MEDIAN]))) == pytest.approx(0.5, abs=1e-10)
    assert tw_gue_ppf(0.5) == pytest.approx(GUE_MEDIAN, abs=1e-5)


def test_moments_match_published_values(ref):
    m = ref.moments()
    assert m["mean"] == pytest.approx(PUBLISHED_MOMENTS["mean"], abs=1e-6)
    assert m["variance"] == pytest.approx(PUBLISHED_MOMENTS["variance"], abs=1e-5)
    assert m["skewness"] == pytest.approx(PUBLISHED_MOMENTS["skewness"], abs=1e-4)
    assert m["excess_kurtosis"] == pytest.approx(PUBLISHED_MOMENTS["excess_kurtosis"], abs=1e-3)


def test_density_is_derivative(ref):
    s = np.array([-3.0, -1.8, 0.0])
    h = 1e-4
    fd = (fredholm_cdf(s + h) - fredholm_cdf(s - h)) / (2 * h)
    assert np.allclose(fredholm_pdf(s), fd, rtol=1e-5)
    idx = [int(round((v - GRID[0]) / GRID[2])) for v in s]
    assert np.allclose(ref.pdf[idx], fd, rtol=1e-5)


def test_ppf_inverts_cdf():
    q = np.array([0.01, 0.25, 0.5, 0.75, 0.99])
    assert np.allclose(tw_gue_cdf(tw_gue_ppf(q)), q, atol=1e-4)


def test_reference_validation():
    with pytest.raises(ValueError):
        TWReference(np.array([0.0, 1.0]), np.array([0.6, 0.5]), np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        TWReference(np.array([1.0, 0.0]), np.array([0.1, 0.5]), np.array([1.0, 1.0]))


def test_data_override(tmp_path, monkeypatch, ref):
    path = tmp_path / "tw_gue.csv"
    rows = ["x,cdf,pdf"] + [f"{x:.2f},{c:.17g},{p:.17g}" for x, c, p in zip(ref.x, ref.cdf, ref.pdf)]
    path.write_text("\n".join(rows) + "\n")
    monkeypatch.setenv("POLYMERLAB_DATA", str(tmp_path))
    other = load_reference()
    assert np.array_equal(other.cdf, ref.cdf)
