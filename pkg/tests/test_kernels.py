import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from modeforest import KERNELS, DensityModel, InputError, get_kernel, kde_evaluate, kde_self_evaluate, recommended_bandwidth
from modeforest.kernels import truncation_error_bound
from modeforest import verify


@pytest.mark.parametrize("name", sorted(KERNELS))
def test_profile_nonnegative_and_nonincreasing(name):
    k = get_kernel(name)
    t = np.linspace(0, 12, 20001)
    v = k.profile(t)
    assert np.all(v >= 0)
    assert np.all(np.diff(v) <= 1e-15)


@pytest.mark.parametrize("name", sorted(KERNELS))
def test_integrates_to_one_in_one_dimension(name):
    k = get_kernel(name)
    upper = min(k.support, 60.0)
    val, _ = integrate.quad(lambda u: float(k(np.array([[u]]))[0]), -upper, upper, limit=200, points=[0.0])
    assert val == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("name", sorted(KERNELS))
def test_integrates_to_one_in_two_dimensions(name):
    k = get_kernel(name)
    upper = min(k.support, 40.0)
    # radial integral: 2 pi * int r K(r) dr
    val, _ = integrate.quad(lambda r: 2 * math.pi * r * float(k.radial(np.array([r]), 2)[0]), 0, upper, limit=200)
    assert val == pytest.approx(1.0, abs=1e-6)


def test_closed_form_normalizers():
    assert get_kernel("gaussian").normalizer(1) == pytest.approx((2 * math.pi) ** -0.5, rel=1e-15)
    assert get_kernel("uniform").normalizer(1) == pytest.approx(0.5, rel=1e-15)
    assert get_kernel("epanechnikov").normalizer(1) == pytest.approx(0.75, rel=1e-15)
    assert get_kernel("epanechnikov").normalizer(2) == pytest.approx(2 / math.pi, rel=1e-15)


def test_single_sample_gaussian_at_itself():
    model = DensityModel("gaussian", 1.0, 1)
    assert kde_evaluate(model, [0.0], [0.0])[0] == pytest.approx(0.3989423, abs=1e-7)


def test_uniform_kernel_includes_boundary():
    model = DensityModel("uniform", 1.0, 1)
    assert kde_evaluate(model, [-1.0, 1.0], [0.0])[0] == pytest.approx(0.5, abs=1e-15)


def test_epanechnikov_2d_matches_naive(rng):
    x = rng.uniform(0, 1, size=(50, 2))
    q = rng.uniform(0, 1, size=(10, 2))
    model = DensityModel("epanechnikov", 0.3, 2)
    np.testing.assert_allclose(kde_evaluate(model, x, q), verify.naive_kde(model, x, q), rtol=0, atol=1e-12)


def test_gaussian_values_frozen():
    # expected values from a direct math.exp sum
    model = DensityModel("gaussian", 0.7, 1)
    got = kde_evaluate(model, [0.0, 0.5, 2.0], [0.0, 1.0])
    np.testing.assert_allclose(got, [0.3403770431884427, 0.2841481601508586], rtol=1e-14)


def test_self_evaluate_own_term_bound():
    model = DensityModel("gaussian", 0.5, 1)
    v = kde_self_evaluate(model, [0.0, 10.0, 20.0])
    assert np.all(v >= (2 * math.pi) ** -0.5 / (3 * 0.5))


def test_self_evaluate_identical_to_evaluate(rng):
    x = rng.normal(size=(300, 2))
    model = DensityModel("tricube", 0.6, 2)
    assert np.array_equal(kde_self_evaluate(model, x), kde_evaluate(model, x, x))


def test_bandwidth_sanity_against_true_density():
    x = np.random.default_rng(5).standard_normal(200)
    grid = np.linspace(-2, 2, 201)
    truth = np.exp(-grid**2 / 2) / math.sqrt(2 * math.pi)
    small = np.mean(np.abs(kde_evaluate(DensityModel("gaussian", 0.4, 1), x, grid) - truth))
    large = np.mean(np.abs(kde_evaluate(DensityModel("gaussian", 5.0, 1), x, grid) - truth))
    assert small < large


def test_recommended_bandwidth():
    assert recommended_bandwidth(1024, 1, 1.0) == pytest.approx(0.25, rel=1e-15)
    assert recommended_bandwidth(1, 3, 1.0) == 1.0
    assert recommended_bandwidth(10**6, 2, 2.0) == pytest.approx(0.2, rel=1e-12)


def test_errors():
    with pytest.raises(InputError):
        DensityModel("gaussian", 0.0, 1)
    with pytest.raises(InputError):
        DensityModel("gaussian", -1.0, 1)
    with pytest.raises(InputError):
        DensityModel("no-such-kernel", 1.0, 1)
    model = DensityModel("gaussian", 1.0, 2)
    with pytest.raises(InputError):
        kde_evaluate(model, np.zeros((3, 2)), np.zeros((2, 3)))
    with pytest.raises(InputError):
        kde_evaluate(model, np.zeros((0, 2)), np.zeros((2, 2)))
    with pytest.raises(InputError):
        verify.naive_kde(model, np.zeros((0, 2)), np.zeros((2, 2)))


@pytest.mark.parametrize("name", sorted(KERNELS))
def test_normalization_of_estimate(name):
    x = np.random.default_rng(1).normal(size=40)
    h = 0.4
    model = DensityModel(name, h, 1)
    grid = np.linspace(x.min() - 10 * h, x.max() + 10 * h, 40001)
    v = kde_evaluate(model, x, grid)
    assert np.trapezoid(v, grid) == pytest.approx(1.0, abs=1e-3)


def test_truncated_evaluation_within_bound(rng):
    x = rng.normal(size=(400, 1))
    q = rng.normal(size=(30, 1))
    model = DensityModel("gaussian", 0.3, 1)
    exact = kde_evaluate(model, x, q)
    approx = kde_evaluate(model, x, q, truncate=3.0)
    assert np.all(np.abs(exact - approx) <= truncation_error_bound(model, 400, 3.0) + 1e-15)


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(1, 25),
    m=st.integers(1, 10),
    d=st.integers(1, 3),
    name=st.sampled_from(sorted(KERNELS)),
    h=st.floats(0.05, 3.0),
    seed=st.integers(0, 2**31),
)
def test_matches_naive_and_nonnegative(n, m, d, name, h, seed):
    g = np.random.default_rng(seed)
    x = g.normal(size=(n, d))
    q = g.normal(size=(m, d))
    model = DensityModel(name, h, d)
    fast = kde_evaluate(model, x, q)
    assert np.all(fast >= 0)
    np.testing.assert_allclose(fast, verify.naive_kde(model, x, q), rtol=0, atol=1e-12)


def test_thread_count_does_not_change_result(monkeypatch, rng):
    x = rng.normal(size=(3000, 2))
    model = DensityModel("gaussian", 0.3, 2)
    monkeypatch.setenv("MODEFOREST_THREADS", "1")
    a = kde_self_evaluate(model, x)
    monkeypatch.setenv("MODEFOREST_THREADS", "4")
    b = kde_self_evaluate(model, x)
    assert np.array_equal(a, b)
