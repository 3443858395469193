import math

import numpy as np
import pytest
from scipy import integrate

from modeforest import InputError
from modeforest.synthetic import (
    CATALOG,
    MixtureDensity,
    catalog_entry,
    density_at,
    sample,
    saddle_level_1d,
    true_modes,
)


def test_density_values():
    assert density_at(MixtureDensity([1.0], [0.0], [1.0]), [0.0])[0] == pytest.approx(0.3989423, abs=1e-7)
    m = MixtureDensity([0.5, 0.5], [-10.0, 10.0], [1.0, 1.0])
    phi10 = math.exp(-50) / math.sqrt(2 * math.pi)
    assert density_at(m, [0.0])[0] == pytest.approx(phi10, rel=1e-12)
    assert phi10 == pytest.approx(7.69e-23, rel=1e-3)


def test_integrates_to_one():
    m = catalog_entry("trimodal").density
    val, _ = integrate.quad(lambda t: float(m(np.array([t]))[0]), -20, 30, limit=200)
    assert val == pytest.approx(1.0, abs=1e-6)


def test_dimension_mismatch():
    m = MixtureDensity([1.0], [[0.0, 0.0]], [[1.0, 1.0]])
    with pytest.raises(InputError):
        m(np.zeros((3, 3)))


def test_weights_must_sum_to_one():
    with pytest.raises(InputError):
        MixtureDensity([0.5, 0.6], [0.0, 1.0], [1.0, 1.0])


def test_sampling_moments_and_determinism():
    m = MixtureDensity([1.0], [0.0], [1.0])
    x = sample(m, 10000, 3)
    assert abs(x.mean()) < 0.05 and 0.95 < x.std() < 1.05
    assert np.array_equal(sample(m, 500, 9), sample(m, 500, 9))


def test_zero_weight_component_never_drawn():
    m = MixtureDensity([1.0, 0.0], [0.0, 100.0], [1.0, 1.0])
    assert np.all(np.abs(sample(m, 2000, 1)) < 10)


def test_sampler_stream_is_frozen():
    # PCG64 stream: labels by choice, then standard normals
    g = np.random.default_rng(42)
    comp = g.choice(2, size=3, p=[0.5, 0.5])
    z = g.standard_normal(3)
    expected = np.where(comp == 0, 0.0, 10.0) + 0.5 * z
    np.testing.assert_array_equal(catalog_entry("two-gaussian-10sep").sample(3, 42)[:, 0], expected)


def test_true_modes():
    np.testing.assert_allclose(true_modes(MixtureDensity([1.0], [0.0], [1.0]), ([-5], [5]), 0.01)[:, 0], [0.0],
                               atol=1e-6)
    m = MixtureDensity([0.5, 0.5], [-10.0, 10.0], [1.0, 1.0])
    np.testing.assert_allclose(true_modes(m, ([-15], [15]), 0.01)[:, 0], [-10.0, 10.0], atol=1e-6)


def test_minor_bump_modes():
    # reference values from scipy bounded scalar minimisation
    got = true_modes(catalog_entry("major-minor-bump").density, ([-2], [4]), 0.01)[:, 0]
    np.testing.assert_allclose(got, [6.213480552718027e-07, 1.499949649638494], atol=1e-6)
    assert got[1] < 1.5


def test_wide_bump_mixture_is_unimodal():
    # the sd-0.5 variant of the bump mixture has a single mode
    m = MixtureDensity([0.9, 0.1], [0.0, 1.5], [0.25, 0.25])
    assert true_modes(m, ([-3], [4]), 0.01).shape[0] == 1


def test_saddle_levels():
    m = catalog_entry("two-gaussian-10sep").density
    assert saddle_level_1d(m, 2.0, 8.0) == pytest.approx(float(m(np.array([5.0]))[0]), rel=1e-6)
    with pytest.raises(InputError):
        saddle_level_1d(MixtureDensity([1.0], [0.0], [1.0]), 1.0, 3.0)
    tri = catalog_entry("trimodal").density
    assert saddle_level_1d(tri, 0.0, 5.0) == pytest.approx(0.04421239205042322, rel=1e-9)
    mm = catalog_entry("major-minor-bump").density
    assert saddle_level_1d(mm, 0.1, 1.4) == pytest.approx(0.03124479494618744, rel=1e-9)


@pytest.mark.parametrize("name", ["standard-normal", "two-gaussian-10sep", "major-minor-bump", "trimodal"])
def test_modes_are_stationary(name):
    m = catalog_entry(name).density
    for p in true_modes(m, ([-4], [14]), 0.01)[:, 0]:
        grad = (m(np.array([p + 1e-5]))[0] - m(np.array([p - 1e-5]))[0]) / 2e-5
        assert abs(grad) < 1e-4


def test_catalog_entries_document_assumptions():
    for name, entry in CATALOG.items():
        assert entry.name == name and entry.assumptions and entry.description
        x = entry.sample(5, 0)
        assert x.shape[0] == 5
    with pytest.raises(InputError):
        catalog_entry("nope")
