"""Grid primitives: spectral derivatives, quadrature, random fields."""
import numpy as np
import pytest

from chern_extremal import (
    AliasedMode,
    ComplexField,
    ConventionError,
    GridSpec,
    ScalarField,
    ensure_real,
    inner,
    integrate,
    norm,
    partial_z,
    partial_zbar,
    random_band_limited,
)
from conftest import full


def test_gridspec_validation():
    with pytest.raises(ValueError):
        GridSpec(1, 8)
    with pytest.raises(ValueError):
        GridSpec(2, 12)
    with pytest.raises(ValueError):
        GridSpec(2, 2)


def test_gridspec_layout(spec16):
    assert spec16.naxes == 4
    assert spec16.shape == (16, 16, 16, 16)
    assert spec16.npts == 16**4
    # x_j lives on axis 2(j-1), y_j on axis 2j-1
    x1 = spec16.x(1)
    assert x1.shape == (16, 1, 1, 1)
    np.testing.assert_allclose(x1.ravel(), np.arange(16) / 16.0)
    assert spec16.y(1).shape == (1, 16, 1, 1)
    assert spec16.x(2).shape == (1, 1, 16, 1)
    assert spec16.y(2).shape == (1, 1, 1, 16)


def test_field_validation(spec16):
    with pytest.raises(ValueError):
        ScalarField(spec16, np.zeros((16, 16)))
    bad = np.zeros(spec16.shape)
    bad[0, 0, 0, 0] = np.nan
    with pytest.raises(ValueError):
        ScalarField(spec16, bad)


def test_partial_z_plane_wave(spec16):
    # d_z = (d_x - i d_y)/2, so sin(2 pi x1) -> pi cos(2 pi x1)
    tp = 2 * np.pi
    u = ScalarField(spec16, full(spec16, np.sin(tp * spec16.x(1))))
    expect = full(spec16, np.pi * np.cos(tp * spec16.x(1)))
    got = partial_z(u, 1)
    assert isinstance(got, ComplexField)
    assert np.max(np.abs(got.values - expect)) < 1e-12

    v = ScalarField(spec16, full(spec16, np.sin(tp * spec16.y(1))))
    expect_v = full(spec16, -1j * np.pi * np.cos(tp * spec16.y(1)))
    assert np.max(np.abs(partial_z(v, 1).values - expect_v)) < 1e-12


def test_partial_conjugation(spec16):
    for seed in range(4):
        u = random_band_limited(spec16, seed, 5, 1.0)
        for j in (1, 2):
            a = partial_zbar(u, j).values
            b = np.conj(partial_z(u, j).values)
            assert np.max(np.abs(a - b)) < 1e-12


def test_partials_commute(spec16):
    for seed in range(4):
        u = random_band_limited(spec16, 10 + seed, 5, 1.0)
        # d_z1 d_zbar2 u vs d_zbar2 d_z1 u
        lhs = partial_z(ComplexField(spec16, partial_zbar(u, 2).values), 1).values
        rhs = partial_zbar(ComplexField(spec16, partial_z(u, 1).values), 2).values
        assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_nyquist_mode_annihilated(spec16):
    N = spec16.N
    u = ScalarField(spec16, full(spec16, np.cos(2 * np.pi * (N // 2) * spec16.x(1))))
    assert np.max(np.abs(partial_z(u, 1).values)) < 1e-10


def test_axis_bounds(spec16):
    u = ScalarField(spec16, np.zeros(spec16.shape))
    with pytest.raises(ValueError):
        partial_z(u, 0)
    with pytest.raises(ValueError):
        partial_zbar(u, 3)


def test_integrate_quadrature(spec16):
    tp = 2 * np.pi
    u = ScalarField(spec16, full(spec16, np.cos(tp * spec16.x(1))**2))
    assert abs(integrate(u) - 0.5) < 1e-14
    w = ScalarField(spec16, 4.0 * np.ones(spec16.shape))
    assert abs(integrate(u, w) - 2.0) < 1e-13
    one = ScalarField(spec16, np.ones(spec16.shape))
    assert abs(integrate(one, w) - 4.0) < 1e-13


def test_inner_norm_consistency(spec16):
    u = random_band_limited(spec16, 3, 4, 0.7)
    w = ScalarField(spec16, np.full(spec16.shape, 4.0))
    n2 = norm(u, w)**2
    assert abs(n2 - inner(u, u, w)) < 1e-12 * max(1.0, n2)


def test_ensure_real(spec16):
    vals = np.ones(spec16.shape) + 1e-14j
    out = ensure_real(vals, "test")
    assert out.dtype == np.float64
    with pytest.raises(ConventionError):
        ensure_real(np.ones(spec16.shape) + 1e-3j, "test")


def test_random_band_limited_properties(spec16):
    u = random_band_limited(spec16, 42, 3, 0.25)
    v = random_band_limited(spec16, 42, 3, 0.25)
    assert np.array_equal(u.values, v.values)
    assert not np.array_equal(
        u.values, random_band_limited(spec16, 43, 3, 0.25).values)
    assert abs(np.abs(u.values).max() - 0.25) < 1e-13
    assert abs(integrate(u)) < 1e-14

    # Fourier support confined to the requested cube
    coeffs = np.fft.fftn(u.values) / spec16.npts
    k = np.fft.fftfreq(spec16.N, d=1.0 / spec16.N)
    outside = np.zeros(spec16.shape, dtype=bool)
    for ax in range(spec16.naxes):
        shape = [1] * spec16.naxes
        shape[ax] = spec16.N
        outside |= np.abs(k.reshape(shape)) > 3
    assert np.max(np.abs(coeffs[outside])) < 1e-13


def test_random_band_limited_bounds(spec16):
    with pytest.raises(AliasedMode):
        random_band_limited(spec16, 0, 8, 0.1)
    with pytest.raises(ValueError):
        random_band_limited(spec16, 0, 0, 0.1)
