"""Metric container, curvature, and the conformal transformation rule."""
import numpy as np
import pytest

from chern_extremal import (
    ConformalMetric,
    HermitianMetricField,
    LostPositivity,
    ScalarField,
    chern_curvature_oracle,
    chern_scalar,
    conformal_scalar,
    flat,
    integrate,
    random_band_limited,
    volume_density,
)
from conftest import make_nonkahler


def test_flat_basics(spec16, flat16):
    w = flat16.volume_density()
    assert np.max(np.abs(w.values - 4.0)) == 0.0
    assert abs(flat16.volume() - 4.0) < 1e-13
    assert np.max(np.abs(flat16.log_det)) == 0.0
    assert np.max(np.abs(chern_scalar(flat16).values)) == 0.0
    ident = np.eye(2)
    assert np.max(np.abs(flat16.inverse - ident)) == 0.0


def test_metric_validation(spec16):
    with pytest.raises(ValueError):
        HermitianMetricField(spec16, np.zeros(spec16.shape + (2, 3), dtype=complex))

    vals = np.zeros(spec16.shape + (2, 2), dtype=complex)
    vals[..., 0, 0] = 1.0
    vals[..., 1, 1] = 1.0
    vals[..., 0, 1] = 0.2j
    vals[..., 1, 0] = 0.2j  # should be -0.2j
    with pytest.raises(ValueError):
        HermitianMetricField(spec16, vals)

    bad = np.zeros(spec16.shape + (2, 2), dtype=complex)
    bad[..., 0, 0] = np.nan
    with pytest.raises(ValueError):
        HermitianMetricField(spec16, bad)


def test_lost_positivity(spec16):
    vals = np.zeros(spec16.shape + (2, 2), dtype=complex)
    vals[..., 0, 0] = 1.0
    vals[..., 1, 1] = 1.0
    vals[..., 0, 1] = 1.5
    vals[..., 1, 0] = 1.5
    with pytest.raises(LostPositivity):
        HermitianMetricField(spec16, vals)


def test_inverse_and_logdet(nonkahler16):
    g = nonkahler16.values
    inv = np.linalg.inv(g)
    assert np.max(np.abs(nonkahler16.inverse - inv)) < 1e-13
    sign, logdet = np.linalg.slogdet(g)
    assert np.all(sign.real > 0)
    assert np.max(np.abs(nonkahler16.log_det - logdet)) < 1e-13


def test_conformal_scale(spec16, flat16):
    f = random_band_limited(spec16, 5, 3, 0.3)
    h = random_band_limited(spec16, 6, 3, 0.2)
    gf = flat16.conformal_scale(f)
    ef = np.exp(f.values)
    assert np.max(np.abs(gf.values[..., 0, 0] - ef)) < 1e-13
    # density picks up e^{n f}
    assert np.max(np.abs(gf.volume_density().values
                         - 4.0 * np.exp(2 * f.values))) < 1e-12
    both = gf.conformal_scale(h)
    direct = flat16.conformal_scale(ScalarField(spec16, f.values + h.values))
    assert np.max(np.abs(both.values - direct.values)) < 1e-12


def test_conformal_metric_wrapper(flat16, phi16):
    cm = ConformalMetric(flat16, phi16)
    assert np.max(np.abs(cm.realize().values
                         - flat16.conformal_scale(phi16).values)) == 0.0


def test_volume_density_helper(nonkahler16):
    a = volume_density(nonkahler16).values
    b = nonkahler16.volume_density().values
    assert np.array_equal(a, b)


def test_chern_scalar_homogeneity(nonkahler16):
    s = chern_scalar(nonkahler16).values
    spec = nonkahler16.spec
    for lam in (0.5, 2.0, 10.0):
        const = ScalarField(spec, np.full(spec.shape, np.log(lam)))
        s_lam = chern_scalar(nonkahler16.conformal_scale(const)).values
        assert np.max(np.abs(s_lam - s / lam)) < 1e-12 * np.max(np.abs(s)) / lam


def test_conformal_curvature_rule(spec16, flat16, nonkahler16):
    # s_{e^f g} computed two ways: transformation rule vs direct curvature
    for base in (flat16, nonkahler16):
        s = chern_scalar(base)
        for seed in range(3):
            f = random_band_limited(spec16, 20 + seed, 3, 0.3)
            via_rule = conformal_scalar(s, f, base).values
            direct = chern_scalar(base.conformal_scale(f)).values
            assert np.max(np.abs(via_rule - direct)) < 1e-10


def test_curvature_oracle(spec16, flat16, confflat16, nonkahler16):
    # independent route: double trace of the full Chern curvature tensor
    cases = [(flat16, 1e-13), (confflat16, 1e-10), (nonkahler16, 2e-7)]
    for g, tol in cases:
        d = np.max(np.abs(chern_scalar(g).values
                          - chern_curvature_oracle(g).values))
        assert d < tol


def test_total_curvature_not_conformally_invariant(nonkahler16):
    # int s dV vanishes only at the Gauduchon representative; on the raw
    # perturbed metric it is order eps^2 and visibly nonzero
    s = chern_scalar(nonkahler16)
    w = nonkahler16.volume_density()
    assert abs(integrate(s, w)) > 1e-3


def test_rough_metric_rejected(spec16):
    with pytest.raises(LostPositivity):
        make_nonkahler(spec16, 1.2)
