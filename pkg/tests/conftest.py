"""Shared fixtures: the standard test metrics at desk resolution.

Unit tests run at N=16 where the non-Kahler perturbation uses eps=0.1;
the rougher eps=0.15 variant needs N=32 to clear its spectral tail and
appears only in the acceptance module.  Expensive solves are session
scoped so the pipeline runs once per interpreter.
"""
import numpy as np
import pytest

from chern_extremal import (
    GridSpec,
    HermitianMetricField,
    ScalarField,
    extremal_factor,
    flat,
    gauduchon_factor,
    random_band_limited,
)


def full(spec, broadcastable):
    # spec.coordinate and friends return broadcastable axes
    return broadcastable + np.zeros(spec.shape)


def make_phi(spec, amplitude=0.1):
    """The analytic conformal factor phi = amplitude * cos(2 pi x1)."""
    return ScalarField(spec, full(spec, amplitude * np.cos(2 * np.pi * spec.x(1))))


def make_nonkahler(spec, eps):
    """Hermitian metric that is nowhere Kahler: entries mix x and y axes."""
    tp = 2 * np.pi
    x1, y1 = spec.x(1), spec.y(1)
    x2, y2 = spec.x(2), spec.y(2)
    g = np.zeros(spec.shape + (2, 2), dtype=complex)
    g[..., 0, 0] = 1.0 + eps * np.cos(tp * x1) * np.cos(tp * y2)
    g[..., 1, 1] = 1.0 + eps * np.sin(tp * y1) * np.sin(tp * x2)
    off = eps * 0.5 * (np.cos(tp * (x1 + x2)) + 1j * np.sin(tp * y1))
    g[..., 0, 1] = g[..., 0, 1] + off
    g[..., 1, 0] = g[..., 1, 0] + np.conj(off)
    return HermitianMetricField(spec, g)


def make_random_metric(spec, seed, diag_amp=0.15, off_amp=0.05):
    """Random valid Hermitian metric; margins keep it safely positive."""
    assert spec.n == 2
    mode = max(2, spec.N // 8)
    r = [random_band_limited(spec, seed * 7 + k, mode, 1.0).values
         for k in range(4)]
    g = np.zeros(spec.shape + (2, 2), dtype=complex)
    g[..., 0, 0] = 1.0 + diag_amp * r[0]
    g[..., 1, 1] = 1.0 + diag_amp * r[1]
    off = off_amp * (r[2] + 1j * r[3])
    g[..., 0, 1] = off
    g[..., 1, 0] = np.conj(off)
    return HermitianMetricField(spec, g)


@pytest.fixture(scope="session")
def spec8():
    return GridSpec(2, 8)


@pytest.fixture(scope="session")
def spec16():
    return GridSpec(2, 16)


@pytest.fixture(scope="session")
def flat16(spec16):
    return flat(spec16)


@pytest.fixture(scope="session")
def phi16(spec16):
    return make_phi(spec16)


@pytest.fixture(scope="session")
def confflat16(flat16, phi16):
    return flat16.conformal_scale(phi16)


@pytest.fixture(scope="session")
def nonkahler16(spec16):
    return make_nonkahler(spec16, 0.1)


@pytest.fixture(scope="session")
def gaud_nk16(nonkahler16):
    return gauduchon_factor(nonkahler16)


@pytest.fixture(scope="session")
def ext_nk16(nonkahler16):
    return extremal_factor(nonkahler16)


@pytest.fixture(scope="session")
def ext_conf16(confflat16):
    return extremal_factor(confflat16)
