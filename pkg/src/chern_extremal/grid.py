"""Periodic grids on the square torus and spectral calculus on them.

Conventions (single source of truth, referenced by every other module):

* The torus has n complex dimensions and real coordinates
  (x_1, y_1, ..., x_n, y_n), each running over [0, 1).  Arrays are
  row-major with shape (N,)*2n; axis 2(j-1) is x_j and axis 2(j-1)+1
  is y_j for the complex coordinate z_j = x_j + i y_j.

* Wirtinger derivatives carry the factor 1/2:
      d/dz_j    = (d/dx_j - i d/dy_j) / 2
      d/dzbar_j = (d/dx_j + i d/dy_j) / 2
  Derivatives are spectral.  The Nyquist wavenumber is zeroed so real
  fields stay real; all operators share the same wavenumber table, which
  is what makes their discrete adjoint relations exact.

* Quadrature is the plain grid mean: integrate(u, w) = sum(u*w) / N^{2n}.
  It is exact for band-limited integrands and spectrally accurate for
  analytic ones.  The weighted inner product is <u, v> = integrate(u*v, w).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from . import _spectral
from .errors import AliasedMode, ConventionError


@dataclass(frozen=True)
class GridSpec:
    """Discretization of the torus: n complex dimensions, N points per real axis."""

    n: int
    N: int

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n!r}")
        if not isinstance(self.N, int) or self.N < 4 or (self.N & (self.N - 1)) != 0:
            raise ValueError(f"N must be a power of two >= 4, got {self.N!r}")

    @property
    def naxes(self) -> int:
        return 2 * self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.naxes

    @property
    def npts(self) -> int:
        return self.N**self.naxes

    def coordinate(self, axis: int) -> np.ndarray:
        """Broadcastable coordinate array for a real axis (0-based)."""
        x = np.arange(self.N) / self.N
        shape = [1] * self.naxes
        shape[axis] = self.N
        return x.reshape(shape)

    def x(self, j: int) -> np.ndarray:
        """x_j coordinate, j counted from 1."""
        return self.coordinate(2 * (j - 1))

    def y(self, j: int) -> np.ndarray:
        return self.coordinate(2 * (j - 1) + 1)


def _check_values(spec: GridSpec, values: np.ndarray, dtype) -> np.ndarray:
    values = np.asarray(values, dtype=dtype)
    if values.shape != spec.shape:
        raise ValueError(f"field shape {values.shape} does not match grid {spec.shape}")
    if not np.all(np.isfinite(values)):
        raise ValueError("field contains non-finite values")
    return values


@dataclass
class ScalarField:
    """Real scalar field sampled on the grid."""

    spec: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = _check_values(self.spec, self.values, np.float64)

    @classmethod
    def constant(cls, spec: GridSpec, c: float = 0.0) -> "ScalarField":
        return cls(spec, np.full(spec.shape, float(c)))


@dataclass
class ComplexField:
    """Complex scalar field sampled on the grid."""

    spec: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = _check_values(self.spec, self.values, np.complex128)


def _field_values(u) -> np.ndarray:
    if isinstance(u, (ScalarField, ComplexField)):
        return u.values
    return np.asarray(u)


def partial_z(u, j: int) -> ComplexField:
    """Holomorphic Wirtinger derivative along z_j (j counted from 1).

    Accepts ScalarField or ComplexField and returns a ComplexField.
    """
    spec = u.spec
    if not 1 <= j <= spec.n:
        raise ValueError(f"axis index {j} outside 1..{spec.n}")
    vals = _apply_first(spec, _field_values(u), j, holo=True)
    return ComplexField(spec, vals)


def partial_zbar(u, j: int) -> ComplexField:
    """Antiholomorphic Wirtinger derivative along zbar_j."""
    spec = u.spec
    if not 1 <= j <= spec.n:
        raise ValueError(f"axis index {j} outside 1..{spec.n}")
    vals = _apply_first(spec, _field_values(u), j, holo=False)
    return ComplexField(spec, vals)


def _apply_first(spec: GridSpec, vals: np.ndarray, j: int, holo: bool) -> np.ndarray:
    # only the two axes of z_j need transforming
    ax, ay = _spectral.axis_pair(j - 1)
    uh = sfft.fftn(np.asarray(vals, dtype=complex), axes=(ax, ay), workers=_spectral.workers())
    if holo:
        m = _spectral.holo_multiplier(spec.n, spec.N, j - 1)
    else:
        m = _spectral.antiholo_multiplier(spec.n, spec.N, j - 1)
    return sfft.ifftn(m * uh, axes=(ax, ay), workers=_spectral.workers())


def ensure_real(values: np.ndarray, context: str, tol: float = 1e-10) -> np.ndarray:
    """Drop a roundoff-sized imaginary part, or fail loudly.

    Operators built from Wirtinger pairs are real-to-real only when their
    conjugate-symmetric terms are summed consistently; a large imaginary
    residue means a convention slipped somewhere upstream.
    """
    if not np.iscomplexobj(values):
        return np.asarray(values, dtype=np.float64)
    sup_im = float(np.abs(values.imag).max())
    sup_re = float(np.abs(values.real).max())
    if sup_im > tol * max(1.0, sup_re):
        raise ConventionError(
            f"{context}: imaginary residue {sup_im:.3e} exceeds {tol:.1e} * max(1, {sup_re:.3e})")
    return np.ascontiguousarray(values.real)


def integrate(u, weight=None) -> float:
    """Quadrature of u against a weight: sum(u * weight) / N^{2n}.

    With weight equal to a volume density this is the integral of u over
    the torus.  Deterministic summation order, bit-stable across runs.
    """
    uv = _field_values(u)
    if weight is None:
        total = np.sum(uv)
    else:
        total = np.sum(uv * _field_values(weight))
    if np.iscomplexobj(total):
        if abs(total.imag) > 1e-10 * max(1.0, abs(total.real)):
            raise ConventionError("integrand has a non-negligible imaginary part")
        total = total.real
    spec = u.spec if isinstance(u, (ScalarField, ComplexField)) else None
    npts = spec.npts if spec is not None else uv.size
    return float(total) / npts


def inner(u, v, weight) -> float:
    """Weighted L2 inner product of two real fields."""
    return float(np.sum(_field_values(u) * _field_values(v) * _field_values(weight))) / _field_values(u).size


def norm(u, weight) -> float:
    return float(np.sqrt(max(inner(u, u, weight), 0.0)))


def random_band_limited(spec: GridSpec, seed: int, max_mode: int, amplitude: float) -> ScalarField:
    """Deterministic real band-limited field with zero mean.

    Fourier support is the cube |k_a| <= max_mode on all 2n axes with the
    zero mode removed; the result is rescaled so its sup-norm equals
    amplitude exactly (an amplitude of 0 gives the zero field).
    """
    if max_mode < 1:
        raise ValueError("max_mode must be >= 1")
    if max_mode >= spec.N // 2:
        raise AliasedMode(f"max_mode {max_mode} reaches Nyquist for N={spec.N}")
    rng = np.random.default_rng(seed)
    coeffs = np.zeros(spec.shape, dtype=complex)
    idx = np.arange(-max_mode, max_mode + 1) % spec.N
    cube = rng.standard_normal((2 * max_mode + 1,) * spec.naxes) \
        + 1j * rng.standard_normal((2 * max_mode + 1,) * spec.naxes)
    coeffs[np.ix_(*([idx] * spec.naxes))] = cube

    # enforce the real-field symmetry c(-k) = conj(c(k))
    refl = np.conj(coeffs)
    for ax in range(spec.naxes):
        refl = np.roll(np.flip(refl, axis=ax), 1, axis=ax)
    coeffs = 0.5 * (coeffs + refl)
    coeffs[(0,) * spec.naxes] = 0.0

    u = _spectral.ifftn(coeffs).real * spec.npts
    peak = np.abs(u).max()
    if peak > 0.0 and amplitude != 0.0:
        u = u * (amplitude / peak)
    else:
        u = np.zeros(spec.shape)
    return ScalarField(spec, u)
