"""Hermitian metric fields on the torus and their curvature.

A metric is stored as the matrix field g_{i jbar}(x) of shape
grid.shape + (n, n), Hermitian and positive definite at every point.  The
associated volume density against plain grid quadrature is 2^n det g, so
the flat metric (identity matrix) has density 2^n and total volume 2^n.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _spectral
from .errors import LostPositivity
from .grid import GridSpec, ScalarField, ensure_real

_HERM_TOL = 1e-12


class HermitianMetricField:
    """Pointwise Hermitian positive definite matrix field.

    The inverse and log-determinant are computed once on demand and cached;
    conformal_scale produces rescaled metrics without refactorizing.
    """

    def __init__(self, spec: GridSpec, values, *, _trusted=None):
        self.spec = spec
        if _trusted is not None:
            # internal fast path: values already validated, derived data known
            self.values = values
            self._inverse, self._log_det = _trusted
            return
        values = np.asarray(values, dtype=np.complex128)
        if values.shape != spec.shape + (spec.n, spec.n):
            raise ValueError(
                f"metric shape {values.shape} does not match {spec.shape + (spec.n, spec.n)}")
        if not np.all(np.isfinite(values)):
            raise ValueError("metric contains non-finite entries")
        herm = np.conj(np.swapaxes(values, -1, -2))
        scale = float(np.abs(values).max())
        if float(np.abs(values - herm).max()) > _HERM_TOL * max(1.0, scale):
            raise ValueError("metric is not Hermitian")
        self.values = 0.5 * (values + herm)
        self._inverse = None
        self._log_det = None
        self._factorize()

    def _factorize(self):
        try:
            L = np.linalg.cholesky(self.values)
        except np.linalg.LinAlgError:
            lam = np.linalg.eigvalsh(self.values)[..., 0]
            at = np.unravel_index(int(np.argmin(lam)), self.spec.shape)
            raise LostPositivity(
                f"metric not positive definite: min eigenvalue {lam.min():.6e} "
                f"at grid index {at}") from None
        diag = np.real(L[..., np.arange(self.spec.n), np.arange(self.spec.n)])
        self._log_det = 2.0 * np.sum(np.log(diag), axis=-1)

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def log_det(self) -> np.ndarray:
        return self._log_det

    @property
    def inverse(self) -> np.ndarray:
        """Pointwise inverse matrix field, cached."""
        if self._inverse is None:
            if self.n == 2:
                g = self.values
                a = np.real(g[..., 0, 0])
                d = np.real(g[..., 1, 1])
                b = g[..., 0, 1]
                det = a * d - np.abs(b) ** 2
                B = np.empty_like(g)
                B[..., 0, 0] = d / det
                B[..., 1, 1] = a / det
                B[..., 0, 1] = -b / det
                B[..., 1, 0] = np.conj(B[..., 0, 1])
                self._inverse = B
            else:
                self._inverse = np.linalg.inv(self.values)
        return self._inverse

    def volume_density(self) -> ScalarField:
        """Density 2^n det g of the volume form against grid quadrature."""
        return ScalarField(self.spec, 2.0**self.n * np.exp(self._log_det))

    def volume(self) -> float:
        from .grid import integrate
        return integrate(self.volume_density())

    def conformal_scale(self, f) -> "HermitianMetricField":
        """Metric e^f g with inverse and log-determinant updated algebraically.

        No refactorization happens, so repeated rescaling (line searches,
        finite differences) costs one exponential per call.
        """
        fv = f.values if isinstance(f, ScalarField) else np.asarray(f, dtype=float)
        ef = np.exp(fv)
        vals = self.values * ef[..., None, None]
        inv = self.inverse * (1.0 / ef)[..., None, None]
        ld = self._log_det + self.n * fv
        return HermitianMetricField(self.spec, vals, _trusted=(inv, ld))


@dataclass
class ConformalMetric:
    """A metric given as e^factor * base, kept in factored form."""

    base: HermitianMetricField
    factor: ScalarField

    def realize(self) -> HermitianMetricField:
        return self.base.conformal_scale(self.factor)


def flat(spec: GridSpec) -> HermitianMetricField:
    vals = np.zeros(spec.shape + (spec.n, spec.n), dtype=np.complex128)
    vals[..., np.arange(spec.n), np.arange(spec.n)] = 1.0
    return HermitianMetricField(spec, vals)


def chern_scalar(metric: HermitianMetricField) -> ScalarField:
    """Chern scalar curvature s = -trace(g^{-1} dz dzbar log det g)."""
    spec = metric.spec
    raw = _spectral.box_raw(metric.inverse, metric.log_det, spec.n, spec.N)
    return ScalarField(spec, -ensure_real(raw, "chern_scalar"))


def volume_density(metric: HermitianMetricField) -> ScalarField:
    """Density 2^n det g of the volume form against grid quadrature."""
    return metric.volume_density()


def conformal_scalar(s_g: ScalarField, f: ScalarField,
                     metric: HermitianMetricField) -> ScalarField:
    """Chern scalar of e^f g from the scalar and operator of g alone.

    Uses the conformal transformation rule
        s(e^f g) = e^{-f} (s_g - n box_g f),
    which the discretization satisfies exactly because both routes apply
    the identical spectral derivative to log det + n f.
    """
    spec = metric.spec
    boxf = ensure_real(_spectral.box_raw(metric.inverse, f.values, spec.n, spec.N),
                       "conformal_scalar")
    return ScalarField(spec, np.exp(-f.values) * (s_g.values - spec.n * boxf))


def chern_curvature_oracle(metric: HermitianMetricField) -> ScalarField:
    """Chern scalar from the full curvature tensor, term by term.

    Builds Theta[i,jbar,k,lbar] = -dz_i dzbar_j g_{k lbar}
    + g^{qbar p} (dz_i g_{k qbar})(dzbar_j g_{p lbar}) and double-traces
    with the inverse metric.  Quadratically more FFTs than chern_scalar;
    exists to cross-check that route against an independent formula.
    """
    spec = metric.spec
    n, N = spec.n, spec.N
    g = metric.values
    B = metric.inverse

    fftn, ifftn = _spectral.fftn, _spectral.ifftn
    gh = np.empty_like(g)
    for k in range(n):
        for l in range(n):
            gh[..., k, l] = fftn(g[..., k, l])

    dzg = np.empty(spec.shape + (n, n, n), dtype=complex)     # dz_i g_{k qbar}
    dzbg = np.empty(spec.shape + (n, n, n), dtype=complex)    # dzbar_j g_{p lbar}
    for i in range(n):
        hm = _spectral.holo_multiplier(n, N, i)
        am = _spectral.antiholo_multiplier(n, N, i)
        for k in range(n):
            for l in range(n):
                dzg[..., i, k, l] = ifftn(hm * gh[..., k, l])
                dzbg[..., i, k, l] = ifftn(am * gh[..., k, l])

    acc = np.zeros(spec.shape, dtype=complex)
    for i in range(n):
        for j in range(n):
            Bji = B[..., j, i]
            for k in range(n):
                for l in range(n):
                    theta = -ifftn(_spectral.second_multiplier(n, N, i, j) * gh[..., k, l])
                    for p in range(n):
                        for q in range(n):
                            theta = theta + B[..., q, p] * dzg[..., i, k, q] * dzbg[..., j, p, l]
                    acc = acc + Bji * B[..., l, k] * theta
    return ScalarField(spec, ensure_real(acc, "chern_curvature_oracle", tol=1e-8))
