"""Metric Laplacians, their adjoints, and Krylov solvers on the torus.

The second-order operator of interest is

    box_g u = sum_ij g^{jbar i} dz_i dzbar_j u,

trace of the complex Hessian against the inverse metric, with no
lower-order terms.  Its adjoint is taken against the weighted inner
product <u, v> = integrate(u v, volume_density).  Because both operators
are compositions of pointwise multiplications and spectral derivatives,
the discrete adjoint identity holds to machine precision.

All kernel-bearing solves are posed on the subspace with Nyquist planes
removed (the derivative table zeroes Nyquist, which creates a spurious
checkerboard kernel) and gauge-fixed to weighted mean zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dfield
from typing import Callable, Optional

import numpy as np
import scipy.sparse.linalg as spla

from . import _spectral
from .errors import IncompatibleRHS, NonConvergence, NonPositiveKernel
from .geometry import HermitianMetricField
from .grid import GridSpec, ScalarField, ensure_real


def box(metric: HermitianMetricField, u: ScalarField) -> ScalarField:
    """Complex Laplacian of the metric applied to a real field."""
    spec = metric.spec
    raw = _spectral.box_raw(metric.inverse, u.values, spec.n, spec.N)
    return ScalarField(spec, ensure_real(raw, "box"))


def box_adjoint(metric: HermitianMetricField, u: ScalarField) -> ScalarField:
    """Adjoint of box against the weighted inner product of the metric."""
    spec = metric.spec
    w = metric.volume_density().values
    raw = _spectral.box_transpose_raw(metric.inverse, w * u.values, spec.n, spec.N)
    return ScalarField(spec, ensure_real(raw, "box_adjoint") / w)


def hodge_laplacian(metric: HermitianMetricField, u: ScalarField) -> ScalarField:
    """Divergence-form Laplacian, nonnegative and self-adjoint in the weighted product.

    Defined weakly by <lap u, v> = 2 Re sum_j integrate(w g^{jbar i}
    dz_i u conj(dz_j v)) / npts; the flat case reduces to -2 box.
    """
    spec = metric.spec
    w = metric.volume_density().values
    raw = _spectral.hodge_raw(metric.inverse, w, u.values, spec.n, spec.N)
    return ScalarField(spec, raw)


@dataclass
class LinearMap:
    """Matrix-free real linear operator together with its inner product.

    weight is the volume density defining ⟨u, v⟩ = integrate(u·v, weight);
    solvers judge residuals and compatibility in that product.
    precondition_scale calibrates the flat spectral preconditioner to the
    operator's leading coefficient.
    """

    spec: GridSpec
    matvec: Callable[[np.ndarray], np.ndarray]
    weight: ScalarField
    name: str = "linear-map"
    precondition_scale: float = 1.0

    def __call__(self, u: np.ndarray) -> np.ndarray:
        return self.matvec(u)


def _trace_scale(metric: HermitianMetricField, w: np.ndarray) -> float:
    tr = np.real(np.trace(metric.inverse, axis1=-2, axis2=-1)) / metric.n
    return float(np.sum(tr * w) / np.sum(w))


def box_map(metric: HermitianMetricField) -> LinearMap:
    spec, B = metric.spec, metric.inverse
    weight = metric.volume_density()

    def mv(u):
        return _spectral.box_raw(B, u, spec.n, spec.N).real

    return LinearMap(spec, mv, weight, "box", _trace_scale(metric, weight.values))


def box_adjoint_map(metric: HermitianMetricField) -> LinearMap:
    spec, B = metric.spec, metric.inverse
    weight = metric.volume_density()
    w = weight.values

    def mv(u):
        return _spectral.box_transpose_raw(B, w * u, spec.n, spec.N).real / w

    return LinearMap(spec, mv, weight, "box-adjoint", _trace_scale(metric, w))


def hodge_map(metric: HermitianMetricField) -> LinearMap:
    spec, B = metric.spec, metric.inverse
    weight = metric.volume_density()
    w = weight.values

    def mv(u):
        return _spectral.hodge_raw(B, w, u, spec.n, spec.N)

    # hodge is -2 box at leading order, hence the sign flip on the scale
    return LinearMap(spec, mv, weight, "hodge", -2.0 * _trace_scale(metric, w))


@dataclass(frozen=True)
class KrylovConfig:
    """Iteration budget and convergence target for the elliptic solves."""

    tol: float = 1e-10
    max_iter: Optional[int] = None
    restart: int = 40

    def __post_init__(self):
        if not (self.tol > 0.0):
            raise ValueError("KrylovConfig.tol must be positive, got %r" % (self.tol,))
        if self.restart < 1:
            raise ValueError("restart must be >= 1")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be >= 1 when given")

    def budget(self, spec: GridSpec) -> int:
        return self.max_iter if self.max_iter is not None else 10 * spec.N**2


@dataclass
class SolveReport:
    """What a solver actually did, attached to results and raised errors."""

    method: str
    converged: bool
    iterations: int
    residual: float
    target_tol: float
    tol_source: str = "default"
    constants: dict = dfield(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            "converged": self.converged,
            "iterations": self.iterations,
            "residual": self.residual,
            "target_tol": self.target_tol,
            "tol_source": self.tol_source,
            "constants": dict(self.constants),
        }


def _weighted(u: np.ndarray, v: np.ndarray, w: np.ndarray) -> float:
    return float(np.sum(u * v * w)) / u.size


def _wnorm(u: np.ndarray, w: np.ndarray) -> float:
    return float(np.sqrt(max(_weighted(u, u, w), 0.0)))


def _scipy_operator(spec: GridSpec, apply_fn, counter):
    def mv(x):
        counter[0] += 1
        return apply_fn(x.reshape(spec.shape)).ravel()

    return spla.LinearOperator((spec.npts, spec.npts), matvec=mv, dtype=np.float64)


def krylov_solve(A: LinearMap, rhs: ScalarField,
                 config: KrylovConfig | None = None,
                 kernel_projection: bool = True,
                 tol_source: str = "default",
                 x0: np.ndarray | None = None) -> tuple[ScalarField, SolveReport]:
    """Solve A f = rhs in the inner product carried by A.

    With kernel_projection set (the case for every Laplacian-type solve
    here, whose kernels contain the constants) the right-hand side must be
    compatible: its weighted mean has to vanish, and the solution is
    gauge-fixed to weighted mean zero.  BiCGStab runs first with a
    flat-metric spectral preconditioner; GMRES continues from its iterate
    if needed.  The returned residual is verified in the weighted norm,
    not trusted from the iteration.
    """
    config = config or KrylovConfig()
    spec = A.spec
    n, N = spec.n, spec.N
    w = A.weight.values
    vol = _weighted(np.ones(spec.shape), np.ones(spec.shape), w)

    b = rhs.values
    bnorm = _wnorm(b, w)
    if bnorm == 0.0:
        report = SolveReport(A.name, True, 0, 0.0, config.tol, tol_source)
        return ScalarField(spec, np.zeros(spec.shape)), report

    mean_b = _weighted(b, np.ones(spec.shape), w) / vol
    if kernel_projection:
        if abs(mean_b) > 1e-8 * bnorm:
            raise IncompatibleRHS(
                f"rhs weighted mean {mean_b:.3e} is not small against norm {bnorm:.3e}")
        b = b - mean_b

    b0 = _spectral.nyquist_project(b, n, N)
    scale = A.precondition_scale
    counter = [0]
    op = _scipy_operator(spec, lambda u: _spectral.nyquist_project(A(u), n, N), counter)
    M = _scipy_operator(spec, lambda u: _spectral.flat_inverse(u, n, N, scale), [0])

    start = None
    if x0 is not None:
        shift = _weighted(x0, np.ones(spec.shape), w) / vol if kernel_projection else 0.0
        guess = _spectral.nyquist_project(x0 - shift, n, N)
        # fit the guess onto the rhs before trusting it: a start whose
        # residual exceeds the zero vector's only burns iterations, and a
        # noise-level rhs makes any O(1) guess astronomically worse
        ag = A(guess)
        denom = _weighted(ag, ag, w)
        alpha = _weighted(ag, b0, w) / denom if denom > 0.0 else 0.0
        start = (alpha * guess).ravel()

    def residuals(sol):
        # convergence is judged on the Nyquist-free subspace where the
        # system lives; the full-space residual only adds the spectral
        # tail the metric pushes back into the zeroed planes
        r = A(sol) - b0
        return _wnorm(_spectral.nyquist_project(r, n, N), w) / bnorm, _wnorm(r, w) / bnorm

    inner_tol = 0.01 * config.tol
    budget = config.budget(spec)
    x, info = spla.bicgstab(op, b0.ravel(), x0=start, rtol=inner_tol, atol=0.0,
                            maxiter=budget, M=M)
    method = "bicgstab"
    sol = x.reshape(spec.shape)
    residual, full_residual = residuals(sol)
    if residual > config.tol:
        outer = max(1, budget // config.restart)
        x, info = spla.gmres(op, b0.ravel(), x0=x, rtol=inner_tol, atol=0.0,
                             restart=config.restart, maxiter=outer, M=M)
        method = "bicgstab+gmres"
        sol = x.reshape(spec.shape)
        residual, full_residual = residuals(sol)

    if kernel_projection:
        sol = sol - _weighted(sol, np.ones(spec.shape), w) / vol
    report = SolveReport(method, residual <= config.tol, counter[0], residual,
                         config.tol, tol_source,
                         constants={"precondition_scale": scale, "rhs_norm": bnorm,
                                    "full_residual": full_residual})
    if not report.converged:
        raise NonConvergence(
            f"{A.name} solve stalled at weighted residual {residual:.3e} "
            f"(target {config.tol:.1e}, {counter[0]} products)", report=report)
    return ScalarField(spec, sol), report


def null_vector(A: LinearMap,
                config: KrylovConfig | None = None,
                tol_source: str = "default") -> tuple[ScalarField, SolveReport]:
    """Positive field spanning the one-dimensional kernel of A.

    Splits v = 1 + vtilde and solves the consistent singular system
    A vtilde = -A 1 with GMRES on the Nyquist-free subspace; on that
    subspace the kernel is one dimensional, so any solution gives the
    kernel direction.  The result is sign-checked, flipped positive, and
    scaled to unit weighted norm.
    """
    config = config or KrylovConfig()
    spec = A.spec
    n, N = spec.n, spec.N
    w = A.weight.values

    ones = np.ones(spec.shape)
    d = A(ones)
    defect = _wnorm(d, w) / _wnorm(ones, w)
    if defect <= config.tol:
        v = ones / _wnorm(ones, w)
        report = SolveReport("already-null", True, 0, defect, config.tol,
                             tol_source, constants={"defect": defect})
        return ScalarField(spec, v), report

    scale = A.precondition_scale
    counter = [0]
    op = _scipy_operator(spec, lambda u: _spectral.nyquist_project(A(u), n, N), counter)
    M = _scipy_operator(spec, lambda u: _spectral.flat_inverse(u, n, N, scale), [0])
    budget = config.budget(spec)
    outer = max(1, budget // config.restart)

    v = ones
    residual = defect
    full_residual = defect
    method = "gmres-null"
    for round_ in range(4):
        if residual <= config.tol:
            break
        rhs = -_spectral.nyquist_project(A(v), n, N)
        x, info = spla.gmres(op, rhs.ravel(), rtol=0.01 * config.tol, atol=0.0,
                             restart=config.restart, maxiter=outer, M=M)
        v = v + x.reshape(spec.shape)
        full_residual = _wnorm(A(v), w) / _wnorm(v, w)
        residual = _wnorm(_spectral.nyquist_project(A(v), n, N), w) / _wnorm(v, w)
        if round_ > 0:
            method = "gmres-null-refined"

    report = SolveReport(method, residual <= config.tol, counter[0], residual,
                         config.tol, tol_source,
                         constants={"defect": defect, "precondition_scale": scale,
                                    "full_residual": full_residual})
    if not report.converged:
        raise NonConvergence(
            f"null vector stalled at weighted residual {residual:.3e} "
            f"(target {config.tol:.1e})", report=report)

    vmin, vmax = float(v.min()), float(v.max())
    if vmax < 0.0:
        v = -v
    elif vmin <= 0.0:
        raise NonPositiveKernel(
            f"kernel vector changes sign on the grid: min {vmin:.3e}, max {vmax:.3e}")
    v = v / _wnorm(v, w)
    return ScalarField(spec, v), report
