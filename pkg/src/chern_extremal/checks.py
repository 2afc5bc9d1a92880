"""Identity suite shared by the command line verifier and the test bed.

Every check compares two independently computed quantities tied by an
exact identity of the discretization (or of the continuum at spectral
accuracy) and reports a named residual with its tolerance.  Names are
stable strings; reports key on them.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calabi import curvature_power_identities
from .gauduchon import GauduchonResult, gauduchon_factor
from .geometry import HermitianMetricField, chern_scalar, conformal_scalar
from .grid import ScalarField, inner, integrate, norm, random_band_limited
from .operators import KrylovConfig, box, box_adjoint, hodge_laplacian
from . import _spectral
from .grid import ensure_real


@dataclass
class CheckResult:
    name: str
    residual: float
    tol: float
    passed: bool
    detail: str = ""

    def as_dict(self) -> dict:
        return {"name": self.name, "residual": self.residual, "tol": self.tol,
                "passed": self.passed, "detail": self.detail}


def _rand(spec, seed, amplitude):
    return random_band_limited(spec, seed, max(1, min(4, spec.N // 4)), amplitude)


def _sup(a: np.ndarray) -> float:
    return float(np.max(np.abs(a)))


def check_conformal_curvature_rule(metric: HermitianMetricField, seed: int,
                                   tol: float) -> CheckResult:
    """Scalar of e^f g computed directly vs by the transformation rule."""
    f = _rand(metric.spec, seed, 0.3)
    direct = chern_scalar(metric.conformal_scale(f))
    ruled = conformal_scalar(chern_scalar(metric), f, metric)
    res = _sup(direct.values - ruled.values)
    return CheckResult("conformal-curvature-rule", res, tol, res <= tol)


def check_adjoint_decomposition(metric: HermitianMetricField, seed: int,
                                tol: float, samples: int = 3) -> CheckResult:
    """box^* u = box^*(1) u - Delta_d u - box u, tested on random u."""
    spec = metric.spec
    ones = ScalarField(spec, np.ones(spec.shape))
    torsion = box_adjoint(metric, ones).values
    worst = 0.0
    for k in range(samples):
        u = _rand(spec, seed + 11 * k, 1.0)
        lhs = box_adjoint(metric, u).values
        rhs = (torsion * u.values - hodge_laplacian(metric, u).values
               - box(metric, u).values)
        worst = max(worst, _sup(lhs - rhs))
    return CheckResult("adjoint-decomposition", worst, tol, worst <= tol)


def check_conformal_operator_rule(metric: HermitianMetricField, seed: int,
                                  tol: float) -> CheckResult:
    """box_{e^f g} u = e^{-f} box_g u."""
    spec = metric.spec
    f = _rand(spec, seed + 1, 0.3)
    u = _rand(spec, seed + 2, 1.0)
    scaled = metric.conformal_scale(f)
    lhs = box(scaled, u).values
    rhs = np.exp(-f.values) * box(metric, u).values
    res = _sup(lhs - rhs)
    return CheckResult("conformal-operator-rule", res, tol, res <= tol)


def check_conformal_adjoint_rule(metric: HermitianMetricField, seed: int,
                                 tol: float) -> CheckResult:
    """box^*_{e^f g} u = e^{-n f} box^*_g(e^{(n-1) f} u)."""
    spec = metric.spec
    n = spec.n
    f = _rand(spec, seed + 3, 0.3)
    u = _rand(spec, seed + 4, 1.0)
    scaled = metric.conformal_scale(f)
    lhs = box_adjoint(scaled, u).values
    inner_field = ScalarField(spec, np.exp((n - 1) * f.values) * u.values)
    rhs = np.exp(-n * f.values) * box_adjoint(metric, inner_field).values
    res = _sup(lhs - rhs)
    return CheckResult("conformal-adjoint-rule", res, tol, res <= tol)


def check_gauduchon_energy(gauduchon_metric: HermitianMetricField, seed: int,
                           tol: float = 1e-7) -> CheckResult:
    """At a Gauduchon metric, <phi, box phi>_dV = -int |d phi|^2 dV.

    Residual is normalized by the squared weighted norm of phi.
    """
    spec = gauduchon_metric.spec
    n, N = spec.n, spec.N
    w = gauduchon_metric.volume_density()
    phi = _rand(spec, seed + 5, 1.0)
    phi = ScalarField(spec, phi.values - integrate(phi, w)
                      / integrate(ScalarField(spec, np.ones(spec.shape)), w))

    pairing = inner(phi, box(gauduchon_metric, phi), w)

    uh = _spectral.fftn(phi.values)
    B = gauduchon_metric.inverse
    dz = [_spectral.ifftn(_spectral.holo_multiplier(n, N, j) * uh)
          for j in range(n)]
    acc = np.zeros(spec.shape, dtype=complex)
    for i in range(n):
        for j in range(n):
            acc += B[..., j, i] * dz[i] * np.conj(dz[j])
    grad2 = ensure_real(acc, "gauduchon_energy", tol=1e-8)
    energy = integrate(ScalarField(spec, grad2), w)

    denom = max(norm(phi, w)**2, 1e-300)
    res = abs(pairing + energy) / denom
    return CheckResult("gauduchon-energy-identity", res, tol, res <= tol,
                       detail="pairing %.6e energy %.6e" % (pairing, energy))


def check_power_identities(gauduchon_metric: HermitianMetricField, p: float,
                           tol: float = 1e-7) -> list:
    """The three integral identities for curvature powers, normalized by
    the absolute-term scale so the tolerance is meaningful for any
    curvature magnitude."""
    rep = curvature_power_identities(gauduchon_metric, p)
    scale = max(rep.term_scale, 1.0)
    out = []
    tag = ("%g" % p).replace(".", "_")
    for label, value in [
            ("curvature-power-vanishing-p%s" % tag, abs(rep.vanishing_integral)),
            ("curvature-power-chain-rule-p%s" % tag, rep.chain_rule_mismatch),
            ("curvature-power-pairing-p%s" % tag, rep.pairing_mismatch)]:
        res = value / scale
        out.append(CheckResult(label, res, tol, res <= tol,
                               detail="term scale %.3e" % rep.term_scale))
    return out


def run_identity_suite(metric: HermitianMetricField, seed: int = 0,
                       identity_tol: float = 1e-8,
                       config: KrylovConfig | None = None,
                       gauduchon: GauduchonResult | None = None) -> list:
    """All verifier checks against one metric; returns CheckResult list.

    The Gauduchon stage is reused when the caller already solved it.
    """
    results = [
        check_conformal_curvature_rule(metric, seed, identity_tol),
        check_adjoint_decomposition(metric, seed, identity_tol),
        check_conformal_operator_rule(metric, seed, identity_tol),
        check_conformal_adjoint_rule(metric, seed, identity_tol),
    ]
    gd = gauduchon if gauduchon is not None else gauduchon_factor(metric, config)
    results.append(check_gauduchon_energy(gd.metric, seed))
    for p in sorted({2.0, float(metric.spec.n)}):
        results.extend(check_power_identities(gd.metric, p))
    return results
