"""Extremal representative of a conformal class.

Two elliptic stages: move to the Gauduchon representative g_G, then solve
the Poisson problem box_G f_p = (s_G - C)/n with C the weighted mean of
the Chern scalar.  The factor f = f_G + f_p + c (constant c restoring the
volume) makes the scalar curvature of e^f g equal to C e^{-(f_p + c)} up
to the solver residual, which is exactly the extremal condition for the
curvature functionals on this class.  On the torus C = 0 for every class,
so the realized scalar is numerically zero and the sign class is Zero.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import NotGauduchon, ResidualTooLarge
from .gauduchon import GauduchonResult, gauduchon_factor, verify_gauduchon
from .geometry import HermitianMetricField, chern_scalar
from .grid import ScalarField, integrate, norm, random_band_limited
from .operators import KrylovConfig, SolveReport, box_adjoint, box_map, krylov_solve

_EL_GUARD = 1e-5


def euler_lagrange_residual(metric: HermitianMetricField,
                            s: ScalarField | None = None) -> float:
    """Weighted L2 norm of box^*(sign(s) |s|^{n-1}), zero at extremal metrics."""
    spec = metric.spec
    if s is None:
        s = chern_scalar(metric)
    q = spec.n - 1
    powered = ScalarField(spec, np.sign(s.values) * np.abs(s.values)**q)
    r = box_adjoint(metric, powered)
    w = metric.volume_density()
    val = integrate(ScalarField(spec, r.values**2), w)
    return float(np.sqrt(max(val, 0.0)))


@dataclass
class ExtremalResult:
    """Extremal conformal factor and the diagnostics of both solve stages.

    factor = gauduchon.factor + poisson_factor + volume_shift, with
    poisson_factor mean free against the Gauduchon volume form.
    mean_curvature is the weighted average C of the Gauduchon scalar; the
    realized scalar equals C e^{-(poisson_factor + volume_shift)} up to
    el_residual.
    """

    factor: ScalarField
    metric: HermitianMetricField
    scalar: ScalarField
    mean_curvature: float
    volume_shift: float
    el_residual: float
    gauduchon: GauduchonResult
    poisson_factor: ScalarField
    reports: dict[str, SolveReport]

    @property
    def report(self) -> SolveReport:
        return self.reports["poisson"]


def extremal_factor(metric: HermitianMetricField,
                    config: KrylovConfig | None = None,
                    tol_source: str = "default",
                    init: str = "zero",
                    seed: int = 0) -> ExtremalResult:
    """Conformal factor to the volume-preserving extremal metric of the class.

    init selects the Krylov starting guess for the Poisson stage: "zero"
    or "random" (band limited, controlled by seed).  The result is
    independent of the choice up to solver tolerance; only the iteration
    counts differ.
    """
    if init not in ("zero", "random"):
        raise ValueError("init must be 'zero' or 'random', got %r" % (init,))
    spec = metric.spec
    cfg = config if config is not None else KrylovConfig()

    gd = gauduchon_factor(metric, cfg, tol_source)
    g_gaud = gd.metric
    w_gaud = g_gaud.volume_density()

    s_gaud = chern_scalar(g_gaud)
    vol = integrate(ScalarField(spec, np.ones(spec.shape)), w_gaud)
    mean_c = integrate(s_gaud, w_gaud) / vol

    psi = ScalarField(spec, (s_gaud.values - mean_c) / spec.n)
    psi_norm = norm(psi, w_gaud)
    s_scale = norm(s_gaud, w_gaud)

    if psi_norm <= 1e-12 * (1.0 + s_scale):
        # Gauduchon scalar already constant to machine precision; any
        # Poisson step would just amplify roundoff.
        f_p = ScalarField(spec, np.zeros(spec.shape))
        poisson_report = SolveReport(
            method="trivial-rhs", converged=True, iterations=0,
            residual=0.0, target_tol=cfg.tol, tol_source=tol_source,
            constants={"rhs_norm": psi_norm, "scalar_scale": s_scale})
    else:
        x0 = None
        if init == "random":
            guess = random_band_limited(spec, seed, max(1, min(3, spec.N // 4)), 0.1)
            x0 = guess.values
        f_p, poisson_report = krylov_solve(box_map(g_gaud), psi, cfg,
                                           tol_source=tol_source, x0=x0)
        # gauge: mean free against the Gauduchon volume form
        f_p = ScalarField(spec, f_p.values - integrate(f_p, w_gaud) / vol)

    scaled = integrate(ScalarField(spec, np.exp(spec.n * f_p.values)), w_gaud)
    shift = float(np.log(vol / scaled) / spec.n)

    factor = ScalarField(spec, gd.factor.values + f_p.values + shift)
    realized = metric.conformal_scale(factor)
    s_real = chern_scalar(realized)
    el = euler_lagrange_residual(realized, s_real)

    if el > _EL_GUARD:
        raise ResidualTooLarge(
            "extremal construction left Euler-Lagrange residual %.3e > %.0e; "
            "Poisson stage reported residual %.3e" % (el, _EL_GUARD,
                                                      poisson_report.residual))

    return ExtremalResult(
        factor=factor,
        metric=realized,
        scalar=s_real,
        mean_curvature=float(mean_c),
        volume_shift=shift,
        el_residual=el,
        gauduchon=gd,
        poisson_factor=f_p,
        reports={"gauduchon": gd.report, "poisson": poisson_report},
    )


def mean_scalar(metric: HermitianMetricField, defect_tol: float = 1e-7) -> float:
    """Volume-weighted average of the Chern scalar on a Gauduchon metric.

    The average is conformally meaningful only at the Gauduchon
    representative, so a defect above defect_tol raises NotGauduchon.
    """
    defect = verify_gauduchon(metric)
    if defect > defect_tol:
        raise NotGauduchon(
            "mean scalar needs a Gauduchon metric: defect %.3e > %.0e"
            % (defect, defect_tol))
    spec = metric.spec
    w = metric.volume_density()
    s = chern_scalar(metric)
    vol = integrate(ScalarField(spec, np.ones(spec.shape)), w)
    return float(integrate(s, w) / vol)


def total_scalar(metric: HermitianMetricField) -> float:
    """n! times the volume integral of the Chern scalar.

    Conformal invariant of the class at its Gauduchon representative; on
    the flat torus classes it vanishes identically.
    """
    s = chern_scalar(metric)
    return float(math.factorial(metric.spec.n) * integrate(s, metric.volume_density()))


class CurvatureSign(enum.Enum):
    POSITIVE = "positive"
    ZERO = "zero"
    NEGATIVE = "negative"


def classify_sign(metric: HermitianMetricField,
                  tol: float = 1e-6,
                  config: KrylovConfig | None = None) -> CurvatureSign:
    """Sign class of the conformal class via the total scalar invariant.

    The invariant is evaluated at the Gauduchon representative; Zero when
    it is below tol times the natural scale n! vol.  Torus classes always
    land in Zero; the other branches exist for data that fails to be a
    genuine torus metric within tolerance.
    """
    gd = gauduchon_factor(metric, config)
    inv = total_scalar(gd.metric)
    scale = math.factorial(metric.spec.n) * gd.volume
    if abs(inv) <= tol * scale:
        return CurvatureSign.ZERO
    return CurvatureSign.POSITIVE if inv > 0 else CurvatureSign.NEGATIVE
