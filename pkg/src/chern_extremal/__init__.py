"""Extremal Hermitian metrics in a conformal class on the complex torus.

Pseudospectral discretization of C^n / (Z^n + i Z^n): fields are sampled
on a uniform 2n-dimensional grid, derivatives act through the FFT, and
the two elliptic solves (Gauduchon factor, then a Poisson stage) run
matrix free.  See README.md for the command line and file formats.
"""

__version__ = "0.1.0"

from .errors import (AliasedMode, ChernExtremalError, ConventionError,
                     FieldFormatError, IncompatibleRHS, LostPositivity,
                     NonConvergence, NonPositiveKernel, NotGauduchon,
                     ResidualTooLarge, ScenarioError, UnsupportedExponent)
from .grid import (ComplexField, GridSpec, ScalarField, ensure_real, inner,
                   integrate, norm, partial_z, partial_zbar,
                   random_band_limited)
from .geometry import (ConformalMetric, HermitianMetricField, chern_scalar,
                       chern_curvature_oracle, conformal_scalar, flat,
                       volume_density)
from .operators import (KrylovConfig, LinearMap, SolveReport, box,
                        box_adjoint, box_adjoint_map, box_map,
                        hodge_laplacian, hodge_map, krylov_solve, null_vector)
from .gauduchon import GauduchonResult, gauduchon_factor, verify_gauduchon
from .extremal import (CurvatureSign, ExtremalResult, classify_sign,
                       euler_lagrange_residual, extremal_factor, mean_scalar,
                       total_scalar)
from .calabi import (CurvaturePowerReport, VariationReport, calabi_functional,
                     curvature_power_identities, el_residual, first_variation,
                     second_variation, variation_at)
from .scenario import (MetricSpec, Scenario, TaskSpec, Tolerances, TrigTerm,
                       conformal_factor_field, export_csv, load_scenario,
                       parse_scenario, read_field, read_metric, realize,
                       trig_field, write_field, write_metric)
from .checks import CheckResult, run_identity_suite

__all__ = [
    "AliasedMode", "ChernExtremalError", "CheckResult", "ComplexField",
    "ConformalMetric", "ConventionError", "CurvaturePowerReport",
    "CurvatureSign", "ExtremalResult", "FieldFormatError", "GauduchonResult",
    "GridSpec", "HermitianMetricField", "IncompatibleRHS", "KrylovConfig",
    "LinearMap", "LostPositivity", "MetricSpec", "NonConvergence",
    "NonPositiveKernel", "NotGauduchon", "ResidualTooLarge", "ScalarField",
    "Scenario", "ScenarioError", "SolveReport", "TaskSpec", "Tolerances",
    "TrigTerm", "UnsupportedExponent", "VariationReport", "box",
    "box_adjoint", "box_adjoint_map", "box_map", "calabi_functional",
    "chern_curvature_oracle", "chern_scalar", "classify_sign",
    "conformal_factor_field", "conformal_scalar", "curvature_power_identities",
    "el_residual", "ensure_real", "euler_lagrange_residual", "export_csv",
    "extremal_factor", "first_variation", "flat", "gauduchon_factor",
    "hodge_laplacian", "hodge_map", "inner", "integrate", "krylov_solve",
    "load_scenario", "mean_scalar", "norm", "null_vector", "parse_scenario",
    "partial_z", "partial_zbar", "random_band_limited", "read_field",
    "read_metric", "realize", "run_identity_suite", "second_variation",
    "total_scalar", "trig_field", "variation_at", "verify_gauduchon",
    "volume_density", "write_field", "write_metric",
]
