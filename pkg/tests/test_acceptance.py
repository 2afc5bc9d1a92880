"""Acceptance matrix at production resolution (n=2, N=32).

Every numbered test prints one pass/fail line (run with -s to watch
them); tolerances are pinned and each claim is judged against an
independent oracle, a closed-form answer, or an exact invariant.  The
perturbed metric here uses eps=0.15, rougher than the unit-test
fixtures, which is why it needs N=32.
"""
import time

import numpy as np
import pytest

from chern_extremal import (
    CurvatureSign,
    GridSpec,
    ScalarField,
    box,
    box_adjoint,
    calabi_functional,
    chern_scalar,
    classify_sign,
    conformal_scalar,
    curvature_power_identities,
    extremal_factor,
    flat,
    gauduchon_factor,
    hodge_laplacian,
    integrate,
    mean_scalar,
    random_band_limited,
    second_variation,
    total_scalar,
    variation_at,
)
from conftest import full, make_nonkahler, make_phi, make_random_metric

N = 32
EPS = 0.15


def line(num, name, passed, detail):
    print("[%2d] %-36s %s  (%s)" % (num, name, "pass" if passed else "FAIL", detail))


@pytest.fixture(scope="module")
def spec32():
    return GridSpec(2, N)


@pytest.fixture(scope="module")
def flat32(spec32):
    return flat(spec32)


@pytest.fixture(scope="module")
def phi32(spec32):
    return make_phi(spec32)


@pytest.fixture(scope="module")
def conf32(flat32, phi32):
    return flat32.conformal_scale(phi32)


@pytest.fixture(scope="module")
def nk32(spec32):
    return make_nonkahler(spec32, EPS)


@pytest.fixture(scope="module")
def ext_flat32(flat32):
    return extremal_factor(flat32)


@pytest.fixture(scope="module")
def ext_conf32(conf32):
    t0 = time.monotonic()
    res = extremal_factor(conf32)
    return res, time.monotonic() - t0


@pytest.fixture(scope="module")
def ext_nk32(nk32):
    return extremal_factor(nk32)


def test_01_conformal_curvature_rule(spec32):
    t0 = time.monotonic()
    worst, pairs = 0.0, 0
    for i in range(10):
        g = make_random_metric(spec32, 1000 + i)
        s = chern_scalar(g)
        for k in range(5):
            f = random_band_limited(spec32, 2000 + 10 * i + k, 4, 0.3)
            rule = conformal_scalar(s, f, g).values
            direct = chern_scalar(g.conformal_scale(f)).values
            worst = max(worst, float(np.max(np.abs(rule - direct))))
            pairs += 1
    dt = time.monotonic() - t0
    ok = worst < 1e-8 and dt < 60.0
    line(1, "conformal curvature rule, 50 pairs", ok,
         "sup %.3e tol 1e-8, %.1fs" % (worst, dt))
    assert pairs == 50
    assert worst < 1e-8
    assert dt < 60.0


def test_02_adjoint_decomposition(spec32, flat32, conf32, nk32):
    worst = 0.0
    for g in (flat32, conf32, nk32):
        one = ScalarField(spec32, np.ones(spec32.shape))
        torsion = box_adjoint(g, one).values
        for k in range(20):
            u = random_band_limited(spec32, 3000 + k, 4, 1.0)
            lhs = box_adjoint(g, u).values
            rhs = (torsion * u.values - hodge_laplacian(g, u).values
                   - box(g, u).values)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    ok = worst < 1e-8
    line(2, "adjoint decomposition, 20 fields x3", ok,
         "sup %.3e tol 1e-8" % worst)
    assert worst < 1e-8


def test_03_conformal_operator_rules(spec32, flat32, conf32, nk32):
    n = spec32.n
    worst_box, worst_adj = 0.0, 0.0
    for g in (flat32, conf32, nk32):
        for k in range(3):
            f = random_band_limited(spec32, 4000 + k, 3, 0.3)
            u = random_band_limited(spec32, 4100 + k, 3, 1.0)
            gf = g.conformal_scale(f)
            lhs = box(gf, u).values
            rhs = np.exp(-f.values) * box(g, u).values
            worst_box = max(worst_box, float(np.max(np.abs(lhs - rhs))))
            lhs2 = box_adjoint(gf, u).values
            inner_u = ScalarField(spec32, np.exp((n - 1) * f.values) * u.values)
            rhs2 = np.exp(-n * f.values) * box_adjoint(g, inner_u).values
            worst_adj = max(worst_adj, float(np.max(np.abs(lhs2 - rhs2))))
    ok = worst_box < 1e-8 and worst_adj < 1e-8
    line(3, "conformal operator rules", ok,
         "box %.3e adjoint %.3e tol 1e-8" % (worst_box, worst_adj))
    assert worst_box < 1e-8
    assert worst_adj < 1e-8


def test_04_gauduchon_solver(flat32, phi32, conf32, ext_nk32):
    r_flat = gauduchon_factor(flat32)
    flat_ptp = float(np.ptp(r_flat.factor.values))
    r_conf = gauduchon_factor(conf32)
    conf_err = float(np.ptp(r_conf.factor.values + phi32.values))
    nk_defect = ext_nk32.gauduchon.defect_realized
    ok = flat_ptp < 1e-10 and conf_err < 1e-7 and nk_defect < 1e-8
    line(4, "gauduchon three regimes", ok,
         "flat %.1e/1e-10, analytic %.1e/1e-7, defect %.1e/1e-8"
         % (flat_ptp, conf_err, nk_defect))
    assert flat_ptp < 1e-10
    assert conf_err < 1e-7
    assert nk_defect < 1e-8


def test_05_extremal_analytic_answer(phi32, ext_conf32):
    res, dt = ext_conf32
    err = float(np.ptp(res.factor.values + phi32.values))
    c_n = calabi_functional(res.metric, 2.0)
    ok = err < 1e-6 and c_n < 1e-10 and res.el_residual < 1e-6 and dt < 60.0
    line(5, "extremal recovers -phi", ok,
         "sup %.1e/1e-6, C_n %.1e/1e-10, el %.1e/1e-6, %.1fs"
         % (err, c_n, res.el_residual, dt))
    assert err < 1e-6
    assert c_n < 1e-10
    assert res.el_residual < 1e-6
    assert dt < 60.0


def test_06_initialization_uniqueness(flat32, conf32, nk32,
                                      ext_flat32, ext_conf32, ext_nk32):
    worst = 0.0
    for g, base in ((flat32, ext_flat32), (conf32, ext_conf32[0]),
                    (nk32, ext_nk32)):
        other = extremal_factor(g, init="random", seed=11)
        worst = max(worst, float(np.ptp(other.factor.values
                                        - base.factor.values)))
    ok = worst < 1e-6
    line(6, "two inits agree mod constants", ok, "sup %.3e tol 1e-6" % worst)
    assert worst < 1e-6


def test_07_local_minimality(spec32, ext_flat32, ext_conf32, ext_nk32):
    n = spec32.n
    worst_drop, worst_sv = -np.inf, np.inf
    for base in (ext_flat32, ext_conf32[0], ext_nk32):
        g_e = base.metric
        c_star = calabi_functional(g_e, float(n))
        for k in range(20):
            h = random_band_limited(spec32, 5000 + k, 3, 1.0)
            worst_sv = min(worst_sv, second_variation(g_e, h))
            for eps in (1e-2, 1e-3):
                scaled = g_e.conformal_scale(
                    ScalarField(spec32, eps * h.values))
                drop = c_star - calabi_functional(scaled, float(n))
                worst_drop = max(worst_drop, drop)
    ok = worst_drop <= 1e-12 and worst_sv >= -1e-12
    line(7, "extremal is a local minimum", ok,
         "worst drop %.1e <= 1e-12, min 2nd var %.1e >= -1e-12"
         % (worst_drop, worst_sv))
    assert worst_drop <= 1e-12
    assert worst_sv >= -1e-12


def test_08_variation_formula_matrix(spec32, flat32, conf32, nk32):
    t0 = time.monotonic()
    n = spec32.n
    rows, failures, worst = 0, [], 0.0
    for gi, g in enumerate((flat32, conf32, nk32)):
        for k in range(5):
            h = random_band_limited(spec32, 6000 + 100 * gi + k, 3, 0.5)
            for p in (2.0, float(n), 3.5):
                for t in (0.0, 0.1):
                    rep = variation_at(g, h, p, t)
                    rows += 1
                    # absolute floor where the true derivative vanishes
                    gap = abs(rep.formula_value - rep.fd_value)
                    bound = max(1e-6 * abs(rep.fd_value), 1e-8)
                    worst = max(worst, gap / bound)
                    if gap > bound:
                        failures.append((gi, k, p, t, gap))
    dt = time.monotonic() - t0
    ok = not failures and dt < 300.0
    line(8, "variation formulas vs FD, 90 rows", ok,
         "worst gap/bound %.3e, %d rows, %.0fs/300s" % (worst, rows, dt))
    assert rows == 90
    assert not failures, failures[:5]
    assert dt < 300.0


def test_09_scale_invariance(spec32, conf32, nk32):
    worst = 0.0
    for g in (conf32, nk32):
        for p in (2.0, 3.5):
            base = calabi_functional(g, p)
            for lam in (0.5, 2.0, 10.0):
                const = ScalarField(spec32, np.full(spec32.shape, np.log(lam)))
                val = calabi_functional(g.conformal_scale(const), p)
                worst = max(worst, abs(val - base) / base)
    ok = worst < 1e-12
    line(9, "calabi scale invariance", ok, "rel %.3e tol 1e-12" % worst)
    assert worst < 1e-12


def test_10_zero_branch_classification(flat32, conf32, nk32,
                                       ext_flat32, ext_conf32, ext_nk32):
    n_fact = 2.0  # n! at n = 2
    worst_mean, worst_total, worst_sup = 0.0, 0.0, 0.0
    signs = set()
    for g, base in ((flat32, ext_flat32), (conf32, ext_conf32[0]),
                    (nk32, ext_nk32)):
        g_g = base.gauduchon.metric
        s_g = chern_scalar(g_g)
        scale = max(1.0, n_fact * integrate(
            ScalarField(g.spec, np.abs(s_g.values)), g_g.volume_density()))
        worst_mean = max(worst_mean, abs(mean_scalar(g_g)) / scale)
        worst_total = max(worst_total, abs(total_scalar(g_g)) / scale)
        signs.add(classify_sign(g))
        worst_sup = max(worst_sup, float(np.max(np.abs(base.scalar.values))))
    ok = (worst_mean < 1e-6 and worst_total < 1e-6
          and signs == {CurvatureSign.ZERO} and worst_sup < 1e-5)
    line(10, "trichotomy lands on the zero branch", ok,
         "mean %.1e total %.1e /1e-6, sup s_E %.1e/1e-5"
         % (worst_mean, worst_total, worst_sup))
    assert worst_mean < 1e-6
    assert worst_total < 1e-6
    assert signs == {CurvatureSign.ZERO}
    assert worst_sup < 1e-5
    # positive/negative branches exist in the API but no torus scenario
    # can reach them; recorded here rather than silently skipped
    assert {CurvatureSign.POSITIVE, CurvatureSign.NEGATIVE}.isdisjoint(signs)


def test_11_power_identity_suite(ext_nk32):
    g_g = ext_nk32.gauduchon.metric
    worst = 0.0
    for p in (2.0, 2.0):  # p in {2, n} with n = 2
        rep = curvature_power_identities(g_g, p)
        scale = max(rep.term_scale, 1.0)
        worst = max(worst,
                    abs(rep.vanishing_integral) / scale,
                    rep.chain_rule_mismatch / scale,
                    rep.pairing_mismatch / scale)
    ok = worst < 1e-7
    line(11, "curvature power identities", ok,
         "worst %.3e tol 1e-7 x scale" % worst)
    assert worst < 1e-7


def test_12_convergence_sweep(phi32, ext_conf32):
    errors = []
    for size in (8, 16):
        spec = GridSpec(2, size)
        g = flat(spec).conformal_scale(make_phi(spec))
        res = extremal_factor(g)
        errors.append(float(np.ptp(res.factor.values + make_phi(spec).values)))
    res32, _ = ext_conf32
    errors.append(float(np.ptp(res32.factor.values + phi32.values)))
    decay = errors[0] / max(errors[-1], 1e-300)
    mono = all(b <= max(a, 1e-12) for a, b in zip(errors, errors[1:]))
    ok = decay >= 1e3 and mono
    line(12, "error decays N=8 -> N=32", ok,
         "errors %s, decay %.2e >= 1e3" % (" ".join("%.2e" % e for e in errors),
                                           decay))
    assert decay >= 1e3
    assert mono
