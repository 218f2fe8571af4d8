"""End-to-end acceptance suite.

Each test here pins one of the headline claims of the package at its
stated tolerance; the rest of tests/ covers the per-module details.
"""

import json
import math
import time

import numpy as np
import pytest

from wml.manifold import PRESET_EXAMPLES, preset
from wml.radial_expr import parse_expr


# 1 ----------------------------------------------------------------------

def test_feller_alpha_table():
    """g ~ e^{-r^alpha}: Feller exactly for alpha <= 2, 12/12 cells,
    under 30 seconds."""
    from wml.integrability import feller
    t0 = time.perf_counter()
    cells = []
    for m in (2, 3):
        for alpha in (0.5, 1.0, 1.5, 2.0, 2.5, 3.0):
            got = feller(preset(f"exp-alpha-{m}-{alpha}")).verdict
            want = "Yes" if alpha <= 2.0 else "No"
            cells.append(got == want)
    elapsed = time.perf_counter() - t0
    assert cells.count(True) == 12
    assert elapsed < 30.0


# 2 ----------------------------------------------------------------------

def test_stochastic_completeness_classifier():
    from wml.integrability import stochastic_completeness
    for name in ("euclidean-3", "hyperbolic-2", "gaussian-shrinker-2-0.5"):
        assert stochastic_completeness(preset(name)).verdict == "Yes"
    rep = stochastic_completeness(preset("exp-growth-2"))
    assert rep.verdict == "No"
    assert rep.u_star is not None and 0.0 < rep.u_star < math.inf


def test_incomplete_model_three_witnesses_agree():
    """Classifier verdict, heat-mass defect and Monte Carlo explosion
    all see the same loss of probability on the e^{r^3} model."""
    from wml.montecarlo import SimConfig, simulate_explosion
    from wml.radial_ode import heat_mass
    M = preset("exp-growth-2")

    mc_pde = heat_mass(M, 1.0, 1.0, 30.0)
    defect = 1.0 - mc_pde.mass_at(1.0)
    assert defect > 0.05

    frac = {}
    ci = {}
    for outer in (25.0, 50.0):
        cfg = SimConfig(n_paths=300, t_max=1.0, seed=42,
                        r_absorb_outer=outer)
        rep = simulate_explosion(M, 1.0, cfg)
        frac[outer], ci[outer] = rep.explosion_fraction, rep.ci95_halfwidth
    # explosion evidence, stable under outer-radius doubling
    assert frac[25.0] > 0.05 and frac[50.0] > 0.05
    assert abs(frac[50.0] - frac[25.0]) <= 2 * max(ci.values()) + 0.02
    # and it agrees with the PDE defect up to CI + truncation leakage
    leakage = float(mc_pde.leakage_estimate)
    assert abs(frac[50.0] - defect) <= 2 * ci[50.0] + leakage + 0.02


# 3 ----------------------------------------------------------------------

def test_mc_ode_feller_cross_check():
    """R^3, lam=1, R0=1: hitting Laplace transform reproduces the
    closed form h(r0) = e^{-(r0-1)}/r0; 10^4 paths, under a minute."""
    from wml.montecarlo import SimConfig, hitting_laplace
    M = preset("euclidean-3")
    t0 = time.perf_counter()
    for r0 in (1.5, 2.0, 4.0):
        cfg = SimConfig(n_paths=10000, t_max=5.0, seed=2024,
                        r_absorb_outer=30.0)
        rep = hitting_laplace(M, r0, 1.0, 1.0, cfg)
        _r, _l, est, ci = rep.hitting_estimates[0]
        exact = math.exp(-(r0 - 1.0)) / r0
        assert est == pytest.approx(exact, abs=max(2 * ci, 0.01))
    assert time.perf_counter() - t0 < 60.0


# 4 ----------------------------------------------------------------------

def test_spectral_values():
    from wml.spectral import lambda1_exterior, lambda1_interval
    ball = lambda1_interval(preset("euclidean-3"), 0.0, 1.0)
    assert ball.lambda1 == pytest.approx(math.pi ** 2, abs=1e-6)

    hyp = lambda1_exterior(preset("hyperbolic-2"), 1.0, atol=1e-6)
    assert hyp.lambda1 == pytest.approx(0.25, abs=1e-3)
    assert hyp.lambda1 >= 0.25 - 1e-9        # the c^2/4 bound, c = 1

    euc = lambda1_exterior(preset("euclidean-3"), 1.0, atol=1e-6)
    assert 0.0 <= euc.lambda1 <= 1e-6


# 5 ----------------------------------------------------------------------

def test_discrete_spectrum_mechanism():
    """g = e^{-r^3}: exterior eigenvalues sweep to infinity, each above
    the half-drift-squared lower bound; essential spectrum empty."""
    from wml.spectral import ess_spectrum_bottom, half_drift_squared_bound
    M = preset("exp-alpha-2-3")
    rep = ess_spectrum_bottom(M, [1.0, 2.0, 4.0, 8.0], atol=1e-4)
    lams = rep.exterior_lambda1
    assert all(b > a for a, b in zip(lams, lams[1:]))    # no stabilizing
    assert lams[-1] > 10.0 * lams[0]
    for R, lam in zip(rep.radii, lams):
        hd = half_drift_squared_bound(M, R)
        assert hd.applicable and lam >= hd.value
        # asymptotic drift magnitude 3(m-1)R^2 with m = 2
        assert lam >= 0.9 * (3.0 * R ** 2) ** 2 / 4.0
    assert rep.unbounded and math.isinf(rep.bottom_estimate)


# 6 ----------------------------------------------------------------------

@pytest.mark.parametrize("name", PRESET_EXAMPLES)
def test_bound_ordering_suite(name):
    """Lower bounds <= shooting lambda1 <= Cheng on every preset, and
    ess_bottom <= Brooks where both sides are finite."""
    from wml.spectral import (barta_bound, barta_function_bound,
                              brooks_vs_ess, cheng_upper_bound,
                              half_drift_squared_bound, lambda1_exterior,
                              lambda1_interval, ricci_f_radial,
                              ricci_f_tangential)
    M = preset(name)
    lam = lambda1_interval(M, 0.0, 1.0).lambda1

    bf = barta_function_bound(M, parse_expr("2 - r^2"), 1e-3, 1.0)
    bv = barta_bound(M, parse_expr("2*r/(2 - r^2)"), 1e-3, 1.0)
    assert bf.value <= lam + 1e-6
    assert bv.value <= lam + 1e-6

    # Cheng constants fitted from the computed curvature / weight bounds
    grid = np.geomspace(1e-3, 1.0, 400)
    ric = np.minimum(ricci_f_radial(M, grid), ricci_f_tangential(M, grid))
    alpha = max(0.0, -float(np.min(ric)))
    beta = float(np.max(np.abs(M.f.jet(grid).d1))) ** 2
    assert cheng_upper_bound(alpha, beta, M.m, 1.0).value >= lam - 1e-6

    hd = half_drift_squared_bound(M, 1.0)
    if hd.applicable:
        ext = lambda1_exterior(M, 1.0, atol=1e-3).lambda1
        assert hd.value <= ext + 1e-6

    rec = brooks_vs_ess(M, radii=(1.0, 2.0), atol=1e-5)
    if rec["status"] == "checked":
        assert rec["consistent"]


# 7 ----------------------------------------------------------------------

def test_comparison_and_riccati():
    from wml.radial_ode import comparison_g, riccati_crossing
    one = lambda r: 1.0
    prof = comparison_g(one, one, 2, r_max=4.0, n_grid=2000)
    assert abs(prof(1.0) - math.sinh(1.0)) < 1e-8

    # series oracle for g'' = (r^2/2) g: c_{n+4} = c_n / (2(n+4)(n+3))
    coef, total, n = 1.0, 1.0, 1
    while abs(coef) > 1e-20:
        coef /= 2.0 * (n + 4) * (n + 3)
        total += coef
        n += 4
    prof_r = comparison_g(lambda r: r, lambda r: 0.0, 2,
                          r_max=3.0, n_grid=2000)
    assert abs(prof_r(1.0) - total) < 1e-8

    k = lambda r: 1.0 + r
    rep = riccati_crossing(k, 2)
    assert rep.found and rep.psi_tail_ok
    assert rep.liminf_value >= 0.5 - 1e-6
    # crossing insensitive to the initial-condition seed
    moved = riccati_crossing(k, 2, r0=1e-5, phi0=1e-4)
    assert moved.r_o == pytest.approx(rep.r_o, abs=1e-4)
    moved = riccati_crossing(k, 2, phi0=-1e-4)
    assert moved.r_o == pytest.approx(rep.r_o, abs=1e-4)


# 8 ----------------------------------------------------------------------

def test_compact_support_principle():
    from wml.radial_ode import (PowerLaw, minimal_exterior_solution,
                                semilinear_exterior)
    M = preset("euclidean-3")
    prof, rep = semilinear_exterior(M, PowerLaw(0.5), 1.0, 0.01,
                                    r_max=50.0)
    assert rep.classification == "CompactSupport"
    assert rep.r_dead is not None and math.isfinite(rep.r_dead)
    _, rep2 = semilinear_exterior(M, PowerLaw(0.5), 1.0, 0.01,
                                  r_max=100.0)
    assert rep2.r_dead == pytest.approx(rep.r_dead, rel=0.01)

    lin, rep3 = semilinear_exterior(M, PowerLaw(1.0), 1.0, 0.01,
                                    r_max=60.0)
    assert rep3.classification == "DecaysToZero"
    h = minimal_exterior_solution(M, 1.0, 1.0, 20.0)
    for r in (1.5, 2.0, 5.0, 10.0):
        assert abs(lin(r) - 0.01 * h(r)) < 1e-6


# 9 ----------------------------------------------------------------------

def test_soliton_audit_gaussian_shrinker():
    from wml.soliton import audit_soliton
    a = audit_soliton(preset("gaussian-shrinker-2-0.5"))
    assert a.basic_eq_residual < 1e-8
    assert a.scalar_lower_bound_ok
    assert a.gradient_estimate_ok
    assert a.volume_finite is True
    assert a.sc_verdict == "Yes"
    assert a.feller_verdict == "Yes"


# 10 ---------------------------------------------------------------------

def test_simulate_determinism_any_worker_count(monkeypatch, capsys):
    from wml.cli import main
    from wml.report import parse_report
    argv = ["simulate", "--preset", "exp-growth-2", "--paths", "200",
            "--seed", "31337"]
    payloads = []
    for threads in ("1", "4"):
        monkeypatch.setenv("WML_THREADS", threads)
        assert main(argv) == 0
        doc = parse_report(capsys.readouterr().out)
        payloads.append(json.dumps(doc["results"], sort_keys=True))
    assert payloads[0] == payloads[1]


def test_reproduce_suite_exits_zero_in_time(capsys):
    from wml.cli import main
    t0 = time.perf_counter()
    code = main(["reproduce", "all"])
    elapsed = time.perf_counter() - t0
    capsys.readouterr()
    assert code == 0
    assert elapsed < 300.0
