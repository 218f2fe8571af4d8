"""Eigenvalues and spectral bounds for the radial f-Laplacian.

lambda1 of balls, annuli and exterior domains via Pruefer-phase shooting
(with a finite-difference cross-check), the bottom of the essential
spectrum through exhaustion by exterior domains, and the closed-form
bounds: Barta, Brooks (volume growth), Cheng, the three drift comparison
bounds, c^2/4, and the semilinear infimum estimates.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import minimize_scalar

from ._kernels import pruefer_theta_end
from .errors import DomainError, NoConvergence, ValidationError
from .manifold import ModelManifold, load_manifold
from .radial_expr import eval_scalar, log_jet, log_value, parse_expr

_BISECT_RTOL = 1e-10
_EXT_ATOL = 1e-8
_MAX_DOUBLINGS = 40
_NODES_PER_RADIAN = 12.0
_MAX_NODES = 3_000_000


@dataclass
class EigenResult:
    lambda1: float
    method: str                       # PrueferShooting | FiniteDifference
    mesh_meta: dict = field(default_factory=dict)
    residual: float = 0.0

    def to_dict(self):
        return {"lambda1": self.lambda1, "method": self.method,
                "mesh_meta": self.mesh_meta, "residual": self.residual}


@dataclass
class EssSpecReport:
    radii: list
    exterior_lambda1: list
    bottom_estimate: float            # math.inf encodes Unbounded
    monotone_ok: bool

    @property
    def unbounded(self):
        return math.isinf(self.bottom_estimate)

    def to_dict(self):
        return {"radii": list(self.radii),
                "exterior_lambda1": list(self.exterior_lambda1),
                "bottom_estimate": ("Unbounded" if self.unbounded
                                    else self.bottom_estimate),
                "monotone_ok": self.monotone_ok}


@dataclass
class BoundValue:
    kind: str
    value: float
    inputs_meta: dict = field(default_factory=dict)
    applicable: bool = True

    def to_dict(self):
        return {"kind": self.kind, "value": self.value,
                "inputs_meta": self.inputs_meta,
                "applicable": self.applicable}


# --------------------------------------------------------------------------
# Pruefer shooting
# --------------------------------------------------------------------------

def _mesh_for(M, lam, r_lo, r_hi):
    """Graded mesh: node density follows s + |drift| + 1 so the phase
    advances a bounded amount per step."""
    s = math.sqrt(max(lam, 0.0))
    coarse = np.geomspace(r_lo, r_hi, 2049)
    with np.errstate(all="ignore"):
        b = np.abs(np.asarray(M.drift(coarse), dtype=float))
    b[~np.isfinite(b)] = 0.0
    w = _NODES_PER_RADIAN * (s + b + 1.0)
    counts = np.concatenate(([0.0], np.cumsum(
        0.5 * (w[1:] + w[:-1]) * np.diff(coarse))))
    n = int(min(max(counts[-1], 800), _MAX_NODES))
    targets = np.linspace(0.0, counts[-1], n + 1)
    mesh = np.interp(targets, counts, coarse)
    mesh[0], mesh[-1] = r_lo, r_hi
    return np.unique(mesh)


def _theta_end(M, lam, r_lo, r_hi, theta0):
    mesh = _mesh_for(M, lam, r_lo, r_hi)
    mid = 0.5 * (mesh[:-1] + mesh[1:])
    with np.errstate(all="ignore"):
        b_nodes = np.asarray(M.drift(mesh), dtype=float)
        b_mid = np.asarray(M.drift(mid), dtype=float)
    return pruefer_theta_end(math.sqrt(lam), mesh, b_nodes, b_mid,
                             theta0), mesh.size


def lambda1_interval(M, r_lo, r_hi, cross_check=True):
    """Smallest Dirichlet eigenvalue of -(a u')' = lam a u on (r_lo, r_hi).

    r_lo = 0 means the ball: the inner endpoint is the regular singular
    point, started with the Frobenius condition u ~ const, u' ~ 0
    (Pruefer phase pi/2).
    """
    if not (0 <= r_lo < r_hi):
        raise ValidationError("need 0 <= r_lo < r_hi")
    ball = r_lo == 0.0
    lo = max(r_lo, 1e-8 * r_hi) if ball else r_lo
    theta0 = 0.5 * math.pi if ball else 0.0

    def shot(lam):
        return _theta_end(M, lam, lo, r_hi, theta0)[0] - math.pi

    lam_hi = 1.0
    for _ in range(100):
        if shot(lam_hi) > 0:
            break
        lam_hi *= 4.0
    else:
        raise NoConvergence("no oscillation up to lambda = %g" % lam_hi,
                            history=[])
    lam_lo = 0.0
    while lam_hi - lam_lo > _BISECT_RTOL * lam_hi:
        lam_mid = 0.5 * (lam_lo + lam_hi)
        if shot(lam_mid) > 0:
            lam_hi = lam_mid
        else:
            lam_lo = lam_mid
    lam = 0.5 * (lam_lo + lam_hi)
    resid, n_nodes = _theta_end(M, lam, lo, r_hi, theta0)
    result = EigenResult(lam, "PrueferShooting",
                         mesh_meta={"nodes": int(n_nodes),
                                    "r_lo": r_lo, "r_hi": r_hi},
                         residual=abs(resid - math.pi))
    if cross_check:
        fd = _lambda1_fd(M, lo, r_hi, ball)
        result.mesh_meta["fd_lambda1"] = fd
        result.mesh_meta["fd_agrees"] = bool(
            abs(fd - lam) <= max(1e-6, 1e-3 * abs(lam)))
    return result


def _lambda1_fd(M, r_lo, r_hi, ball, n=4000):
    """Finite-difference cross-check in the symmetrized variable
    v = u sqrt(a); coefficients from log-density ratios so magnitudes
    beyond float range cancel."""
    x = np.linspace(r_lo, r_hi, n + 1)
    h = x[1] - x[0]
    mid = 0.5 * (x[:-1] + x[1:])
    la = np.asarray(M.log_area_density(x), dtype=float)
    lam_mid = np.asarray(M.log_area_density(mid), dtype=float)
    # c_{i+1/2} = a_{i+1/2}/sqrt(a_i a_{i+1}); d_i^pm = a_{i+-1/2}/a_i
    c = np.exp(np.clip(lam_mid - 0.5 * (la[:-1] + la[1:]), -700, 700))
    d_plus = np.exp(np.clip(lam_mid - la[:-1], -700, 700))
    d_minus = np.exp(np.clip(lam_mid - la[1:], -700, 700))
    # interior unknowns x[1..n-1]
    diag = (d_minus[:-1] + d_plus[1:]) / h ** 2
    off = -c[1:-1] / h ** 2
    if ball:
        # no-flux inner face: drop the inner-face coupling for the first
        # unknown (u extends evenly through the axis)
        diag = diag.copy()
        diag[0] = d_plus[1] / h ** 2
    vals = eigh_tridiagonal(diag, off, select="i",
                            select_range=(0, 0))[0]
    return float(vals[0])


def lambda1_exterior(M, R, atol=_EXT_ATOL):
    """lambda1 of M minus the closed ball of radius R, by annuli
    (R, R_out) with doubling R_out until the value stabilizes."""
    if R <= 0:
        raise ValidationError("need R > 0")
    R_out = 4.0 * R
    history = []
    prev = None
    for _ in range(_MAX_DOUBLINGS):
        lam = lambda1_interval(M, R, R_out, cross_check=False).lambda1
        history.append((R_out, lam))
        if prev is not None and abs(lam - prev) < atol:
            return EigenResult(lam, "PrueferShooting",
                               mesh_meta={"annuli": history,
                                          "R": R},
                               residual=abs(lam - prev))
        prev = lam
        R_out *= 2.0
    raise NoConvergence("exterior lambda1 still moving after "
                        f"{_MAX_DOUBLINGS} doublings", history=history)


def ess_spectrum_bottom(M, radii, atol=_EXT_ATOL):
    """sup over radii of lambda1(exterior); Unbounded when the sweep
    grows without stabilizing (discrete spectrum)."""
    radii = list(radii)
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValidationError("radii must be increasing")
    values = []
    for R in radii:
        values.append(lambda1_exterior(M, R, atol=atol).lambda1)
    monotone = all(b >= a - 1e-6 * max(abs(a), 1.0)
                   for a, b in zip(values, values[1:]))
    growing = (len(values) >= 3 and values[-1] > 2.0 * values[-3]
               and values[-1] > 10.0)
    bottom = math.inf if growing else max(values)
    return EssSpecReport(radii, values, bottom, monotone)


# --------------------------------------------------------------------------
# closed-form bounds
# --------------------------------------------------------------------------

def _sampling_margin(v, i0):
    """Safety margin for a grid infimum: the sampled variation in the
    cells around the minimizer (the grid could miss a dip of about the
    local inter-sample variation)."""
    lo = max(i0 - 2, 0)
    hi = min(i0 + 3, v.size)
    window = v[lo:hi]
    return float(np.max(window) - np.min(window))


def barta_bound(M, w, r_lo, r_hi, n_grid=20000):
    """Lower bound inf over (r_lo, r_hi) of div_f X - |X|^2 for the
    radial field X = w(r) d_r: w' + w * drift - w^2.

    Certified by sampling: a log-spaced grid plus local polish, minus a
    Lipschitz margin estimated from the sampled variation.
    """
    hi = min(r_hi, 1e8) if math.isinf(r_hi) else r_hi
    grid = np.geomspace(max(r_lo, 1e-8), hi, n_grid)

    def val(r):
        j = w.jet(r)
        return j.d1 + j.value * M.drift(r) - j.value ** 2

    with np.errstate(all="ignore"):
        v = np.asarray(val(grid), dtype=float)
    finite = np.isfinite(v)
    if not finite.any():
        raise DomainError("Barta integrand nowhere finite on the region")
    v, grid_f = v[finite], grid[finite]
    i0 = int(np.argmin(v))
    lo_b = grid_f[max(i0 - 1, 0)]
    hi_b = grid_f[min(i0 + 1, grid_f.size - 1)]
    res = minimize_scalar(lambda r: float(val(r)), bounds=(lo_b, hi_b),
                          method="bounded")
    raw = min(float(v[i0]), float(res.fun))
    if raw < -1e12:
        return BoundValue("BartaVector", -math.inf,
                          {"diagnostic": "UnboundedBelow"}, applicable=False)
    margin = _sampling_margin(v, i0)
    return BoundValue("BartaVector", raw - margin,
                      {"grid_inf": raw, "margin": margin,
                       "certified": "by-sampling",
                       "region": [r_lo, r_hi]})


def barta_function_bound(M, u, r_lo, r_hi, n_grid=20000):
    """Function form: lambda1 >= inf(-Delta_f u / u) for positive u,
    recovered through the vector field w = -u'/u."""
    hi = min(r_hi, 1e8) if math.isinf(r_hi) else r_hi
    grid = np.geomspace(max(r_lo, 1e-8), hi, n_grid)
    with np.errstate(all="ignore"):
        uv = np.asarray(eval_scalar(u.ast, grid, np), dtype=float)
    bad = uv <= 0
    if np.any(bad):
        # distinguish a genuine zero/sign change from mere underflow:
        # the structural log stays finite for positive underflowed values
        lv = np.asarray(log_value(u.ast, grid[bad]), dtype=float)
        if np.any(~np.isfinite(lv)) or np.any(uv < 0):
            # u vanishes inside the region: the quotient has no infimum
            return BoundValue("BartaFunction", -math.inf,
                              {"diagnostic": "UnboundedBelow",
                               "region": [r_lo, r_hi]}, applicable=False)
    # with L = log u:  -Delta_f u / u = -(L'' + L'^2 + drift * L'),
    # finite wherever u itself has left the floating range
    with np.errstate(all="ignore"):
        lj = log_jet(u.ast, grid)
        b = np.asarray(M.drift(grid), dtype=float)
        v = -(lj.d2 + lj.d1 * lj.d1 + b * lj.d1)
    finite = np.isfinite(v)
    if not finite.any():
        raise DomainError("Barta quotient nowhere finite on the region")
    v, grid_f = v[finite], grid[finite]
    i0 = int(np.argmin(v))
    raw = float(v[i0])
    margin = _sampling_margin(v, i0)
    return BoundValue("BartaFunction", raw - margin,
                      {"grid_inf": raw, "margin": margin,
                       "certified": "by-sampling",
                       "region": [r_lo, r_hi]})


def spaceform_model(kappa, dim):
    """The (dim)-dimensional simply connected spaceform of curvature
    -kappa (kappa >= 0: hyperbolic/flat) or +|kappa| for kappa < 0,
    as a model manifold."""
    if kappa == 0:
        return load_manifold({"dimension": dim, "g": "r", "f": "0",
                              "label": f"spaceform-flat-{dim}"})
    s = math.sqrt(abs(kappa))
    if kappa > 0:
        g = f"sinh({s!r}*r)/{s!r}"
    else:
        # positive curvature: g changes sign past the pole, so skip the
        # global positivity validation and rely on the caller's R check
        g = f"sin({s!r}*r)/{s!r}"
        return ModelManifold(m=dim, g=parse_expr(g), f=parse_expr("0"),
                             label=f"spaceform-{kappa:g}-{dim}")
    return load_manifold({"dimension": dim, "g": g, "f": "0",
                          "label": f"spaceform-{kappa:g}-{dim}"})


def cheng_upper_bound(alpha, beta, m, R):
    """Upper bound for lambda1 of the ball of radius R: the first
    Dirichlet eigenvalue of the R-ball in the (m+1)-dimensional
    spaceform of curvature -(alpha+beta)/m."""
    if alpha < 0 or beta < 0 or R <= 0:
        raise ValidationError("need alpha, beta >= 0 and R > 0")
    kappa = (alpha + beta) / m
    model = spaceform_model(kappa, m + 1)
    lam = lambda1_interval(model, 0.0, R, cross_check=False).lambda1
    return BoundValue("Cheng", lam,
                      {"alpha": alpha, "beta": beta, "m": m, "R": R,
                       "spaceform_curvature": -kappa})


def ricci_f_radial(M, r):
    """Radial eigenvalue of the Bakry-Emery tensor on a model:
    -(m-1) g''/g + f''."""
    gj = M.g.jet(r)
    fj = M.f.jet(r)
    return -(M.m - 1) * gj.d2 / gj.value + fj.d2


def ricci_f_tangential(M, r):
    """Tangential eigenvalue: -g''/g + (m-2)(1 - g'^2)/g^2 + f' g'/g."""
    gj = M.g.jet(r)
    fj = M.f.jet(r)
    return (-gj.d2 / gj.value
            + (M.m - 2) * (1.0 - gj.d1 ** 2) / gj.value ** 2
            + fj.d1 * gj.d1 / gj.value)


def qian_drift_bound(kind, r, m, k=0.0, C=0.0, k1=None, k2=None,
                     d_op=0.0, profile=None):
    """The three drift comparison bounds.

    I:   C + (m-1)/r + k^2 r
    II:  m g'(r)/g(r) with g the comparison profile for (k1, k2)
    III: (m-1)/r + (1/3)(k + 2 C) r + C (1 + d_op)
    """
    if r <= 0:
        raise ValidationError("need r > 0")
    if kind == "I":
        value = C + (m - 1) / r + k * k * r
        meta = {"k": k, "C": C}
    elif kind == "II":
        from .radial_ode import comparison_g
        if profile is None:
            if k1 is None or k2 is None:
                raise ValidationError("kind II needs k1, k2")
            profile = comparison_g(k1, k2, m, r_max=max(2.0 * r, 1.0))
        from scipy.interpolate import CubicSpline
        psi = float(CubicSpline(profile.grid, profile.psi_values)(r))
        value = m * psi
        meta = {"psi": psi}
    elif kind == "III":
        value = (m - 1) / r + (k + 2.0 * C) * r / 3.0 + C * (1.0 + d_op)
        meta = {"k": k, "C": C, "d_op": d_op}
    else:
        raise ValidationError(f"unknown kind {kind!r}")
    return BoundValue(f"Qian{kind}", value, {"r": r, "m": m, **meta})


def half_drift_squared_bound(M, R, n_grid=20000, r_cap=1e6):
    """c^2/4 with c = inf_{r > R} |drift|, valid when the drift keeps a
    constant sign on (R, infinity); otherwise Inapplicable."""
    grid = np.geomspace(R, r_cap, n_grid)
    with np.errstate(all="ignore"):
        b = np.asarray(M.drift(grid), dtype=float)
    b = b[np.isfinite(b)]
    if b.size == 0:
        raise DomainError("drift nowhere finite beyond R")
    if np.any(b > 0) and np.any(b < 0):
        return BoundValue("HalfDriftSquared", 0.0,
                          {"R": R, "diagnostic": "sign change"},
                          applicable=False)
    c = float(np.min(np.abs(b)))
    return BoundValue("HalfDriftSquared", 0.25 * c * c, {"R": R, "c": c})


def brooks_vs_ess(M, radii=(1.0, 2.0, 4.0), atol=_EXT_ATOL):
    """Consistency record: bottom of the essential spectrum against the
    Brooks volume-growth upper bound."""
    from .integrability import brooks_bound
    brooks = brooks_bound(M)
    if math.isinf(brooks):
        return {"status": "skipped",
                "reason": "Brooks bound infinite (volume growth)",
                "brooks": brooks}
    try:
        report = ess_spectrum_bottom(M, radii, atol=atol)
    except NoConvergence as exc:
        return {"status": "skipped", "reason": str(exc),
                "brooks": brooks}
    if report.unbounded or math.isinf(brooks):
        return {"status": "skipped",
                "reason": "Unbounded side present",
                "brooks": brooks,
                "ess_bottom": ("Unbounded" if report.unbounded
                               else report.bottom_estimate)}
    ok = report.bottom_estimate <= brooks + 1e-6
    return {"status": "checked", "consistent": bool(ok),
            "ess_bottom": report.bottom_estimate, "brooks": brooks}


def semilinear_inf_bound(a, b, sigma, ess_bottom):
    """inf of a positive exterior solution of Delta_f u <= a u - b u^sigma
    is at most ((a + ess_bottom)/b)^{1/(sigma-1)}; a negative numerator
    certifies that no such solution exists."""
    if b <= 0 or sigma <= 1:
        raise ValidationError("need b > 0 and sigma > 1")
    num = a + ess_bottom
    if num < 0:
        return BoundValue("SemilinearInf", math.nan,
                          {"a": a, "b": b, "sigma": sigma,
                           "ess_bottom": ess_bottom,
                           "certificate": "NonExistence"},
                          applicable=False)
    value = (num / b) ** (1.0 / (sigma - 1.0))
    return BoundValue("SemilinearInf", value,
                      {"a": a, "b": b, "sigma": sigma,
                       "ess_bottom": ess_bottom})


def prop40_bound(a, b, sigma, c, R):
    """(a/b + (c/b)(1 + R^2)/R^2)^{1/(sigma-1)}, an infimum bound over
    balls of radius R; ``c`` is the fitted constant (see fitted_c)."""
    if b <= 0 or sigma <= 1 or R <= 0:
        raise ValidationError("need b > 0, sigma > 1, R > 0")
    value = (a / b + (c / b) * (1.0 + R * R) / (R * R)) \
        ** (1.0 / (sigma - 1.0))
    return BoundValue("Prop40", value,
                      {"a": a, "b": b, "sigma": sigma, "c": c, "R": R})


def prop40_fitted_c(mu, beta, m, R):
    """Constant for prop40_bound, normalized from the Cheng value:
    c = lambda1(spaceform ball of radius R) * R^2 / (1 + R^2)."""
    cheng = cheng_upper_bound(mu, beta, m, R)
    return cheng.value * R * R / (1.0 + R * R)
