"""Radial ODE certificates: the alpha-function, minimal exterior
solutions, comparison Cauchy problems, Riccati crossings, semilinear
exterior problems, and truncated heat-mass evolution.

Everything here works on the half-line operator u'' + drift(r) u' with
drift = (m-1) g'/g - f'.  Two-point problems are solved by exhaustion
(outer Dirichlet value 0, outer radius doubled until the restriction to
the evaluation window stops moving), Cauchy problems by adaptive RK with
a Riccati-substitution fallback where the direct variables overflow.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from ._density import DensityIntegrals
from .errors import (NoConvergence, QuadratureError, ShootingFailure,
                     ValidationError)

_EXHAUST_TOL = 1e-8
_MAX_DOUBLINGS = 40
_RK_KW = dict(method="DOP853", rtol=1e-12, atol=1e-12)


@dataclass
class RadialProfile:
    """A radial solution sampled on a strictly increasing grid."""

    grid: np.ndarray
    values: np.ndarray
    derivative_values: np.ndarray
    bc_meta: str = ""
    converged: bool = True
    history: list = field(default_factory=list)
    log_values: np.ndarray | None = None   # set when values overflow

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.derivative_values = np.asarray(self.derivative_values,
                                            dtype=float)
        if not np.all(np.diff(self.grid) > 0):
            raise ValidationError("profile grid must be strictly increasing")
        self._spline = None

    def __call__(self, r):
        if self._spline is None:
            self._spline = CubicSpline(self.grid, self.values)
        return self._spline(r)

    def is_monotone(self, direction="nonincreasing", tol=0.0):
        d = np.diff(self.values)
        if direction == "nonincreasing":
            return bool(np.all(d <= tol))
        return bool(np.all(d >= -tol))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["r", "value", "derivative"])
            for r, v, dv in zip(self.grid, self.values,
                                self.derivative_values):
                w.writerow([repr(float(r)), repr(float(v)),
                            repr(float(dv))])

    def to_dict(self):
        return {"grid": self.grid.tolist(), "values": self.values.tolist(),
                "derivative_values": self.derivative_values.tolist(),
                "bc_meta": self.bc_meta, "converged": self.converged,
                "history": self.history}


@dataclass
class CrossingReport:
    r_o: float | None                    # first radius with psi = k
    psi_tail_ok: bool
    samples: list                        # (r, psi(r), k(r)) triples
    liminf_value: float | None = None    # sampled inf of k * (int a_g)/a_g
    diagnostic: str = ""

    @property
    def found(self):
        return self.r_o is not None

    def to_dict(self):
        return {"r_o": self.r_o, "psi_tail_ok": self.psi_tail_ok,
                "liminf_value": self.liminf_value,
                "diagnostic": self.diagnostic,
                "samples": [[float(a), float(b), float(c)]
                            for a, b, c in self.samples]}


@dataclass
class SupportReport:
    classification: str          # DecaysToZero | CompactSupport | BoundedAway
    r_dead: float | None = None
    shoot_slope: float | None = None
    trace: list = field(default_factory=list)

    def to_dict(self):
        return {"classification": self.classification, "r_dead": self.r_dead,
                "shoot_slope": self.shoot_slope, "trace": self.trace}


@dataclass
class MassCurve:
    times: np.ndarray
    mass: np.ndarray
    truncation_radius: float
    leakage_estimate: float

    def mass_at(self, t):
        return float(np.interp(t, self.times, self.mass))

    def to_dict(self):
        return {"times": self.times.tolist(), "mass": self.mass.tolist(),
                "truncation_radius": self.truncation_radius,
                "leakage_estimate": self.leakage_estimate}


# --------------------------------------------------------------------------
# alpha function
# --------------------------------------------------------------------------

def alpha_function(M, r):
    """alpha(r) = int_0^r (int_0^t a)/a(t) dt; solves Delta_f alpha = 1.

    ``r`` may be ``inf`` when the ratio integral converges (its value is
    then the finiteness certificate u* for stochastic incompleteness).
    """
    if not r > 0:
        raise ValidationError("alpha_function needs r > 0")
    D = DensityIntegrals(M)

    def log_ratio(t):
        # direct quadrature when the density is representable (much more
        # accurate than the panel decomposition), log-space otherwise
        try:
            cum, _ = integrate.quad(M.area_density, 0.0, t,
                                    epsabs=0.0, epsrel=1e-11, limit=200)
            if cum > 0 and np.isfinite(cum):
                return math.log(cum) - math.log(M.area_density(t))
        except Exception:
            pass
        return D.log_cum(t) - D.log_density(t)

    def ratio(t):
        return math.exp(min(log_ratio(t), 700.0))

    if math.isinf(r):
        from .integrability import classify_integral
        verdict = classify_integral(ratio, lower=1.0)
        if verdict.state != "Convergent":
            raise QuadratureError(
                f"alpha(inf) requested but the ratio integral is "
                f"{verdict.state}")
        head, _ = integrate.quad(ratio, 0.0, 1.0, epsabs=1e-12, epsrel=1e-10)
        return head + verdict.value
    val, err = integrate.quad(ratio, 0.0, r, epsabs=1e-12, epsrel=1e-9,
                              limit=300)
    if not np.isfinite(val) or err > 1e-5 * max(val, 1e-3):
        raise QuadratureError(f"alpha({r}) not resolvable (err={err:g})")
    return val


# --------------------------------------------------------------------------
# minimal exterior solutions (exhaustion)
# --------------------------------------------------------------------------

def _drift_array(M, r):
    return np.asarray(M.drift(np.asarray(r, dtype=float)), dtype=float)


def _exterior_two_point(M, lam, R0, Rk, eval_grid):
    """Solve h'' + drift h' = lam h on [R0, Rk], h(R0)=1, h(Rk)=0.

    The problem is linear, so a single inward integration from
    (h, h') = (0, -1) at Rk followed by normalization at R0 produces the
    two-point solution.  Inward is the stable direction (the mode that
    explodes outward decays inward) and segment-wise renormalization
    keeps the magnitudes representable for arbitrarily large Rk.
    Returns (log h, h'/h) sampled on the eval grid restricted to [R0, Rk].
    """
    pts = np.unique(np.concatenate([
        np.geomspace(R0, Rk, 160),
        eval_grid[(eval_grid >= R0) & (eval_grid <= Rk)],
        [R0, Rk],
    ]))[::-1]                    # descending: integrate inward

    def rhs(r, y):
        b = float(M.drift(r))
        return [y[1], lam * y[0] - b * y[1]]

    y = np.array([0.0, -1.0])
    log_scale = 0.0
    out = {}                     # r -> (log|h|, h'/h)
    for a, b_ in zip(pts[:-1], pts[1:]):
        sol = integrate.solve_ivp(rhs, (a, b_), y, method="LSODA",
                                  rtol=1e-10, atol=1e-13)
        if sol.status != 0:
            raise NoConvergence(
                f"inward sweep failed on [{b_:g}, {a:g}]: {sol.message}",
                history=[])
        y = sol.y[:, -1]
        s = max(abs(y[0]), abs(y[1]))
        if s > 0:
            y = y / s
            log_scale += math.log(s)
        if y[0] != 0:
            out[b_] = (log_scale + math.log(abs(y[0])), y[1] / y[0])
    log_h0, _ = out[pts[-1]]
    rs = np.array(sorted(out))
    logh = np.array([out[r][0] for r in rs]) - log_h0
    ratio = np.array([out[r][1] for r in rs])
    return rs, logh, ratio


def minimal_exterior_solution(M, lam, R0, r_eval_max, n_grid=400):
    """Minimal positive h with h'' + drift h' = lam h outside B_{R0},
    h(R0) = 1, built by exhaustion with outer Dirichlet value 0."""
    if lam <= 0 or R0 <= 0:
        raise ValidationError("need lam > 0 and R0 > 0")
    if r_eval_max <= R0:
        raise ValidationError("r_eval_max must exceed R0")
    eval_grid = np.geomspace(R0, r_eval_max, n_grid)
    Rk = max(2.0 * r_eval_max, 4.0 * R0)
    history = []
    prev_vals = None
    for _ in range(_MAX_DOUBLINGS):
        rs, logh, ratio = _exterior_two_point(M, lam, R0, Rk, eval_grid)
        with np.errstate(over="ignore"):
            hs = np.exp(np.minimum(logh, 0.0))
        vals = np.interp(eval_grid, rs, hs)
        if prev_vals is not None:
            delta = float(np.max(np.abs(vals - prev_vals)))
            history.append((Rk, delta))
            if delta < _EXHAUST_TOL:
                dvals = vals * np.interp(eval_grid, rs, ratio)
                return RadialProfile(
                    eval_grid, np.clip(vals, 0.0, 1.0), dvals,
                    bc_meta=f"h({R0:g})=1, exhaustion to R={Rk:g}, "
                            f"lam={lam:g}",
                    converged=True, history=history)
        else:
            history.append((Rk, math.nan))
        prev_vals = vals
        Rk *= 2.0
    raise NoConvergence(
        "exterior exhaustion still moving after "
        f"{_MAX_DOUBLINGS} doublings", history=history)


# --------------------------------------------------------------------------
# comparison Cauchy problem and Riccati crossing
# --------------------------------------------------------------------------

def _combined_ksq(k1, k2, m):
    def ksq(r):
        return (k1(r) ** 2 + k2(r) ** 2) / m
    return ksq


def comparison_g(k1, k2, m, r_max=10.0, n_grid=400):
    """Solve g'' = ((k1^2 + k2^2)/m) g, g(0)=0, g'(0)=1.

    Returns the profile with psi = g'/g attached as ``psi_values``.  When
    g overflows, integration restarts in the Riccati variables
    (phi = g'/g - 1/r, A = log(g/r)) and values are stored in log form.
    """
    ksq = _combined_ksq(k1, k2, m)
    r0 = 1e-8
    grid = np.geomspace(r0, r_max, n_grid)

    def rhs(r, y):
        return [y[1], ksq(r) * y[0]]

    def too_big(r, y):
        return abs(y[0]) - 1e150
    too_big.terminal = True

    sol = integrate.solve_ivp(rhs, (r0, r_max), [r0, 1.0], t_eval=grid,
                              events=too_big, **_RK_KW)
    if sol.status == 0:
        g = sol.y[0]
        dg = sol.y[1]
        prof = RadialProfile(grid, g, dg,
                             bc_meta="g(0)=0, g'(0)=1 (direct IVP)")
        prof.psi_values = dg / g
        return prof

    # Riccati fallback: phi = g'/g - 1/r removes the origin singularity,
    # A = log(g/r) carries the magnitude (dA/dr = phi exactly)
    def rhs_ric2(r, y):
        phi = y[1]
        rr = max(r, 1e-300)
        return [phi, ksq(r) - phi * phi - 2.0 * phi / rr]

    sol = integrate.solve_ivp(rhs_ric2, (r0, r_max), [0.0, 0.0],
                              t_eval=grid, **_RK_KW)
    if sol.status != 0:
        raise NoConvergence(f"comparison IVP failed: {sol.message}",
                            history=[])
    A = sol.y[0]
    phi = sol.y[1]
    log_g = np.log(grid) + A
    psi = phi + 1.0 / grid
    with np.errstate(over="ignore"):
        g = np.exp(np.minimum(log_g, 709.0))
    prof = RadialProfile(grid, g, psi * g,
                         bc_meta="g(0)=0, g'(0)=1 (Riccati form)",
                         log_values=log_g)
    prof.psi_values = psi
    return prof


def riccati_crossing(k, m, r_max=1e4, n_samples=200, r0=1e-6, phi0=0.0):
    """First r_o with psi(r_o) = k(r_o) for psi' + psi^2 = k^2,
    psi ~ 1/r at 0+, plus the tail check psi <= k beyond and the
    liminf bound k (int_0^r g^m)/g^m >= 1/m.

    ``r0`` and ``phi0`` perturb the starting point of the regularized
    variable phi = psi - 1/r (the crossing should be insensitive)."""

    def ksq(r):
        return k(r) ** 2

    # phi = psi - 1/r, regular at the origin
    def rhs(r, y):
        phi = y[0]
        return [ksq(r) - phi * phi - 2.0 * phi / r]

    def cross(r, y):
        return (y[0] + 1.0 / r) - k(r)
    cross.terminal = True
    cross.direction = -1

    sol = integrate.solve_ivp(rhs, (r0, r_max), [phi0], events=cross,
                              dense_output=True, **_RK_KW)
    samples = []
    if sol.t_events[0].size == 0:
        rs = np.geomspace(1.0, sol.t[-1], 40)
        for r in rs:
            phi = float(sol.sol(r)[0])
            samples.append((r, phi + 1.0 / r, float(k(r))))
        return CrossingReport(None, False, samples,
                              diagnostic=f"no crossing before r={r_max:g}")
    r_o = float(sol.t_events[0][0])

    # continue past r_o and check psi stays below k
    phi_o = float(sol.y_events[0][0][0])
    sol2 = integrate.solve_ivp(rhs, (r_o, min(4.0 * r_o, r_max)), [phi_o],
                               dense_output=True, **_RK_KW)
    tail_ok = True
    max_gap = 0.0
    for r in np.linspace(r_o, sol2.t[-1], n_samples):
        phi = float(sol2.sol(r)[0])
        psi = phi + 1.0 / r
        kv = float(k(r))
        samples.append((r, psi, kv))
        max_gap = max(max_gap, kv - psi)
        if psi > kv * (1.0 + 1e-6) + 1e-12:
            tail_ok = False
    if max_gap < 1e-8 * max(1.0, float(k(r_o))):
        # psi merely decays onto k from above (e.g. constant k, where
        # psi = k coth(kr)): asymptotic tangency, not a crossing
        return CrossingReport(None, False, samples,
                              diagnostic="asymptotic tangency, no "
                                         "transversal crossing")

    # liminf check with a_g = g^m for g'' = k^2 g (passing k in both
    # slots with divisor 2 gives (k^2 + k^2)/2 = k^2)
    r_hi = min(10.0 * r_o + 10.0, 50.0)
    prof = comparison_g(k, k, 2, r_max=r_hi, n_grid=800)
    lg = prof.log_values if prof.log_values is not None \
        else np.log(prof.values)
    log_ag = m * lg
    # trapezoid in log space over the profile grid
    x = prof.grid
    pieces = np.logaddexp(log_ag[1:], log_ag[:-1]) + np.log(
        0.5 * np.diff(x))
    cum = np.concatenate(([-np.inf],
                          np.logaddexp.accumulate(pieces)))
    lo = max(r_o, 0.5 * r_hi)
    with np.errstate(all="ignore"):
        vals = [float(k(x[i])) * math.exp(min(cum[i] - log_ag[i], 700.0))
                for i in range(len(x)) if x[i] >= lo]
    liminf = min(vals) if vals else None

    return CrossingReport(r_o, tail_ok, samples, liminf_value=liminf,
                          diagnostic="crossing located by event detection")


# --------------------------------------------------------------------------
# semilinear exterior problems
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerLaw:
    """Lambda(u) = a u^exponent + b u."""
    exponent: float
    a: float = 1.0
    b: float = 0.0

    def __call__(self, u):
        return self.a * u ** self.exponent + self.b * u


def _validate_rhs(Lam, u0):
    if abs(Lam(0.0)) > 1e-12:
        raise ValidationError("rhs must satisfy Lambda(0) = 0")
    probe = np.geomspace(1e-8 * u0, u0, 50)
    vals = np.array([Lam(u) for u in probe])
    if np.any(vals <= 0):
        raise ValidationError("rhs must be positive on (0, u0]")


def _integrate_semilinear(M, Lam, R0, u0, slope, r_stop):
    """Integrate outward until u hits 0, u turns back above u0, or r_stop."""
    def rhs(r, y):
        b = float(M.drift(r))
        return [y[1], Lam(max(y[0], 0.0)) - b * y[1]]

    def hit_zero(r, y):
        return y[0]
    hit_zero.terminal = True
    hit_zero.direction = -1

    def blow_up(r, y):
        return y[0] - 2.0 * u0
    blow_up.terminal = True
    blow_up.direction = 1

    sol = integrate.solve_ivp(rhs, (R0, r_stop), [u0, slope],
                              events=(hit_zero, blow_up),
                              dense_output=True, **_RK_KW)
    if sol.t_events[0].size:
        r_hit = float(sol.t_events[0][0])
        du = float(sol.y_events[0][0][1])
        return "zero", r_hit, du, sol
    if sol.t_events[1].size:
        return "grew", float(sol.t_events[1][0]), None, sol
    return "ran", float(sol.t[-1]), float(sol.y[0, -1]), sol


def semilinear_exterior(M, rhs, R0, u0, r_max=None):
    """Decaying-branch solution of u'' + drift u' = Lambda(u),
    u(R0) = u0, selected by shooting on u'(R0)."""
    Lam = rhs if callable(rhs) else PowerLaw(*rhs)
    _validate_rhs(Lam, u0)
    if r_max is None:
        r_max = 200.0 * R0

    # bracket the decaying slope: s_hi grows the solution, s_lo kills it
    s_hi = 0.0
    kind, _, _, _ = _integrate_semilinear(M, Lam, R0, u0, s_hi, r_max)
    if kind == "zero":
        raise ShootingFailure("flat start already undershoots",
                              trace=[(s_hi, kind)])
    s_lo = -max(u0 / R0, 1.0)
    trace = []
    for _ in range(60):
        kind, r_end, _, _ = _integrate_semilinear(M, Lam, R0, u0, s_lo, r_max)
        trace.append((s_lo, kind, r_end))
        if kind == "zero":
            break
        if kind == "ran":
            # entire family stays positive: bounded-away regime
            break
        s_lo *= 2.0
    else:
        raise ShootingFailure("could not bracket the decaying branch",
                              trace=trace)

    if kind == "ran":
        # even the steepest probed slope stays positive on [R0, r_max]
        _, _, _, sol = _integrate_semilinear(M, Lam, R0, u0, s_lo, r_max)
        grid = np.geomspace(R0, sol.t[-1], 400)
        y = sol.sol(grid)
        prof = RadialProfile(grid, y[0], y[1],
                             bc_meta=f"u({R0:g})={u0:g}, slope {s_lo:g}")
        return prof, SupportReport("BoundedAway", shoot_slope=s_lo,
                                   trace=trace)

    # bisect between s_lo (hits zero) and s_hi (grows)
    hit_radii = []
    for _ in range(80):
        s_mid = 0.5 * (s_lo + s_hi)
        kind, r_end, _, _ = _integrate_semilinear(M, Lam, R0, u0, s_mid,
                                                  r_max)
        trace.append((s_mid, kind, r_end))
        if kind == "zero":
            s_lo = s_mid
            hit_radii.append(r_end)
        elif kind == "grew":
            s_hi = s_mid
        else:  # survived to r_max without growing: follow where it sits
            tail = _integrate_semilinear(M, Lam, R0, u0, s_mid, r_max)[3]
            u_end = float(tail.y[0, -1])
            if u_end > 0.05 * u0:
                grid = np.geomspace(R0, r_max, 400)
                y = tail.sol(grid)
                prof = RadialProfile(grid, y[0], y[1],
                                     bc_meta=f"u({R0:g})={u0:g}")
                return prof, SupportReport("BoundedAway",
                                           shoot_slope=s_mid, trace=trace)
            s_hi = s_mid
        if s_hi - s_lo < 1e-15 * max(1.0, abs(s_lo)):
            break

    # classify: compact support iff the hit radius has stabilized
    s_star = s_lo
    kind, r_dead, du, sol = _integrate_semilinear(M, Lam, R0, u0, s_star,
                                                  r_max)
    if kind != "zero":
        raise ShootingFailure("bracket collapsed on the wrong side",
                              trace=trace)
    # strong inward drift makes outward shooting unstable: once bisection
    # resolution is exhausted the trajectory crashes off a positive
    # plateau in a blink.  A healthy decay has already reached small
    # values well before the hit radius; a plateau has not.
    u_near = float(sol.sol(R0 + 0.9 * (r_dead - R0))[0])
    if u_near > 0.05 * u0:
        r_cut = R0 + 0.85 * (r_dead - R0)
        grid = np.geomspace(R0, r_cut, 400)
        y = sol.sol(grid)
        prof = RadialProfile(grid, np.clip(y[0], 0.0, None), y[1],
                             bc_meta=f"u({R0:g})={u0:g}, shooting slope "
                                     f"{s_star:.12g} (plateau regime)")
        return prof, SupportReport("BoundedAway", shoot_slope=s_star,
                                   trace=trace)
    grid = np.geomspace(R0, r_dead, 400)
    y = sol.sol(grid)
    y[0] = np.clip(y[0], 0.0, None)
    prof = RadialProfile(grid, y[0], y[1],
                         bc_meta=f"u({R0:g})={u0:g}, shooting slope "
                                 f"{s_star:.12g}")
    recent = [r for s, k_, r in trace[-8:] if k_ == "zero"]
    stable = (len(recent) >= 3
              and max(recent) - min(recent) < 0.01 * max(recent))
    if stable and r_dead < 0.9 * r_max:
        report = SupportReport("CompactSupport", r_dead=r_dead,
                               shoot_slope=s_star, trace=trace)
    else:
        report = SupportReport("DecaysToZero", shoot_slope=s_star,
                               trace=trace)
    return prof, report


# --------------------------------------------------------------------------
# heat mass (truncated Fokker-Planck evolution)
# --------------------------------------------------------------------------

def _bernoulli(x):
    """B(x) = x / (e^x - 1), the Scharfetter-Gummel weight."""
    x = np.clip(x, -700.0, 700.0)
    out = np.empty_like(x)
    small = np.abs(x) < 1e-8
    out[small] = 1.0 - 0.5 * x[small]
    xs = x[~small]
    out[~small] = xs / np.expm1(xs)
    return out


def heat_mass(M, r_init, T, R_trunc, n_space=1200, n_time=400):
    """Evolve the radial mass density p = u * a with an implicit
    Scharfetter-Gummel scheme; reflecting wall at r = 1e-4, absorbing
    boundary at R_trunc.  Returns the mass-in-window curve."""
    if not (0 < r_init < R_trunc):
        raise ValidationError("need 0 < r_init < R_trunc")
    r_lo = 1e-4
    x = np.linspace(r_lo, R_trunc, n_space)
    h = x[1] - x[0]
    width = R_trunc / 200.0
    p = np.exp(-0.5 * ((x - r_init) / width) ** 2)
    p /= np.sum(p) * h

    if T == 0:
        return MassCurve(np.array([0.0]), np.array([1.0]), R_trunc, 0.0)

    # drift at cell interfaces; p' = -(dJ/dx), J = (1/h)(B(-w) p_i - B(w) p_{i+1})
    xm = 0.5 * (x[:-1] + x[1:])
    with np.errstate(all="ignore"):
        b = np.asarray(M.drift(xm), dtype=float)
    b[~np.isfinite(b)] = 0.0
    w = b * h
    Bm = _bernoulli(-w)          # weight on the left cell
    Bp = _bernoulli(w)           # weight on the right cell

    dt = T / n_time
    n = n_space
    # implicit Euler: (I - dt L) p_new = p_old with L tridiagonal.
    # Interface flux J_{i+1/2} = (1/h)(B(-w) p_i - B(w) p_{i+1});
    # reflecting at the inner face (no flux), absorbing ghost value 0
    # beyond the outer face.
    coef = dt / (h * h)
    diag = np.ones(n)
    diag[:-1] += coef * Bm
    diag[1:] += coef * Bp
    upper = -coef * Bp
    lower = -coef * Bm
    # absorbing outer boundary: cell n-1 also leaks through the outer face
    w_out = float(np.clip(b[-1] * h, -700, 700))
    diag[-1] += coef * _bernoulli(np.array([-w_out]))[0]

    ab = np.zeros((3, n))
    ab[0, 1:] = upper
    ab[1, :] = diag
    ab[2, :-1] = lower
    from scipy.linalg import solve_banded

    times = np.linspace(0.0, T, n_time + 1)
    mass = np.empty(n_time + 1)
    mass[0] = float(np.sum(p) * h)
    for step in range(1, n_time + 1):
        p = solve_banded((1, 1), ab, p)
        p = np.clip(p, 0.0, None)
        mass[step] = float(np.sum(p) * h)
    mass0 = mass[0]
    mass = mass / mass0
    return MassCurve(times, mass, R_trunc,
                     leakage_estimate=float(1.0 - mass[-1]))
