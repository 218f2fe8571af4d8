"""Convergence classifiers for the integrals deciding stochastic
completeness and the Feller property, plus the volume-growth bounds.

All criteria are evaluated on the weighted density a(r) = g^{m-1} e^{-f}
(flagged in reports as "weighted-density criterion"); passing ``n`` runs
the same tests with exponent n-1 instead ("comparison mode").

Verdicts are heuristic and tri-state: partial integrals are accumulated on
a geometric octave grid and the increment pattern decides Convergent /
Divergent / Inconclusive, with the evidence trail kept on the verdict.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from ._density import DensityIntegrals, R_HARD_MAX
from .errors import WmlError
from .radial_expr import log_value

MAX_OCTAVES = 60
DIVERGENCE_CAP = 1e12
TAIL_REL_TOL = 1e-6
RATIO_CEILING = 0.9
_STALL_FLOOR = 1e-15


@dataclass
class IntegrabilityVerdict:
    state: str                      # "Convergent" | "Divergent" | "Inconclusive"
    partial_values: list = field(default_factory=list)   # [(R, I(R)), ...]
    tail_estimate: float | None = None
    diagnostic: str = ""

    @property
    def value(self):
        """Best estimate of the full integral (Convergent verdicts only)."""
        if self.state != "Convergent" or not self.partial_values:
            return None
        return self.partial_values[-1][1] + (self.tail_estimate or 0.0)

    def to_dict(self):
        return {"state": self.state,
                "partial_values": [[float(a), float(b)]
                                   for a, b in self.partial_values],
                "tail_estimate": self.tail_estimate,
                "diagnostic": self.diagnostic}


@dataclass
class ClassificationReport:
    property: str                   # "StochasticCompleteness" | "Feller"
    verdict: str                    # "Yes" | "No" | "Unknown"
    criteria_evidence: list = field(default_factory=list)
    rule_fired: str = ""
    notes: str = "weighted-density criterion"
    u_star: float | None = None     # finite explosion functional, SC=No only

    def to_dict(self):
        return {"property": self.property, "verdict": self.verdict,
                "rule_fired": self.rule_fired, "notes": self.notes,
                "u_star": self.u_star,
                "criteria_evidence": [v.to_dict()
                                      for v in self.criteria_evidence]}


def _octave_integral(fn, x0, x1):
    import warnings
    with warnings.catch_warnings():
        # roundoff chatter from quad on near-flat octaves is expected;
        # the octave classifier judges convergence itself
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _err = integrate.quad(fn, x0, x1, epsabs=0.0, epsrel=1e-10,
                                   limit=200)
    return val


def classify_integral(integrand, lower, tail="AtInfinity",
                      max_octaves=MAX_OCTAVES):
    """Tri-state convergence verdict for int of ``integrand``.

    ``tail`` is "AtInfinity" (integrate [lower, inf)) or "AtZeroPlus"
    (integrate (0, lower]).  Octaves are geometric with factor 2.
    """
    toward_zero = tail == "AtZeroPlus"
    partials = []
    increments = []
    total = 0.0
    stalled = 0
    diagnostic = ""
    for j in range(max_octaves):
        if toward_zero:
            x0, x1 = lower * 2.0 ** (-(j + 1)), lower * 2.0 ** (-j)
            frontier = x0
        else:
            x0, x1 = lower * 2.0 ** j, lower * 2.0 ** (j + 1)
            frontier = x1
        try:
            with np.errstate(all="ignore"):
                inc = _octave_integral(integrand, x0, x1)
        except WmlError as exc:
            return IntegrabilityVerdict(
                "Inconclusive", partials, None,
                f"integrand evaluation failed on octave {j}: {exc}")
        except (OverflowError, ZeroDivisionError) as exc:
            return IntegrabilityVerdict(
                "Inconclusive", partials, None,
                f"integrand evaluation failed on octave {j}: {exc}")
        if not np.isfinite(inc):
            total = math.inf
            partials.append((frontier, total))
            return IntegrabilityVerdict(
                "Divergent", partials, None,
                f"octave {j} integral not finite")
        total += inc
        increments.append(inc)
        partials.append((frontier, total))
        if total > DIVERGENCE_CAP:
            return IntegrabilityVerdict(
                "Divergent", partials, None,
                f"partial integral exceeded {DIVERGENCE_CAP:g}")
        # divergence: increments not vanishing over 8 consecutive octaves
        if len(increments) >= 8 and increments[-1] > _STALL_FLOOR * max(total, 1e-300):
            recent = increments[-8:]
            if all(recent[i + 1] >= recent[i] * (1.0 - 1e-9)
                   for i in range(7)):
                return IntegrabilityVerdict(
                    "Divergent", partials, None,
                    "increments non-decreasing over 8 octaves "
                    f"(last increment {recent[-1]:.3g})")
        # stalled at round-off: converged
        if total > 0 and inc <= _STALL_FLOOR * total:
            stalled += 1
            if stalled >= 2:
                return IntegrabilityVerdict(
                    "Convergent", partials, inc,
                    "increments at round-off level")
        else:
            stalled = 0
        # geometric decay: converged once the projected tail is negligible,
        # or once the increment ratio has been stably below 0.9 for long
        # enough that the geometric model is trustworthy
        if len(increments) >= 4 and increments[-2] > 0:
            window = min(len(increments) - 1, 10)
            ratios = [increments[i + 1] / increments[i]
                      for i in range(len(increments) - 1 - window,
                                     len(increments) - 1)
                      if increments[i] > 0]
            recent = ratios[-3:]
            if len(recent) == 3 and all(rho < RATIO_CEILING for rho in recent):
                rho = max(recent)
                tail_est = increments[-1] * rho / (1.0 - rho)
                tight = total > 0 and tail_est < TAIL_REL_TOL * total
                stable_run = (len(ratios) >= 10
                              and all(r < RATIO_CEILING for r in ratios)
                              and max(ratios) - min(ratios) < 0.05)
                if tight or stable_run:
                    return IntegrabilityVerdict(
                        "Convergent", partials, tail_est,
                        f"increment ratio stabilized at {rho:.3g}"
                        + ("" if tight else
                           " (geometric model over 10 octaves)"))
    return IntegrabilityVerdict(
        "Inconclusive", partials, None,
        diagnostic or f"no verdict after {max_octaves} octaves")


class _ComparisonDensity:
    """Density adapter with exponent n-1 in place of m-1 (comparison mode)."""

    def __init__(self, M, n):
        self._M = M
        self.m = n

    def log_area_density(self, r):
        r = np.asarray(r, dtype=float)
        lg = np.asarray(log_value(self._M.g.ast, r), dtype=float)
        return (self.m - 1) * lg - np.asarray(self._M.f(r), dtype=float)


def _density(M, n=None):
    if n is None or n == M.m:
        return DensityIntegrals(M), ""
    return DensityIntegrals(_ComparisonDensity(M, n)), "comparison mode"


def stochastic_completeness(M, n=None):
    """Yes iff the classifying integral int (int_0^t a)/a(t) dt diverges."""
    D, mode = _density(M, n)

    def ratio(t):
        return math.exp(min(D.log_cum(t) - D.log_density(t), 700.0))

    verdict = classify_integral(ratio, lower=1.0, tail="AtInfinity")
    report = ClassificationReport("StochasticCompleteness", "Unknown",
                                  [verdict])
    if mode:
        report.notes += "; " + mode
    if verdict.state == "Divergent":
        report.verdict = "Yes"
        report.rule_fired = "criterion integral divergent"
    elif verdict.state == "Convergent":
        import warnings
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            head, _ = integrate.quad(ratio, 0.0, 1.0, epsabs=1e-12,
                                     epsrel=1e-10)
        u_star = head + verdict.value
        report.verdict = "No"
        report.u_star = u_star
        report.rule_fired = f"u* = {u_star:.6g} finite"
        verdict.diagnostic += f"; u* = {u_star:.6g} (head {head:.3g})"
    return report


def feller(M, n=None):
    """Feller iff 1/a is integrable at infinity, or it is not and the
    ratio (int_r^inf a)/a(r) is also non-integrable."""
    D, mode = _density(M, n)

    def inv_density(t):
        return math.exp(min(-D.log_density(t), 700.0))

    v1 = classify_integral(inv_density, lower=1.0)
    report = ClassificationReport("Feller", "Unknown", [v1])
    if mode:
        report.notes += "; " + mode
    if v1.state == "Convergent":
        report.verdict, report.rule_fired = "Yes", "model1"
        return report
    if v1.state == "Inconclusive":
        return report

    # 1/a not integrable: probe condition (b) on the tail-volume ratio
    if not D.tail_converges(1.0):
        report.verdict, report.rule_fired = "Yes", "model2"
        report.criteria_evidence.append(IntegrabilityVerdict(
            "Divergent", [], None,
            "tail volume infinite; ratio test (b) trivially non-integrable"))
        return report

    def tail_ratio(t):
        lt = D.log_tail(t)
        if lt is None:
            return 1e308
        return math.exp(min(lt - D.log_density(t), 700.0))

    v2 = classify_integral(tail_ratio, lower=1.0)
    report.criteria_evidence.append(v2)
    if v2.state == "Divergent":
        report.verdict, report.rule_fired = "Yes", "model2"
    elif v2.state == "Convergent":
        report.verdict, report.rule_fired = "No", "negation"
    return report


def volume_growth_sc_test(M):
    """Sufficient test: R / log vol_f(B_R) non-integrable => complete.

    One-directional; a Convergent outcome is reported but never used to
    conclude incompleteness.
    """
    from .manifold import sphere_area
    D = DensityIntegrals(M)
    log_omega = math.log(sphere_area(M.m))

    def log_vol(R):
        return log_omega + D.log_cum(R)

    # find a radius beyond which vol_f(B_R) > 1
    lower = None
    for R in np.geomspace(1.0, 1e6, 40):
        if log_vol(R) > 0.1:
            lower = 2.0 * R
            break
    if lower is None:
        return IntegrabilityVerdict(
            "Inconclusive", [], None,
            "vol_f(B_R) never exceeds 1: test vacuous")

    def integrand(R):
        lv = log_vol(R)
        if lv <= 0:
            return 1e308
        return R / lv

    verdict = classify_integral(integrand, lower=lower)
    if verdict.state == "Divergent":
        verdict.diagnostic += "; sufficient condition for completeness fired"
    return verdict


def brooks_bound(M):
    """Upper bound for inf of the essential spectrum from volume growth.

    Infinite volume: limsup log vol_f(B_R) / R; finite volume:
    limsup -log(vol_f(M) - vol_f(B_R)) / R.  Returns ``math.inf``
    (Unbounded) when the finite-volume ratio grows without stabilizing.
    """
    from .manifold import sphere_area
    D = DensityIntegrals(M)
    log_omega = math.log(sphere_area(M.m))
    radii = 2.0 ** np.arange(2, 17)
    if D.tail_converges(1.0):
        vals = []
        for R in radii:
            lt = D.log_tail(R)
            if lt is None:
                break
            vals.append(-(log_omega + lt) / R)
        vals = [v for v in vals if np.isfinite(v)]
        if len(vals) >= 3 and vals[-1] > 2.0 * vals[-3] and vals[-1] > 10.0:
            return math.inf
        return max(0.0, vals[-1]) if vals else math.inf
    logv = np.array([log_omega + D.log_cum(R) for R in radii])
    slopes = np.diff(logv) / np.diff(radii)
    if slopes[-1] > 2.0 * max(slopes[-4], 1e-12) and slopes[-1] > 10.0:
        return math.inf  # superexponential growth: limsup is infinite
    return max(0.0, float(np.max(slopes[-3:])))
