"""Weighted model manifolds and the preset catalog.

A model is R^m with metric dr^2 + g(r)^2 dtheta^2 and radial weight f(r).
Everything downstream consumes three quantities defined here:

* drift(r)        = (m-1) g'/g - f'   (first-order coefficient of the
                    radial operator u'' + drift * u', and the drift of the
                    associated diffusion)
* area_density(r) = g^{m-1} e^{-f}    (angular constant excluded)
* weighted_ball_volume(R) = omega_{m-1} * int_0^R area_density
"""

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy import integrate

from .errors import (DomainError, OverflowSignal, QuadratureError,
                     UnknownPreset, ValidationError)
from .radial_expr import (RadialFunction, eval_scalar, log_jet, log_value,
                          parse_expr)

R_MAX_VALIDATION = 100.0
_ORIGIN_PROBE = 1e-4
_ORIGIN_TOL = 1e-3

_LOG_HUGE = 700.0  # beyond this, switch to mpmath for log-magnitudes


def sphere_area(m):
    """Area of the unit (m-1)-sphere in R^m."""
    return 2.0 * math.pi ** (m / 2.0) / math.gamma(m / 2.0)


@dataclass(frozen=True)
class ModelManifold:
    m: int
    g: RadialFunction
    f: RadialFunction
    label: str = ""

    def drift(self, r):
        """Delta_f r = (m-1) g'/g - f'.

        g'/g is taken from the structural log-jet so the drift stays
        finite where g itself has left the floating range.
        """
        lgj = log_jet(self.g.ast, r)
        fj = self.f.jet(r)
        return (self.m - 1) * lgj.d1 - fj.d1

    def area_density(self, r):
        try:
            a = self.g(r) ** (self.m - 1) * np.exp(-self.f(r))
        except DomainError:
            # g itself already left the floating range
            a = np.inf
        if not np.all(np.isfinite(a)):
            raise OverflowSignal(
                "area density exceeds the floating range; use log_area_density")
        return a

    def log_area_density(self, r):
        """log(g^{m-1} e^{-f}), robust to magnitudes far beyond float range.

        Accepts a float or an array; falls back to mpmath pointwise where
        the direct evaluation overflows.
        """
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        rr = np.atleast_1d(r)
        with np.errstate(all="ignore"):
            lg = np.atleast_1d(np.asarray(log_value(self.g.ast, rr),
                                          dtype=float))
            fv = np.atleast_1d(np.asarray(
                eval_scalar(self.f.ast, rr, np), dtype=float))
            out = (self.m - 1) * lg - fv
        bad = ~np.isfinite(out)
        for i in np.nonzero(bad)[0]:
            gi = eval_scalar(self.g.ast, mpmath.mpf(rr[i]), mpmath)
            fi = eval_scalar(self.f.ast, mpmath.mpf(rr[i]), mpmath)
            out[i] = float((self.m - 1) * mpmath.log(gi) - fi)
        if scalar:
            return float(out[0])
        return out

    def weighted_ball_volume(self, R):
        """omega_{m-1} * int_0^R g^{m-1} e^{-f} dr to relative tol 1e-9.

        ``R`` may be ``inf``; the integral then must converge.
        """
        if R <= 0:
            raise ValidationError("ball radius must be positive")
        omega = sphere_area(self.m)
        try:
            val, err = integrate.quad(self.area_density, 0.0, R,
                                      epsabs=0.0, epsrel=1e-9, limit=400)
        except OverflowSignal:
            # density leaves the float range inside (0, R): log-space path
            from ._density import DensityIntegrals
            logv = DensityIntegrals(self).log_cum(R)
            if logv > _LOG_HUGE:
                raise OverflowSignal("weighted volume exceeds float range")
            return omega * math.exp(logv)
        if not np.isfinite(val) or (val != 0 and err > 1e-6 * abs(val)):
            raise QuadratureError(
                f"ball volume not resolvable at tolerance (err={err:g})")
        return omega * val

    def to_dict(self):
        return {"dimension": self.m, "g": self.g.source_text,
                "f": self.f.source_text, "label": self.label}


@dataclass(frozen=True)
class SolitonPreset:
    base: ModelManifold
    soliton_constant: float
    scalar_curvature: RadialFunction
    ric_norm_sq: RadialFunction = field(
        default_factory=lambda: parse_expr("0"))

    def __getattr__(self, name):
        return getattr(self.base, name)


def validate_manifold(M):
    grid = np.geomspace(1e-3, 50.0, 200)
    with np.errstate(all="ignore"):
        gv = np.asarray(eval_scalar(M.g.ast, grid, np), dtype=float)
        positive = gv > 0
        unclear = ~positive & (np.isnan(gv) | (gv == 0))
        if np.any(unclear):
            # over/underflow inside the expression: decide by structural log
            lg = np.asarray(log_value(M.g.ast, grid[unclear]), dtype=float)
            positive[unclear] = ~np.isnan(lg) & (lg > -np.inf)
    if not np.all(positive):
        bad = grid[~positive][0]
        raise ValidationError(f"warping function non-positive at r={bad:g}")
    j0 = M.g.jet(_ORIGIN_PROBE)
    if abs(j0.value) > _ORIGIN_TOL:
        raise ValidationError(
            f"g(0+) = {j0.value:g} != 0 (model structure violated)")
    if abs(j0.d1 - 1.0) > _ORIGIN_TOL:
        raise ValidationError(
            f"g'(0+) = {j0.d1:g} != 1 (model structure violated)")
    fgrid = np.geomspace(1e-3, R_MAX_VALIDATION, 120)
    fv = np.asarray(M.f(fgrid))
    if not np.all(np.isfinite(fv)):
        raise ValidationError("weight f not finite on (0, R_max]")
    return M


def load_manifold(spec):
    """Build and validate a ModelManifold from a key=value document.

    ``spec`` is either a dict or the text of a file with lines
    ``dimension = 3``, ``g = "sinh(r)"``, ``f = "0"`` (f optional),
    ``label = "..."``.
    """
    if isinstance(spec, str):
        spec = _parse_kv(spec)
    unknown = set(spec) - {"dimension", "g", "f", "label"}
    if unknown:
        raise ValidationError(f"unknown keys in manifold spec: {sorted(unknown)}")
    try:
        m = int(spec["dimension"])
        g_text = spec["g"]
    except KeyError as exc:
        raise ValidationError(f"manifold spec missing key {exc}")
    if m < 2:
        raise ValidationError("dimension must be an integer >= 2")
    M = ModelManifold(m=m, g=parse_expr(g_text),
                      f=parse_expr(spec.get("f", "0")),
                      label=spec.get("label", ""))
    return validate_manifold(M)


def _parse_kv(text):
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        value = value.strip()
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        out[key.strip()] = value
    return out


# --- preset catalog -------------------------------------------------------
#
# exp-alpha-m-alpha and exp-growth-m realize the e^{-r^alpha} / e^{r^3}
# asymptotics through g = r * exp(-+((1+r^2)^{alpha/2} - 1)), which is smooth
# with exact model structure at the origin; all classification criteria are
# tail tests and are unaffected by the bounded correction.

def preset(name):
    parts = name.split("-")
    try:
        if parts[0] == "euclidean" and len(parts) == 2:
            m = int(parts[1])
            return load_manifold({"dimension": m, "g": "r", "f": "0",
                                  "label": name})
        if parts[0] == "hyperbolic" and len(parts) == 2:
            m = int(parts[1])
            return load_manifold({"dimension": m, "g": "sinh(r)", "f": "0",
                                  "label": name})
        if parts[:2] == ["exp", "alpha"] and len(parts) == 4:
            m = int(parts[2])
            alpha = float(parts[3])
            return load_manifold({"dimension": m,
                                  "g": f"r*exp(1 - (1 + r^2)^{alpha / 2.0})",
                                  "f": "0",
                                  "label": name})
        if parts[:2] == ["exp", "growth"] and len(parts) == 3:
            m = int(parts[2])
            return load_manifold({"dimension": m,
                                  "g": "r*exp((1 + r^2)^1.5 - 1)", "f": "0",
                                  "label": name})
        if parts[:2] == ["gaussian", "shrinker"] and len(parts) == 4:
            m = int(parts[2])
            lam = float(parts[3])
            base = load_manifold({"dimension": m, "g": "r",
                                  "f": f"{lam / 2.0}*r^2", "label": name})
            return SolitonPreset(base=base, soliton_constant=lam,
                                 scalar_curvature=parse_expr("0"),
                                 ric_norm_sq=parse_expr("0"))
        if parts[:2] == ["euclidean", "steady"] and len(parts) == 3:
            m = int(parts[2])
            base = load_manifold({"dimension": m, "g": "r", "f": "0",
                                  "label": name})
            return SolitonPreset(base=base, soliton_constant=0.0,
                                 scalar_curvature=parse_expr("0"),
                                 ric_norm_sq=parse_expr("0"))
    except (ValueError, IndexError):
        pass
    else:
        raise UnknownPreset(f"unknown preset {name!r}")
    raise UnknownPreset(f"unknown preset {name!r}")


PRESET_EXAMPLES = (
    "euclidean-3", "hyperbolic-2", "exp-alpha-2-3",
    "gaussian-shrinker-2-0.5", "exp-growth-2",
)
