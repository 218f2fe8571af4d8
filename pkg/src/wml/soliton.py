"""Consistency audit for rotationally symmetric gradient Ricci soliton
presets: the basic equation, the scalar-curvature evolution identity,
the lower scalar bound, the linear gradient estimate, weighted-volume
finiteness, and the stochastic-completeness / Feller verdicts.

The audit never aborts: every check lands in the report with its
residual or flag.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .manifold import SolitonPreset

_GRID = np.geomspace(1e-3, 1e3, 400)


@dataclass
class SolitonAudit:
    basic_eq_residual: float
    basic_eq_constant: float
    scalar_eq_residual: float
    scalar_lower_bound_ok: bool
    gradient_estimate_fit: tuple          # (b, slope)
    gradient_estimate_ok: bool
    volume_finite: bool | None            # None when not required (lam <= 0)
    sc_verdict: str
    feller_verdict: str
    ess_gap: float | None
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {"basic_eq_residual": self.basic_eq_residual,
                "basic_eq_constant": self.basic_eq_constant,
                "scalar_eq_residual": self.scalar_eq_residual,
                "scalar_lower_bound_ok": self.scalar_lower_bound_ok,
                "gradient_estimate_fit": list(self.gradient_estimate_fit),
                "gradient_estimate_ok": self.gradient_estimate_ok,
                "volume_finite": self.volume_finite,
                "sc_verdict": self.sc_verdict,
                "feller_verdict": self.feller_verdict,
                "ess_gap": self.ess_gap,
                "notes": self.notes}


def audit_soliton(p, ess_radii=(1.0, 2.0, 4.0), ess_atol=1e-6):
    """Run every soliton-specific check on a SolitonPreset."""
    if not isinstance(p, SolitonPreset):
        raise TypeError("audit_soliton needs a SolitonPreset")
    lam = p.soliton_constant
    m = p.m
    notes = []
    grid = _GRID

    S = np.asarray(p.scalar_curvature(grid), dtype=float)
    fj = p.f.jet(grid)
    Sj = p.scalar_curvature.jet(grid)
    ric2 = np.asarray(p.ric_norm_sq(grid), dtype=float)
    with np.errstate(all="ignore"):
        drift = np.asarray(p.drift(grid), dtype=float)

    # basic equation S + |grad f|^2 = 2 lam f + C with a fitted constant
    lhs = S + fj.d1 ** 2 - 2.0 * lam * fj.value
    C = float(np.mean(lhs))
    basic_res = float(np.max(np.abs(lhs - C)))

    # scalar evolution: (1/2) Delta_f S - lam S + |Ric|^2 = 0
    lap_S = Sj.d2 + drift * Sj.d1
    scalar_res = float(np.max(np.abs(0.5 * lap_S - lam * S + ric2)))

    # lower bound: S >= 0 for lam >= 0, S >= m lam for lam < 0
    floor = 0.0 if lam >= 0 else m * lam
    scalar_ok = bool(np.all(S >= floor - 1e-10))

    # gradient estimate |f'| <= b + |lam| r: fitted offset
    excess = np.abs(fj.d1) - abs(lam) * grid
    b_fit = max(float(np.max(excess)), 0.0)
    grad_ok = bool(np.all(np.abs(fj.d1) <= b_fit + abs(lam) * grid + 1e-10))

    # weighted volume finiteness (shrinkers only)
    volume_finite = None
    if lam > 0:
        try:
            vol = p.weighted_ball_volume(math.inf)
            volume_finite = bool(np.isfinite(vol))
        except Exception as exc:       # audit records, never aborts
            volume_finite = False
            notes.append(f"volume quadrature failed: {exc}")

    from .integrability import feller, stochastic_completeness
    sc = stochastic_completeness(p)
    fe = feller(p)

    # scal_2 consistency: inf_{r>R} S - m lam <= m * ess_bottom
    ess_gap = None
    try:
        from .spectral import ess_spectrum_bottom
        report = ess_spectrum_bottom(p, list(ess_radii), atol=ess_atol)
        if report.unbounded:
            notes.append("essential spectrum empty: scalar-spectrum "
                         "inequality holds vacuously")
        else:
            inf_S = float(np.min(S[grid > ess_radii[-1]]))
            ess_gap = m * report.bottom_estimate - (inf_S - m * lam)
            if ess_gap < -1e-8:
                notes.append("scalar-spectrum inequality violated")
    except Exception as exc:
        notes.append(f"ess-spectrum sweep failed: {exc}")

    return SolitonAudit(
        basic_eq_residual=basic_res, basic_eq_constant=C,
        scalar_eq_residual=scalar_res, scalar_lower_bound_ok=scalar_ok,
        gradient_estimate_fit=(b_fit, abs(lam)),
        gradient_estimate_ok=grad_ok, volume_finite=volume_finite,
        sc_verdict=sc.verdict, feller_verdict=fe.verdict,
        ess_gap=ess_gap, notes=notes)
