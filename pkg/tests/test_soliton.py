import pytest

from wml.manifold import preset
from wml.soliton import audit_soliton


@pytest.fixture(scope="module")
def shrinker_audit():
    return audit_soliton(preset("gaussian-shrinker-2-0.5"))


def test_rejects_plain_manifold():
    with pytest.raises(TypeError):
        audit_soliton(preset("euclidean-3"))


def test_shrinker_basic_equation(shrinker_audit):
    # S + |grad f|^2 - 2 lam f = C exactly, with C = 0 here
    assert shrinker_audit.basic_eq_residual < 1e-8
    assert abs(shrinker_audit.basic_eq_constant) < 1e-10


def test_shrinker_scalar_identity(shrinker_audit):
    assert shrinker_audit.scalar_eq_residual < 1e-8
    assert shrinker_audit.scalar_lower_bound_ok


def test_shrinker_gradient_estimate(shrinker_audit):
    b, slope = shrinker_audit.gradient_estimate_fit
    assert slope == 0.5                  # |f'| = |lam| r exactly
    assert b < 1e-10
    assert shrinker_audit.gradient_estimate_ok


def test_shrinker_volume_and_verdicts(shrinker_audit):
    assert shrinker_audit.volume_finite is True
    assert shrinker_audit.sc_verdict == "Yes"
    assert shrinker_audit.feller_verdict == "Yes"


def test_shrinker_spectral_gap(shrinker_audit):
    # either the essential spectrum is empty (vacuous) or the gap holds
    if shrinker_audit.ess_gap is not None:
        assert shrinker_audit.ess_gap >= -1e-8


def test_steady_euclidean_all_trivial():
    a = audit_soliton(preset("euclidean-steady-3"))
    assert a.basic_eq_residual == 0.0
    assert a.scalar_eq_residual == 0.0
    assert a.scalar_lower_bound_ok
    assert a.gradient_estimate_fit == (0.0, 0.0)
    assert a.volume_finite is None       # only shrinkers must close up
    assert a.sc_verdict == "Yes" and a.feller_verdict == "Yes"


def test_audit_serializes():
    a = audit_soliton(preset("gaussian-shrinker-2-0.5"),
                      ess_radii=(1.0, 2.0))
    d = a.to_dict()
    assert set(d) >= {"basic_eq_residual", "sc_verdict", "feller_verdict",
                      "gradient_estimate_fit", "volume_finite"}
