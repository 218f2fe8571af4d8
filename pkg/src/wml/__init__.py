"""Numerical laboratory for weighted model manifolds: stochastic
completeness and Feller classification, radial ODE certificates, spectral
bounds for the f-Laplacian, and Monte Carlo diffusion cross-checks."""

__version__ = "0.1.0"

from .manifold import ModelManifold, SolitonPreset, load_manifold, preset
from .radial_expr import Jet2, RadialFunction, eval_jet, parse_expr

__all__ = [
    "ModelManifold", "SolitonPreset", "load_manifold", "preset",
    "Jet2", "RadialFunction", "eval_jet", "parse_expr", "__version__",
]

# heavier modules (integrability, radial_ode, spectral, montecarlo,
# soliton, cli) are imported on demand to keep `import wml` light
