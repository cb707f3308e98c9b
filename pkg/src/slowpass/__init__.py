"""Slow-passage phenomena in 1-D reaction-diffusion equations.

Simulation (Strang splitting with a Crank-Nicolson cross-check), onset
detection against quasi-stationary states, analytic buffer curves for the
slowly ramped complex Ginzburg-Landau equation, and burst-rhythm
classification for a spatially extended pituitary-cell model.
"""

__version__ = "0.1.0"

from .grid import Grid1D, build_grid, apply_laplacian, diffusion_substep, cosine_spectrum
from .models import CGLParams, LactotrophParams, RampSpec, SourceProfile

__all__ = [
    "Grid1D",
    "build_grid",
    "apply_laplacian",
    "diffusion_substep",
    "cosine_spectrum",
    "CGLParams",
    "LactotrophParams",
    "RampSpec",
    "SourceProfile",
    "__version__",
]
