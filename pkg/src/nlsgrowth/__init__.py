"""Sobolev-norm growth diagnostics for periodic NLS-type equations.

Submodules:
    spectral    Fourier representation, transforms, Littlewood-Paley blocks
    multiplier  smoothing multiplier theta, operator D, quartic corrections
    dynamics    the four equations and the Strang split-step integrator
    energy      modified energies E^1, E^2 and their time derivatives
    harness     configuration, simulation runs, fits, verification, CLI
"""

__version__ = "0.1.0"
