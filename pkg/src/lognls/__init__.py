"""Numerical laboratory for Gausson dynamics of the logarithmic Schrodinger equation.

The package propagates the semiclassical logarithmic NLS with a bounded
external potential, tracks the soliton's modulation parameters against the
classical Newtonian trajectory, and verifies the variational and spectral
structure of the Gausson (closed-form constants, linearized spectra,
constrained coercivity, scaling laws in the semiclassical parameter).
"""

__version__ = "0.1.0"
