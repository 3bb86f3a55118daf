"""Simulation and bifurcation analysis of spatially heterogeneous models.

Two model families are covered: the nonlocal savanna-forest competition
model under rainfall gradients (front pinning, multistability, periodic and
aperiodic invasion waves) and a chemotactic model of cortical arealization
(cusp bistability, transient passage through a pattern-forming instability).
"""

__version__ = "0.1.0"
