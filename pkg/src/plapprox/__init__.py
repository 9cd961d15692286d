"""plapprox: exact-arithmetic piecewise-linear approximation kernel.

Simplicial approximation of maps between polyhedra, the surjectivity-
preserving modification, and the epsilon-squeezing correction that restores
a prescribed image after perturbation — all over exact rational arithmetic.
"""

__version__ = "0.1.0"
