"""Deterministic rational sampling of complexes.

Samples are exact rational convex combinations with a bounded weight
denominator; the pattern is reproducible from the seed.
"""

from __future__ import annotations

import random
from fractions import Fraction

from . import exact
from .complexes import Complex, Simplex


def sample_in_cell(cx: Complex, cell: Simplex, rng: random.Random,
                   granularity: int = 64, interior: bool = True):
    """One exact rational point of the (open, when interior) cell."""
    pts = cx.simplex_points(cell)
    low = 1 if interior else 0
    while True:
        weights = [rng.randint(low, granularity) for _ in pts]
        total = sum(weights)
        if total:
            break
    lam = [Fraction(w, total) for w in weights]
    return exact.convex_combination(lam, pts)


def rational_samples(cx: Complex, per_cell: int, seed: int = 0,
                     granularity: int = 64, interior: bool = True,
                     cells=None):
    """Deterministic list of (cell, point) samples over the given cells
    (default: maximal simplices, sorted)."""
    rng = random.Random(seed)
    cells = sorted(cells) if cells is not None else cx.maximal_simplices()
    out = []
    for cell in cells:
        for _ in range(per_cell):
            out.append((cell, sample_in_cell(cx, cell, rng, granularity,
                                             interior)))
    return out
