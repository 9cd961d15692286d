"""Shared example geometry: the square-with-diagonal complex, interval
complexes, the triangle-to-square homeomorphism and standard perturbations.

These are ordinary library objects (handy for demos and smoke tests); the
test suite builds its fixtures from here.
"""

from __future__ import annotations

from fractions import Fraction

from . import exact
from .complexes import Complex, build_complex
from .maps import MapOracle, PLMap, SimplicialMap


def square_diagonal_complex(scale=1) -> Complex:
    """Unit-square-style complex: four corners, the diagonal from w0 to w2,
    and the two triangles it cuts."""
    s = exact.rat(scale)
    verts = {
        "w0": [0 * s, 0 * s],
        "w1": [2 * s, 0 * s],
        "w2": [2 * s, 2 * s],
        "w3": [0 * s, 2 * s],
    }
    return build_complex(2, verts, [["w0", "w1", "w2"], ["w0", "w2", "w3"]])


def standard_simplex_complex(dim: int = 2) -> Complex:
    verts = {"v0": [0] * dim}
    for i in range(dim):
        coords = [0] * dim
        coords[i] = 1
        verts[f"v{i + 1}"] = coords
    return build_complex(dim, verts, [[f"v{i}" for i in range(dim + 1)]])


def interval_complex(breaks, prefix: str = "x") -> Complex:
    pts = [exact.rat(b) for b in breaks]
    verts = {f"{prefix}{i}": [p] for i, p in enumerate(pts)}
    segs = [[f"{prefix}{i}", f"{prefix}{i + 1}"] for i in range(len(pts) - 1)]
    return build_complex(1, verts, segs)


def triangle_to_square_map() -> MapOracle:
    """Piecewise-affine homeomorphism from a triangle onto the square
    polyhedron, sending the three corners to w0, w1, w2 and the midpoint of
    the long edge to w3.

    The two affine patches fold along the median through that midpoint, so
    the first barycentric subdivision of the triangle carries the map as a
    PL structure; hosting it there keeps the whole subdivision chain
    provenance-related to the map, which makes sup-norm evaluations exact.
    The oracle's domain is the unsubdivided triangle.
    """
    base = build_complex(
        2,
        {"n0": [0, 0], "n1": [3, 0], "n2": ["3/2", "8/3"]},
        [["n0", "n1", "n2"]],
    )
    dom = base.sd_k(1)
    codomain = square_diagonal_complex()
    f = Fraction
    table = {
        (f(0), f(0)): (f(0), f(0)),          # n0 -> w0
        (f(3), f(0)): (f(2), f(0)),          # n1 -> w1
        (f(3, 2), f(8, 3)): (f(2), f(2)),    # n2 -> w2
        (f(3, 4), f(4, 3)): (f(0), f(2)),    # long-edge midpoint -> w3
        (f(3, 2), f(0)): (f(1), f(0)),       # bottom midpoint
        (f(9, 4), f(4, 3)): (f(2), f(1)),    # right midpoint
        (f(3, 2), f(8, 9)): (f(2, 3), f(4, 3)),  # centroid, on the fold
    }
    images = {v: table[dom.point(v)] for v in dom.vertex_ids()}
    pl = PLMap(dom, codomain, images)
    return MapOracle(
        pl.evaluate, pl.squared_lipschitz_bound(), base, codomain,
        description="triangle-to-square", pl=pl,
    )


def fold_map() -> MapOracle:
    """The tent map on [0, 1] as a PL oracle onto the two-segment interval
    complex; surjective but not simplicial."""
    dom = interval_complex([0, Fraction(1, 2), 1], prefix="a")
    cod = interval_complex([0, Fraction(1, 2), 1], prefix="x")
    images = {
        dom.id_of("a0"): (Fraction(0),),
        dom.id_of("a1"): (Fraction(1),),
        dom.id_of("a2"): (Fraction(0),),
    }
    pl = PLMap(dom, cod, images)
    return MapOracle.from_plmap(pl, description="tent-fold")


def identity_simplicial(cx: Complex) -> SimplicialMap:
    return SimplicialMap(cx, cx, {v: v for v in cx.vertex_ids()})


def three_triangle_fold() -> MapOracle:
    """Three triangles folded onto the two-triangle square: the extra
    triangle reflects across the left edge onto the upper triangle, so the
    map is surjective but not injective."""
    dom = build_complex(
        2,
        {"p0": [0, 0], "p1": [2, 0], "p2": [2, 2], "p3": [0, 2],
         "p4": [-2, 2]},
        [["p0", "p1", "p2"], ["p0", "p2", "p3"], ["p0", "p3", "p4"]],
    )
    cod = square_diagonal_complex()
    images = {
        dom.id_of("p0"): cod.point(cod.id_of("w0")),
        dom.id_of("p1"): cod.point(cod.id_of("w1")),
        dom.id_of("p2"): cod.point(cod.id_of("w2")),
        dom.id_of("p3"): cod.point(cod.id_of("w3")),
        dom.id_of("p4"): cod.point(cod.id_of("w2")),
    }
    return MapOracle.from_plmap(PLMap(dom, cod, images),
                                description="three-triangle-fold")


def perturbed_identity(cx: Complex, levels: int = 2, delta=Fraction(1, 100),
                       direction=(1, 0)) -> PLMap:
    """Identity on a subdivision of the complex with one generated vertex
    nudged by delta along the given direction; the nudge target is the first
    subdivision barycentre (deterministic)."""
    fine = cx.sd_k(levels)
    images = {v: fine.point(v) for v in fine.vertex_ids()}
    nudge = len(cx.points)  # first generated vertex of the first subdivision
    d = exact.rat(delta)
    vec = tuple(d * exact.rat(c) for c in direction)
    images[nudge] = exact.vadd(images[nudge], vec)
    return PLMap(fine, cx, images)
