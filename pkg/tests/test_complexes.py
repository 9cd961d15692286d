"""Complex validation, subdivision, stars, mesh and refinement checks."""

from fractions import Fraction as F

import pytest

from plapprox import exact, fixtures, sampling
from plapprox.complexes import (
    build_complex,
    is_refinement,
    validate_complex,
)
from plapprox.errors import (
    BadIntersection,
    BudgetExceeded,
    CarrierNotFound,
    DegenerateSimplex,
    NotFaceClosed,
    UnknownVertex,
)

FIG1_V = {"w0": [0, 0], "w1": [2, 0], "w2": [2, 2], "w3": [0, 2]}
FIG1_S = [["w0", "w1", "w2"], ["w0", "w2", "w3"]]


def names(cx, cells):
    return sorted(tuple(cx.name_of(v) for v in s) for s in cells)


# -- validation -----------------------------------------------------------------


def test_square_complex_is_valid(square_l):
    report = validate_complex(2, FIG1_V, FIG1_S)
    assert report.ok and not report.violations
    assert len(report.complex) == 11  # 4 + 5 + 2


def test_overlapping_triangle_rejected():
    report = validate_complex(2, FIG1_V, FIG1_S + [["w0", "w1", "w3"]])
    assert not report.ok
    assert any(isinstance(v, BadIntersection) for v in report.violations)


def test_single_vertex_valid():
    report = validate_complex(2, {"o": [1, 1]}, [["o"]])
    assert report.ok


def test_missing_faces_reported_without_closure():
    report = validate_complex(
        2, {"a": [0, 0], "b": [1, 0], "c": [0, 1]}, [["a", "b", "c"]],
        close_faces=False,
    )
    assert not report.ok
    assert any(isinstance(v, NotFaceClosed) for v in report.violations)


def test_degenerate_simplex_reported():
    report = validate_complex(
        2, {"a": [0, 0], "b": [1, 1], "c": [2, 2]}, [["a", "b", "c"]]
    )
    assert not report.ok
    assert any(isinstance(v, DegenerateSimplex) for v in report.violations)


def test_unknown_vertex_rejected():
    with pytest.raises(UnknownVertex):
        build_complex(2, {"a": [0, 0]}, [["a", "zz"]])


# -- maximal simplices ------------------------------------------------------------


def test_maximal_of_square(square_l):
    tops = [s for s in square_l.maximal_simplices()]
    assert names(square_l, tops) == [("w0", "w1", "w2"), ("w0", "w2", "w3")]


def test_maximal_of_subdivided_triangle(std2):
    sd = std2.barycentric_subdivision()
    assert len([s for s in sd.maximal_simplices() if len(s) == 3]) == 6
    assert all(len(s) == 3 for s in sd.maximal_simplices())


def test_single_simplex_maximal(std2):
    assert len(std2.maximal_simplices()) == 1


# -- subdivision -------------------------------------------------------------------


def test_sd_counts_of_triangle(std2):
    sd = std2.barycentric_subdivision()
    by_dim = {d: len([s for s in sd.simplices if len(s) == d + 1])
              for d in range(3)}
    assert by_dim == {0: 7, 1: 12, 2: 6}
    assert len(sd) == 25


def test_sd_zero_is_identity(std2):
    assert std2.sd_k(0) is std2


def test_sd_of_edge():
    edge = fixtures.interval_complex([0, 1])
    sd = edge.barycentric_subdivision()
    assert len(sd.points) == 3
    assert len([s for s in sd.simplices if len(s) == 2]) == 2
    mid = sd.point(2)
    assert mid == (F(1, 2),)


def test_sd_output_passes_full_geometric_validation(std2):
    sd = std2.barycentric_subdivision()
    raw_vertices = {sd.name_of(v): [exact.fmt(c) for c in sd.point(v)]
                    for v in sd.vertex_ids()}
    raw_simplices = [[sd.name_of(v) for v in s]
                     for s in sd.maximal_simplices()]
    report = validate_complex(2, raw_vertices, raw_simplices)
    assert report.ok


def test_sd_cells_inside_parents(square_l):
    sd = square_l.barycentric_subdivision()
    for cell in sd.simplices:
        parent = sd.ancestor_cell(cell, square_l)
        ppts = square_l.simplex_points(parent)
        for p in sd.simplex_points(cell):
            assert exact.barycentric_coordinates(p, ppts) is not None


def test_sd_budget_guard(std2):
    with pytest.raises(BudgetExceeded):
        std2.sd_k(3, budget=100)


# -- mesh ---------------------------------------------------------------------------


def test_mesh_values(std2):
    assert std2.squared_mesh() == 2
    sd1 = std2.barycentric_subdivision()
    assert sd1.squared_mesh() == F(5, 9)
    point = build_complex(2, {"o": [3, 4]}, [["o"]])
    assert point.squared_mesh() == 0


def test_mesh_contraction_bound(std2, square_l):
    for cx in (std2, square_l):
        d = cx.dim
        factor = F(d * d, (d + 1) * (d + 1))
        cur = cx
        for _ in range(3):
            nxt = cur.barycentric_subdivision()
            assert nxt.squared_mesh() <= factor * cur.squared_mesh()
            cur = nxt


def test_mesh_sd2_by_independent_edge_enumeration(std2):
    sd2 = std2.sd_k(2)
    edges = [s for s in sd2.simplices if len(s) == 2]
    best = max(exact.sqdist(*sd2.simplex_points(e)) for e in edges)
    assert sd2.squared_mesh() == best == F(37, 162)


# -- stars --------------------------------------------------------------------------


def test_open_star_of_edge_complex():
    cx = fixtures.interval_complex([0, 1], prefix="v")
    star = cx.open_star(cx.id_of("v0"))
    assert names(cx, star.open_cells) == [("v0",), ("v0", "v1")]


def test_second_star_covers_all_but_far_vertex(square_l):
    ss = square_l.second_star(square_l.id_of("w1"))
    rest = set(square_l.simplices) - ss.open_cells
    assert rest == {(square_l.id_of("w3"),)}


def test_star_of_diagonal_subcomplex(square_l):
    diag = tuple(sorted([square_l.id_of("w0"), square_l.id_of("w2")]))
    star = square_l.star_of_subcomplex([diag])
    rest = set(square_l.simplices) - star.open_cells
    assert rest == {(square_l.id_of("w1"),), (square_l.id_of("w3"),)}


def test_closed_star_is_subcomplex(square_l):
    closed = square_l.closed_star(square_l.id_of("w1"))
    for s in closed:
        for f in range(len(s)):
            assert s[:f] + s[f + 1:] not in (s,)  # structural sanity
        assert s in square_l.simplices


def test_open_stars_cover_polyhedron(square_l):
    for cell, x in sampling.rational_samples(square_l, 5, seed=3):
        carrier = square_l.carrier(x)
        assert carrier is not None
        for v in carrier:
            assert square_l.point_in_star(x, square_l.open_star(v))


# -- carriers and refinement -----------------------------------------------------


def test_carrier_on_shared_face(square_l):
    x = (F(1), F(1))  # on the diagonal
    carrier = square_l.carrier(x)
    assert names(square_l, [carrier]) == [("w0", "w2")]
    assert square_l.carrier((F(3), F(3))) is None


def test_minimal_carrier_by_provenance_and_geometry(square_l):
    sd = square_l.barycentric_subdivision()
    w0 = square_l.id_of("w0")
    assert sd.minimal_carrier(w0, square_l) == (w0,)
    diag = tuple(sorted([square_l.id_of("w0"), square_l.id_of("w2")]))
    mid_id = next(
        v for v in sd.vertex_ids() if sd.point(v) == (F(1), F(1))
    )
    assert sd.minimal_carrier(mid_id, square_l) == diag
    tri = tuple(sorted(square_l.id_of(n) for n in ("w0", "w1", "w2")))
    bary_id = next(
        v for v in sd.vertex_ids()
        if sd.point(v) == exact.barycentre(square_l.simplex_points(tri))
    )
    assert sd.minimal_carrier(bary_id, square_l) == tri
    # geometric path: a rebuilt complex has no provenance link
    rebuilt = validate_complex(2, FIG1_V, FIG1_S).complex
    assert sd.minimal_carrier(bary_id, rebuilt) == tri
    outside = build_complex(2, {"z": [9, 9]}, [["z"]])
    with pytest.raises(CarrierNotFound):
        outside_cx = outside
        sd_out = outside_cx  # single far vertex
        sd_out.minimal_carrier(0, rebuilt)


def test_minimal_carrier_interior_positivity(square_l):
    # the carrier's relative interior contains the vertex: all barycentric
    # coordinates strictly positive
    sd = square_l.sd_k(2)
    for vid in list(sd.vertex_ids())[:40]:
        carrier = sd.minimal_carrier(vid, square_l)
        lam = exact.barycentric_coordinates(
            sd.point(vid), square_l.simplex_points(carrier))
        assert lam is not None and all(c > 0 for c in lam)


def test_is_refinement(std2):
    sd1 = std2.barycentric_subdivision()
    sd2 = sd1.barycentric_subdivision()
    assert is_refinement(sd1, std2)
    assert is_refinement(sd2, std2)
    assert not is_refinement(std2, sd1)
    rebuilt = fixtures.standard_simplex_complex(2)
    assert is_refinement(sd1, rebuilt)  # geometric, no provenance
    other = build_complex(2, {"a": [0, 0], "b": [1, 0], "c": [0, 1],
                              "d": [1, 1]},
                          [["a", "b", "c"], ["b", "c", "d"]])
    assert not is_refinement(other, std2)
