"""Squeezing machinery: retraction, per-simplex squeeze, budgets, the
image-restoring correction and its hypothesis checks."""

from fractions import Fraction as F

import pytest

from plapprox import exact, fixtures, sampling
from plapprox.complexes import build_complex
from plapprox.errors import (
    EpsilonTooLarge,
    HypothesisNotCertified,
    OutsideU,
    ZeroDimensionalL,
)
from plapprox.maps import MapOracle, certified_sup_distance
from plapprox.squeezing import (
    coverage_check,
    epsilon_budget,
    facet_functionals,
    pi_tau,
    radial_retraction,
    restore_surjectivity,
    squeeze_map,
    star_retraction,
)

STD2 = [(F(0), F(0)), (F(1), F(0)), (F(0), F(1))]


# -- facet functionals -------------------------------------------------------------


def test_facet_functionals_positive_at_centre():
    forms = facet_functionals(STD2)
    centre_hull = (F(1, 3), F(1, 3))  # hull coordinates of the barycentre
    assert len(forms) == 3
    assert all(f(centre_hull) == F(1, 3) for f in forms)


def test_facet_functionals_of_edge():
    forms = facet_functionals([(F(0), F(0)), (F(2), F(0))])
    assert len(forms) == 2
    assert forms[0]((F(0),)) == 1 and forms[0]((F(1),)) == 0
    assert forms[1]((F(0),)) == 0 and forms[1]((F(1),)) == 1


# -- radial retraction --------------------------------------------------------------


def test_radial_retraction_examples():
    b = (F(1, 3), F(1, 3))
    assert radial_retraction(STD2, b, (F(1, 6), F(1, 6))) == (F(0), F(0))
    assert radial_retraction(STD2, b, (F(1, 2), F(1, 4))) == (F(1), F(0))


def test_radial_retraction_fixes_boundary_samples():
    b = (F(1, 3), F(1, 3))
    for x in [(F(1, 2), F(0)), (F(0), F(3, 4)), (F(1, 2), F(1, 2))]:
        assert radial_retraction(STD2, b, x) == x


def test_radial_retraction_idempotent_on_samples():
    b = (F(1, 3), F(1, 3))
    for x in [(F(1, 8), F(1, 8)), (F(2, 3), F(1, 6)), (F(1, 5), F(3, 5))]:
        once = radial_retraction(STD2, b, x)
        assert radial_retraction(STD2, b, once) == once


# -- pi_tau ---------------------------------------------------------------------------


def test_pi_tau_examples():
    assert pi_tau(STD2, F(1, 2), (F(1, 6), F(1, 6))) == (F(0), F(0))
    assert pi_tau(STD2, F(1, 2), (F(1, 2), F(1, 4))) == (F(2, 3), F(1, 6))
    assert pi_tau(STD2, F(1, 2), (F(1, 12), F(1, 2))) == (F(0), F(5, 9))


def test_pi_tau_branch_agreement_on_shrunken_boundary():
    # points on the boundary of the shrunken copy satisfy both formulas
    r = F(1, 2)
    b = (F(1, 3), F(1, 3))
    for y in [(F(1, 2), F(0)), (F(0), F(1, 4)), (F(1, 2), F(1, 2))]:
        x = exact.vadd(b, exact.vscale(r, exact.vsub(y, b)))
        via_homothety = exact.vadd(b, exact.vscale(1 / r, exact.vsub(x, b)))
        via_ray = radial_retraction(STD2, b, x)
        assert pi_tau(STD2, r, x) == via_homothety == via_ray == y


def test_pi_tau_requires_valid_ratio():
    with pytest.raises(EpsilonTooLarge):
        pi_tau(STD2, F(3, 2), (F(1, 3), F(1, 3)))


# -- squeeze map -----------------------------------------------------------------------


def test_squeeze_fixes_barycentre_and_nonmaximal_cells(square_l):
    sq = squeeze_map(square_l, F(1, 2))
    t1 = tuple(sorted(square_l.id_of(n) for n in ("w0", "w1", "w2")))
    b = exact.barycentre(square_l.simplex_points(t1))
    assert sq.evaluate(b) == b
    for x in [(F(1), F(0)), (F(1, 2), F(1, 2)), (F(0), F(2)), (F(2), F(1))]:
        assert sq.evaluate(x) == x  # edges and vertices are fixed


def test_squeeze_pushes_annulus_onto_boundary(square_l):
    sq = squeeze_map(square_l, F(1, 2))
    x = (F(11, 8), F(9, 8))  # interior of the lower triangle, near the diagonal
    y = sq.evaluate(x)
    carrier = square_l.carrier(y)
    assert len(carrier) < 3  # landed on a boundary cell


def test_squeeze_factor_commutation(square_l):
    sq = squeeze_map(square_l, F(1, 2))
    t1 = tuple(sorted(square_l.id_of(n) for n in ("w0", "w1", "w2")))
    t2 = tuple(sorted(square_l.id_of(n) for n in ("w0", "w2", "w3")))
    f1, f2 = sq.factor(t1), sq.factor(t2)
    for _, x in sampling.rational_samples(square_l, 8, seed=11):
        assert f1(f2(x)) == f2(f1(x))


def test_squeeze_simplex_preservation(square_l):
    sq = squeeze_map(square_l, F(1, 2))
    for tau, spec in sq.specs.items():
        pts = list(spec.points)
        b = spec.barycentre
        for _, x in sampling.rational_samples(
                square_l, 25, seed=7, cells=[tau]):
            y = sq.evaluate(x)
            assert exact.barycentric_coordinates(y, pts) is not None
        for v in pts:
            shrunk = exact.vadd(b, exact.vscale(spec.ratio,
                                                exact.vsub(v, b)))
            assert sq.evaluate(shrunk) == v


def test_squeeze_rejects_bad_ratio_and_zero_dim(square_l):
    with pytest.raises(EpsilonTooLarge):
        squeeze_map(square_l, F(5, 4))
    point = build_complex(2, {"o": [0, 0]}, [["o"]])
    with pytest.raises(ZeroDimensionalL):
        squeeze_map(point, F(1, 2))


# -- epsilon budget ----------------------------------------------------------------------


def test_budget_standard_simplex(std2):
    budget = epsilon_budget(std2)
    (eps_star,) = budget.squared_eps_star.values()
    assert eps_star == F(1, 2592)
    assert budget.squared_eps3 == F(1, 10368)
    # independent recomputation from raw vertex data
    pts = std2.simplex_points(std2.maximal_simplices()[0])
    b = exact.barycentre(pts)
    delta_sq = min(
        exact.squared_distance_point_polytope_bruteforce(
            b, [p for j, p in enumerate(pts) if j != i]
        )
        for i in range(3)
    )
    diam_sq = max(exact.sqdist(p, q) for p in pts for q in pts)
    assert delta_sq == F(1, 18) and diam_sq == 2
    assert eps_star == delta_sq * delta_sq / (4 * diam_sq)


def test_budget_square_complex(square_l):
    budget = epsilon_budget(square_l)
    assert budget.squared_eps1 == 2
    assert set(budget.squared_eps_star.values()) == {F(1, 648)}
    assert budget.squared_eps3 == F(1, 2592)
    assert budget.squared_mesh_cap == 8
    assert budget.recommended_sq == F(1, 2592)
    assert budget.squared_eps3 > 0 and budget.squared_eps1 > 0


def test_budget_zero_dimensional():
    point = build_complex(2, {"o": [0, 0]}, [["o"]])
    with pytest.raises(ZeroDimensionalL):
        epsilon_budget(point)


# -- star retraction ---------------------------------------------------------------------


def test_star_retraction_examples(square_l):
    diag = tuple(sorted([square_l.id_of("w0"), square_l.id_of("w2")]))
    budget = epsilon_budget(square_l)
    rho = star_retraction(square_l, diag, budget.squared_eps1)
    x_inside = (F(1, 2), F(1, 2))
    assert rho(x_inside) == x_inside
    assert rho((F(1), F(1, 2))) == (F(2, 3), F(2, 3))
    with pytest.raises(OutsideU):
        rho((F(2), F(0)))  # squared distance to the diagonal equals eps1


# -- restore surjectivity ----------------------------------------------------------------


def test_restore_with_unperturbed_map(square_l):
    h = fixtures.identity_simplicial(square_l)
    rr = restore_surjectivity(h, h)
    assert rr.certificate.passed
    assert rr.certificate.sup_h_g_sq == 0
    # the composed evaluator still reaches deep interior points via blow-up
    t1 = tuple(sorted(square_l.id_of(n) for n in ("w0", "w1", "w2")))
    spec = rr.squeeze.specs[t1]
    v = square_l.point(square_l.id_of("w1"))
    shrunk = exact.vadd(spec.barycentre,
                        exact.vscale(spec.ratio,
                                     exact.vsub(v, spec.barycentre)))
    assert rr.evaluator(shrunk) == v


def test_restore_with_small_bump(square_l):
    h = fixtures.identity_simplicial(square_l)
    g = fixtures.perturbed_identity(square_l, 2, F(1, 100))
    rr = restore_surjectivity(h, g)
    assert rr.certificate.passed
    assert rr.certificate.sup_h_g_sq == F(1, 10000)
    names = [c.name for c in rr.certificate.checks]
    assert names.count("boundary_perturbation") == 2
    cov = coverage_check(rr.evaluator, square_l, square_l, depth=3)
    assert cov.complete


def test_restore_rejects_oversized_bump(square_l):
    h = fixtures.identity_simplicial(square_l)
    g = fixtures.perturbed_identity(square_l, 2, F(1, 10))
    with pytest.raises(HypothesisNotCertified) as err:
        restore_surjectivity(h, g)
    assert err.value.check == "sup_within_epsilon_budget"
    assert "eps3" in str(err.value)


def test_restore_requires_surjective_base(square_l):
    from plapprox.maps import SimplicialMap

    collapse = SimplicialMap(
        square_l, square_l,
        {v: square_l.id_of("w0") for v in square_l.vertex_ids()},
    )
    with pytest.raises(HypothesisNotCertified) as err:
        restore_surjectivity(collapse, collapse)
    assert err.value.check == "h_surjective"


def test_restore_composed_map_stays_close_to_h(square_l):
    h = fixtures.identity_simplicial(square_l)
    g = fixtures.perturbed_identity(square_l, 2, F(1, 100))
    rr = restore_surjectivity(h, g)
    bound_sq = rr.certificate.sup_h_pig_bound_sq
    assert bound_sq < 4 * epsilon_budget(square_l).squared_mesh_cap
    worst = F(0)
    for _, x in sampling.rational_samples(square_l, 6, seed=2):
        d = exact.sqdist(h.evaluate(x), rr.evaluator(x))
        worst = max(worst, d)
    assert worst <= bound_sq
