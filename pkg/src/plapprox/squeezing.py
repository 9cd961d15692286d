"""Radial retractions, homotheties, the squeezing map and the
image-restoring correction.

All constants live in squared form. The squeeze factor for a maximal simplex
is parametrised by the rational homothety ratio r (the distance from the
barycentre to the boundary is irrational in general); constraints stated for
the underlying epsilon translate into exact rational inequalities on r.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import exact
from .complexes import Complex, Simplex, faces_of
from .errors import (
    CenterOnBoundary,
    DegenerateSimplex,
    EpsilonTooLarge,
    HypothesisNotCertified,
    OutsideSimplex,
    OutsideU,
    ZeroDimensionalL,
)
from .exact import ONE, ZERO, AffineForm, Vec
from .maps import (
    MapOracle,
    SimplicialMap,
    as_oracle,
    certified_sup_distance,
    is_surjective,
)


def facet_functionals(points: list[Vec]) -> list[AffineForm]:
    """One affine form per facet in hull coordinates (exact rational basis:
    edge vectors from the first vertex). Form i vanishes on the facet
    opposite vertex i and takes value 1/(d+1) at the barycentre."""
    d = len(points) - 1
    if d < 1:
        raise DegenerateSimplex("facet functionals need dimension >= 1")
    if not exact.affine_independent(points):
        raise DegenerateSimplex("affinely dependent simplex")
    forms = [AffineForm(tuple(-ONE for _ in range(d)), ONE)]
    for i in range(d):
        grad = tuple(ONE if j == i else ZERO for j in range(d))
        forms.append(AffineForm(grad, ZERO))
    return forms


def radial_retraction(points: list[Vec], z: Vec, x: Vec) -> Vec:
    """Project x from the interior point z onto the simplex boundary along
    the ray z -> x; exact via the facet-form exit factor in barycentric
    coordinates."""
    lam_z = exact.barycentric_coordinates(z, points)
    if lam_z is None or any(c <= 0 for c in lam_z):
        raise CenterOnBoundary("retraction centre must be interior")
    lam_x = exact.hull_coordinates(x, points)
    if lam_x is None:
        raise OutsideSimplex("point is outside the affine hull")
    d = len(points)
    forms = [AffineForm(tuple(ONE if j == i else ZERO for j in range(d)), ZERO)
             for i in range(d)]
    t = exact.ray_exit_factor(lam_z, lam_x, forms)
    lam_exit = tuple(a + t * (b - a) for a, b in zip(lam_z, lam_x))
    return exact.convex_combination(lam_exit, points)


@dataclass(frozen=True)
class SqueezeSpec:
    simplex: Simplex
    points: tuple
    barycentre: Vec
    facet_forms: tuple
    squared_delta: Fraction
    ratio: Fraction


def pi_tau(points: list[Vec], ratio: Fraction, x: Vec) -> Vec:
    """The per-simplex squeeze: inverse homothety on the shrunken copy,
    radial retraction onto the boundary outside of it."""
    if not (0 < ratio < 1):
        raise EpsilonTooLarge("homothety ratio must be in (0, 1)")
    lam = exact.barycentric_coordinates(x, points)
    if lam is None:
        raise OutsideSimplex("point is not inside the simplex")
    d1 = len(points)
    threshold = (ONE - ratio) / d1  # (1-r) * barycentric weight of the centre
    b = exact.barycentre(points)
    if all(c >= threshold for c in lam):
        inv = ONE / ratio
        return exact.vadd(b, exact.vscale(inv, exact.vsub(x, b)))
    return radial_retraction(points, b, x)


class SqueezeMap:
    """Composition of the per-simplex squeezes over all maximal simplices of
    dimension >= 1; identity on every non-maximal cell. The factors act on
    disjoint open cells, so the composition order is irrelevant (asserted by
    tests, not by construction)."""

    def __init__(self, cx: Complex, ratio):
        self.complex = cx
        maximal = [s for s in cx.maximal_simplices() if len(s) >= 2]
        if not maximal:
            raise ZeroDimensionalL(
                "no maximal simplex of dimension >= 1; squeezing is the "
                "identity and undefined as a correction"
            )
        self.specs: dict[Simplex, SqueezeSpec] = {}
        for s in maximal:
            r = ratio[s] if isinstance(ratio, dict) else exact.rat(ratio)
            if not (0 < r < 1):
                raise EpsilonTooLarge(
                    f"ratio {r} for simplex {s} is not inside (0, 1)"
                )
            pts = cx.simplex_points(s)
            b = exact.barycentre(pts)
            boundary = [c for c in faces_of(s) if len(c) < len(s)]
            delta = cx.min_sqdist_to_cells(b, boundary)
            self.specs[s] = SqueezeSpec(
                s, tuple(pts), b, tuple(facet_functionals(pts)), delta, r
            )

    def factor(self, simplex: Simplex):
        """The single-simplex factor extended by the identity."""
        spec = self.specs[tuple(sorted(simplex))]

        def apply(x: Vec) -> Vec:
            lam = exact.barycentric_coordinates(x, list(spec.points))
            if lam is None:
                return x
            return pi_tau(list(spec.points), spec.ratio, x)

        return apply

    def evaluate(self, x: Vec) -> Vec:
        carrier = self.complex.carrier(x)
        if carrier is None:
            raise OutsideSimplex("point lies outside the polyhedron")
        spec = self.specs.get(carrier)
        if spec is None:
            return x  # non-maximal carrier: every factor fixes x
        return pi_tau(list(spec.points), spec.ratio, x)

    def __call__(self, x: Vec) -> Vec:
        return self.evaluate(x)


def squeeze_map(cx: Complex, ratio) -> SqueezeMap:
    return SqueezeMap(cx, ratio)


# ---------------------------------------------------------------------------
# budgets


@dataclass
class EpsilonBudget:
    squared_eps1: Fraction | None
    squared_eps_star: dict[Simplex, Fraction]
    squared_eps3: Fraction
    squared_mesh_cap: Fraction
    squared_delta_min: Fraction
    recommended_sq: Fraction

    def as_dict(self, cx: Complex):
        return {
            "squared_eps1": None if self.squared_eps1 is None
            else exact.fmt(self.squared_eps1),
            "squared_eps3": exact.fmt(self.squared_eps3),
            "squared_mesh_cap": exact.fmt(self.squared_mesh_cap),
            "squared_delta_min": exact.fmt(self.squared_delta_min),
            "recommended_sq": exact.fmt(self.recommended_sq),
            "squared_eps_star": {
                "-".join(cx.name_of(v) for v in s): exact.fmt(val)
                for s, val in sorted(self.squared_eps_star.items())
            },
        }


def epsilon_budget(cx: Complex) -> EpsilonBudget:
    """The squeezing constants of a codomain complex, all squared:
    eps1 = min distance from a maximal simplex to the boundary of its star,
    eps*(tau) = delta_tau^2 / (2 diam tau) squared, eps3 = half the smallest
    eps*, and the mesh cap."""
    maximal = [s for s in cx.maximal_simplices() if len(s) >= 2]
    if not maximal:
        raise ZeroDimensionalL("budget undefined for a 0-dimensional complex")
    eps1 = None
    eps_star = {}
    delta_min = None
    for s in maximal:
        pts = cx.simplex_points(s)
        b = exact.barycentre(pts)
        boundary = [c for c in faces_of(s) if len(c) < len(s)]
        delta_sq = cx.min_sqdist_to_cells(b, boundary)
        diam_sq = cx.squared_diameter(s)
        eps_star[s] = delta_sq * delta_sq / (4 * diam_sq)
        if delta_min is None or delta_sq < delta_min:
            delta_min = delta_sq
        star_cells = set()
        for v in s:
            for c in cx.vertex_cells(v):
                star_cells.update(faces_of(c))
        outside = [c for c in star_cells if not (set(c) & set(s))]
        lo_s, hi_s = cx.bbox(s)
        outside.sort(key=lambda c: exact.bbox_gap_sq(lo_s, hi_s, *cx.bbox(c)))
        for c in outside:
            lo_c, hi_c = cx.bbox(c)
            if eps1 is not None and \
                    exact.bbox_gap_sq(lo_s, hi_s, lo_c, hi_c) >= eps1:
                break
            d = exact.squared_distance_simplex_simplex(
                pts, cx.simplex_points(c)
            )
            if eps1 is None or d < eps1:
                eps1 = d
    eps3 = min(eps_star.values()) / 4
    mesh_cap = cx.squared_mesh()
    rec = min(v for v in (eps1, eps3, mesh_cap, delta_min) if v is not None)
    return EpsilonBudget(eps1, eps_star, eps3, mesh_cap, delta_min, rec)


# ---------------------------------------------------------------------------
# star retraction


class StarRetraction:
    """Barycentric renormalisation onto a simplex, defined on the open
    eps1-neighbourhood of the simplex inside the polyhedron."""

    def __init__(self, cx: Complex, simplex: Simplex,
                 squared_eps1: Fraction | None):
        self.complex = cx
        self.simplex = cx.requires_member(simplex)
        self.points = cx.simplex_points(self.simplex)
        self.squared_eps1 = squared_eps1

    def __call__(self, x: Vec) -> Vec:
        if self.squared_eps1 is not None:
            d = exact.squared_distance_point_simplex(x, self.points)
            if d >= self.squared_eps1:
                raise OutsideU("point is not within eps1 of the simplex")
        carrier = self.complex.carrier(x)
        if carrier is None:
            raise OutsideU("point lies outside the polyhedron")
        keep = [v for v in carrier if v in self.simplex]
        if not keep:
            raise OutsideU("carrier shares no vertex with the simplex")
        lam = exact.barycentric_coordinates(
            x, self.complex.simplex_points(carrier)
        )
        total = sum(
            (c for v, c in zip(carrier, lam) if v in self.simplex), ZERO
        )
        weights = [c / total for v, c in zip(carrier, lam)
                   if v in self.simplex]
        pts = [self.complex.point(v) for v in keep]
        return exact.convex_combination(weights, pts)


def star_retraction(cx: Complex, simplex: Simplex,
                    squared_eps1: Fraction | None = None) -> StarRetraction:
    return StarRetraction(cx, simplex, squared_eps1)


# ---------------------------------------------------------------------------
# the image-restoring correction


@dataclass
class HypothesisCheck:
    name: str
    passed: bool
    detail: dict


@dataclass
class RestoreCertificate:
    checks: list[HypothesisCheck]
    budget: EpsilonBudget
    ratios: dict[Simplex, Fraction]
    sup_h_g_sq: Fraction
    sup_h_pig_bound_sq: Fraction

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


@dataclass
class RestoreResult:
    evaluator: "ComposedSqueeze"
    certificate: RestoreCertificate
    squeeze: SqueezeMap


class ComposedSqueeze:
    """pi_eps after g, as an exact evaluator."""

    def __init__(self, g: MapOracle, squeeze: SqueezeMap):
        self.g = g
        self.squeeze = squeeze

    def __call__(self, x: Vec) -> Vec:
        return self.squeeze.evaluate(self.g.evaluator(x))

    def evaluate_vertex(self, cx: Complex, vid: int) -> Vec:
        """Evaluate at a vertex of a complex refining g's PL domain; the
        carrier hint avoids the linear carrier scan."""
        from .maps import _evaluate_on

        return self.squeeze.evaluate(_evaluate_on(self.g, cx, vid))


def _bijective_face(h: SimplicialMap, sigma: Simplex, tau: Simplex) -> Simplex:
    """A face of sigma mapped affinely one-to-one onto tau."""
    chosen = []
    for w in tau:
        pre = [v for v in sigma if h.vertex_map[v] == w]
        chosen.append(min(pre))
    return tuple(sorted(chosen))


def _renormalization_defect(cx: Complex, tau: Simplex, y: Vec) -> Fraction:
    """m(y) = 1 - (sum of the carrier's barycentric weights on tau vertices);
    the retraction displacement onto tau is at most m(y) * diam(closed star).
    Well-defined: carriers on shared faces agree on the value."""
    carrier = cx.carrier(y)
    if carrier is None:
        raise OutsideU("point left the polyhedron")
    lam = exact.barycentric_coordinates(y, cx.simplex_points(carrier))
    keep = sum((c for v, c in zip(carrier, lam) if v in tau), ZERO)
    return ONE - keep


def _defect_lipschitz_sq(cx: Complex, tau: Simplex) -> Fraction:
    """Certified squared Lipschitz constant of the defect m over the closed
    star of tau: max over star cells of the gradient of its affine piece,
    measured inside the cell's hull (w^T (E^T E)^{-1} w)."""
    star_cells = set()
    for v in tau:
        star_cells.update(cx.vertex_cells(v))
    best = ZERO
    for c in star_cells:
        if len(c) == 1:
            continue
        pts = cx.simplex_points(c)
        cols = [exact.vsub(p, pts[0]) for p in pts[1:]]
        d = len(cols)
        gram = [[exact.vdot(a, b) for b in cols] for a in cols]
        # m(t) = sum of lambda_j over vertices outside tau, affine in t
        w = []
        base_out = ONE if c[0] not in tau else ZERO
        for i in range(d):
            wi = (ONE if c[i + 1] not in tau else ZERO) - base_out
            w.append(wi)
        if all(v == 0 for v in w):
            continue
        sol, _ = exact.solve_linear([row[:] for row in gram], w)
        val = sum((wi * si for wi, si in zip(w, sol)), ZERO)
        if val > best:
            best = val
    return best


def _boundary_defect_max_sq(h: SimplicialMap, go: MapOracle, cx: Complex,
                            tau: Simplex, sigma_tau: Simplex,
                            levels: int = 4) -> Fraction:
    """Certified rational upper bound on the squared max of the defect m over
    g(boundary of sigma_tau). Pieces of the boundary are subdivided until
    their images fit in single cells (then the PL max is exact at vertices);
    straddling pieces add Lipschitz slack that vanishes with the mesh."""
    from .complexes import build_complex

    names = {h.domain.name_of(v): list(h.domain.point(v)) for v in sigma_tau}
    facets = []
    ids = sorted(sigma_tau)
    for i in range(len(ids)):
        face = ids[:i] + ids[i + 1:]
        if face:
            facets.append([h.domain.name_of(v) for v in face])
    boundary = build_complex(h.domain.ambient_dim, names, facets)
    lip_m_sq = _defect_lipschitz_sq(cx, tau)
    lam_g = go.squared_lipschitz
    pieces = boundary
    best = None
    for level in range(levels + 1):
        bound = ZERO
        exact_everywhere = True
        for cell in pieces.maximal_simplices():
            xs = pieces.simplex_points(cell)
            ys = [go.evaluator(x) for x in xs]
            vertex_max = max(_renormalization_defect(cx, tau, y) for y in ys)
            hold = cx.carrier(ys[0])
            in_one_cell = False
            if hold is not None:
                for top in cx.vertex_cells(hold[0]):
                    if not set(hold) <= set(top):
                        continue
                    pts = cx.simplex_points(top)
                    if all(exact.barycentric_coordinates(y, pts) is not None
                           for y in ys):
                        in_one_cell = True
                        break
            if in_one_cell:
                piece_sq = vertex_max * vertex_max
            else:
                exact_everywhere = False
                diam_sq = max(
                    (exact.sqdist(a, b)
                     for i, a in enumerate(xs) for b in xs[i + 1:]),
                    default=ZERO,
                )
                slack_sq = lip_m_sq * lam_g * diam_sq
                piece_sq = exact.sum_sqrt_squared_upper(
                    vertex_max * vertex_max, slack_sq
                )
            if piece_sq > bound:
                bound = piece_sq
        if best is None or bound < best:
            best = bound
        if exact_everywhere:
            return bound
        if level < levels:
            pieces = pieces.barycentric_subdivision()
    return best


def restore_surjectivity(h: SimplicialMap, g, cx: Complex | None = None,
                         sup_budget_sq: Fraction | None = None
                         ) -> RestoreResult:
    """Verify the correction hypotheses for the concrete perturbation g of
    the surjective simplicial map h, and return the composed evaluator
    pi_eps . g with its certificate.

    Raises HypothesisNotCertified naming the failed inequality.
    """
    codomain = cx or h.codomain
    go = as_oracle(g)
    report = is_surjective(h)
    if not report.surjective:
        raise HypothesisNotCertified(
            "h_surjective", "the base simplicial map is not surjective"
        )
    budget = epsilon_budget(codomain)
    checks: list[HypothesisCheck] = []
    itv = certified_sup_distance(h, go, budget_sq=sup_budget_sq)
    sup_sq = itv.hi_sq
    ok_sup = sup_sq < budget.recommended_sq
    checks.append(HypothesisCheck(
        "sup_within_epsilon_budget", ok_sup,
        {"sup_hi_sq": exact.fmt(sup_sq),
         "recommended_sq": exact.fmt(budget.recommended_sq),
         "eps3_sq": exact.fmt(budget.squared_eps3)},
    ))
    if not ok_sup:
        raise HypothesisNotCertified(
            "sup_within_epsilon_budget",
            f"certified sup^2 {sup_sq} does not stay below the recommended "
            f"squared budget {budget.recommended_sq} (eps3^2 = "
            f"{budget.squared_eps3})",
        )
    # boundary-perturbation bound, one maximal simplex at a time:
    # ||id - rho.g.h^-1|| <= ||h-g|| + M * diam(closed star), where M is the
    # certified max of the renormalisation defect over g(boundary of sigma)
    half_delta_sq = budget.squared_delta_min / 4
    for tau in codomain.maximal_simplices():
        if len(tau) < 2:
            continue
        sigma = report.witnesses[tau]
        sigma_tau = _bijective_face(h, sigma, tau)
        star_vertices = set()
        for v in tau:
            star_vertices.update(codomain.star_vertex_set(v))
        pts = [codomain.point(v) for v in star_vertices]
        star_diam_sq = max(
            (exact.sqdist(a, b)
             for i, a in enumerate(pts) for b in pts[i + 1:]),
            default=ZERO,
        )
        defect_sq = _boundary_defect_max_sq(h, go, codomain, tau, sigma_tau)
        slack_sq = defect_sq * star_diam_sq
        ok = exact.cmp_sqrt_sum(sup_sq, slack_sq, half_delta_sq) < 0
        checks.append(HypothesisCheck(
            "boundary_perturbation", ok,
            {"tau": [codomain.name_of(v) for v in tau],
             "sigma_tau": [h.domain.name_of(v) for v in sigma_tau],
             "sup_sq": exact.fmt(sup_sq),
             "defect_max_sq": exact.fmt(defect_sq),
             "retraction_slack_sq": exact.fmt(slack_sq),
             "half_delta_l_bound_sq": exact.fmt(half_delta_sq)},
        ))
        if not ok:
            raise HypothesisNotCertified(
                "boundary_perturbation",
                f"certified boundary perturbation bound for "
                f"{[codomain.name_of(v) for v in tau]} does not stay below "
                f"half the minimal barycentre clearance",
            )
    # ratios: per-simplex rational r with (r^2 delta_tau^2) <= recommended
    ratios = {}
    for tau in codomain.maximal_simplices():
        if len(tau) < 2:
            continue
        pts = codomain.simplex_points(tau)
        b = exact.barycentre(pts)
        boundary = [c for c in faces_of(tau) if len(c) < len(tau)]
        delta_sq = codomain.min_sqdist_to_cells(b, boundary)
        r = exact.sqrt_lower(budget.recommended_sq / delta_sq, bits=32)
        if r <= 0 or r >= 1:
            raise HypothesisNotCertified(
                "ratio_in_range",
                f"derived homothety ratio {r} is outside (0, 1)",
            )
        ratios[tau] = r
    squeeze = SqueezeMap(codomain, ratios)
    # ||h - pi.g|| <= ||h-g|| + max diam < 2 max diam (Step-1 arithmetic)
    mesh_sq = budget.squared_mesh_cap
    ok_two_mesh = exact.cmp_sqrt_sum(sup_sq, mesh_sq, 4 * mesh_sq) < 0
    bound_sq = exact.sum_sqrt_squared_upper(sup_sq, mesh_sq)
    checks.append(HypothesisCheck(
        "perturbed_composition_within_two_mesh", ok_two_mesh,
        {"bound_sq": exact.fmt(bound_sq),
         "two_mesh_sq": exact.fmt(4 * mesh_sq)},
    ))
    if not ok_two_mesh:
        raise HypothesisNotCertified(
            "perturbed_composition_within_two_mesh",
            "sup bound does not stay below the squeezing displacement cap",
        )
    cert = RestoreCertificate(checks, budget, ratios, sup_sq, bound_sq)
    return RestoreResult(ComposedSqueeze(go, squeeze), cert, squeeze)


@dataclass
class CoverageReport:
    depth: int
    reference_ell: int
    total_cells: int
    covered_cells: int
    uncovered: list

    @property
    def complete(self) -> bool:
        return not self.uncovered


def coverage_check(evaluator, domain: Complex, codomain: Complex,
                   depth: int, reference_ell: int = 1,
                   simplex_budget: int = 200_000) -> CoverageReport:
    """Exact cell-coverage bookkeeping: a reference cell counts as covered
    when some image point lies in its closed star, i.e. the cell shares a
    closed reference cell with the image point's carrier. This is density at
    one-cell resolution; the image of the squeeze concentrates on boundaries
    and on blown-up near-barycentre points, so exact open-cell hits would
    depend on measure-zero sampling accidents."""
    samples = domain.sd_k(depth, budget=simplex_budget)
    ref = codomain.sd_k(reference_ell, budget=simplex_budget)
    covered: set[Simplex] = set()
    hinted = hasattr(evaluator, "evaluate_vertex")
    for v in samples.vertex_ids():
        if hinted:
            y = evaluator.evaluate_vertex(samples, v)
        else:
            y = evaluator(samples.point(v))
        carrier = ref.carrier(y)
        if carrier is None:
            raise OutsideSimplex("image point escaped the codomain")
        for top in ref.vertex_cells(carrier[0]):
            if set(carrier) <= set(top):
                covered.update(faces_of(top))
    uncovered = sorted(
        (s for s in ref.simplices if s not in covered),
        key=lambda s: (len(s), s),
    )
    return CoverageReport(
        depth, reference_ell, len(ref.simplices),
        len(ref.simplices) - len(uncovered),
        [[ref.name_of(v) for v in s] for s in uncovered],
    )
