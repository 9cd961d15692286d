"""Simplicial approximation, the descended map, witness machinery and the
surjectivity-preserving modification.

The classical approximation is certified per vertex: a codomain vertex w is
accepted for a domain vertex v when, for every cell S containing v and every
vertex u of S, the ball of radius L*(d/(d+1))*diam(S) around f(u) misses the
union of codomain cells not containing w. The complement identity
|L| \\ st(w) = union of cells avoiding w makes this an exact statement about
finitely many point-cell distances.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import exact
from .complexes import Complex, Simplex, faces_of, is_refinement
from .errors import (
    BudgetExceeded,
    InternalCheckFailed,
    NotARefinement,
    NotSimplicial,
    OracleDomainError,
    SupBoundNotMet,
    WitnessNotFound,
)
from .exact import ZERO, Vec
from .maps import (
    MapOracle,
    SimplicialMap,
    SupInterval,
    VertexOrder,
    _evaluate_on,
    as_oracle,
    certified_sup_distance,
    check_simplicial,
    is_surjective,
)


@dataclass
class Budgets:
    kappa_max: int = 8
    ell_max: int = 8
    sampling_depth: int = 4
    simplex_budget: int = 200_000
    sup_depth: int = 6

    @classmethod
    def coerce(cls, value) -> "Budgets":
        if value is None:
            return cls()
        if isinstance(value, cls):
            return value
        return cls(**value)


@dataclass
class StarCertificate:
    vertex: int
    target: int
    margin_sq: Fraction

    def as_dict(self, domain: Complex, codomain: Complex):
        return {
            "vertex": domain.name_of(self.vertex),
            "target": codomain.name_of(self.target),
            "margin_sq": exact.fmt(self.margin_sq),
        }


class _CertContext:
    """Caches shared by the per-vertex certification loop."""

    def __init__(self, f: MapOracle, codomain: Complex,
                 identity_nested: bool | None = None):
        self.f = f
        self.codomain = codomain
        self.values: dict[Vec, Vec] = {}
        self.dist: dict[tuple[Vec, int], Fraction] = {}
        self.avoiding: dict[int, list[Simplex]] = {}
        self.identity_nested = identity_nested

    def value(self, x: Vec) -> Vec:
        y = self.values.get(x)
        if y is None:
            y = self.f.evaluator(x)
            self.values[x] = y
        return y

    def vertex_value(self, cx: Complex, vid: int) -> Vec:
        x = cx.point(vid)
        y = self.values.get(x)
        if y is None:
            y = _evaluate_on(self.f, cx, vid)
            self.values[x] = y
        return y

    def cells_avoiding(self, w: int) -> list[Simplex]:
        cells = self.avoiding.get(w)
        if cells is None:
            raw = self.codomain.cells_avoiding_vertex(w)
            cellset = set(raw)
            cells = [c for c in raw if not any(
                set(c) < set(d) for d in cellset if len(d) > len(c))]
            self.avoiding[w] = cells
        return cells

    def dist_sq(self, y: Vec, w: int) -> Fraction:
        key = (y, w)
        d = self.dist.get(key)
        if d is None:
            d = self.codomain.min_sqdist_to_cells(y, self.cells_avoiding(w))
            if d is None:
                d = ZERO
            self.dist[key] = d
        return d


def _identity_nested(f: MapOracle, domain: Complex, codomain: Complex) -> bool:
    if not f.is_identity:
        return False
    return (domain is codomain or domain.descends_from(codomain)
            or is_refinement(domain, codomain))


def _simplicial_shortcut(fo: MapOracle, cx: Complex, codomain: Complex,
                         ctx: _CertContext):
    """When the oracle is PL on (a coarsening of) the current domain level
    and sends every vertex to a codomain vertex spanning simplices, it is its
    own approximation: for x in st(nu) the carrier maps onto a cell having
    f(nu) as a vertex, so f(st(nu)) sits inside st(f(nu)). Margins record
    the full distance to the star complement."""
    if fo.pl is None:
        return None
    if not (cx is fo.pl.domain or cx.descends_from(fo.pl.domain)):
        return None
    point_to_vid = {codomain.point(w): w for w in codomain.vertex_ids()}
    vm = {}
    for v in cx.vertex_ids():
        w = point_to_vid.get(ctx.vertex_value(cx, v))
        if w is None:
            return None
        vm[v] = w
    for s in cx.maximal_simplices():
        if tuple(sorted({vm[v] for v in s})) not in codomain.simplices:
            return None
    certs = {
        v: StarCertificate(v, w, ctx.dist_sq(ctx.vertex_value(cx, v), w))
        for v, w in vm.items()
    }
    return SimplicialMap(cx, codomain, vm), certs


def star_condition(f, nu: int, omega: int, domain: Complex, codomain: Complex,
                   context: _CertContext | None = None
                   ) -> StarCertificate | None:
    """Certify f(st(nu, domain)) inside st(omega, codomain), or fail at this
    precision (None).

    For the identity on a refinement the condition is decided exactly and
    combinatorially: every domain cell at nu must sit inside a codomain cell
    having omega as a vertex. Otherwise the Lipschitz margin mechanism runs:
    each cell S at nu, each vertex u of S must keep f(u) further from the
    cells avoiding omega than the certified image reach over S.
    """
    fo = as_oracle(f)
    ctx = context or _CertContext(fo, codomain)
    if ctx.identity_nested is None:
        ctx.identity_nested = _identity_nested(fo, domain, codomain)
    y_nu = ctx.vertex_value(domain, nu)
    carrier = codomain.carrier(y_nu)
    if carrier is None:
        raise OracleDomainError(
            f"f({domain.name_of(nu)}) lies outside the codomain polyhedron"
        )
    if omega not in carrier:
        return None  # f(nu) itself is not in st(omega)
    if ctx.identity_nested:
        for cell in domain.vertex_cells(nu):
            if domain.descends_from(codomain):
                holder = domain.ancestor_cell(cell, codomain)
            else:
                holder = codomain.carrier(
                    exact.barycentre(domain.simplex_points(cell))
                )
            if omega not in holder:
                return None
        margin = ctx.dist_sq(y_nu, omega)
        return StarCertificate(nu, omega, margin)
    lam = fo.squared_lipschitz
    margin = None
    for cell in domain.vertex_cells(nu):
        d = len(cell) - 1
        if d == 0:
            reach = ZERO
        else:
            factor = Fraction(d * d, (d + 1) * (d + 1))
            reach = lam * factor * domain.squared_diameter(cell)
        for u in cell:
            dist = ctx.dist_sq(ctx.vertex_value(domain, u), omega)
            gap = dist - reach
            if gap <= 0:
                return None
            if margin is None or gap < margin:
                margin = gap
    return StarCertificate(nu, omega, margin)


@dataclass
class ApproximationResult:
    kappa: int
    h: SimplicialMap
    certificates: dict[int, StarCertificate]
    domain: Complex


def simplicial_approximation(f, domain: Complex, codomain: Complex,
                             kappa_max: int = 8, order: VertexOrder | None = None,
                             kappa_floor: int = 0,
                             simplex_budget: int = 200_000
                             ) -> ApproximationResult:
    """Smallest kappa with a certified vertex target for every vertex of the
    kappa-th subdivision; the PL extension is verified simplicial."""
    fo = as_oracle(f)
    order = order or VertexOrder.default(codomain)
    ctx = _CertContext(fo, codomain)
    cx = domain.sd_k(kappa_floor, budget=simplex_budget)
    for kappa in range(kappa_floor, kappa_max + 1):
        # nestedness of the identity depends on the level: sd^k(domain)
        # descends from a subdivided codomain only once k is deep enough
        ctx.identity_nested = _identity_nested(fo, cx, codomain)
        shortcut = _simplicial_shortcut(fo, cx, codomain, ctx)
        if shortcut is not None:
            h, certs = shortcut
            return ApproximationResult(kappa, h, certs, cx)
        assignment: dict[int, int] = {}
        certs: dict[int, StarCertificate] = {}
        ok = True
        for nu in cx.vertex_ids():
            y = ctx.vertex_value(cx, nu)
            carrier = codomain.carrier(y)
            if carrier is None:
                raise OracleDomainError(
                    f"f({cx.name_of(nu)}) lies outside the codomain"
                )
            candidates = sorted(
                carrier,
                key=lambda w: (exact.sqdist(y, codomain.point(w)),
                               order.rank[w]),
            )
            chosen = None
            for w in candidates:
                cert = star_condition(fo, nu, w, cx, codomain, ctx)
                if cert is not None:
                    chosen = cert
                    break
            if chosen is None:
                ok = False
                break
            assignment[nu] = chosen.target
            certs[nu] = chosen
        if ok:
            h = check_simplicial(SimplicialMap(cx, codomain, assignment))
            return ApproximationResult(kappa, h, certs, cx)
        if kappa < kappa_max:
            cx = cx.barycentric_subdivision(budget=simplex_budget)
    raise BudgetExceeded(
        f"no certified simplicial approximation up to kappa_max={kappa_max}; "
        f"the Lipschitz certificate may be too coarse"
    )


def fine_codomain(codomain: Complex, eps_sq: Fraction, ell_max: int = 12,
                  simplex_budget: int = 200_000) -> int:
    """Least ell with squared mesh of sd^ell strictly below eps_sq."""
    if eps_sq <= 0:
        raise ValueError("threshold must be positive")
    cx = codomain
    for ell in range(ell_max + 1):
        if cx.squared_mesh() < eps_sq:
            return ell
        if ell < ell_max:
            cx = cx.barycentric_subdivision(budget=simplex_budget)
    raise BudgetExceeded(f"mesh did not drop below threshold by ell={ell_max}")


@dataclass
class DescendResult:
    h_star: SimplicialMap
    via: dict[int, int]  # fine vertex -> coarse vertex realising the min


def descend_map(h: SimplicialMap, fine: Complex, order: VertexOrder,
                verify: bool = True) -> DescendResult:
    """Transfer a simplicial map to a refinement by the min rule over the
    minimal carrier's vertices; verified to be simplicial with unchanged
    simplex images."""
    coarse = h.domain
    if not (fine.descends_from(coarse) or is_refinement(fine, coarse)):
        raise NotARefinement("second argument does not refine the map domain")
    assignment: dict[int, int] = {}
    via: dict[int, int] = {}
    for nu in fine.vertex_ids():
        sigma = fine.minimal_carrier(nu, coarse)
        best = min(sigma, key=lambda u: order.rank[h.vertex_map[u]])
        assignment[nu] = h.vertex_map[best]
        via[nu] = best
    h_star = SimplicialMap(fine, h.codomain, assignment)
    if verify:
        _verify_descend_images(h, h_star, fine)
    return DescendResult(h_star, via)


def _verify_descend_images(h: SimplicialMap, h_star: SimplicialMap,
                           fine: Complex):
    """Exactly check h*(sigma) = h(sigma) for every coarse simplex: every
    fine image is a subset of the coarse image of its minimal carrier (which
    also proves h* simplicial, since faces of codomain simplices are
    members), and the full image is achieved inside each coarse simplex."""
    coarse = h.domain
    provenance = fine.descends_from(coarse)
    vm = h_star.vertex_map
    achieved: dict[Simplex, set[Simplex]] = {}
    coarse_img = {s: set(h.image_of_simplex(s)) for s in coarse.simplices}
    for cell in fine.simplices:
        if provenance:
            anc = fine.ancestor_cell(cell, coarse)
        else:
            anc = coarse.carrier(exact.barycentre(fine.simplex_points(cell)))
        img = tuple(sorted({vm[v] for v in cell}))
        if not set(img) <= coarse_img[anc]:
            raise InternalCheckFailed(
                "descended image escapes the coarse image simplex"
            )
        achieved.setdefault(anc, set()).add(img)
    for sigma in coarse.simplices:
        target = h.image_of_simplex(sigma)
        if not any(target in achieved.get(face, ())
                   for face in faces_of(sigma)):
            raise InternalCheckFailed("descended map lost a simplex image")


# ---------------------------------------------------------------------------
# witnesses


@dataclass
class Witness:
    target: Simplex       # maximal codomain simplex
    carrier: Simplex      # maximal domain simplex (Step-3 sigma)
    point: Vec            # sample with f(point) in the open target cell
    vertex_id: int        # id of the sample vertex in the sampling complex
    depth: int


@dataclass
class WitnessSet:
    witnesses: dict[Simplex, Witness]
    sampling_depth: int


def find_witnesses(f, domain: Complex, codomain: Complex,
                   sampling_depth: int = 3,
                   simplex_budget: int = 200_000) -> WitnessSet:
    """For each maximal codomain simplex, a sample point mapped into its open
    cell, carried by a maximal domain simplex of maximal available dimension.
    Samples are the vertices of iterated subdivisions."""
    fo = as_oracle(f)
    maximal_targets = [t for t in codomain.maximal_simplices()]
    found: dict[Simplex, Witness] = {}
    cx = domain
    seen = 0
    for depth in range(sampling_depth + 1):
        for nu in range(seen, len(cx.points)):
            x = cx.point(nu)
            sigma = cx.ancestor_cell((nu,), domain)
            if sigma not in domain.maximal_simplices():
                continue
            y = fo.evaluator(x)
            carrier = codomain.carrier(y)
            if carrier is None:
                raise OracleDomainError(
                    "oracle sample landed outside the codomain"
                )
            if carrier in maximal_targets:
                old = found.get(carrier)
                if old is None or len(sigma) > len(old.carrier):
                    found[carrier] = Witness(carrier, sigma, x, nu, depth)
        seen = len(cx.points)
        if len(found) == len(maximal_targets) or depth == sampling_depth:
            break
        cx = cx.barycentric_subdivision(budget=simplex_budget)
    missing = [t for t in maximal_targets if t not in found]
    if missing:
        names = [tuple(codomain.name_of(v) for v in t) for t in missing]
        raise WitnessNotFound(
            names[0],
            f"no sample hit the open cell of {names} up to depth "
            f"{sampling_depth}; the map may not be surjective, or the "
            f"sampling depth may be too small (cannot be distinguished "
            f"from oracle access alone)",
        )
    for t, w in found.items():
        if len(w.carrier) < len(t):
            raise WitnessNotFound(
                tuple(codomain.name_of(v) for v in t),
                f"witness for {tuple(codomain.name_of(v) for v in t)} only "
                f"found in domain cells of dimension {len(w.carrier) - 1} < "
                f"{len(t) - 1}; a surjective simplicial approximation cannot "
                f"exist (dimension failure)",
            )
    return WitnessSet(found, sampling_depth)


@dataclass
class SeparationResult:
    kappa: int
    cells: dict[Simplex, Simplex]  # target -> distinct full-dim fine cell
    kappa_ball: int                # certified horizon from the ball radii
    fine: Complex


def _ball_radius_sq(f: MapOracle, w: Witness, domain: Complex,
                    codomain: Complex) -> Fraction:
    """Squared radius r with B(x, r) inside the open carrier cell and mapped
    into the open target cell (via the Lipschitz certificate)."""
    boundary = [c for c in domain.simplices
                if set(c) < set(w.carrier) and len(c) < len(w.carrier)]
    d_dom = domain.min_sqdist_to_cells(w.point, boundary) if boundary else None
    y = f.evaluator(w.point)
    others = [c for c in codomain.simplices if c != w.target]
    d_img = codomain.min_sqdist_to_cells(y, others)
    r = d_img / f.squared_lipschitz
    if d_dom is not None and d_dom < r:
        r = d_dom
    return r


def _cells_containing_witness(w: Witness, domain: Complex, kappa: int,
                              simplex_budget: int) -> list[Simplex]:
    """Full-dimensional cells of sd^kappa(domain) containing the witness
    point, located through the subdivision provenance."""
    cx = domain.sd_k(kappa, budget=simplex_budget)
    dim = len(w.carrier)
    if kappa >= w.depth:
        # the sample is a vertex of this level (vertex ids persist)
        return sorted(c for c in cx.vertex_cells(w.vertex_id)
                      if len(c) == dim)
    deep = domain.sd_k(w.depth, budget=simplex_budget)
    hold = deep.ancestor_cell((w.vertex_id,), cx)
    v0 = hold[0]
    return sorted(c for c in cx.vertex_cells(v0)
                  if len(c) == dim and set(hold) <= set(c))


def separate_witnesses(ws: WitnessSet, f, domain: Complex, codomain: Complex,
                       kappa_floor: int = 0, kappa_max: int = 10,
                       simplex_budget: int = 200_000) -> SeparationResult:
    """Smallest level at which every witness owns a distinct full-dimensional
    cell containing it; guaranteed to happen by the ball-radius horizon."""
    fo = as_oracle(f)
    radius = min(
        _ball_radius_sq(fo, w, domain, codomain)
        for w in ws.witnesses.values()
    )
    # horizon: mesh contraction factor (d/(d+1))^2 per level
    d = max(domain.dim, 1)
    factor = Fraction(d * d, (d + 1) * (d + 1))
    mesh = domain.squared_mesh()
    kappa_ball = 0
    while mesh >= radius and kappa_ball <= kappa_max + 64:
        mesh *= factor
        kappa_ball += 1
    targets = sorted(ws.witnesses, key=lambda t: (len(t), t))
    for kappa in range(kappa_floor, kappa_max + 1):
        options = {
            t: _cells_containing_witness(ws.witnesses[t], domain, kappa,
                                         simplex_budget)
            for t in targets
        }
        assignment = _distinct_assignment(targets, options)
        if assignment is not None:
            cx = domain.sd_k(kappa, budget=simplex_budget)
            return SeparationResult(kappa, assignment, kappa_ball, cx)
    raise BudgetExceeded(
        f"witnesses not separated by kappa_max={kappa_max} "
        f"(ball-radius horizon {kappa_ball})"
    )


def _distinct_assignment(targets, options):
    """Greedy bipartite matching with backtracking (tiny instances)."""
    used: set[Simplex] = set()
    chosen: dict = {}

    def assign(i: int) -> bool:
        if i == len(targets):
            return True
        t = targets[i]
        for cell in options[t]:
            if cell not in used:
                used.add(cell)
                chosen[t] = cell
                if assign(i + 1):
                    return True
                used.discard(cell)
                del chosen[t]
        return False

    return dict(chosen) if assign(0) else None


# ---------------------------------------------------------------------------
# surjectivization (the seven-step modification)


@dataclass
class SecondStarCertificate:
    vertex: int
    target: int
    kind: str                    # "margin" or "chained"
    via: int | None = None       # coarse vertex used by the chain
    margin_sq: Fraction | None = None


@dataclass
class SurjectiveApproxResult:
    kappa: int                  # total subdivisions applied to the domain
    ell: int                    # subdivisions applied to the codomain
    h: SimplicialMap
    kappa_star: int
    kappa_sep: int
    witnesses: dict[Simplex, Simplex]    # target -> reassigned fine cell
    second_star_certificates: list[SecondStarCertificate]
    sup_bound_sq: Fraction               # certified upper bound on sup|f-h|^2
    sup_interval: SupInterval | None
    classical_surjective: bool           # whether h* was already onto
    classical_result: ApproximationResult


def surjectivize(f, domain: Complex, codomain: Complex,
                 order: VertexOrder | None = None,
                 budgets: Budgets | None = None) -> SurjectiveApproxResult:
    b = Budgets.coerce(budgets)
    fo = as_oracle(f)
    order = order or VertexOrder.default(codomain)
    if codomain.dim == 0:
        raise WitnessNotFound(
            (), "codomain is a single point set; nothing to surjectivize"
        )
    probe = [domain.point(v) for v in list(domain.vertex_ids())[:4]]
    if len(probe) >= 2:
        fo.spot_check_lipschitz(probe)
    ws = find_witnesses(fo, domain, codomain, b.sampling_depth,
                        b.simplex_budget)
    sep = separate_witnesses(ws, fo, domain, codomain, 0, b.kappa_max,
                             b.simplex_budget)
    approx = simplicial_approximation(
        fo, domain, codomain, b.kappa_max, order,
        kappa_floor=sep.kappa, simplex_budget=b.simplex_budget,
    )
    kappa_star = approx.kappa
    p = approx.domain
    h0 = approx.h
    # distinct witness cells at the working level; the subdivision chain is
    # memoised, so this sees the same complex instance the approximation used
    sep_star = separate_witnesses(ws, fo, domain, codomain, kappa_star,
                                  kappa_star, b.simplex_budget)
    if sep_star.fine is not p:
        raise InternalCheckFailed("subdivision chains diverged")  # bug trap
    witness_cells = sep_star.cells
    p_star = p.sd_k(2, budget=b.simplex_budget)
    descended = descend_map(h0, p_star, order, verify=True)
    h_star = descended.h_star
    # locate each witness cell's barycentre vertex in sd(p)
    p1 = p_star.parent
    bary_of_cell = {}
    for nu in range(len(p.points), len(p1.points)):
        bary_of_cell[p1.parent_cell[(nu,)]] = nu
    vertex_map = dict(h_star.vertex_map)
    reassigned: dict[int, Simplex] = {}
    chosen_cells: dict[Simplex, Simplex] = {}
    for target in sorted(witness_cells, key=lambda t: (len(t), t)):
        sigma_k = witness_cells[target]
        rk = len(sigma_k) - 1
        bk = bary_of_cell[sigma_k] if rk > 0 else sigma_k[0]
        candidates = [c for c in p_star.vertex_cells(bk) if len(c) == rk + 1]
        if not candidates:
            raise InternalCheckFailed("no full-dimensional cell at barycentre")
        prime = min(candidates)
        if p_star.ancestor_cell(prime, p) != sigma_k:
            raise InternalCheckFailed(
                "reassigned cell is not interior to its witness simplex"
            )
        omegas = order.sorted(target)
        dk = len(omegas) - 1
        rest = [v for v in prime if v != bk]
        vertices = [bk] + rest
        for i, nu in enumerate(vertices):
            if nu in reassigned:
                raise InternalCheckFailed("witness cells share a vertex")
            reassigned[nu] = target
            vertex_map[nu] = omegas[i] if i <= dk else omegas[0]
        chosen_cells[target] = prime
    h = SimplicialMap(p_star, codomain, vertex_map)
    _verify_modified_map(h, p_star, p, witness_cells)
    report = is_surjective(h)
    if not report.surjective:
        raise InternalCheckFailed("modified map failed the surjectivity check")
    for nu in p_star.vertex_ids():
        if nu not in reassigned and vertex_map[nu] != h_star.vertex_map[nu]:
            raise InternalCheckFailed("map changed outside the witness cells")
    certs = _second_star_certificates(
        approx, descended, h, h_star, reassigned, p_star
    )
    sup_bound_sq = 9 * codomain.squared_mesh()
    classical = is_surjective(h_star).surjective
    return SurjectiveApproxResult(
        kappa=kappa_star + 2,
        ell=0,
        h=h,
        kappa_star=kappa_star,
        kappa_sep=sep.kappa,
        witnesses=chosen_cells,
        second_star_certificates=certs,
        sup_bound_sq=sup_bound_sq,
        sup_interval=None,
        classical_surjective=classical,
        classical_result=approx,
    )


def _verify_modified_map(h: SimplicialMap, p_star: Complex, p: Complex,
                         witness_cells: dict[Simplex, Simplex]):
    """Single pass over the fine cells: every image spans a codomain member
    (simpliciality) and h(sigma_k) equals tau_k exactly, aggregating over
    every fine cell inside sigma_k, boundary included."""
    codomain = h.codomain
    members = codomain.simplices
    vm = h.vertex_map
    owners: dict[Simplex, list[Simplex]] = {}
    tau_of = {sigma: target for target, sigma in witness_cells.items()}
    for sigma in witness_cells.values():
        for face in faces_of(sigma):
            owners.setdefault(face, []).append(sigma)
    achieved: dict[Simplex, set[int]] = {s: set() for s in
                                         witness_cells.values()}
    offenders = []
    for cell in p_star.simplices:
        img = tuple(sorted({vm[v] for v in cell}))
        if img not in members:
            offenders.append(cell)
            continue
        holding = owners.get(p_star.ancestor_cell(cell, p))
        if holding:
            for sigma in holding:
                if not set(img) <= set(tau_of[sigma]):
                    raise InternalCheckFailed(
                        "witness simplex image escapes its target"
                    )
                achieved[sigma].update(img)
    if offenders:
        worst = min(offenders)
        raise NotSimplicial(
            tuple(p_star.name_of(v) for v in worst),
            {codomain.name_of(vm[v]) for v in worst},
        )
    for sigma, got in achieved.items():
        if got != set(tau_of[sigma]):
            raise InternalCheckFailed(
                "witness simplex image does not equal its target"
            )


def _second_star_certificates(approx: ApproximationResult,
                              descended: DescendResult, h: SimplicialMap,
                              h_star: SimplicialMap, reassigned: dict,
                              p_star: Complex) -> list[SecondStarCertificate]:
    """Containment-chain certificates: st(nu, P*) maps within st(h0(via), L)
    because the refined star sits inside the minimal carrier's vertex stars,
    and st(h0(via), L) sits inside the second star of h(nu) whenever h*(nu)
    and h(nu) are vertices of the same witness simplex. The preconditions of
    each containment are asserted exactly; no geometry is re-measured."""
    certs = []
    codomain = h.codomain
    for nu in p_star.vertex_ids():
        via = descended.via[nu]
        base = approx.certificates[via]
        if nu not in reassigned:
            if h.vertex_map[nu] != h_star.vertex_map[nu]:
                raise InternalCheckFailed("chain certificate mismatch")
            certs.append(SecondStarCertificate(
                nu, h.vertex_map[nu], "chained", via, base.margin_sq
            ))
        else:
            target = reassigned[nu]
            if h_star.vertex_map[nu] not in target:
                raise InternalCheckFailed(
                    "descended image escaped the witness target simplex"
                )
            if h.vertex_map[nu] not in target:
                raise InternalCheckFailed(
                    "reassigned image escaped the witness target simplex"
                )
            certs.append(SecondStarCertificate(
                nu, h.vertex_map[nu], "chained", via, base.margin_sq
            ))
    # the chain needs st(h*(nu)) inside st^(2)(h(nu)); both are vertices of
    # the same codomain simplex, so the closed star of h(nu) contains h*(nu)
    for cert in certs:
        if cert.via is None:
            raise InternalCheckFailed("missing chain vertex")
    return certs


def surjective_simplicial_approximation(f, domain: Complex, codomain: Complex,
                                        eps_sq: Fraction,
                                        order: VertexOrder | None = None,
                                        budgets: Budgets | None = None,
                                        order_names=None
                                        ) -> SurjectiveApproxResult:
    """Surjective simplicial map into a subdivided codomain with certified
    sup distance below eps (threshold given squared).

    A vertex order must rank the subdivided codomain's vertices; pass
    order_names (resolved after the subdivision level is known) to pin it.
    """
    b = Budgets.coerce(budgets)
    fo = as_oracle(f)
    eps_sq = exact.rat(eps_sq)
    ell = fine_codomain(codomain, eps_sq / 9, b.ell_max, b.simplex_budget)
    fine = codomain.sd_k(ell, budget=b.simplex_budget)
    if order_names is not None:
        order = VertexOrder.from_names(fine, list(order_names))
    elif order is not None and len(order.ordered_ids) != len(fine.points):
        raise NotARefinement(
            "the supplied vertex order ranks the unsubdivided codomain; "
            "supply order_names for the subdivided one or omit it"
        )
    # witness samples must resolve the open cells of the subdivided codomain;
    # aligned fixtures (dyadic folds) hit its vertex grid exactly until the
    # sampling outruns it, so the search depth scales with ell. The search
    # stops subdividing as soon as every witness is found.
    if b.sampling_depth < ell + 2:
        b = Budgets(kappa_max=b.kappa_max, ell_max=b.ell_max,
                    sampling_depth=ell + 2, simplex_budget=b.simplex_budget,
                    sup_depth=b.sup_depth)
    result = surjectivize(fo, domain, fine, order, b)
    result.ell = ell
    if result.sup_bound_sq >= eps_sq:
        raise SupBoundNotMet(
            f"star-chain bound {result.sup_bound_sq} is not below {eps_sq}"
        )
    itv = certified_sup_distance(
        fo, MapOracle.from_plmap(result.h), budget_sq=None,
        max_depth=b.sup_depth, simplex_budget=b.simplex_budget,
    )
    if itv.hi_sq >= eps_sq:
        raise SupBoundNotMet(
            f"certified interval hi^2 = {itv.hi_sq} is not below {eps_sq}"
        )
    result.sup_interval = itv
    if itv.hi_sq < result.sup_bound_sq:
        result.sup_bound_sq = itv.hi_sq
    return result
