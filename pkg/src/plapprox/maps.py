"""Piecewise-affine maps, simplicial maps, map oracles and certified sup norms.

A PLMap is a vertex-image table over a domain complex, evaluated by
barycentric interpolation in the carrier. A SimplicialMap additionally sends
vertices to codomain vertices so that each domain simplex spans a codomain
simplex. Continuous maps enter only as MapOracle: an exact evaluator plus a
certified squared Lipschitz constant.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import exact
from .complexes import Complex, Simplex, is_refinement
from .errors import (
    BudgetExceeded,
    DimensionMismatch,
    LipschitzViolation,
    NotARefinement,
    NotSimplicial,
    OracleDomainError,
    OutsideDomain,
)
from .exact import ONE, ZERO, Vec


class PLMap:
    """Map determined by vertex images, extended affinely over each simplex."""

    def __init__(self, domain: Complex, codomain_carrier: Complex,
                 vertex_images: dict[int, Vec], check_images: bool = True):
        self.domain = domain
        self.codomain_carrier = codomain_carrier
        self.vertex_images = vertex_images
        missing = [v for v in domain.vertex_ids() if v not in vertex_images]
        if missing:
            raise OutsideDomain(
                f"vertex images missing for {len(missing)} vertices"
            )
        if check_images:
            for v, img in vertex_images.items():
                if codomain_carrier.carrier(img) is None:
                    raise OutsideDomain(
                        f"image of vertex {domain.name_of(v)} lies outside "
                        f"the codomain polyhedron"
                    )

    def evaluate_vertex(self, vid: int) -> Vec:
        return self.vertex_images[vid]

    def evaluate(self, x: Vec, carrier_hint: Simplex | None = None) -> Vec:
        cell = carrier_hint
        if cell is None:
            cell = self._containing_maximal(x)
        lam = exact.barycentric_coordinates(x, self.domain.simplex_points(cell))
        if lam is None:
            raise OutsideDomain("point is outside the hinted carrier")
        return exact.convex_combination(
            lam, [self.vertex_images[v] for v in cell]
        )

    def _containing_maximal(self, x: Vec) -> Simplex:
        for s in self.domain.maximal_simplices():
            if self.domain.bbox_sqdist(x, s) > 0:
                continue
            if exact.barycentric_coordinates(
                x, self.domain.simplex_points(s)
            ) is not None:
                return s
        raise OutsideDomain("point is outside the domain polyhedron")

    def squared_lipschitz_bound(self) -> Fraction:
        """Exact rational upper bound on the squared Lipschitz constant:
        per maximal simplex, trace((B^T B)^{-1} C^T C) for edge matrices B
        (domain) and C (images); equals the squared Frobenius norm of the
        affine part when the simplex is full-dimensional."""
        best = ZERO
        for s in self.domain.maximal_simplices():
            if len(s) == 1:
                continue
            pts = self.domain.simplex_points(s)
            imgs = [self.vertex_images[v] for v in s]
            b_cols = [exact.vsub(p, pts[0]) for p in pts[1:]]
            c_cols = [exact.vsub(q, imgs[0]) for q in imgs[1:]]
            d = len(b_cols)
            btb = [[exact.vdot(b_cols[i], b_cols[j]) for j in range(d)]
                   for i in range(d)]
            ctc = [[exact.vdot(c_cols[i], c_cols[j]) for j in range(d)]
                   for i in range(d)]
            # trace((B^T B)^{-1} C^T C): solve (B^T B) X = C^T C column-wise
            tr = ZERO
            for j in range(d):
                rhs = [ctc[i][j] for i in range(d)]
                sol, _ = exact.solve_linear([row[:] for row in btb], rhs)
                tr += sol[j]
            if tr > best:
                best = tr
        return best


class VertexOrder:
    """Strict total order on codomain vertex ids, stable across runs."""

    def __init__(self, ordered_ids: list[int]):
        self.ordered_ids = list(ordered_ids)
        self.rank = {v: i for i, v in enumerate(ordered_ids)}

    @classmethod
    def default(cls, cx: Complex) -> "VertexOrder":
        ids = sorted(cx.vertex_ids(), key=lambda v: (cx.point(v), cx.name_of(v)))
        return cls(ids)

    @classmethod
    def from_names(cls, cx: Complex, names: list[str]) -> "VertexOrder":
        ids = [cx.id_of(n) for n in names]
        if sorted(ids) != sorted(cx.vertex_ids()):
            raise DimensionMismatch("vertex order must list every vertex once")
        return cls(ids)

    def min(self, ids) -> int:
        return min(ids, key=lambda v: self.rank[v])

    def sorted(self, ids) -> list[int]:
        return sorted(ids, key=lambda v: self.rank[v])


class SimplicialMap(PLMap):
    """PLMap whose vertex images are codomain vertices spanning simplices."""

    def __init__(self, domain: Complex, codomain: Complex,
                 vertex_map: dict[int, int]):
        self.codomain = codomain
        self.vertex_map = vertex_map
        images = {v: codomain.point(w) for v, w in vertex_map.items()}
        super().__init__(domain, codomain, images, check_images=False)

    def image_of_simplex(self, simplex: Simplex) -> Simplex:
        return tuple(sorted({self.vertex_map[v] for v in simplex}))


def check_simplicial(m: PLMap) -> SimplicialMap:
    """Upgrade a PLMap to a SimplicialMap or report the first offender."""
    if isinstance(m, SimplicialMap):
        vertex_map = m.vertex_map
        codomain = m.codomain
    else:
        codomain = m.codomain_carrier
        point_to_vid = {codomain.point(v): v for v in codomain.vertex_ids()}
        vertex_map = {}
        for v, img in m.vertex_images.items():
            w = point_to_vid.get(img)
            if w is None:
                raise NotSimplicial(
                    (m.domain.name_of(v),),
                    {exact.fmt(c) for c in img},
                )
            vertex_map[v] = w
    members = codomain.simplices
    offenders = []
    for s in m.domain.simplices:
        image = tuple(sorted({vertex_map[v] for v in s}))
        if image not in members:
            offenders.append((s, image))
    if offenders:
        s, image = min(offenders)
        raise NotSimplicial(
            tuple(m.domain.name_of(v) for v in s),
            {codomain.name_of(w) for w in image},
        )
    return SimplicialMap(m.domain, codomain, vertex_map)


def image_of_simplex(h: SimplicialMap, simplex: Simplex) -> Simplex:
    return h.image_of_simplex(h.domain.requires_member(simplex))


def image_vertex_set(h: SimplicialMap, cells) -> set[int]:
    out = set()
    for c in cells:
        out.update(h.vertex_map[v] for v in c)
    return out


@dataclass
class SurjectivityReport:
    surjective: bool
    witnesses: dict
    uncovered: list


def is_surjective(h: SimplicialMap) -> SurjectivityReport:
    """Exact image computation: h is onto iff every maximal codomain simplex
    is the image of some domain simplex (maximal domain cells suffice)."""
    covered = {}
    for s in h.domain.maximal_simplices():
        img = h.image_of_simplex(s)
        if img not in covered:
            covered[img] = s
    witnesses = {}
    uncovered = []
    for tau in h.codomain.maximal_simplices():
        if tau in covered:
            witnesses[tau] = covered[tau]
        else:
            uncovered.append(tau)
    return SurjectivityReport(not uncovered, witnesses, uncovered)


# ---------------------------------------------------------------------------
# map oracles


class MapOracle:
    """Continuous map presented as an exact evaluator plus a certified
    squared Lipschitz constant."""

    def __init__(self, evaluator, squared_lipschitz: Fraction,
                 domain: Complex, codomain: Complex, description: str = "",
                 pl: PLMap | None = None, is_identity: bool = False):
        self.evaluator = evaluator
        self.squared_lipschitz = exact.rat(squared_lipschitz)
        self.domain = domain
        self.codomain = codomain
        self.description = description
        self.pl = pl
        self.is_identity = is_identity

    def __call__(self, x: Vec) -> Vec:
        return self.evaluator(x)

    @classmethod
    def identity(cls, cx: Complex, codomain: Complex | None = None
                 ) -> "MapOracle":
        """Identity evaluator; the codomain may be a coarser complex of the
        same polyhedron. Carries its own PL structure so sup-distance
        computations against PL maps stay exact."""
        pl = PLMap(cx, codomain or cx, {v: cx.point(v) for v in
                                        cx.vertex_ids()}, check_images=False)
        return cls(lambda x: x, ONE, cx, codomain or cx,
                   description="identity", pl=pl, is_identity=True)

    @classmethod
    def from_plmap(cls, m: PLMap, description: str = "pl") -> "MapOracle":
        return cls(
            lambda x: m.evaluate(x),
            m.squared_lipschitz_bound(),
            m.domain,
            m.codomain_carrier,
            description=description,
            pl=m,
        )

    @classmethod
    def from_chain(cls, maps: list[PLMap], description: str = "chain"
                   ) -> "MapOracle":
        if not maps:
            raise OutsideDomain("empty composition chain")
        lip = ONE
        for m in maps:
            lip *= m.squared_lipschitz_bound()

        def evaluator(x, maps=tuple(maps)):
            for m in maps:
                x = m.evaluate(x)
            return x

        pl = maps[0] if len(maps) == 1 else None
        return cls(evaluator, lip, maps[0].domain,
                   maps[-1].codomain_carrier, description=description, pl=pl)

    def evaluate_checked(self, x: Vec) -> Vec:
        y = self.evaluator(x)
        if self.codomain.carrier(y) is None:
            raise OracleDomainError(
                "oracle produced a point outside the codomain polyhedron"
            )
        return y

    def spot_check_lipschitz(self, points: list[Vec]):
        """Violation of the certificate on any sampled pair is a hard error."""
        values = [self.evaluator(p) for p in points]
        for i in range(len(points)):
            for j in range(i + 1, len(points)):
                lhs = exact.sqdist(values[i], values[j])
                rhs = self.squared_lipschitz * exact.sqdist(points[i], points[j])
                if lhs > rhs:
                    raise LipschitzViolation(
                        f"|f(x)-f(y)|^2 = {lhs} exceeds L^2 |x-y|^2 = {rhs}"
                    )


def as_oracle(f) -> MapOracle:
    if isinstance(f, MapOracle):
        return f
    if isinstance(f, PLMap):
        return MapOracle.from_plmap(f)
    raise TypeError(f"not a map oracle: {f!r}")


# ---------------------------------------------------------------------------
# certified sup distance


@dataclass
class SupInterval:
    lo_sq: Fraction
    hi_sq: Fraction
    exact: bool
    depth: int

    def as_dict(self):
        return {
            "lo_sq": exact.fmt(self.lo_sq),
            "hi_sq": exact.fmt(self.hi_sq),
            "lo_decimal": exact.decimal_sqrt_str(self.lo_sq),
            "hi_decimal": exact.decimal_sqrt_str(self.hi_sq),
            "exact": self.exact,
            "depth": self.depth,
        }


def _common_refinement(f: MapOracle, g: MapOracle) -> Complex | None:
    """The finer of the two domains when one refines the other. The
    geometric containment check is only attempted at small sizes; provenance
    relations are free."""
    df, dg = f.domain, g.domain
    if df is dg:
        return df
    if dg.descends_from(df):
        return dg
    if df.descends_from(dg):
        return df
    if len(df) + len(dg) <= 8000:
        if is_refinement(dg, df):
            return dg
        if is_refinement(df, dg):
            return df
    return None


def _evaluate_on(oracle: MapOracle, cx: Complex, vid: int) -> Vec:
    x = cx.point(vid)
    if oracle.pl is not None:
        if cx.descends_from(oracle.pl.domain):
            cell = cx.ancestor_cell((vid,), oracle.pl.domain)
            return oracle.pl.evaluate(x, carrier_hint=cell)
        if oracle.pl.domain.descends_from(cx):
            # vertex ids persist along subdivision chains, so a vertex of an
            # ancestor complex is the same vertex of the finer map domain
            return oracle.pl.vertex_images[vid]
    return oracle.evaluator(x)


def certified_sup_distance(f, g, budget_sq: Fraction | None = None,
                           max_depth: int = 6,
                           simplex_budget: int = 200_000) -> SupInterval:
    """Interval [lo, hi] with lo <= sup|f-g| <= hi (stored squared).

    Exact (lo == hi) when both maps are PL and one domain refines the other:
    |f-g|^2 is convex on each cell of the finer complex, so the sup is
    attained at its vertices. Otherwise vertices of iterated subdivisions are
    sampled and hi adds Lipschitz slack, refined until the squared width is
    within budget_sq.
    """
    fo, go = as_oracle(f), as_oracle(g)
    if fo.domain.ambient_dim != go.domain.ambient_dim:
        raise DimensionMismatch("domains live in different ambient spaces")
    common = _common_refinement(fo, go)
    if fo.pl is not None and go.pl is not None and common is not None:
        lo = ZERO
        for v in common.vertex_ids():
            d = exact.sqdist(_evaluate_on(fo, common, v),
                             _evaluate_on(go, common, v))
            if d > lo:
                lo = d
        return SupInterval(lo, lo, exact=True, depth=0)
    base = common if common is not None else fo.domain
    lam_sum_sq = exact.sum_sqrt_squared_upper(
        fo.squared_lipschitz, go.squared_lipschitz
    )
    cx = base
    best = None
    for depth in range(max_depth + 1):
        lo = ZERO
        for v in cx.vertex_ids():
            d = exact.sqdist(_evaluate_on(fo, cx, v), _evaluate_on(go, cx, v))
            if d > lo:
                lo = d
        slack_sq = lam_sum_sq * cx.squared_mesh()
        hi = exact.sum_sqrt_squared_upper(lo, slack_sq)
        best = SupInterval(lo, hi, exact=False, depth=depth)
        if budget_sq is not None and hi - lo <= budget_sq:
            return best
        if budget_sq is None and depth >= 2:
            return best
        if depth < max_depth:
            try:
                cx = cx.barycentric_subdivision(budget=simplex_budget)
            except BudgetExceeded:
                break
    if budget_sq is not None:
        raise BudgetExceeded(
            "sup-distance interval did not close within budget", best=best
        )
    return best


def sup_distance_pl_refined(f: PLMap, g: PLMap) -> Fraction:
    """Exact squared sup distance of two PL maps when g's domain refines
    f's (or conversely); raises otherwise."""
    itv = certified_sup_distance(MapOracle.from_plmap(f),
                                 MapOracle.from_plmap(g))
    if not itv.exact:
        raise NotARefinement("domains are not nested; no exact sup available")
    return itv.lo_sq
