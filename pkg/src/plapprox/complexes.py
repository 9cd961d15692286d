"""Finite simplicial complexes of R^n with exact coordinates.

Vertices are indexed by small ints internally; user-facing names are strings.
Simplices are sorted tuples of vertex ids. Barycentric subdivisions carry a
provenance table (each cell knows the minimal parent cell containing it), so
minimal carriers along subdivision chains are O(1) lookups instead of
geometric searches.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

from . import exact
from .errors import (
    BadIntersection,
    BudgetExceeded,
    CarrierNotFound,
    DegenerateSimplex,
    DimensionMismatch,
    NotARefinement,
    NotFaceClosed,
    UnknownVertex,
)
from .exact import ONE, ZERO, Vec

Simplex = tuple[int, ...]

DEFAULT_SIMPLEX_BUDGET = 200_000


def faces_of(simplex: Simplex):
    """All nonempty proper and improper faces."""
    for size in range(1, len(simplex) + 1):
        yield from combinations(simplex, size)


def proper_faces_of(simplex: Simplex):
    for size in range(1, len(simplex)):
        yield from combinations(simplex, size)


@lru_cache(maxsize=None)
def _chain_template(dim: int):
    """Chains of strictly nested nonempty subsets of {0..dim} (as bitmasks)
    ending at the full set; these are the subdivision cells whose minimal
    parent cell is the full simplex. Returns (chains, faces) where faces
    lists every nonempty subset as (mask, index tuple)."""
    full = (1 << (dim + 1)) - 1

    def bits(mask):
        return tuple(i for i in range(dim + 1) if mask >> i & 1)

    subsets = [m for m in range(1, full + 1)]
    chains_at: dict[int, list] = {}
    for m in sorted(subsets, key=lambda m: bin(m).count("1")):
        out = [(m,)]
        sub = (m - 1) & m
        while sub:
            for chain in chains_at[sub]:
                out.append(chain + (m,))
            sub = (sub - 1) & m
        chains_at[m] = out
    faces = tuple((m, bits(m)) for m in subsets)
    return tuple(chains_at[full]), faces


@dataclass(frozen=True)
class StarSet:
    """An open star as a combinatorial set of open cells."""

    open_cells: frozenset
    center: str

    def cells(self):
        return sorted(self.open_cells, key=lambda s: (len(s), s))


class Complex:
    def __init__(self, ambient_dim, points, names, simplices, parent=None,
                 parent_cell=None):
        self.ambient_dim = ambient_dim
        self.points: list[Vec] = points
        self.names: list[str] = names
        self.simplices: set[Simplex] = simplices
        self.parent: Complex | None = parent
        self.parent_cell: dict[Simplex, Simplex] | None = parent_cell
        self._name_to_id = {n: i for i, n in enumerate(names)}
        self._maximal = None
        self._vertex_cells = None
        self._bboxes = {}
        self._diam = {}
        self._sd = None

    # -- basic views --------------------------------------------------------

    def __len__(self):
        return len(self.simplices)

    @property
    def dim(self) -> int:
        return max((len(s) - 1 for s in self.simplices), default=-1)

    def vertex_ids(self):
        return range(len(self.points))

    def point(self, vid: int) -> Vec:
        return self.points[vid]

    def id_of(self, name: str) -> int:
        try:
            return self._name_to_id[name]
        except KeyError:
            raise UnknownVertex(f"no vertex named {name!r}") from None

    def name_of(self, vid: int) -> str:
        return self.names[vid]

    def simplex_points(self, simplex: Simplex) -> list[Vec]:
        return [self.points[i] for i in simplex]

    def has_simplex(self, simplex: Simplex) -> bool:
        return tuple(sorted(simplex)) in self.simplices

    def maximal_simplices(self) -> list[Simplex]:
        if self._maximal is None:
            # face-closedness means "proper face of something" is equivalent
            # to "facet of something", so one pass over facets suffices
            non_maximal = set()
            for s in self.simplices:
                if len(s) >= 2:
                    for i in range(len(s)):
                        non_maximal.add(s[:i] + s[i + 1:])
            self._maximal = sorted(
                (s for s in self.simplices if s not in non_maximal),
                key=lambda s: (len(s), s),
            )
        return self._maximal

    def vertex_cells(self, vid: int) -> list[Simplex]:
        """All simplices containing the vertex."""
        if self._vertex_cells is None:
            table = {}
            for s in self.simplices:
                for v in s:
                    table.setdefault(v, []).append(s)
            for v in table:
                table[v].sort(key=lambda s: (len(s), s))
            self._vertex_cells = table
        return self._vertex_cells.get(vid, [])

    def bbox(self, simplex: Simplex):
        box = self._bboxes.get(simplex)
        if box is None:
            pts = self.simplex_points(simplex)
            lo = tuple(min(p[k] for p in pts) for k in range(self.ambient_dim))
            hi = tuple(max(p[k] for p in pts) for k in range(self.ambient_dim))
            box = (lo, hi)
            self._bboxes[simplex] = box
        return box

    def bbox_sqdist(self, x: Vec, simplex: Simplex) -> Fraction:
        lo, hi = self.bbox(simplex)
        acc = ZERO
        for xi, a, b in zip(x, lo, hi):
            if xi < a:
                acc += (a - xi) ** 2
            elif xi > b:
                acc += (xi - b) ** 2
        return acc

    # -- carriers ------------------------------------------------------------

    def carrier(self, x: Vec) -> Simplex | None:
        """Simplex whose relative interior contains x, or None outside |K|."""
        if len(x) != self.ambient_dim:
            raise DimensionMismatch("point dimension differs from ambient")
        for s in self.maximal_simplices():
            if self.bbox_sqdist(x, s) > 0:
                continue
            lam = exact.barycentric_coordinates(x, self.simplex_points(s))
            if lam is None:
                continue
            support = tuple(v for v, c in zip(s, lam) if c > 0)
            return support
        return None

    def requires_member(self, simplex) -> Simplex:
        s = tuple(sorted(simplex))
        if s not in self.simplices:
            raise UnknownVertex(f"simplex {s} is not a member of the complex")
        return s

    # -- stars ---------------------------------------------------------------

    def open_star(self, vid: int) -> StarSet:
        if vid not in range(len(self.points)) or not self.vertex_cells(vid):
            raise UnknownVertex(f"vertex id {vid} has no cells")
        return StarSet(frozenset(self.vertex_cells(vid)), self.names[vid])

    def closed_star(self, vid: int) -> set[Simplex]:
        """Subcomplex: every face of every cell containing the vertex."""
        cells = set()
        for s in self.vertex_cells(vid):
            cells.update(faces_of(s))
        if not cells:
            raise UnknownVertex(f"vertex id {vid} has no cells")
        return cells

    def star_of_subcomplex(self, cells) -> StarSet:
        verts = set()
        for s in cells:
            verts.update(s)
        out = set()
        for v in verts:
            out.update(self.vertex_cells(v))
        label = ",".join(sorted(self.names[v] for v in verts))
        return StarSet(frozenset(out), label)

    def second_star(self, vid: int) -> StarSet:
        return self.star_of_subcomplex(self.closed_star(vid))

    def star_vertex_set(self, vid: int) -> set[int]:
        verts = set()
        for s in self.vertex_cells(vid):
            verts.update(s)
        return verts

    def star_radius_sq(self, vid: int) -> Fraction:
        """max |u - v|^2 over vertices u of the closed star; bounds |x - v|
        for every x in the closed star."""
        p = self.points[vid]
        return max(
            (exact.sqdist(p, self.points[u]) for u in self.star_vertex_set(vid)),
            default=ZERO,
        )

    def star_diameter_sq(self, vid: int) -> Fraction:
        verts = [self.points[u] for u in self.star_vertex_set(vid)]
        best = ZERO
        for a, b in combinations(verts, 2):
            d = exact.sqdist(a, b)
            if d > best:
                best = d
        return best

    def point_in_star(self, x: Vec, star: StarSet) -> bool:
        c = self.carrier(x)
        return c is not None and c in star.open_cells

    # -- measures -------------------------------------------------------------

    def squared_mesh(self) -> Fraction:
        best = ZERO
        for s in self.maximal_simplices():
            pts = self.simplex_points(s)
            for a, b in combinations(pts, 2):
                d = exact.sqdist(a, b)
                if d > best:
                    best = d
        return best

    def squared_diameter(self, simplex: Simplex) -> Fraction:
        best = self._diam.get(simplex)
        if best is None:
            pts = self.simplex_points(simplex)
            best = ZERO
            for a, b in combinations(pts, 2):
                d = exact.sqdist(a, b)
                if d > best:
                    best = d
            self._diam[simplex] = best
        return best

    # -- distance helpers ------------------------------------------------------

    def min_sqdist_to_cells(self, x: Vec, cells) -> Fraction | None:
        """Exact min squared distance from x to a union of closed cells, with
        bbox pruning. Redundant faces are dropped first."""
        cells = list(cells)
        keep = []
        cellset = set(cells)
        for c in cells:
            redundant = any(
                set(c) < set(d) for d in cellset if len(d) > len(c)
            )
            if not redundant:
                keep.append(c)
        keep.sort(key=lambda c: self.bbox_sqdist(x, c))
        best = None
        for c in keep:
            lb = self.bbox_sqdist(x, c)
            if best is not None and lb >= best:
                break
            d = exact.squared_distance_point_simplex(x, self.simplex_points(c))
            if best is None or d < best:
                best = d
        return best

    def cells_avoiding_vertex(self, vid: int) -> list[Simplex]:
        return [s for s in self.simplices if vid not in s]

    def cells_avoiding_vertex_set(self, vids: set[int]) -> list[Simplex]:
        return [s for s in self.simplices if not (set(s) & vids)]

    # -- subdivision ------------------------------------------------------------

    def barycentric_subdivision(self, budget: int = DEFAULT_SIMPLEX_BUDGET):
        template_sizes = {d: len(_chain_template(d)[0]) for d in
                          {len(s) - 1 for s in self.simplices}}
        predicted = sum(template_sizes[len(s) - 1] for s in self.simplices)
        if predicted > budget:
            raise BudgetExceeded(
                f"subdivision would create {predicted} simplices "
                f"(budget {budget})"
            )
        if self._sd is not None:
            return self._sd
        points = list(self.points)
        names = list(self.names)
        taken = set(names)
        bary_id: dict[Simplex, int] = {}
        parent_cell: dict[Simplex, Simplex] = {}
        for s in sorted(self.simplices, key=lambda s: (len(s), s)):
            if len(s) == 1:
                bary_id[s] = s[0]
                continue
            vid = len(points)
            points.append(exact.barycentre(self.simplex_points(s)))
            name = f"b{vid}"
            while name in taken:
                name += "_"
            taken.add(name)
            names.append(name)
            bary_id[s] = vid
            parent_cell[(vid,)] = s
        new_simplices: set[Simplex] = set()
        add = new_simplices.add
        for s in self.simplices:
            chains, faces = _chain_template(len(s) - 1)
            ids = {}
            for mask, idx in faces:
                ids[mask] = bary_id[tuple(s[i] for i in idx)]
            for chain in chains:
                cell = tuple(sorted(ids[m] for m in chain))
                add(cell)
                if len(cell) > 1:
                    parent_cell[cell] = s
        for v in self.vertex_ids():
            parent_cell.setdefault((v,), (v,))
        self._sd = Complex(self.ambient_dim, points, names, new_simplices,
                           parent=self, parent_cell=parent_cell)
        return self._sd

    def sd_k(self, k: int, budget: int = DEFAULT_SIMPLEX_BUDGET):
        if k < 0:
            raise ValueError("subdivision count must be >= 0")
        out = self
        for _ in range(k):
            out = out.barycentric_subdivision(budget=budget)
        return out

    def ancestor_cell(self, cell: Simplex, ancestor: "Complex") -> Simplex:
        """Minimal cell of the given ancestor complex containing this cell,
        through the provenance chain."""
        cur = self
        while cur is not ancestor:
            if cur.parent is None or cur.parent_cell is None:
                raise NotARefinement("complexes are not provenance-related")
            cell = cur.parent_cell[cell]
            cur = cur.parent
        return cell

    def descends_from(self, ancestor: "Complex") -> bool:
        """True when `ancestor` is this complex or a provenance ancestor."""
        cur = self
        while cur is not None:
            if cur is ancestor:
                return True
            cur = cur.parent
        return False

    # -- refinement checks -------------------------------------------------------

    def minimal_carrier(self, vid: int, coarse: "Complex") -> Simplex:
        """The unique minimal-dimension simplex of the coarse complex
        containing this vertex."""
        if self.descends_from(coarse):
            return self.ancestor_cell((vid,), coarse)
        c = coarse.carrier(self.points[vid])
        if c is None:
            raise CarrierNotFound(
                f"vertex {self.names[vid]} lies outside the coarse complex"
            )
        return c

    def contains_simplex_of(self, other: "Complex", cell: Simplex,
                            container: Simplex) -> bool:
        pts = other.simplex_points(cell)
        cpts = self.simplex_points(container)
        return all(
            exact.barycentric_coordinates(p, cpts) is not None for p in pts
        )


def is_refinement(fine: Complex, coarse: Complex) -> bool:
    """|fine| == |coarse| with every fine simplex inside a coarse simplex,
    checked exactly (containment + per-top-simplex volume match in hull
    coordinates)."""
    if fine.ambient_dim != coarse.ambient_dim:
        return False
    if fine.descends_from(coarse):
        return True
    holders: dict[Simplex, list[Simplex]] = {s: [] for s in
                                             coarse.maximal_simplices()}
    for cell in fine.maximal_simplices():
        inside = None
        for s in coarse.maximal_simplices():
            if coarse.contains_simplex_of(fine, cell, s):
                inside = s
                break
        if inside is None:
            return False
        holders[inside].append(cell)
    for s, cells in holders.items():
        d = len(s) - 1
        if d == 0:
            if not any(fine.simplex_points(c) == coarse.simplex_points(s)
                       for c in cells):
                return False
            continue
        base = coarse.simplex_points(s)
        total = ZERO
        for c in cells:
            if len(c) - 1 != d:
                continue
            coords = []
            for p in fine.simplex_points(c):
                lam = exact.hull_coordinates(p, base)
                coords.append(lam[1:])  # hull coordinates of p in s
            rows = [
                [coords[i + 1][k] - coords[0][k] for k in range(d)]
                for i in range(d)
            ]
            total += abs(exact.determinant(rows))
        if total != ONE:
            return False
    return True


# -----------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    ok: bool
    violations: list = field(default_factory=list)
    complex: Complex | None = None


def build_complex(ambient_dim, vertices: dict[str, list], simplices,
                  close_faces: bool = True) -> Complex:
    """Structural construction: names/coords table plus face closure. No
    geometric checks; use validate_complex for those."""
    names = sorted(vertices)
    points = []
    for n in names:
        coords = exact.vec(vertices[n])
        if len(coords) != ambient_dim:
            raise DimensionMismatch(
                f"vertex {n!r} has dimension {len(coords)}, ambient is "
                f"{ambient_dim}"
            )
        points.append(coords)
    name_to_id = {n: i for i, n in enumerate(names)}
    members: set[Simplex] = set()
    for simplex in simplices:
        try:
            ids = tuple(sorted(name_to_id[v] for v in simplex))
        except KeyError as e:
            raise UnknownVertex(f"simplex {simplex} uses unknown vertex {e}")
        if len(set(ids)) != len(ids):
            raise DegenerateSimplex(f"repeated vertex in simplex {simplex}")
        if close_faces:
            members.update(faces_of(ids))
        else:
            members.add(ids)
    for i in range(len(names)):
        members.add((i,))
    return Complex(ambient_dim, points, names, members)


def validate_complex(ambient_dim, vertices, simplices,
                     close_faces: bool = True) -> ValidationReport:
    """Full validation: face closure, affine independence per simplex, and
    the exact pairwise open-cell disjointness test."""
    try:
        cx = build_complex(ambient_dim, vertices, simplices, close_faces)
    except Exception as e:  # structural failures end validation immediately
        return ValidationReport(ok=False, violations=[e])
    violations = []
    if not close_faces:
        for s in sorted(cx.simplices, key=lambda s: (len(s), s)):
            for f in proper_faces_of(s):
                if f not in cx.simplices:
                    violations.append(NotFaceClosed(
                        tuple(cx.names[v] for v in s),
                        tuple(cx.names[v] for v in f),
                    ))
    degenerate = set()
    for s in sorted(cx.simplices, key=lambda s: (len(s), s)):
        if not exact.affine_independent(cx.simplex_points(s)):
            degenerate.add(s)
            violations.append(DegenerateSimplex(
                f"simplex {tuple(cx.names[v] for v in s)} is affinely "
                f"dependent"
            ))
    ordered = sorted(cx.simplices, key=lambda s: (len(s), s))
    for i, s in enumerate(ordered):
        if s in degenerate:
            continue
        for t in ordered[i + 1:]:
            if t in degenerate:
                continue
            if set(s) <= set(t) or set(t) <= set(s):
                continue  # genuine faces have disjoint open cells
            lo1, hi1 = cx.bbox(s)
            lo2, hi2 = cx.bbox(t)
            if any(h < l for l, h in zip(lo1, hi2)) or \
               any(h < l for l, h in zip(lo2, hi1)):
                continue
            if exact.relative_interiors_intersect(
                cx.simplex_points(s), cx.simplex_points(t)
            ):
                violations.append(BadIntersection(
                    tuple(cx.names[v] for v in s),
                    tuple(cx.names[v] for v in t),
                ))
    if violations:
        return ValidationReport(ok=False, violations=violations)
    return ValidationReport(ok=True, complex=cx)
