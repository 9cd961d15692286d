"""Exact rational scalars, vectors and the geometric predicates built on them.

Every quantity that the rest of the kernel compares is either a rational
number or a rational *squared* length; no square root is ever materialised.
Where a bound genuinely adds lengths, the comparison is decided exactly by
repeated squaring (`cmp_sqrt_sum`) or through certified rational enclosures
of the root (`sqrt_upper` / `sqrt_lower`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .errors import (
    CenterOnBoundary,
    DegenerateSimplex,
    DimensionMismatch,
    RayDoesNotExit,
)

Rat = Fraction
Vec = tuple[Fraction, ...]

ZERO = Fraction(0)
ONE = Fraction(1)

# Point-to-simplex distance enumerates faces, which is exponential in the
# simplex dimension; fine at desk scale, rejected beyond this.
MAX_SIMPLEX_DIM = 8


def rat(value) -> Fraction:
    """Coerce ints, strings like '3/4' or '-2', and Fractions. Floats are
    rejected: they would silently break exactness."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"not an exact rational: {value!r}")


def fmt(value: Fraction) -> str:
    return str(value)


def vec(coords) -> Vec:
    return tuple(rat(c) for c in coords)


def vadd(a: Vec, b: Vec) -> Vec:
    return tuple(x + y for x, y in zip(a, b))


def vsub(a: Vec, b: Vec) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def vscale(s: Fraction, a: Vec) -> Vec:
    return tuple(s * x for x in a)


def vdot(a: Vec, b: Vec) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), ZERO)


def sqnorm(a: Vec) -> Fraction:
    return vdot(a, a)


def sqdist(a: Vec, b: Vec) -> Fraction:
    if len(a) != len(b):
        raise DimensionMismatch(f"points of dimension {len(a)} vs {len(b)}")
    return sqnorm(vsub(a, b))


def barycentre(points: list[Vec]) -> Vec:
    n = len(points)
    w = Fraction(1, n)
    acc = points[0]
    for p in points[1:]:
        acc = vadd(acc, p)
    return vscale(w, acc)


def convex_combination(weights, points: list[Vec]) -> Vec:
    acc = vscale(weights[0], points[0])
    for w, p in zip(weights[1:], points[1:]):
        acc = vadd(acc, vscale(w, p))
    return acc


@dataclass(frozen=True)
class AffineForm:
    """x -> gradient . x + offset, exact and linear in x."""

    gradient: Vec
    offset: Fraction

    def __call__(self, x: Vec) -> Fraction:
        return vdot(self.gradient, x) + self.offset


# ---------------------------------------------------------------------------
# linear algebra over Fraction


def solve_linear(rows: list[list[Fraction]], rhs: list[Fraction]):
    """Solve A x = b exactly. Returns (particular, nullspace_basis) or None
    if inconsistent. Free variables are set to zero in the particular
    solution."""
    m = len(rows)
    n = len(rows[0]) if m else 0
    a = [list(row) + [rhs[i]] for i, row in enumerate(rows)]
    pivots = []
    r = 0
    for c in range(n):
        piv = None
        for i in range(r, m):
            if a[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = ONE / a[r][c]
        a[r] = [v * inv for v in a[r]]
        for i in range(m):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [vi - f * vr for vi, vr in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if a[i][n] != 0:
            return None
    x = [ZERO] * n
    for i, c in enumerate(pivots):
        x[c] = a[i][n]
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [ZERO] * n
        v[f] = ONE
        for i, c in enumerate(pivots):
            v[c] = -a[i][f]
        basis.append(v)
    return x, basis


def matrix_rank(rows: list[list[Fraction]]) -> int:
    m = len(rows)
    if m == 0:
        return 0
    n = len(rows[0])
    a = [list(row) for row in rows]
    rank = 0
    for c in range(n):
        piv = None
        for i in range(rank, m):
            if a[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        inv = ONE / a[rank][c]
        a[rank] = [v * inv for v in a[rank]]
        for i in range(m):
            if i != rank and a[i][c] != 0:
                f = a[i][c]
                a[i] = [vi - f * vr for vi, vr in zip(a[i], a[rank])]
        rank += 1
        if rank == m:
            break
    return rank


def determinant(rows: list[list[Fraction]]) -> Fraction:
    n = len(rows)
    a = [list(r) for r in rows]
    det = ONE
    for c in range(n):
        piv = None
        for i in range(c, n):
            if a[i][c] != 0:
                piv = i
                break
        if piv is None:
            return ZERO
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        inv = ONE / a[c][c]
        for i in range(c + 1, n):
            if a[i][c] != 0:
                f = a[i][c] * inv
                a[i] = [vi - f * vc for vi, vc in zip(a[i], a[c])]
    return det


def affine_independent(points: list[Vec]) -> bool:
    """True iff the difference vectors have full rank."""
    if not points:
        return True
    if len(points) == 1:
        return True
    base = points[0]
    rows = [list(vsub(p, base)) for p in points[1:]]
    return matrix_rank(rows) == len(points) - 1


# ---------------------------------------------------------------------------
# barycentric coordinates and carriers


def hull_coordinates(x: Vec, vertices: list[Vec]):
    """Coefficients lambda with sum 1 and sum lambda_i v_i = x, sign-free.
    None if x is not in the affine hull."""
    if any(len(v) != len(x) for v in vertices):
        raise DimensionMismatch("ambient dimensions differ")
    base = vertices[0]
    if len(vertices) == 3 and len(x) == 2:
        # Cramer fast path for triangles in the plane
        a, b = vertices[1], vertices[2]
        ux, uy = a[0] - base[0], a[1] - base[1]
        vx, vy = b[0] - base[0], b[1] - base[1]
        det = ux * vy - uy * vx
        if det == 0:
            return None
        rx, ry = x[0] - base[0], x[1] - base[1]
        s = (rx * vy - ry * vx) / det
        t = (ux * ry - uy * rx) / det
        return (ONE - s - t, s, t)
    if len(vertices) == 2:
        d = vsub(vertices[1], base)
        r = vsub(x, base)
        t = None
        for dk, rk in zip(d, r):
            if dk != 0:
                t = rk / dk
                break
        if t is None:
            return None
        for dk, rk in zip(d, r):
            if rk != t * dk:
                return None
        return (ONE - t, t)
    cols = [vsub(v, base) for v in vertices[1:]]
    rows = [[col[i] for col in cols] for i in range(len(x))]
    rhs = list(vsub(x, base))
    sol = solve_linear(rows, rhs)
    if sol is None:
        return None
    t, _ = sol
    lam = [ONE - sum(t, ZERO)] + list(t)
    return tuple(lam)


def barycentric_coordinates(x: Vec, vertices: list[Vec]):
    """Barycentric coordinates of x in the simplex, or None when x lies off
    the affine hull or has a negative coordinate (i.e. outside)."""
    if not affine_independent(vertices):
        raise DegenerateSimplex(f"{len(vertices)} affinely dependent vertices")
    lam = hull_coordinates(x, vertices)
    if lam is None or any(c < 0 for c in lam):
        return None
    return lam


def project_affine(x: Vec, vertices: list[Vec]):
    """Orthogonal projection of x on aff(vertices): returns (point, hull
    coefficients). Vertices must be affinely independent."""
    base = vertices[0]
    cols = [vsub(v, base) for v in vertices[1:]]
    if not cols:
        return base, (ONE,)
    d = vsub(x, base)
    gram = [[vdot(ci, cj) for cj in cols] for ci in cols]
    rhs = [vdot(ci, d) for ci in cols]
    sol = solve_linear(gram, rhs)
    t, _ = sol  # Gram matrix of independent vectors is positive definite
    point = base
    for coef, col in zip(t, cols):
        point = vadd(point, vscale(coef, col))
    lam = tuple([ONE - sum(t, ZERO)] + list(t))
    return point, lam


def squared_distance_point_hull(x: Vec, vertices: list[Vec]) -> Fraction:
    point, _ = project_affine(x, vertices)
    return sqdist(x, point)


def squared_distance_point_simplex(x: Vec, vertices: list[Vec]) -> Fraction:
    """Exact min over y in conv(vertices) of |x-y|^2, by enumerating faces and
    keeping projections whose barycentric coordinates are nonnegative."""
    if len(vertices) - 1 > MAX_SIMPLEX_DIM:
        raise DimensionMismatch(
            f"simplex dimension {len(vertices) - 1} exceeds the supported "
            f"maximum {MAX_SIMPLEX_DIM}"
        )
    if any(len(v) != len(x) for v in vertices):
        raise DimensionMismatch("ambient dimensions differ")
    if not affine_independent(vertices):
        raise DegenerateSimplex("affinely dependent simplex vertices")
    best = None
    idx = range(len(vertices))
    for size in range(1, len(vertices) + 1):
        for face in combinations(idx, size):
            pts = [vertices[i] for i in face]
            point, lam = project_affine(x, pts)
            if any(c < 0 for c in lam):
                continue
            d = sqdist(x, point)
            if best is None or d < best:
                best = d
    return best


def squared_distance_point_polytope_bruteforce(x: Vec,
                                               points: list[Vec]) -> Fraction:
    """Caratheodory enumeration: the nearest point lies in the hull of an
    affinely independent subset. Exponential; kept as the test oracle for
    the Wolfe routine below."""
    uniq = sorted(set(points))
    n = len(x)
    best = None
    for size in range(1, min(len(uniq), n + 1) + 1):
        for sub in combinations(uniq, size):
            pts = list(sub)
            if not affine_independent(pts):
                continue
            d = squared_distance_point_simplex(x, pts)
            if best is None or d < best:
                best = d
    return best


def _affine_min_norm(points: list[Vec]):
    """Min-norm point of the affine hull: coefficients summing to 1,
    stationarity of |sum lambda_i p_i|^2. Returns (coeffs, point)."""
    k = len(points)
    gram = [[vdot(points[i], points[j]) for j in range(k)] for i in range(k)]
    rows = [gram[i] + [ONE] for i in range(k)]
    rows.append([ONE] * k + [ZERO])
    rhs = [ZERO] * k + [ONE]
    sol = solve_linear(rows, rhs)
    if sol is None:
        return None
    coeffs = sol[0][:k]
    return coeffs, convex_combination(coeffs, points)


def squared_distance_point_polytope(x: Vec, points: list[Vec]) -> Fraction:
    """Exact distance from x to conv(points) by Wolfe's nearest-point
    algorithm. The optimality test is exact (x.p >= |x|^2 for every p), so
    the answer is certified; a step guard falls back to the Caratheodory
    oracle in the (theoretically excluded) event of cycling."""
    pts = sorted(set(vsub(p, x) for p in points))
    corral = [min(pts, key=sqnorm)]
    lam = [ONE]
    current = corral[0]
    guard = 0
    while True:
        guard += 1
        if guard > 5000:
            return squared_distance_point_polytope_bruteforce(x, points)
        cur_sq = sqnorm(current)
        if cur_sq == 0:
            return ZERO
        entering = None
        best_gap = ZERO
        for p in pts:
            gap = cur_sq - vdot(current, p)
            if gap > best_gap:
                best_gap = gap
                entering = p
        if entering is None:
            return cur_sq
        if entering in corral:
            return squared_distance_point_polytope_bruteforce(x, points)
        corral.append(entering)
        lam.append(ZERO)
        while True:
            guard += 1
            if guard > 5000:
                return squared_distance_point_polytope_bruteforce(x, points)
            solved = _affine_min_norm(corral)
            if solved is None:
                drop = lam.index(ZERO) if ZERO in lam[:-1] else 0
                corral.pop(drop)
                lam.pop(drop)
                continue
            coeffs, y = solved
            if all(c > 0 for c in coeffs):
                current = y
                lam = list(coeffs)
                break
            theta = ONE
            for li, ci in zip(lam, coeffs):
                if ci < li:
                    t = li / (li - ci)
                    if t < theta:
                        theta = t
            new_lam = [li + theta * (ci - li) for li, ci in zip(lam, coeffs)]
            keep = [i for i, c in enumerate(new_lam) if c > 0]
            if not keep:
                keep = [max(range(len(new_lam)), key=lambda i: new_lam[i])]
            if len(keep) == len(corral):
                keep.pop()
            corral = [corral[i] for i in keep]
            lam = [new_lam[i] for i in keep]
            total = sum(lam, ZERO)
            lam = [c / total for c in lam]
            current = convex_combination(lam, corral)


def bbox_gap_sq(lo1, hi1, lo2, hi2) -> Fraction:
    """Squared distance between two axis boxes; a certified lower bound on
    the distance between sets they contain."""
    acc = ZERO
    for a1, b1, a2, b2 in zip(lo1, hi1, lo2, hi2):
        if b1 < a2:
            acc += (a2 - b1) ** 2
        elif b2 < a1:
            acc += (a1 - b2) ** 2
    return acc


def squared_distance_simplex_simplex(a: list[Vec], b: list[Vec]) -> Fraction:
    """dist(A, B)^2 = dist(0, A - B)^2 over the Minkowski difference hull."""
    diffs = [vsub(p, q) for p in a for q in b]
    origin = tuple(ZERO for _ in a[0])
    return squared_distance_point_polytope(origin, diffs)


# ---------------------------------------------------------------------------
# radial ray exit


def ray_exit_factor(z: Vec, x: Vec, facet_forms: list[AffineForm]) -> Fraction:
    """Factor t > 0 with z + t(x-z) on the boundary cut out by the facet
    forms; 1/t = max_i (h_i(z) - h_i(x)) / h_i(z)."""
    if x == z:
        raise RayDoesNotExit("ray direction is zero")
    ratios = []
    for form in facet_forms:
        hz = form(z)
        if hz <= 0:
            raise CenterOnBoundary("centre is not strictly inside every facet")
        ratios.append((hz - form(x)) / hz)
    inv = max(ratios)
    if inv <= 0:
        raise RayDoesNotExit("no facet is crossed in the ray direction")
    return ONE / inv


# ---------------------------------------------------------------------------
# exact linear programming (two-phase simplex, Bland's rule)


def _pivot(tab, basis, row, col):
    m = len(tab) - 1
    piv = tab[row][col]
    tab[row] = [v / piv for v in tab[row]]
    for i in range(m + 1):
        if i != row and tab[i][col] != 0:
            f = tab[i][col]
            tab[i] = [vi - f * vr for vi, vr in zip(tab[i], tab[row])]
    basis[row] = col


def _simplex_run(tab, basis):
    """Maximise the objective stored in the last tableau row. Bland's rule."""
    m = len(tab) - 1
    width = len(tab[0]) - 1
    while True:
        col = None
        for j in range(width):
            if tab[m][j] > 0:
                col = j
                break
        if col is None:
            return True
        row = None
        best = None
        for i in range(m):
            if tab[i][col] > 0:
                ratio = tab[i][-1] / tab[i][col]
                if best is None or ratio < best or (
                    ratio == best and basis[i] < basis[row]
                ):
                    best = ratio
                    row = i
        if row is None:
            return False  # unbounded
        _pivot(tab, basis, row, col)


def lp_max(c: list[Fraction], a_eq: list[list[Fraction]], b_eq: list[Fraction]):
    """Maximise c.x subject to A x = b, x >= 0, exactly.

    Returns ('optimal', value, x), ('unbounded', None, None) or
    ('infeasible', None, None).
    """
    m = len(a_eq)
    n = len(c)
    rows = []
    rhs = []
    for i in range(m):
        row = list(a_eq[i])
        r = b_eq[i]
        if r < 0:
            row = [-v for v in row]
            r = -r
        rows.append(row)
        rhs.append(r)
    # phase 1: artificial variables
    tab = []
    for i in range(m):
        tab.append(rows[i] + [ONE if j == i else ZERO for j in range(m)] + [rhs[i]])
    obj = [ZERO] * (n + m) + [ZERO]
    for i in range(m):
        for j in range(n):
            obj[j] += rows[i][j]
        obj[-1] += rhs[i]
    # maximise -(sum of artificials) == maximise sum(rows).x - ... ; the row
    # above is the reduced objective after pricing out the artificial basis.
    tab.append(obj)
    basis = [n + i for i in range(m)]
    _simplex_run(tab, basis)
    if tab[m][-1] != 0:
        return "infeasible", None, None
    # drive remaining artificial variables out of the basis
    for i in range(m):
        if basis[i] >= n:
            col = None
            for j in range(n):
                if tab[i][j] != 0:
                    col = j
                    break
            if col is not None:
                _pivot(tab, basis, i, col)
    keep_rows = [i for i in range(m) if basis[i] < n]
    tab2 = [[tab[i][j] for j in range(n)] + [tab[i][-1]] for i in keep_rows]
    basis2 = [basis[i] for i in keep_rows]
    obj2 = list(c) + [ZERO]
    for i, b in enumerate(basis2):
        if obj2[b] != 0:
            f = obj2[b]
            obj2 = [vj - f * vr for vj, vr in zip(obj2, tab2[i])]
    tab2.append(obj2)
    ok = _simplex_run(tab2, basis2)
    if not ok:
        return "unbounded", None, None
    x = [ZERO] * n
    for i, b in enumerate(basis2):
        x[b] = tab2[i][-1]
    value = sum((ci * xi for ci, xi in zip(c, x)), ZERO)
    return "optimal", value, x


def relative_interiors_intersect(a: list[Vec], b: list[Vec]) -> bool:
    """Exact test whether relint(conv a) meets relint(conv b).

    LP: maximise t subject to lambda_i >= t, mu_j >= t, both summing to 1 and
    weighting to a common ambient point. Positive optimum iff the open cells
    meet."""
    n = len(a[0])
    na, nb = len(a), len(b)
    nvars = na + nb + 1  # lambdas, mus, t ... then surplus vars appended
    # equalities: sum lambda = 1, sum mu = 1, sum lambda a - sum mu b = 0
    eqs = []
    rhs = []
    eqs.append([ONE] * na + [ZERO] * nb + [ZERO])
    rhs.append(ONE)
    eqs.append([ZERO] * na + [ONE] * nb + [ZERO])
    rhs.append(ONE)
    for k in range(n):
        eqs.append([p[k] for p in a] + [-q[k] for q in b] + [ZERO])
        rhs.append(ZERO)
    # lambda_i - t - s_i = 0 and mu_j - t - s'_j = 0
    nslack = na + nb
    rows = []
    for row in eqs:
        rows.append(row + [ZERO] * nslack)
    for i in range(na):
        row = [ZERO] * (nvars + nslack)
        row[i] = ONE
        row[na + nb] = -ONE
        row[nvars + i] = -ONE
        rows.append(row)
        rhs.append(ZERO)
    for j in range(nb):
        row = [ZERO] * (nvars + nslack)
        row[na + j] = ONE
        row[na + nb] = -ONE
        row[nvars + na + j] = -ONE
        rows.append(row)
        rhs.append(ZERO)
    c = [ZERO] * (nvars + nslack)
    c[na + nb] = ONE
    status, value, _ = lp_max(c, rows, rhs)
    if status == "infeasible":
        return False
    # t is bounded by 1/max(na, nb); unbounded cannot occur
    return value > 0


# ---------------------------------------------------------------------------
# certified square roots


def _isqrt_floor(n: int) -> int:
    return math.isqrt(n)


def sqrt_lower(q: Fraction, bits: int = 64) -> Fraction:
    """Rational r with r <= sqrt(q), within 2^-bits relative-ish slack."""
    if q < 0:
        raise ValueError("negative radicand")
    if q == 0:
        return ZERO
    scale = 1 << bits
    num = q.numerator * q.denominator * scale * scale
    return Fraction(_isqrt_floor(num), q.denominator * scale)


def sqrt_upper(q: Fraction, bits: int = 64) -> Fraction:
    """Rational r with r >= sqrt(q)."""
    if q < 0:
        raise ValueError("negative radicand")
    if q == 0:
        return ZERO
    scale = 1 << bits
    num = q.numerator * q.denominator * scale * scale
    root = _isqrt_floor(num)
    if root * root < num:
        root += 1
    return Fraction(root, q.denominator * scale)


def cmp_sqrt_sum(a2: Fraction, b2: Fraction, c2: Fraction) -> int:
    """Exact sign of (sqrt(a2) + sqrt(b2)) - sqrt(c2); all inputs squared."""
    if a2 < 0 or b2 < 0 or c2 < 0:
        raise ValueError("negative radicand")
    # (sqrt a + sqrt b)^2 = a + b + 2 sqrt(ab)
    r = c2 - a2 - b2
    if r < 0:
        return 1
    lhs = 4 * a2 * b2
    rhs = r * r
    if lhs < rhs:
        return -1
    if lhs == rhs:
        return 0
    return 1


def sum_sqrt_squared_upper(a2: Fraction, b2: Fraction, bits: int = 64) -> Fraction:
    """Certified rational upper bound on (sqrt(a2) + sqrt(b2))^2."""
    return a2 + b2 + 2 * sqrt_upper(a2 * b2, bits)


# ---------------------------------------------------------------------------
# decimal rendering (cosmetic only; never feeds back into computation)


def decimal_str(q: Fraction, digits: int = 6) -> str:
    sign = "-" if q < 0 else ""
    q = abs(q)
    scaled = q * 10**digits
    n = scaled.numerator // scaled.denominator
    if 2 * (scaled - n) >= 1:
        n += 1
    whole, frac = divmod(n, 10**digits)
    return f"{sign}{whole}.{str(frac).zfill(digits)}"


def decimal_sqrt_str(q2: Fraction, digits: int = 6) -> str:
    """Decimal rendering of sqrt(q2) for reports."""
    lo = sqrt_lower(q2, bits=digits * 4 + 16)
    return decimal_str(lo, digits)
