"""Zonotopes, constrained zonotopes, boxes, and the set operations built on them.

A zonotope is {c + G xi : ||xi||_inf <= 1}; a constrained zonotope adds the
coefficient constraint A xi = b and can represent any convex polytope. All
operations are pure functions over immutable values; emptiness, membership
and support queries reduce to small dense LPs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import ComplexityGuard, DimensionMismatch, EmptySet, UnsupportedDimension
from .optim import LinearProgram, LpResult, solve_lp

DEFAULT_TOL = 1e-9


class Zonotope:
    """Centrally symmetric set {c + G xi : ||xi||_inf <= 1}."""

    __slots__ = ("center", "generators")

    def __init__(self, center, generators=None):
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        n = self.center.size
        if generators is None:
            generators = np.zeros((n, 0))
        self.generators = np.asarray(generators, dtype=float).reshape(n, -1)
        if not np.all(np.isfinite(self.center)) or not np.all(np.isfinite(self.generators)):
            raise ValueError("zonotope data must be finite")

    @property
    def dim(self):
        return self.center.size

    @property
    def num_generators(self):
        return self.generators.shape[1]

    def as_constrained(self) -> "ConstrainedZonotope":
        return ConstrainedZonotope(self.center, self.generators)

    def __repr__(self):
        return f"Zonotope(dim={self.dim}, generators={self.num_generators})"


class ConstrainedZonotope:
    """Polytope in CG-representation {c + G xi : ||xi||_inf <= 1, A xi = b}."""

    __slots__ = ("center", "generators", "constraint_matrix", "constraint_vector")

    def __init__(self, center, generators=None, constraint_matrix=None, constraint_vector=None):
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        n = self.center.size
        if generators is None:
            generators = np.zeros((n, 0))
        self.generators = np.asarray(generators, dtype=float).reshape(n, -1)
        ng = self.generators.shape[1]
        if constraint_matrix is None:
            constraint_matrix = np.zeros((0, ng))
            constraint_vector = np.zeros(0)
        self.constraint_matrix = np.asarray(constraint_matrix, dtype=float).reshape(-1, ng)
        self.constraint_vector = np.asarray(constraint_vector, dtype=float).ravel()
        if self.constraint_vector.size != self.constraint_matrix.shape[0]:
            raise ValueError("constraint vector does not match constraint rows")
        for part in (self.center, self.generators, self.constraint_matrix, self.constraint_vector):
            if not np.all(np.isfinite(part)):
                raise ValueError("constrained zonotope data must be finite")

    @property
    def dim(self):
        return self.center.size

    @property
    def num_generators(self):
        return self.generators.shape[1]

    @property
    def num_constraints(self):
        return self.constraint_matrix.shape[0]

    def as_constrained(self):
        return self

    def __repr__(self):
        return (
            f"ConstrainedZonotope(dim={self.dim}, generators={self.num_generators}, "
            f"constraints={self.num_constraints})"
        )


@dataclass(frozen=True)
class Box:
    """Axis-aligned box [lower, upper], convertible to a diagonal zonotope."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lower", np.atleast_1d(np.asarray(self.lower, dtype=float)))
        object.__setattr__(self, "upper", np.atleast_1d(np.asarray(self.upper, dtype=float)))
        if self.lower.size != self.upper.size:
            raise DimensionMismatch("box bounds must have equal length")
        if np.any(self.lower > self.upper):
            raise ValueError("box lower bound exceeds upper bound")

    @property
    def dim(self):
        return self.lower.size

    @property
    def center(self):
        return 0.5 * (self.lower + self.upper)

    @property
    def half_widths(self):
        return 0.5 * (self.upper - self.lower)

    def to_zonotope(self) -> Zonotope:
        return Zonotope(self.center, np.diag(self.half_widths))

    def as_constrained(self) -> ConstrainedZonotope:
        return self.to_zonotope().as_constrained()

    def contains(self, point, tol=DEFAULT_TOL):
        p = np.asarray(point, dtype=float)
        return bool(np.all(p >= self.lower - tol) and np.all(p <= self.upper + tol))


def _as_cz(set_like) -> ConstrainedZonotope:
    if isinstance(set_like, ConstrainedZonotope):
        return set_like
    if isinstance(set_like, (Zonotope, Box)):
        return set_like.as_constrained()
    raise TypeError(f"unsupported set type {type(set_like)!r}")


# ---------------------------------------------------------------------------
# Emptiness / membership
# ---------------------------------------------------------------------------

@dataclass
class EmptinessCheck:
    """Outcome of an emptiness query.

    ``reason`` is "norm" when min ||xi||_inf > 1, "inconsistent" when
    A xi = b has no solution at all, and None for non-empty sets.
    ``witness`` is a member point when non-empty.
    """

    is_empty: bool
    reason: str | None = None
    min_norm: float | None = None
    witness: np.ndarray | None = None


def _min_inf_norm(eq_matrix, eq_rhs) -> LpResult:
    """LP epigraph form of min ||xi||_inf subject to eq_matrix @ xi = eq_rhs.

    Variables (xi, s, p, q) with p = xi + s >= 0 and q = s - xi >= 0.
    """
    ng = eq_matrix.shape[1]
    n_var = ng + 1 + 2 * ng
    cost = np.zeros(n_var)
    cost[ng] = 1.0
    m_eq = eq_matrix.shape[0]
    a = np.zeros((m_eq + 2 * ng, n_var))
    b = np.zeros(m_eq + 2 * ng)
    a[:m_eq, :ng] = eq_matrix
    b[:m_eq] = eq_rhs
    for i in range(ng):
        a[m_eq + 2 * i, i] = 1.0
        a[m_eq + 2 * i, ng] = 1.0
        a[m_eq + 2 * i, ng + 1 + 2 * i] = -1.0
        a[m_eq + 2 * i + 1, i] = -1.0
        a[m_eq + 2 * i + 1, ng] = 1.0
        a[m_eq + 2 * i + 1, ng + 1 + 2 * i + 1] = -1.0
    lower = np.full(n_var, -np.inf)
    upper = np.full(n_var, np.inf)
    lower[ng:] = 0.0
    return solve_lp(LinearProgram(cost, a, b, lower, upper))


def emptiness(y, tol: float = DEFAULT_TOL) -> EmptinessCheck:
    """Full emptiness verdict: non-empty iff min{||xi||_inf : A xi = b} <= 1."""
    cz = _as_cz(y)
    if cz.num_generators == 0:
        # A point set: empty only if the (empty) constraint system is inconsistent.
        if cz.num_constraints and np.abs(cz.constraint_vector).max(initial=0.0) > tol:
            return EmptinessCheck(True, "inconsistent")
        return EmptinessCheck(False, None, 0.0, cz.center.copy())
    if cz.num_constraints == 0:
        return EmptinessCheck(False, None, 0.0, cz.center.copy())
    res = _min_inf_norm(cz.constraint_matrix, cz.constraint_vector)
    if res.status == "infeasible":
        return EmptinessCheck(True, "inconsistent")
    if res.status != "optimal":
        raise RuntimeError(f"emptiness LP ended with status {res.status}")
    ng = cz.num_generators
    xi = res.x[:ng]
    if res.value > 1.0 + tol:
        return EmptinessCheck(True, "norm", res.value)
    return EmptinessCheck(False, None, res.value, cz.center + cz.generators @ xi)


def is_empty(y, tol: float = DEFAULT_TOL) -> bool:
    return emptiness(y, tol).is_empty


def contains_point(y, point, tol: float = DEFAULT_TOL) -> bool:
    """Point membership: min{||xi||_inf : G xi = z - c, A xi = b} <= 1."""
    cz = _as_cz(y)
    z = np.asarray(point, dtype=float).ravel()
    if z.size != cz.dim:
        raise DimensionMismatch(f"point has dimension {z.size}, set has {cz.dim}")
    if cz.num_generators == 0:
        return bool(np.abs(z - cz.center).max(initial=0.0) <= tol)
    eq = np.vstack([cz.generators, cz.constraint_matrix])
    rhs = np.concatenate([z - cz.center, cz.constraint_vector])
    res = _min_inf_norm(eq, rhs)
    if res.status != "optimal":
        return False
    return res.value <= 1.0 + tol


def support(y, direction):
    """Support value and an attaining point: max d@x over the set."""
    cz = _as_cz(y)
    d = np.asarray(direction, dtype=float).ravel()
    if d.size != cz.dim:
        raise DimensionMismatch("direction dimension mismatch")
    ng = cz.num_generators
    if ng == 0:
        return float(d @ cz.center), cz.center.copy()
    cost = -(cz.generators.T @ d)
    lp = LinearProgram(
        cost,
        cz.constraint_matrix,
        cz.constraint_vector,
        np.full(ng, -1.0),
        np.full(ng, 1.0),
    )
    res = solve_lp(lp)
    if res.status == "infeasible":
        raise EmptySet("support query on an empty set")
    if res.status != "optimal":
        raise RuntimeError(f"support LP status {res.status}")
    point = cz.center + cz.generators @ res.x
    return float(d @ point), point


# ---------------------------------------------------------------------------
# Constructive operations
# ---------------------------------------------------------------------------

def expand(y, eps: float):
    """Epsilon-expansion about the representation.

    Zonotopes scale their generators: {c, (1+eps) G}. For constrained
    zonotopes the coefficient polytope is scaled about the origin, i.e.
    {c, (1+eps) G, A, b/(1+eps)}, which guarantees the input set is contained
    in the output for every eps > 0.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    f = 1.0 + eps
    if isinstance(y, Box):
        y = y.to_zonotope()
    if isinstance(y, Zonotope):
        return Zonotope(y.center, f * y.generators)
    cz = _as_cz(y)
    if cz.num_constraints == 0:
        return ConstrainedZonotope(cz.center, f * cz.generators)
    return ConstrainedZonotope(
        cz.center, f * cz.generators, cz.constraint_matrix, cz.constraint_vector / f
    )


def intersect(y1, y2) -> ConstrainedZonotope:
    """Exact CG-representation of the intersection of two convex sets."""
    a = _as_cz(y1)
    b = _as_cz(y2)
    if a.dim != b.dim:
        raise DimensionMismatch("intersection requires equal ambient dimensions")
    na, nb = a.num_generators, b.num_generators
    gens = np.hstack([a.generators, np.zeros((a.dim, nb))])
    rows = a.num_constraints + b.num_constraints + a.dim
    cm = np.zeros((rows, na + nb))
    cv = np.zeros(rows)
    r = a.num_constraints
    cm[:r, :na] = a.constraint_matrix
    cv[:r] = a.constraint_vector
    cm[r:r + b.num_constraints, na:] = b.constraint_matrix
    cv[r:r + b.num_constraints] = b.constraint_vector
    r += b.num_constraints
    cm[r:, :na] = a.generators
    cm[r:, na:] = -b.generators
    cv[r:] = b.center - a.center
    return ConstrainedZonotope(a.center, gens, cm, cv)


def linear_map(matrix, y):
    """Image {M x : x in Y}; preserves the coefficient constraints."""
    m = np.asarray(matrix, dtype=float)
    if isinstance(y, Box):
        y = y.to_zonotope()
    if m.ndim != 2 or m.shape[1] != y.dim:
        raise DimensionMismatch("matrix columns must match the set dimension")
    if isinstance(y, Zonotope):
        return Zonotope(m @ y.center, m @ y.generators)
    return ConstrainedZonotope(
        m @ y.center, m @ y.generators, y.constraint_matrix, y.constraint_vector
    )


def minkowski_sum(y, z):
    """Minkowski sum of a (constrained) zonotope with a zonotope."""
    if isinstance(z, Box):
        z = z.to_zonotope()
    if not isinstance(z, Zonotope):
        raise TypeError("second summand must be an unconstrained zonotope")
    if isinstance(y, Box):
        y = y.to_zonotope()
    if y.dim != z.dim:
        raise DimensionMismatch("sum requires equal ambient dimensions")
    if isinstance(y, Zonotope):
        return Zonotope(y.center + z.center, np.hstack([y.generators, z.generators]))
    cz = y
    cm = np.hstack([cz.constraint_matrix, np.zeros((cz.num_constraints, z.num_generators))])
    return ConstrainedZonotope(
        cz.center + z.center,
        np.hstack([cz.generators, z.generators]),
        cm,
        cz.constraint_vector,
    )


# ---------------------------------------------------------------------------
# Vertices / volume (2-D)
# ---------------------------------------------------------------------------

def _dedupe_ring(points, tol=1e-9):
    out = []
    for p in points:
        if not out or np.abs(p - out[-1]).max() > tol:
            out.append(p)
    if len(out) > 1 and np.abs(out[0] - out[-1]).max() <= tol:
        out.pop()
    return out

def convex_hull_2d(points, tol=1e-12):
    """Andrew's monotone chain; returns CCW hull vertices without duplicates."""
    pts = sorted({(float(p[0]), float(p[1])) for p in points})
    if len(pts) <= 2:
        return [np.array(p) for p in pts]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= tol:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= tol:
            upper.pop()
        upper.append(p)
    ring = lower[:-1] + upper[:-1]
    return [np.array(p) for p in ring]


def _zonotope_vertices_2d(z: Zonotope):
    """Exact vertex walk for a planar zonotope: sort generators by angle."""
    gens = [g for g in z.generators.T if np.abs(g).max() > 1e-14]
    if not gens:
        return [z.center.copy()]
    gens = [g if (g[0] > 0 or (g[0] == 0 and g[1] > 0)) else -g for g in gens]
    rank = np.linalg.matrix_rank(np.column_stack(gens), tol=1e-12)
    if rank < 2:
        direction = gens[0] / np.linalg.norm(gens[0])
        length = sum(abs(direction @ g) for g in gens)
        warnings.warn("degenerate zonotope: returning segment endpoints")
        return [z.center - length * direction, z.center + length * direction]
    gens.sort(key=lambda g: np.arctan2(g[1], g[0]))
    start = z.center - sum(gens)
    half = [start]
    for g in gens:
        half.append(half[-1] + 2.0 * g)
    mirrored = [2.0 * z.center - p for p in half[1:-1]]
    ring = half + mirrored
    ring = _dedupe_ring(ring)
    # The walk above starts at the lowest-angle extreme and is CCW by
    # construction; normalize tiny numerical drift through the hull.
    return convex_hull_2d(ring)


def _cz_vertices_2d(cz: ConstrainedZonotope, tol):
    """Planar vertices of a constrained zonotope via support refinement.

    Seeds with four axis-aligned support points, then recursively inserts the
    support point of each unconfirmed hull edge's outward normal until the
    polygon is support-tight.
    """
    check = emptiness(cz, tol)
    if check.is_empty:
        raise EmptySet("vertex enumeration on an empty set")
    pts = []
    for d in (np.array([1.0, 0.0]), np.array([0.0, 1.0]),
              np.array([-1.0, 0.0]), np.array([0.0, -1.0])):
        _, p = support(cz, d)
        pts.append(p)
    hull = convex_hull_2d(pts)
    if len(hull) == 1:
        return hull
    if len(hull) == 2:
        # Possibly a segment; confirm with the two edge normals.
        seg = hull[1] - hull[0]
        normal = np.array([seg[1], -seg[0]])
        nn = np.linalg.norm(normal)
        extra = []
        for d in (normal / nn, -normal / nn):
            val, p = support(cz, d)
            if val > max(d @ hull[0], d @ hull[1]) + tol * 10:
                extra.append(p)
        if not extra:
            warnings.warn("degenerate constrained zonotope: returning segment endpoints")
            return hull
        hull = convex_hull_2d(hull + extra)

    for _ in range(200):
        new_pts = []
        m = len(hull)
        for i in range(m):
            v1 = hull[i]
            v2 = hull[(i + 1) % m]
            edge = v2 - v1
            nn = np.linalg.norm(edge)
            if nn < 1e-13:
                continue
            normal = np.array([edge[1], -edge[0]]) / nn
            val, p = support(cz, normal)
            if val > normal @ v1 + 1e-8:
                new_pts.append(p)
        if not new_pts:
            break
        hull = convex_hull_2d(hull + new_pts)
    return hull


def vertices_2d(y, tol: float = DEFAULT_TOL):
    """Counterclockwise vertex list of a planar (constrained) zonotope."""
    if isinstance(y, Box):
        y = y.to_zonotope()
    if y.dim != 2:
        raise UnsupportedDimension("vertex enumeration is implemented for dimension 2 only")
    if isinstance(y, Zonotope):
        return _zonotope_vertices_2d(y)
    if y.num_constraints == 0:
        return _zonotope_vertices_2d(Zonotope(y.center, y.generators))
    return _cz_vertices_2d(y, tol)


def shoelace_area(vertices) -> float:
    pts = list(vertices)
    if len(pts) < 3:
        return 0.0
    area = 0.0
    for i, p in enumerate(pts):
        q = pts[(i + 1) % len(pts)]
        area += p[0] * q[1] - q[0] * p[1]
    return 0.5 * abs(area)


def volume(y, tol: float = DEFAULT_TOL) -> float:
    """Lebesgue volume of the represented set.

    Unconstrained zonotopes use the exact minor expansion
    2^n * sum_{|S|=n} |det G_S|; planar constrained zonotopes use the
    shoelace formula on their vertices. Returns 0 for empty or
    lower-dimensional sets.
    """
    if isinstance(y, Box):
        return float(np.prod(y.upper - y.lower))
    if isinstance(y, ConstrainedZonotope) and y.num_constraints == 0:
        y = Zonotope(y.center, y.generators)
    if isinstance(y, Zonotope):
        n, ng = y.dim, y.num_generators
        if ng < n:
            return 0.0
        total = 0.0
        for cols in combinations(range(ng), n):
            total += abs(np.linalg.det(y.generators[:, cols]))
        return (2.0 ** n) * total
    if y.dim != 2:
        raise UnsupportedDimension("constrained-zonotope volume is implemented in 2-D only")
    check = emptiness(y, tol)
    if check.is_empty:
        return 0.0
    return shoelace_area(_cz_vertices_2d(y, tol))


def interval_hull(y) -> Box:
    """Tight axis-aligned bounding box."""
    if isinstance(y, Box):
        return y
    if isinstance(y, Zonotope) or (
        isinstance(y, ConstrainedZonotope) and y.num_constraints == 0
    ):
        radius = np.abs(y.generators).sum(axis=1)
        return Box(y.center - radius, y.center + radius)
    lo = np.empty(y.dim)
    hi = np.empty(y.dim)
    for i in range(y.dim):
        d = np.zeros(y.dim)
        d[i] = 1.0
        hi[i], _ = support(y, d)
        v, _ = support(y, -d)
        lo[i] = -v
    return Box(lo, hi)


def contains_set(outer, inner, tol: float = DEFAULT_TOL, generator_cap: int = 20) -> bool:
    """Sufficient containment check: every extreme point of ``inner`` in ``outer``.

    For planar inner sets the vertex list is used; otherwise all sign-extreme
    points of the inner zonotope (exact, since the zonotope is their convex
    hull), guarded by ``generator_cap``.
    """
    if isinstance(inner, Box):
        inner = inner.to_zonotope()
    if not isinstance(inner, Zonotope):
        raise TypeError("inner set must be a zonotope or box")
    if inner.dim == 2:
        points = vertices_2d(inner)
    else:
        ng = inner.num_generators
        if ng > generator_cap:
            raise ComplexityGuard(
                f"{ng} generators exceed the cap of {generator_cap} for extreme-point checks"
            )
        if ng == 0:
            points = [inner.center]
        else:
            points = []
            for mask in range(2 ** ng):
                signs = np.array([1.0 if mask & (1 << i) else -1.0 for i in range(ng)])
                points.append(inner.center + inner.generators @ signs)
    return all(contains_point(outer, p, tol) for p in points)


def point_in_polygon(point, vertices, tol=1e-12) -> bool:
    """Ray casting with an on-boundary test; polygon given as a CCW ring."""
    x, y = float(point[0]), float(point[1])
    n = len(vertices)
    if n == 0:
        return False
    if n == 1:
        return abs(x - vertices[0][0]) <= tol and abs(y - vertices[0][1]) <= tol
    inside = False
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        # On-segment check.
        cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
        if abs(cross) <= tol * max(1.0, abs(x2 - x1) + abs(y2 - y1)):
            if min(x1, x2) - tol <= x <= max(x1, x2) + tol and min(y1, y2) - tol <= y <= max(y1, y2) + tol:
                return True
        if (y1 > y) != (y2 > y):
            x_int = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < x_int:
                inside = not inside
    return inside
