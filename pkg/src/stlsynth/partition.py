"""Workspace partitioning: seed-center zonotopes, leftover-gap fills, expansion.

Cells are planar. Each seed center is connected to neighboring centers and
the half-differences become its generator columns; leftover workspace is
covered by constrained zonotopes built from grid-connected components of the
uncovered region.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCenters, NonConvexGap
from .geometry import (
    Box,
    ConstrainedZonotope,
    Zonotope,
    convex_hull_2d,
    expand,
    shoelace_area,
    vertices_2d,
)

DEFAULT_GRID_DIVISIONS = 200


@dataclass
class PartitionConfig:
    """Inputs of the partition stage.

    Either ``centers`` is an explicit list of planar points or ``count`` many
    are drawn uniformly from the workspace with ``seed``. ``neighbor_count``
    is the number of nearest centers used for the generators (>= 2); an
    explicit ``neighbors`` list of index tuples overrides the nearest rule
    per center. ``eps`` is the expansion factor applied to every cell.
    """

    workspace: Box
    centers: list | None = None
    count: int | None = None
    seed: int | None = None
    eps: float = 0.05
    neighbor_count: int = 2
    neighbors: list | None = None
    grid_resolution: float | None = None

    def __post_init__(self):
        if self.workspace.dim != 2:
            raise ValueError("partition geometry is planar")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.neighbor_count < 2:
            raise ValueError("each center needs at least dimension-many neighbors")

    def resolution(self) -> float:
        if self.grid_resolution is not None:
            return self.grid_resolution
        diameter = float(np.linalg.norm(self.workspace.upper - self.workspace.lower))
        return diameter / DEFAULT_GRID_DIVISIONS

    def resolve_centers(self) -> np.ndarray:
        if self.centers is not None:
            pts = np.asarray(self.centers, dtype=float).reshape(-1, 2)
        else:
            if self.count is None:
                raise ValueError("either explicit centers or a count is required")
            rng = np.random.default_rng(self.seed)
            pts = rng.uniform(
                self.workspace.lower, self.workspace.upper, size=(self.count, 2)
            )
        if len(pts) <= 2:
            raise ValueError("the number of centers must exceed the dimension (N > 2)")
        return pts


@dataclass
class Partition:
    """Expanded cells with their symbolic labels (zonotopes first, fills after)."""

    cells: list
    labels: list
    config: PartitionConfig
    base_cells: list = field(default_factory=list)

    def __len__(self):
        return len(self.cells)

    def cell(self, label):
        return self.cells[self.labels.index(label)]


def generate_zonotopes(config: PartitionConfig) -> list:
    """One zonotope per center, generators from connected neighbors (halved)."""
    centers = config.resolve_centers()
    n_pts = len(centers)
    diffs = centers[:, None, :] - centers[None, :, :]
    dists = np.linalg.norm(diffs, axis=2)
    if np.any((dists < 1e-12) & ~np.eye(n_pts, dtype=bool)):
        raise ValueError("centers must be pairwise distinct")

    zonotopes = []
    for i in range(n_pts):
        if config.neighbors is not None:
            idx = list(config.neighbors[i])
        else:
            order = sorted((j for j in range(n_pts) if j != i), key=lambda j: (dists[i, j], j))
            idx = order[: config.neighbor_count]
        gens = 0.5 * (centers[idx] - centers[i]).T
        if np.linalg.matrix_rank(gens, tol=1e-10) < 2:
            raise DegenerateCenters(
                f"center {i} has collinear neighbor vectors; re-seed or supply centers"
            )
        zonotopes.append(Zonotope(centers[i], gens))
    return zonotopes


def _grid_points(workspace: Box, resolution: float):
    nx = max(2, int(round((workspace.upper[0] - workspace.lower[0]) / resolution)) + 1)
    ny = max(2, int(round((workspace.upper[1] - workspace.lower[1]) / resolution)) + 1)
    xs = np.linspace(workspace.lower[0], workspace.upper[0], nx)
    ys = np.linspace(workspace.lower[1], workspace.upper[1], ny)
    return xs, ys


def polygon_membership_mask(polygon, px, py, tol=1e-9):
    """Vectorized convex-polygon membership for point grids (CCW vertex ring)."""
    if len(polygon) < 3:
        return np.zeros_like(px, dtype=bool)
    inside = np.ones_like(px, dtype=bool)
    m = len(polygon)
    for i in range(m):
        ax, ay = polygon[i]
        bx, by = polygon[(i + 1) % m]
        cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
        inside &= cross >= -tol
    return inside


def coverage_mask(cells, workspace: Box, resolution: float):
    """Boolean grid of workspace points covered by any cell, plus the lattice."""
    xs, ys = _grid_points(workspace, resolution)
    px, py = np.meshgrid(xs, ys, indexing="ij")
    covered = np.zeros_like(px, dtype=bool)
    for cell in cells:
        poly = vertices_2d(cell)
        covered |= polygon_membership_mask(poly, px, py)
    return covered, xs, ys


def _connected_components(mask):
    """4-connected components of a boolean grid; returns a label array."""
    labels = -np.ones(mask.shape, dtype=int)
    current = 0
    nx, ny = mask.shape
    for sx in range(nx):
        for sy in range(ny):
            if not mask[sx, sy] or labels[sx, sy] >= 0:
                continue
            stack = [(sx, sy)]
            labels[sx, sy] = current
            while stack:
                x, y = stack.pop()
                for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    u, v = x + dx, y + dy
                    if 0 <= u < nx and 0 <= v < ny and mask[u, v] and labels[u, v] < 0:
                        labels[u, v] = current
                        stack.append((u, v))
            current += 1
    return labels, current


def _segment_intersections(p1, p2, q1, q2):
    """Intersection point of two closed segments, if any."""
    r = p2 - p1
    s = q2 - q1
    denom = r[0] * s[1] - r[1] * s[0]
    if abs(denom) < 1e-14:
        return None
    t = ((q1[0] - p1[0]) * s[1] - (q1[1] - p1[1]) * s[0]) / denom
    u = ((q1[0] - p1[0]) * r[1] - (q1[1] - p1[1]) * r[0]) / denom
    if -1e-12 <= t <= 1 + 1e-12 and -1e-12 <= u <= 1 + 1e-12:
        return p1 + t * r
    return None


def _boundary_vertices(polygons, workspace: Box):
    """Pairwise boundary intersections of cell polygons and the workspace edge."""
    rings = list(polygons)
    wlo, whi = workspace.lower, workspace.upper
    frame = [
        np.array([wlo[0], wlo[1]]),
        np.array([whi[0], wlo[1]]),
        np.array([whi[0], whi[1]]),
        np.array([wlo[0], whi[1]]),
    ]
    rings.append(frame)
    points = [np.array(v, dtype=float) for ring in rings for v in ring]
    for i in range(len(rings)):
        for j in range(i + 1, len(rings)):
            ri, rj = rings[i], rings[j]
            for a in range(len(ri)):
                for b in range(len(rj)):
                    p = _segment_intersections(
                        ri[a], ri[(a + 1) % len(ri)], rj[b], rj[(b + 1) % len(rj)]
                    )
                    if p is not None:
                        points.append(p)
    return points


def polytope_from_vertices(points) -> ConstrainedZonotope:
    """Exact CG-representation of the convex hull of planar points.

    Writes conv(v_1..v_k) as the image of the standard simplex embedded in
    the unit cube: coefficients lambda_i = (xi_i + 1)/2 with sum lambda = 1.
    """
    hull = convex_hull_2d(points)
    k = len(hull)
    if k == 0:
        raise ValueError("no vertices to convert")
    v = np.column_stack(hull)  # 2 x k
    center = v.sum(axis=1) / 2.0
    gens = v / 2.0
    a = np.ones((1, k)) * 0.5
    b = np.array([1.0 - 0.5 * k])
    return ConstrainedZonotope(center, gens, a, b)


def fill_gaps(workspace: Box, zonotopes: list, grid_resolution: float,
              overlap_fraction: float = 0.05) -> list:
    """Cover the grid-sampled leftover of the workspace with convex fills.

    Returns one constrained zonotope per connected leftover component (the
    convex hull of the component's vertex set). Raises NonConvexGap when a
    hull eats into the zonotope cover by more than the area tolerance.
    """
    covered, xs, ys = coverage_mask(zonotopes, workspace, grid_resolution)
    uncovered = ~covered
    if not uncovered.any():
        return []
    comp_labels, n_comp = _connected_components(uncovered)
    polygons = [vertices_2d(z) for z in zonotopes]
    candidates = _boundary_vertices(polygons, workspace)
    # Drop candidate vertices strictly interior to a zonotope.
    kept = []
    for p in candidates:
        interior = False
        for poly in polygons:
            if len(poly) >= 3 and polygon_membership_mask(
                poly, np.array([p[0]]), np.array([p[1]]), tol=-1e-9
            )[0]:
                interior = True
                break
        if not interior and workspace.contains(p, 1e-9):
            kept.append(p)

    px, py = np.meshgrid(xs, ys, indexing="ij")
    cell_area = (xs[1] - xs[0]) * (ys[1] - ys[0])
    fills = []
    near = 1.5 * max(xs[1] - xs[0], ys[1] - ys[0])
    for comp in range(n_comp):
        mask = comp_labels == comp
        pts = np.column_stack([px[mask], py[mask]])
        vertex_pool = [p for p in kept if np.min(np.abs(pts - p).max(axis=1)) <= near]
        hull_points = list(pts) + vertex_pool
        cz = polytope_from_vertices(hull_points)
        hull = convex_hull_2d(hull_points)
        hull_mask = polygon_membership_mask(hull, px, py)
        overlap = float(np.count_nonzero(hull_mask & covered)) * cell_area
        hull_area = shoelace_area(hull)
        if overlap > overlap_fraction * max(hull_area, cell_area) + 4 * cell_area:
            raise NonConvexGap(
                f"leftover component {comp} has a non-convex shape "
                f"(hull overlaps the zonotope cover by {overlap:.4g})",
                component_points=pts,
            )
        fills.append(cz)
    return fills


def expand_all(cells: list, eps: float, config: PartitionConfig | None = None) -> Partition:
    """Expand every cell and attach labels pi1..pi(N+M) in generation order."""
    expanded = [expand(c, eps) for c in cells]
    labels = [f"pi{i + 1}" for i in range(len(expanded))]
    return Partition(expanded, labels, config, base_cells=list(cells))


def build_partition(config: PartitionConfig) -> Partition:
    """Full partition pipeline: generate, fill leftover space, expand."""
    zonos = generate_zonotopes(config)
    fills = fill_gaps(config.workspace, zonos, config.resolution())
    return expand_all(list(zonos) + fills, config.eps, config)
