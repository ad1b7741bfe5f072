"""Cell adjacency from admissible intersections, path enumeration, DOT export.

An intersection region is admissible when its obstacle-free part is
non-empty and connected; both properties are decided on the shared sampling
grid, so measure-zero touching does not create edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Box, intersect, is_empty, vertices_2d
from .partition import Partition, polygon_membership_mask, _connected_components


@dataclass
class ObstacleSet:
    """Finite union of planar boxes marking forbidden positions."""

    obstacles: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.obstacles)

    def __len__(self):
        return len(self.obstacles)

    def mask(self, px, py, tol=1e-9):
        hit = np.zeros_like(px, dtype=bool)
        for box in self.obstacles:
            hit |= (
                (px >= box.lower[0] - tol)
                & (px <= box.upper[0] + tol)
                & (py >= box.lower[1] - tol)
                & (py <= box.upper[1] + tol)
            )
        return hit


@dataclass
class CellGraph:
    """Vertices are cell labels plus the initial/goal regions; edges carry
    their admissible intersection regions."""

    labels: list
    regions: dict
    adjacency: np.ndarray
    intersections: dict
    cell_labels: list

    def index(self, label):
        return self.labels.index(label)

    def neighbors(self, label):
        i = self.index(label)
        return [self.labels[j] for j in np.nonzero(self.adjacency[i])[0]]

    def intersection(self, label_a, label_b):
        return self.intersections.get((label_a, label_b))

    def edge_count(self):
        return int(self.adjacency.sum()) // 2


@dataclass
class Path:
    """An admissible path projected onto its cell sequence."""

    labels: list
    cells: list
    intersections: list  # region between consecutive path cells
    full_labels: list    # including virtual initial/goal vertices


def _admissible(region, obstacles: ObstacleSet, xs, ys, tol=1e-9):
    """Grid decision: obstacle-free part of the region is non-empty and connected."""
    try:
        poly = vertices_2d(region)
    except Exception:
        return False
    if len(poly) < 3:
        return False
    lo = np.array([min(p[0] for p in poly), min(p[1] for p in poly)])
    hi = np.array([max(p[0] for p in poly), max(p[1] for p in poly)])
    xi = np.nonzero((xs >= lo[0] - tol) & (xs <= hi[0] + tol))[0]
    yi = np.nonzero((ys >= lo[1] - tol) & (ys <= hi[1] + tol))[0]
    if xi.size == 0 or yi.size == 0:
        return False
    px, py = np.meshgrid(xs[xi], ys[yi], indexing="ij")
    inside = polygon_membership_mask(poly, px, py)
    free = inside & ~obstacles.mask(px, py)
    if not free.any():
        return False
    _, count = _connected_components(free)
    return count == 1


def _fully_inside_obstacles(region, obstacles: ObstacleSet, xs, ys):
    try:
        poly = vertices_2d(region)
    except Exception:
        return False
    if len(poly) < 3:
        return False
    px, py = np.meshgrid(xs, ys, indexing="ij")
    inside = polygon_membership_mask(poly, px, py)
    if not inside.any():
        return False
    return bool(np.all(obstacles.mask(px[inside], py[inside])))


def build_graph(partition: Partition, obstacles: ObstacleSet, extra=()) -> CellGraph:
    """Adjacency over partition cells plus the extra (initial/goal) regions.

    ``extra`` is a list of (label, region) pairs, canonically the initial
    region pi0 followed by the regions of interest. Cells fully inside the
    forbidden set are isolated.
    """
    labels = list(partition.labels) + [lab for lab, _ in extra]
    regions = {lab: cell for lab, cell in zip(partition.labels, partition.cells)}
    regions.update({lab: reg for lab, reg in extra})
    workspace = partition.config.workspace if partition.config else _bounding_box(regions.values())
    resolution = partition.config.resolution() if partition.config else None
    if resolution is None:
        diameter = float(np.linalg.norm(workspace.upper - workspace.lower))
        resolution = diameter / 200.0
    nx = max(2, int(round((workspace.upper[0] - workspace.lower[0]) / resolution)) + 1)
    ny = max(2, int(round((workspace.upper[1] - workspace.lower[1]) / resolution)) + 1)
    xs = np.linspace(workspace.lower[0], workspace.upper[0], nx)
    ys = np.linspace(workspace.lower[1], workspace.upper[1], ny)

    n = len(labels)
    blocked = [
        _fully_inside_obstacles(regions[lab], obstacles, xs, ys) for lab in labels
    ]
    adjacency = np.zeros((n, n), dtype=int)
    intersections = {}
    for i in range(n):
        if blocked[i]:
            continue
        for j in range(i + 1, n):
            if blocked[j]:
                continue
            omega = intersect(regions[labels[i]], regions[labels[j]])
            if is_empty(omega):
                continue
            if _admissible(omega, obstacles, xs, ys):
                adjacency[i, j] = adjacency[j, i] = 1
                intersections[(labels[i], labels[j])] = omega
                intersections[(labels[j], labels[i])] = omega
    return CellGraph(labels, regions, adjacency, intersections, list(partition.labels))


def _bounding_box(regions):
    from .geometry import interval_hull

    boxes = [interval_hull(r) for r in regions]
    lo = np.min([b.lower for b in boxes], axis=0)
    hi = np.max([b.upper for b in boxes], axis=0)
    return Box(lo, hi)


def _simple_paths(graph: CellGraph, start, goal, max_paths):
    """DFS enumeration of simple paths in deterministic vertex order."""
    order = {lab: i for i, lab in enumerate(graph.labels)}
    paths = []
    stack = [(start, [start])]
    while stack and len(paths) < max_paths:
        node, trail = stack.pop()
        if node == goal:
            paths.append(trail)
            continue
        nxt = sorted(
            (nb for nb in graph.neighbors(node) if nb not in trail),
            key=lambda lab: order[lab],
            reverse=True,  # reversed so the stack pops lowest order first
        )
        for nb in nxt:
            stack.append((nb, trail + [nb]))
    return paths


def admissible_paths(graph: CellGraph, accepting, max_paths: int = 64):
    """Paths realizing the accepting label sequence, projected to cells.

    ``accepting`` starts at the initial-region label; each consecutive pair
    must be connected by a simple sub-path. Returns up to ``max_paths``
    paths; an empty result means the induced LTL formula is unsatisfiable on
    this partition.
    """
    if not accepting:
        return []
    if len(accepting) == 1:
        if accepting[0] not in graph.labels:
            return []
        return [Path([], [], [], [accepting[0]])]
    segment_lists = []
    for a, b in zip(accepting[:-1], accepting[1:]):
        if a not in graph.labels or b not in graph.labels:
            return []
        segs = _simple_paths(graph, a, b, max_paths)
        if not segs:
            return []
        segment_lists.append(segs)

    full = [[accepting[0]]]
    for segs in segment_lists:
        merged = []
        for prefix in full:
            for seg in segs:
                merged.append(prefix + seg[1:])
                if len(merged) >= max_paths:
                    break
            if len(merged) >= max_paths:
                break
        full = merged

    virtual = set(accepting)
    paths = []
    for trail in full:
        cells = []
        for lab in trail:
            if lab in virtual and lab not in graph.cell_labels:
                continue
            if not cells or cells[-1] != lab:
                cells.append(lab)
        inters = [
            graph.intersection(a, b) for a, b in zip(cells[:-1], cells[1:])
        ]
        paths.append(Path(cells, [graph.regions[c] for c in cells], inters, trail))
    return paths


def export_dot(graph: CellGraph) -> str:
    """Undirected DOT rendering with deterministic ordering."""
    lines = ["graph cells {"]
    for lab in graph.labels:
        lines.append(f'  "{lab}";')
    for i, a in enumerate(graph.labels):
        for j in range(i + 1, len(graph.labels)):
            if graph.adjacency[i, j]:
                lines.append(f'  "{a}" -- "{graph.labels[j]}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def parse_dot(text: str):
    """Minimal parse-back of export_dot output: (node count, edge count)."""
    nodes = 0
    edges = 0
    for line in text.splitlines():
        line = line.strip()
        if line.endswith(";"):
            if "--" in line:
                edges += 1
            elif line.startswith('"'):
                nodes += 1
    return nodes, edges
