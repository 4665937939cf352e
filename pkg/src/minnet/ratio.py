"""Minimum spanning trees and Steiner-ratio experiments.

The ratio convention here is steiner length / MST length, which lies in
(0, 1] because the MST is itself a spanning competitor.  Includes generators
for the regular simplex and the d-sausage (face-to-face glued simplices),
plus a caterpillar-restricted relaxation that keeps sausage experiments
honest at sizes where full enumeration is off the table.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import DEFAULT_TOL, GeometryError, ToleranceConfig
from .steiner import relax_topology, solve_exact
from .topology import Topology

__all__ = [
    "MstResult",
    "mst",
    "steiner_ratio",
    "simplex_points",
    "sausage_points",
    "caterpillar_topology",
    "caterpillar_ratio",
]


@dataclass
class MstResult:
    edges: list[tuple[int, int]]
    length: float


def mst(points) -> MstResult:
    """Exact Euclidean minimum spanning tree (Prim, ties broken by index).

    Vectorized over the candidate frontier, so it stays usable for the
    thousands-of-points instances the experiment harness feeds it.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise GeometryError(f"mst needs >= 2 points, got shape {pts.shape}")
    n = pts.shape[0]
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best_dist = np.linalg.norm(pts - pts[0], axis=1)
    best_src = np.zeros(n, dtype=int)
    best_dist[0] = np.inf
    edges: list[tuple[int, int]] = []
    total = 0.0
    for _ in range(n - 1):
        cand = np.where(in_tree, np.inf, best_dist)
        v = int(np.argmin(cand))  # first minimal index: deterministic ties
        edges.append((int(best_src[v]), v))
        total += float(best_dist[v])
        in_tree[v] = True
        dist_v = np.linalg.norm(pts - pts[v], axis=1)
        closer = ~in_tree & (dist_v < best_dist)  # strict: keep earlier source
        best_dist[closer] = dist_v[closer]
        best_src[closer] = v
    return MstResult(edges=edges, length=total)


def steiner_ratio(points, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """solve_exact length over MST length, in (0, 1]."""
    st_len = solve_exact(points, tol=tol).tree.length
    return st_len / mst(points).length


def simplex_points(d: int) -> np.ndarray:
    """The d+1 vertices of a regular unit-edge simplex in R^d.

    Built one vertex at a time: each new vertex sits above the centroid of
    the previous face at the height that restores unit edges.
    """
    if d < 2:
        raise GeometryError(f"simplex needs dimension >= 2, got {d}")
    pts = np.zeros((d + 1, d))
    pts[1, 0] = 1.0
    for k in range(2, d + 1):
        centroid = pts[:k].mean(axis=0)
        # |centroid - vertex| is the circumradius sqrt((k-1)/(2k)) of the
        # regular (k-1)-simplex, so the new height closes all edges to 1.
        height = np.sqrt(1.0 - (k - 1) / (2.0 * k))
        pts[k] = centroid
        pts[k, k - 1] = height
    return pts


def sausage_points(d: int, n: int) -> np.ndarray:
    """n points of the d-sausage: regular simplices glued face to face.

    Starting from the unit regular simplex, each new point is the reflection
    of the oldest vertex of the current simplex through the centroid of its
    other d vertices (for a regular simplex that centroid is the foot of the
    altitude, so the point reflection equals the mirror image through the
    shared face).
    """
    if d not in (2, 3):
        raise GeometryError(f"sausage supports d in {{2, 3}}, got {d}")
    if n < d + 1:
        raise GeometryError(f"sausage needs at least d+1 = {d + 1} points, got {n}")
    pts = np.zeros((n, d))
    pts[: d + 1] = simplex_points(d)
    for i in range(d + 1, n):
        face = pts[i - d : i]
        oldest = pts[i - d - 1]
        pts[i] = 2.0 * face.mean(axis=0) - oldest
    return pts


def caterpillar_topology(n: int) -> Topology:
    """The path-like full topology following terminal order.

    Branch nodes form a path; the first and last take two consecutive
    terminals each and every interior one takes the next terminal.  For
    sausage-like elongated configurations this is the conjectured optimal
    family.
    """
    if n < 3:
        raise GeometryError(f"caterpillar needs >= 3 terminals, got {n}")
    if n == 3:
        return Topology(3, 1, ((0, 3), (1, 3), (2, 3)))
    m = n - 2
    edges = [(0, n), (1, n)]
    for i in range(m - 1):
        edges.append((n + i, n + i + 1))
    for i in range(1, m - 1):
        edges.append((i + 1, n + i))
    edges.append((n - 2, n + m - 1))
    edges.append((n - 1, n + m - 1))
    return Topology(n, m, tuple(sorted(edges)))


def caterpillar_ratio(points, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """Restricted-topology Steiner ratio over the order-following caterpillar.

    An upper bound on the true ratio: only one topology is relaxed, so this
    scales far beyond full enumeration.  Callers should order the points the
    way the configuration is built (sausages already are).
    """
    pts = np.asarray(points, dtype=float)
    tree = relax_topology(pts, caterpillar_topology(pts.shape[0]), tol=tol)
    return tree.length / mst(pts).length
