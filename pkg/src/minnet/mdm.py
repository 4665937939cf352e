"""Maximal-distance minimizers: shortest networks whose r-neighborhood covers
a given compact set M.

Three solver flavors live here.  ``horseshoe_circle``/``horseshoe_stadium``
build the one-parameter parallel-curve-with-gap family analytically and
minimize over the gap.  ``solve_mdm_finite`` handles finite M exactly in
spirit: it relaxes every full topology with terminal attachment points
sliding on the spheres around the given points.  ``solve_mdm_numeric`` is a
penalty method over a sampled M with topology surgery between epochs; it is
the hammer for sets with no usable structure.

Distances from M to a candidate network are always exact point-to-segment
computations; arcs become polylines only at output time, with chord error
small enough (< 1e-7 of the radius) to be invisible at the coverage
tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import ceil

import numpy as np

from .geometry import (
    DEFAULT_TOL,
    ToleranceConfig,
    angle_at,
    fermat_point,
    point_segment_distances,
)
from .steiner import _gs_sweeps, _harmonic_init, _tables, _total_lengths, instance_scale
from .topology import enumerate_full_topologies

__all__ = [
    "MdmError",
    "CompactSetDescriptor",
    "MdmNetwork",
    "CoverageReport",
    "EnergeticSet",
    "MdmReport",
    "NumericConfig",
    "NumericResult",
    "sample_compact",
    "coverage_check",
    "horseshoe_circle",
    "horseshoe_stadium",
    "stadium_competitor",
    "solve_mdm_finite",
    "solve_mdm_numeric",
    "energetic_points",
    "verify_mdm",
    "resample_path_network",
]

# Polyline discretization step for arcs, in radians.  Chord sagitta is
# radius * step^2 / 8 ~ 8e-8 * radius, comfortably below coverage tolerances,
# and the relative length deficit step^2/24 is ~3e-8.
_ARC_STEP = 8e-4

# Half-width of the energetic detection band as a fraction of r; |xy| = r is
# measure-zero so a band is required numerically.
_ENERGETIC_BAND = 1e-3


class MdmError(ValueError):
    """Invalid descriptor, infeasible parameters, or failed feasibility."""


# ---------------------------------------------------------------------------
# Descriptors and basic types


@dataclass(frozen=True)
class CompactSetDescriptor:
    """A compact set M: a circle, a stadium curve, a polygon boundary, or an
    explicit point list (``points`` for finite M, ``samples`` for a
    pre-sampled continuum)."""

    kind: str
    radius: float = 0.0
    seg_len: float = 0.0
    pts: np.ndarray | None = None

    @staticmethod
    def circle(radius: float) -> "CompactSetDescriptor":
        if radius <= 0:
            raise MdmError(f"circle radius must be positive, got {radius}")
        return CompactSetDescriptor("circle", radius=float(radius))

    @staticmethod
    def stadium(radius: float, seg_len: float) -> "CompactSetDescriptor":
        if radius <= 0 or seg_len < 0:
            raise MdmError(f"stadium needs R > 0, seg_len >= 0, got {radius}, {seg_len}")
        return CompactSetDescriptor("stadium", radius=float(radius), seg_len=float(seg_len))

    @staticmethod
    def polygon(vertices) -> "CompactSetDescriptor":
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] < 3 or v.shape[1] != 2:
            raise MdmError(f"polygon needs >= 3 planar vertices, got shape {v.shape}")
        return CompactSetDescriptor("polygon", pts=v)

    @staticmethod
    def points(pts) -> "CompactSetDescriptor":
        p = np.asarray(pts, dtype=float)
        if p.ndim != 2 or p.shape[0] < 1:
            raise MdmError(f"points descriptor needs >= 1 point, got shape {p.shape}")
        return CompactSetDescriptor("points", pts=p)

    @staticmethod
    def samples(pts) -> "CompactSetDescriptor":
        p = np.asarray(pts, dtype=float)
        if p.ndim != 2 or p.shape[0] < 1:
            raise MdmError(f"samples descriptor needs >= 1 point, got shape {p.shape}")
        return CompactSetDescriptor("samples", pts=p)

    def diameter(self) -> float:
        if self.kind == "circle":
            return 2.0 * self.radius
        if self.kind == "stadium":
            return 2.0 * self.radius + self.seg_len
        if len(self.pts) == 1:
            return 0.0
        return instance_scale(self.pts)


@dataclass
class MdmNetwork:
    """Straight-segment network: vertex coordinates plus index-pair edges."""

    vertices: np.ndarray
    edges: list[tuple[int, int]]
    length: float | None = None

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        self.edges = [(int(u), int(v)) for u, v in self.edges]
        for u, v in self.edges:
            if not (0 <= u < len(self.vertices) and 0 <= v < len(self.vertices)):
                raise MdmError(f"edge ({u}, {v}) out of range for {len(self.vertices)} vertices")
        if self.length is None:
            self.length = float(
                sum(
                    np.linalg.norm(self.vertices[u] - self.vertices[v])
                    for u, v in self.edges
                )
            )

    def segment_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.edges:
            return self.vertices[:0], self.vertices[:0]
        e = np.asarray(self.edges)
        return self.vertices[e[:, 0]], self.vertices[e[:, 1]]


@dataclass
class CoverageReport:
    max_defect: float
    worst_point: np.ndarray
    covered: bool


@dataclass
class EnergeticSet:
    """Pairs (x on the network, witness y in M) with |xy| ~ r."""

    points: list[tuple[np.ndarray, np.ndarray]]


@dataclass
class MdmReport:
    has_cycle: bool
    n_components: int
    segment_count: int
    bound_ok: bool
    min_angle: float
    vertex_angles: list[tuple[int, float]]


# ---------------------------------------------------------------------------
# Sampling and coverage


def sample_compact(desc: CompactSetDescriptor, density: int) -> np.ndarray:
    """Deterministic arc-length-uniform boundary samples.

    ``density`` is the total sample count for the continuum kinds; point
    lists pass through unchanged.  Coverage users want density around
    40 * diameter / r so the inter-sample slack stays negligible.
    """
    density = int(density)
    if density < 1:
        raise MdmError(f"density must be >= 1, got {density}")
    if desc.kind in ("points", "samples"):
        return desc.pts.copy()
    if desc.kind == "circle":
        ang = 2.0 * np.pi * np.arange(density) / density
        return desc.radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    if desc.kind == "stadium":
        return _stadium_boundary(desc.radius, desc.seg_len, density)
    if desc.kind == "polygon":
        v = desc.pts
        closed = np.vstack([v, v[:1]])
        seg = np.diff(closed, axis=0)
        seg_len = np.linalg.norm(seg, axis=1)
        cum = np.concatenate([[0.0], np.cumsum(seg_len)])
        s = cum[-1] * np.arange(density) / density
        idx = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(seg) - 1)
        frac = (s - cum[idx]) / np.where(seg_len[idx] == 0.0, 1.0, seg_len[idx])
        return closed[idx] + frac[:, None] * seg[idx]
    raise MdmError(f"unknown descriptor kind {desc.kind!r}")


def _stadium_boundary(R: float, L: float, density: int) -> np.ndarray:
    """Walk the stadium boundary CCW starting at (L/2 + R, 0)."""
    P = 2.0 * np.pi * R + 2.0 * L
    s = P * np.arange(density) / density
    out = np.empty((density, 2))
    b1 = np.pi * R / 2.0          # end of right cap, upper quarter
    b2 = b1 + L                   # end of top side
    b3 = b2 + np.pi * R           # end of left cap
    b4 = b3 + L                   # end of bottom side
    for i, si in enumerate(s):
        if si < b1:
            th = si / R
            out[i] = (L / 2.0 + R * np.cos(th), R * np.sin(th))
        elif si < b2:
            out[i] = (L / 2.0 - (si - b1), R)
        elif si < b3:
            th = np.pi / 2.0 + (si - b2) / R
            out[i] = (-L / 2.0 + R * np.cos(th), R * np.sin(th))
        elif si < b4:
            out[i] = (-L / 2.0 + (si - b3), -R)
        else:
            th = 3.0 * np.pi / 2.0 + (si - b4) / R
            out[i] = (L / 2.0 + R * np.cos(th), R * np.sin(th))
    return out


def _network_distances(net: MdmNetwork, samples: np.ndarray) -> np.ndarray:
    """Min distance from each sample to the network (segments + vertices)."""
    best = np.full(len(samples), np.inf)
    a, b = net.segment_arrays()
    if len(a):
        best = point_segment_distances(samples, a, b).min(axis=1)
    if len(net.vertices):
        dv = np.linalg.norm(samples[:, None, :] - net.vertices[None, :, :], axis=2)
        best = np.minimum(best, dv.min(axis=1))
    return best


def coverage_check(
    net: MdmNetwork, m_samples, r: float, tol: ToleranceConfig = DEFAULT_TOL
) -> CoverageReport:
    """Signed worst coverage defect of M-samples against the network.

    ``covered`` compares the defect against coverage_eps at the scale of M
    (bounding diameter, floored at r so single-point sets behave).
    """
    samples = np.asarray(m_samples, dtype=float)
    if r <= 0:
        raise MdmError(f"r must be positive, got {r}")
    if len(net.vertices) == 0:
        raise MdmError("coverage_check needs a nonempty network")
    d = _network_distances(net, samples)
    worst = int(np.argmax(d))
    defect = float(d[worst] - r)
    scale = max(instance_scale(samples) if len(samples) > 1 else 0.0, r)
    return CoverageReport(
        max_defect=defect,
        worst_point=samples[worst].copy(),
        covered=bool(defect <= tol.coverage_eps * scale),
    )


# ---------------------------------------------------------------------------
# Horseshoes: parallel curve with a coverage-closing gap


def _dist_to_arcs(pts: np.ndarray, arcs) -> np.ndarray:
    best = np.full(len(pts), np.inf)
    for c, rho, a0, a1 in arcs:
        v = pts - c
        rad = np.linalg.norm(v, axis=1)
        ang = np.mod(np.arctan2(v[:, 1], v[:, 0]), 2.0 * np.pi)
        inside = (ang >= a0) & (ang <= a1)
        d = np.where(inside, np.abs(rad - rho), np.inf)
        for a in (a0, a1):
            e = c + rho * np.array([np.cos(a), np.sin(a)])
            d = np.minimum(d, np.linalg.norm(pts - e, axis=1))
        best = np.minimum(best, d)
    return best


def _dist_to_segs(pts: np.ndarray, segs) -> np.ndarray:
    if not segs:
        return np.full(len(pts), np.inf)
    a = np.asarray([s[0] for s in segs])
    b = np.asarray([s[1] for s in segs])
    return point_segment_distances(pts, a, b).min(axis=1)


def _gapped_parallel(rho: float, L: float, w: float):
    """Pieces of the parallel curve with a gap of arc-length half-width w
    centered on the right cap apex.  Returns (arcs, segs, A, d): A is the
    upper gap endpoint and d the unit tangent pointing into the gap; the
    lower endpoint is the mirror image.
    """
    if L == 0.0:
        phi = w / rho
        arcs = [(np.zeros(2), rho, phi, 2.0 * np.pi - phi)]
        segs = []
        A = rho * np.array([np.cos(phi), np.sin(phi)])
        d = np.array([np.sin(phi), -np.cos(phi)])
        return arcs, segs, A, d
    cR = np.array([L / 2.0, 0.0])
    cL = np.array([-L / 2.0, 0.0])
    cap = rho * np.pi / 2.0
    if w <= cap:
        phi = w / rho
        arcs = [
            (cR, rho, phi, np.pi / 2.0),
            (cL, rho, np.pi / 2.0, 3.0 * np.pi / 2.0),
            (cR, rho, 3.0 * np.pi / 2.0, 2.0 * np.pi - phi),
        ]
        segs = [
            (np.array([L / 2.0, rho]), np.array([-L / 2.0, rho])),
            (np.array([-L / 2.0, -rho]), np.array([L / 2.0, -rho])),
        ]
        A = cR + rho * np.array([np.cos(phi), np.sin(phi)])
        d = np.array([np.sin(phi), -np.cos(phi)])
        return arcs, segs, A, d
    t = w - cap
    arcs = [(cL, rho, np.pi / 2.0, 3.0 * np.pi / 2.0)]
    segs = [
        (np.array([L / 2.0 - t, rho]), np.array([-L / 2.0, rho])),
        (np.array([-L / 2.0, -rho]), np.array([L / 2.0 - t, -rho])),
    ]
    A = np.array([L / 2.0 - t, rho])
    d = np.array([1.0, 0.0])
    return arcs, segs, A, d


def _mirror(p: np.ndarray) -> np.ndarray:
    return np.array([p[0], -p[1]])


def _min_tangent_length(samples, arcs, segs, A, d, r, hi_cap) -> float | None:
    """Smallest tangent-segment length whose r-balls close the gap; None if
    even hi_cap fails."""

    def covered(ell: float) -> bool:
        extra = []
        if ell > 0.0:
            extra = [(A, A + ell * d), (_mirror(A), _mirror(A + ell * d))]
        dist = np.minimum(_dist_to_arcs(samples, arcs), _dist_to_segs(samples, segs + extra))
        # Relative slack: samples on the covered stretch sit at distance
        # exactly r, so a bare <= r flips on 1-ulp noise.
        return bool(dist.max() <= r * (1.0 + 1e-9))

    if covered(0.0):
        return 0.0
    hi = r
    while not covered(hi):
        hi *= 2.0
        if hi > hi_cap:
            return None
    lo = 0.0
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        if covered(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _arc_points(c, rho, a0, a1) -> np.ndarray:
    steps = max(2, int(ceil(abs(a1 - a0) / _ARC_STEP)) + 1)
    ang = np.linspace(a0, a1, steps)
    return c + rho * np.stack([np.cos(ang), np.sin(ang)], axis=1)


def _chain_network(runs: list[np.ndarray]) -> MdmNetwork:
    """Concatenate point runs into one open polyline, merging shared joints."""
    pts: list[np.ndarray] = []
    for run in runs:
        for p in np.atleast_2d(run):
            if pts and np.linalg.norm(p - pts[-1]) <= 1e-12 * (1.0 + np.linalg.norm(p)):
                continue
            pts.append(np.asarray(p, dtype=float))
    vertices = np.array(pts)
    edges = [(i, i + 1) for i in range(len(pts) - 1)]
    return MdmNetwork(vertices, edges)


def _emit_horseshoe(rho: float, L: float, w: float, ell: float) -> MdmNetwork:
    arcs, segs, A, d = _gapped_parallel(rho, L, w)
    runs: list[np.ndarray] = []
    if ell > 0.0:
        runs.append(np.array([A + ell * d]))
    if L == 0.0:
        runs.append(_arc_points(*arcs[0]))
    elif len(arcs) == 3:
        runs.append(_arc_points(*arcs[0]))
        runs.append(np.array([segs[0][1]]))
        runs.append(_arc_points(*arcs[1]))
        runs.append(np.array([segs[1][1]]))
        runs.append(_arc_points(*arcs[2]))
    else:
        runs.append(np.array([segs[0][0], segs[0][1]]))
        runs.append(_arc_points(*arcs[0]))
        runs.append(np.array([segs[1][1]]))
    if ell > 0.0:
        runs.append(np.array([_mirror(A + ell * d)]))
    return _chain_network(runs)


def _horseshoe_family(
    R: float, r: float, L: float, tol: ToleranceConfig
) -> tuple[MdmNetwork, float]:
    if r <= 0 or R <= r:
        raise MdmError(f"horseshoe needs R > r > 0, got R={R}, r={r}")
    rho = R - r
    desc = (
        CompactSetDescriptor.circle(R)
        if L == 0.0
        else CompactSetDescriptor.stadium(R, L)
    )
    samples = sample_compact(desc, int(ceil(40.0 * desc.diameter() / r)))
    perimeter = 2.0 * np.pi * rho + 2.0 * L
    w_max = np.pi * rho if L == 0.0 else np.pi * rho / 2.0 + L
    hi_cap = 64.0 * (R + L + r)

    def total(w: float) -> tuple[float, float]:
        arcs, segs, A, d = _gapped_parallel(rho, L, w)
        ell = _min_tangent_length(samples, arcs, segs, A, d, r, hi_cap)
        if ell is None:
            return np.inf, np.nan
        return perimeter - 2.0 * w + 2.0 * ell, ell

    # Coarse grid guards against flat/infeasible tails, golden refines.
    grid = np.linspace(0.0, w_max, 33)
    vals = [total(w)[0] for w in grid]
    k = int(np.argmin(vals))
    lo = grid[max(0, k - 1)]
    hi = grid[min(len(grid) - 1, k + 1)]
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = total(x1)[0], total(x2)[0]
    for _ in range(70):
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = total(x1)[0]
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = total(x2)[0]
    w_best = x1 if f1 <= f2 else x2
    length, ell = total(w_best)
    if not np.isfinite(length):
        raise MdmError("horseshoe gap search found no feasible member")
    net = _emit_horseshoe(rho, L, w_best, ell)
    return net, net.length


def horseshoe_circle(
    R: float, r: float, tol: ToleranceConfig = DEFAULT_TOL
) -> tuple[MdmNetwork, float]:
    """Minimal member of the arc-plus-tangent-segments family covering the
    circle of radius R with r-balls."""
    return _horseshoe_family(float(R), float(r), 0.0, tol)


def horseshoe_stadium(
    R: float, r: float, seg_len: float, tol: ToleranceConfig = DEFAULT_TOL
) -> tuple[MdmNetwork, float]:
    """Parallel-curve horseshoe for the stadium boundary (R-neighborhood of a
    segment of length seg_len); seg_len=0 degenerates to the circle case."""
    if seg_len < 0:
        raise MdmError(f"seg_len must be >= 0, got {seg_len}")
    return _horseshoe_family(float(R), float(r), float(seg_len), tol)


# ---------------------------------------------------------------------------
# Stadium competitor: path + stem + two arms, optimized under coverage


def _competitor_vertices(theta: np.ndarray) -> np.ndarray:
    xa, ya, xp, yp, y_apex, ys, xt, yt = theta
    return np.array(
        [
            [-xa, ya],
            [-xp, yp],
            [0.0, y_apex],
            [xp, yp],
            [xa, ya],
            [0.0, ys],
            [-xt, yt],
            [xt, yt],
        ]
    )


_COMPETITOR_EDGES = [(0, 1), (1, 2), (2, 3), (3, 4), (2, 5), (5, 6), (5, 7)]


def _competitor_inits(R: float, r: float, L: float) -> list[np.ndarray]:
    rho = R - r
    if R < 2.0 * r:
        # Dipped-T motif: the path runs at height rho (touching the top
        # straight at distance r) and its ends bend below the axis so their
        # balls pick up the lower cap flanks; the stem drops through the
        # middle and the lower fork stays short, covering the bottom straight
        # around the axis.  Empirically the best basin for tight radii.
        return [
            np.array(
                [
                    L / 2.0 + rho,
                    -(rho + 0.2 * r),
                    L / 2.0 + rho,
                    rho,
                    rho,
                    -(R - 0.5 * r),
                    0.05 * r,
                    -(R - 0.5 * r) - 0.02 * r,
                ]
            )
        ]
    # Wrap-with-gap motif for wide annuli: the path hugs an inflated parallel
    # curve from one shoulder of the top gap, around the bottom, to the other
    # shoulder (corner radii chosen so each chord stays within r of the
    # boundary); the stem rises through the interior and the arms run just
    # under the top straight to close the gap.
    v = rho / np.cos(np.deg2rad(45.0))
    phi_a, phi_p = np.deg2rad(65.0), np.deg2rad(-25.0)
    xa = L / 2.0 + v * np.cos(phi_a)
    ya = v * np.sin(phi_a)
    xp = L / 2.0 + v * np.cos(phi_p)
    yp = v * np.sin(phi_p)
    return [
        np.array([xa, ya, xp, yp, -v, rho, L / 2.0 + 0.31 * R, rho + 0.25 * r])
    ]


def stadium_competitor(
    R: float, r: float, seg_len: float, tol: ToleranceConfig = DEFAULT_TOL
) -> tuple[MdmNetwork, float]:
    """Best feasible network with the path/stem/arms topology.

    Eight mirror-symmetric degrees of freedom, cyclic coordinate descent on a
    penalized length, penalty weight escalating until the coverage defect is
    inside tolerance.  The penalty radius is shrunk by half the boundary
    sample spacing (plus the chord-to-arc bulge), which makes coverage of the
    sample set imply coverage of the whole boundary -- otherwise the descent
    happily digs holes that thread exactly between samples.  Raises MdmError
    if feasibility is never reached.
    """
    R, r, L = float(R), float(r), float(seg_len)
    if r <= 0 or R <= r or L < 0:
        raise MdmError(f"competitor needs R > r > 0, seg_len >= 0, got {R}, {r}, {L}")
    desc = CompactSetDescriptor.stadium(R, L) if L > 0 else CompactSetDescriptor.circle(R)
    diam = desc.diameter()
    n_pen = int(ceil(400.0 * diam / r))
    samples = sample_compact(desc, n_pen)
    loop = np.vstack([samples, samples[:1]])
    spacing = float(np.linalg.norm(np.diff(loop, axis=0), axis=1).max())
    # Any boundary point lies within spacing/2 of a sample along the curve,
    # and the arc bulges at most spacing^2/(8R) off the chord between two
    # samples, so holding the samples at r_eff holds the continuum at r.
    slack = 0.5 * spacing + spacing * spacing / (8.0 * R) + 1e-7 * diam
    r_eff = r - slack
    gate = sample_compact(desc, 3 * n_pen + 17)

    ea = np.array([e[0] for e in _COMPETITOR_EDGES])
    eb = np.array([e[1] for e in _COMPETITOR_EDGES])

    def objective(theta: np.ndarray, mu: float) -> float:
        V = _competitor_vertices(theta)
        a, b = V[ea], V[eb]
        length = float(np.linalg.norm(a - b, axis=1).sum())
        d = point_segment_distances(samples, a, b).min(axis=1)
        viol = np.maximum(d - r_eff, 0.0)
        return length + mu * float((viol * viol).sum())

    from scipy.optimize import minimize_scalar

    h0 = 0.35 * max(r, 0.15 * diam)
    best_feasible: tuple[float, np.ndarray] | None = None
    for theta in _competitor_inits(R, r, L):
        mu = 10.0 / diam
        for epoch in range(12):
            h = max(h0 * 0.72**epoch, 1e-7 * diam)
            cur_val = objective(theta, mu)
            for _ in range(6):
                moved = 0.0
                for j in range(len(theta)):
                    cur = theta[j]

                    def f1(x, jj=j):
                        th = theta.copy()
                        th[jj] = x
                        return objective(th, mu)

                    res = minimize_scalar(
                        f1, bounds=(cur - h, cur + h), method="bounded",
                        options={"xatol": 1e-10 * diam},
                    )
                    if res.fun < cur_val:
                        moved = max(moved, abs(res.x - cur))
                        theta[j] = res.x
                        cur_val = res.fun
                if moved <= 1e-9 * diam:
                    break
            V = _competitor_vertices(theta)
            net = MdmNetwork(V, list(_COMPETITOR_EDGES))
            # Only the shrunken radius held at every penalty sample certifies
            # the continuum; the gate check alone can miss narrow holes.
            d_pen = point_segment_distances(samples, V[ea], V[eb]).min(axis=1)
            if float(d_pen.max()) <= r_eff + 1e-7 * diam:
                rep = coverage_check(net, gate, r, tol)
                if rep.covered and (
                    best_feasible is None or net.length < best_feasible[0]
                ):
                    best_feasible = (net.length, theta.copy())
            mu *= 4.0
    if best_feasible is None:
        raise MdmError(
            f"stadium competitor failed to reach coverage for R={R}, r={r}, seg_len={L}"
        )
    net = MdmNetwork(_competitor_vertices(best_feasible[1]), list(_COMPETITOR_EDGES))
    return net, net.length


# ---------------------------------------------------------------------------
# Finite M: attachment points on spheres, full-topology enumeration


def _miniball(P: np.ndarray) -> tuple[np.ndarray, float]:
    """Exact smallest enclosing ball of a small point set (brute force over
    boundary-support subsets, fine for the solver's tiny cluster sizes)."""
    P = np.asarray(P, dtype=float)
    m, d = P.shape
    if m == 1:
        return P[0].copy(), 0.0
    scale = max(instance_scale(P), 1e-300)
    best: tuple[float, np.ndarray] | None = None
    for k in range(2, min(m, d + 1) + 1):
        for idx in combinations(range(m), k):
            S = P[list(idx)]
            # Circumcenter within the affine hull of S.
            A = 2.0 * (S[1:] - S[0])
            b = np.einsum("ij,ij->i", S[1:], S[1:]) - np.dot(S[0], S[0])
            c, *_ = np.linalg.lstsq(A, b, rcond=None)
            rad = np.linalg.norm(P - c, axis=1).max()
            if best is None or rad < best[0] - 1e-15 * scale:
                if np.linalg.norm(S[0] - c) >= rad - 1e-9 * scale:
                    best = (rad, c)
    assert best is not None
    return best[1], float(best[0])


def _merge_terminals(pts: np.ndarray, r: float) -> tuple[np.ndarray, np.ndarray]:
    """Cluster points whose r-balls share a common point into fat terminals.

    Returns centers and slack radii: touching the ball of slack radius around
    a center is sufficient to cover every clustered point.  Overlapping balls
    with no common point stay unmerged — still sound, possibly suboptimal.
    """
    n = len(pts)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(n):
        for j in range(i + 1, n):
            if np.linalg.norm(pts[i] - pts[j]) <= 2.0 * r:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    centers, radii = [], []
    for members in sorted(groups.values()):
        cluster = pts[members]
        c, rad = _miniball(cluster)
        if rad <= r:
            centers.append(c)
            radii.append(r - rad)
        else:
            for i in members:
                centers.append(pts[i])
                radii.append(r)
    return np.array(centers), np.array(radii)


def _project_attachments(X, centers, radii, tnbr):
    """Move each attachment to the nearest point of its ball to its neighbor."""
    T = X.shape[0]
    t_idx = np.arange(T)[:, None]
    nbr = X[t_idx, tnbr]  # (T, k, d)
    v = nbr - centers[None]
    dist = np.linalg.norm(v, axis=2)
    safe = np.where(dist == 0.0, 1.0, dist)
    reach = np.minimum(dist, radii[None]) / safe
    X[:, : len(centers)] = centers[None] + reach[:, :, None] * v


def solve_mdm_finite(
    points, r: float, tol: ToleranceConfig = DEFAULT_TOL
) -> MdmNetwork:
    """Shortest network touching the r-ball of every given point.

    Enumerates full topologies over the effective terminals (ball clusters
    with a common point collapse to one fat terminal) and relaxes each with
    alternating sphere projections and exact Fermat updates.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise MdmError(f"need at least one point, got shape {pts.shape}")
    if r <= 0:
        raise MdmError(f"r must be positive, got {r}")
    centers, radii = _merge_terminals(pts, float(r))
    k = len(centers)
    if k == 1:
        return MdmNetwork(centers[:1].copy(), [])
    if k == 2:
        c1, c2 = centers
        gap = np.linalg.norm(c2 - c1)
        if gap <= radii[0] + radii[1]:
            p = c1 + (c2 - c1) * (radii[0] / max(radii[0] + radii[1], 1e-300))
            return MdmNetwork(np.array([p]), [])
        u = (c2 - c1) / gap
        return MdmNetwork(np.array([c1 + radii[0] * u, c2 - radii[1] * u]), [(0, 1)])

    topologies = enumerate_full_topologies(k)
    nb, edg = _tables(topologies, k)
    T = len(topologies)
    tnbr = np.empty((T, k), dtype=np.int64)
    for t, topo in enumerate(topologies):
        for i in range(k):
            tnbr[t, i] = topo.neighbors(i)[0]

    scale = max(instance_scale(centers), 2.0 * r)
    d = centers.shape[1]
    X = np.empty((T, 2 * k - 2, d))
    centroid = centers.mean(axis=0)
    v0 = centroid[None] - centers
    n0 = np.linalg.norm(v0, axis=1)
    u0 = v0 / np.where(n0 == 0.0, 1.0, n0)[:, None]
    X[:, :k] = (centers + radii[:, None] * u0)[None]
    X[:, k:] = _harmonic_init(X[0, :k], nb)

    move_target = max(1e-12 * scale, 1e-300)
    prev = _total_lengths(X, edg)
    for _ in range(3000):
        _project_attachments(X, centers, radii, tnbr)
        _gs_sweeps(X, nb, k, move_target, 1)
        cur = _total_lengths(X, edg)
        if np.all(prev - cur <= tol.eps_len * np.maximum(cur, scale) * 1e-3):
            prev = cur
            break
        prev = cur
    best = int(np.argmin(prev))
    return MdmNetwork(X[best].copy(), [tuple(e) for e in edg[best]])


# ---------------------------------------------------------------------------
# Numeric solver: penalty descent + topology surgery


@dataclass
class NumericConfig:
    max_epochs: int = 12
    iters_per_epoch: int = 150
    density: int | None = None
    mu0: float | None = None
    mu_growth: float = 4.0


@dataclass
class NumericResult:
    network: MdmNetwork
    covered: bool
    max_defect: float
    epochs: int
    objective_trace: list[float] = field(default_factory=list)
    epoch_marks: list[int] = field(default_factory=list)


def _penalty_objective(V, E, samples, r, mu):
    a = V[[e[0] for e in E]]
    b = V[[e[1] for e in E]]
    seg = a - b
    length = float(np.linalg.norm(seg, axis=1).sum())
    dmat = point_segment_distances(samples, a, b)
    dmin = dmat.min(axis=1)
    viol = np.maximum(dmin - r, 0.0)
    return length + mu * float((viol * viol).sum()), dmin


def _penalty_gradient(V, E, samples, r, mu):
    g = np.zeros_like(V)
    e0 = np.array([e[0] for e in E])
    e1 = np.array([e[1] for e in E])
    a, b = V[e0], V[e1]
    seg = a - b
    lens = np.linalg.norm(seg, axis=1)
    u = seg / np.where(lens == 0.0, 1.0, lens)[:, None]
    np.add.at(g, e0, u)
    np.add.at(g, e1, -u)
    v = b - a
    den = np.einsum("ed,ed->e", v, v)
    safe = np.where(den == 0.0, 1.0, den)
    diff = samples[:, None, :] - a[None, :, :]
    t = np.clip(np.einsum("sed,ed->se", diff, v) / safe[None, :], 0.0, 1.0)
    closest = a[None] + t[:, :, None] * v[None]
    dvec = samples[:, None, :] - closest
    dist = np.linalg.norm(dvec, axis=2)
    j = np.argmin(dist, axis=1)
    s_idx = np.arange(len(samples))
    dj = dist[s_idx, j]
    active = dj > r
    if np.any(active):
        s_act = s_idx[active]
        j_act = j[active]
        w = dvec[s_act, j_act] / dj[active][:, None]
        coef = 2.0 * mu * (dj[active] - r)
        tj = t[s_act, j_act]
        np.add.at(g, e0[j_act], -coef[:, None] * (1.0 - tj)[:, None] * w)
        np.add.at(g, e1[j_act], -coef[:, None] * tj[:, None] * w)
    return g


def _adjacency(n_vertices: int, edges) -> dict[int, list[int]]:
    adj: dict[int, list[int]] = {i: [] for i in range(n_vertices)}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    return adj


def _topology_surgery(V, E, samples, r, tol, scale):
    """Between-epoch moves: split edges near violated samples, merge nearly
    coincident vertices, break sharp degree-2 corners with a Fermat vertex."""
    V = V.copy()
    E = list(E)
    a = V[[e[0] for e in E]]
    b = V[[e[1] for e in E]]
    dmat = point_segment_distances(samples, a, b)
    dmin = dmat.min(axis=1)
    nearest = dmat.argmin(axis=1)
    split_done: set[int] = set()
    order = np.argsort(-dmin)
    for s in order:
        if dmin[s] <= r:
            break
        ei = int(nearest[s])
        if ei in split_done:
            continue
        u, v = E[ei]
        seg = V[v] - V[u]
        den = float(seg @ seg)
        if den == 0.0:
            continue
        t = float(np.clip((samples[s] - V[u]) @ seg / den, 0.0, 1.0))
        if not 0.02 < t < 0.98:
            continue
        w = V[u] + t * seg
        V = np.vstack([V, w])
        E[ei] = (u, len(V) - 1)
        E.append((len(V) - 1, v))
        split_done.add(ei)

    # Merge vertices that collapsed onto each other.
    thresh = tol.eps_len * scale
    parent = list(range(len(V)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in E:
        if np.linalg.norm(V[u] - V[v]) <= thresh:
            parent[find(u)] = find(v)
    roots = sorted({find(i) for i in range(len(V))})
    remap = {root: i for i, root in enumerate(roots)}
    V2 = V[roots]
    E2 = []
    seen = set()
    for u, v in E:
        uu, vv = remap[find(u)], remap[find(v)]
        if uu == vv:
            continue
        key = (min(uu, vv), max(uu, vv))
        if key in seen:
            continue
        seen.add(key)
        E2.append((uu, vv))
    V, E = V2, E2

    # Fermat-split sharp corners at degree-2 vertices.
    adj = _adjacency(len(V), E)
    for vtx in range(len(V)):
        if len(adj[vtx]) != 2:
            continue
        n1, n2 = adj[vtx]
        if (
            np.linalg.norm(V[n1] - V[vtx]) <= thresh
            or np.linalg.norm(V[n2] - V[vtx]) <= thresh
        ):
            continue
        ang = angle_at(V[vtx], V[n1], V[n2])
        if ang >= 2.0 * np.pi / 3.0 - tol.eps_angle:
            continue
        f = fermat_point(V[n1], V[vtx], V[n2])
        if np.linalg.norm(f - V[vtx]) <= thresh:
            continue
        V = np.vstack([V, f])
        s = len(V) - 1
        E = [e for e in E if e not in ((vtx, n1), (n1, vtx), (vtx, n2), (n2, vtx))]
        E.extend([(n1, s), (n2, s), (vtx, s)])
        adj = _adjacency(len(V), E)
    return V, E


def solve_mdm_numeric(
    desc: CompactSetDescriptor,
    r: float,
    init: MdmNetwork,
    config: NumericConfig | None = None,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> NumericResult:
    """Penalty-method local solver over a sampled compact set.

    Minimizes length + mu * sum(max(0, dist - r)^2) by Armijo gradient steps,
    escalating mu each epoch and applying topology surgery in between.  The
    objective is non-increasing within an epoch.  If coverage is still not
    met after the last epoch the best iterate is returned with
    ``covered=False`` rather than raising.
    """
    if r <= 0:
        raise MdmError(f"r must be positive, got {r}")
    cfg = config or NumericConfig()
    diam = max(desc.diameter(), 2.0 * r)
    density = cfg.density or int(ceil(40.0 * desc.diameter() / r)) or 8
    samples = sample_compact(desc, density)
    scale = max(instance_scale(samples) if len(samples) > 1 else 0.0, r)
    mu = cfg.mu0 or 10.0 / diam
    V = init.vertices.copy()
    E = list(init.edges)
    trace: list[float] = []
    marks: list[int] = []
    step = 0.1 * diam
    epochs_run = 0
    for epoch in range(cfg.max_epochs):
        epochs_run = epoch + 1
        f, _ = _penalty_objective(V, E, samples, r, mu)
        trace.append(f)
        for _ in range(cfg.iters_per_epoch):
            g = _penalty_gradient(V, E, samples, r, mu)
            gnorm = float(np.linalg.norm(g))
            if gnorm <= 1e-12:
                break
            s = step
            accepted = False
            for _ in range(40):
                f_new, _ = _penalty_objective(V - s * g, E, samples, r, mu)
                if f_new <= f - 1e-4 * s * gnorm * gnorm:
                    accepted = True
                    break
                s *= 0.5
            if not accepted:
                break
            V = V - s * g
            f = f_new
            trace.append(f)
            step = min(s * 2.0, 0.1 * diam)
        marks.append(len(trace))
        net = MdmNetwork(V.copy(), list(E))
        rep = coverage_check(net, samples, r, tol)
        if rep.covered:
            break
        V, E = _topology_surgery(V, E, samples, r, tol, scale)
        mu *= cfg.mu_growth
    net = MdmNetwork(V.copy(), list(E))
    rep = coverage_check(net, samples, r, tol)
    return NumericResult(
        network=net,
        covered=rep.covered,
        max_defect=rep.max_defect,
        epochs=epochs_run,
        objective_trace=trace,
        epoch_marks=marks,
    )


# ---------------------------------------------------------------------------
# Energetic points and verification


def _closest_on_network(net: MdmNetwork, samples: np.ndarray):
    """Distances and closest network points for each sample."""
    S = len(samples)
    best_d = np.full(S, np.inf)
    best_p = np.zeros((S, net.vertices.shape[1]))
    a, b = net.segment_arrays()
    if len(a):
        v = b - a
        den = np.einsum("ed,ed->e", v, v)
        safe = np.where(den == 0.0, 1.0, den)
        diff = samples[:, None, :] - a[None]
        t = np.clip(np.einsum("sed,ed->se", diff, v) / safe[None], 0.0, 1.0)
        closest = a[None] + t[:, :, None] * v[None]
        dist = np.linalg.norm(samples[:, None, :] - closest, axis=2)
        j = dist.argmin(axis=1)
        rows = np.arange(S)
        best_d = dist[rows, j]
        best_p = closest[rows, j]
    if len(net.vertices):
        dv = np.linalg.norm(samples[:, None, :] - net.vertices[None], axis=2)
        jv = dv.argmin(axis=1)
        dvm = dv[np.arange(S), jv]
        mask = dvm < best_d
        best_d[mask] = dvm[mask]
        best_p[mask] = net.vertices[jv[mask]]
    return best_d, best_p


def energetic_points(
    net: MdmNetwork,
    m_samples,
    r: float,
    tol: ToleranceConfig = DEFAULT_TOL,
    band: float = _ENERGETIC_BAND,
) -> EnergeticSet:
    """Network points realizing distance ~ r to some witness in M.

    A sample y is a witness when its distance to the network lies in
    [r - band*r, r + coverage slack]; the nearest network point x is then
    energetic.  Nearby x's are deduplicated.
    """
    samples = np.asarray(m_samples, dtype=float)
    d, p = _closest_on_network(net, samples)
    scale = max(instance_scale(samples) if len(samples) > 1 else 0.0, r)
    lo = r - band * r
    hi = r + tol.coverage_eps * scale
    keep = (d >= lo) & (d <= hi)
    dedupe = tol.eps_len * max(instance_scale(net.vertices) if len(net.vertices) > 1 else 0.0, r)
    out: list[tuple[np.ndarray, np.ndarray]] = []
    for i in np.flatnonzero(keep):
        x = p[i]
        if any(np.linalg.norm(x - q) <= dedupe for q, _ in out):
            continue
        out.append((x.copy(), samples[i].copy()))
    return EnergeticSet(points=out)


def verify_mdm(
    net: MdmNetwork, m_count: int, tol: ToleranceConfig = DEFAULT_TOL
) -> MdmReport:
    """Structural report: cycles, merged segment count against 2#M - 3, and
    the angle spectrum at branch/corner vertices.

    Segment counting contracts edges of negligible length, then merges
    collinear runs through degree-2 vertices (angle within eps_angle of pi).
    """
    V = net.vertices
    scale = max(instance_scale(V) if len(V) > 1 else 0.0, 1e-300)
    thresh = tol.eps_len * scale

    parent = list(range(len(V)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    has_cycle = False
    for u, v in net.edges:
        if np.linalg.norm(V[u] - V[v]) <= thresh:
            if find(u) == find(v):
                has_cycle = True
            else:
                parent[find(u)] = find(v)
    quotient_edges = []
    seen = set()
    for u, v in net.edges:
        if np.linalg.norm(V[u] - V[v]) <= thresh:
            continue
        uu, vv = find(u), find(v)
        key = (min(uu, vv), max(uu, vv))
        if key in seen:
            has_cycle = True
            continue
        seen.add(key)
        quotient_edges.append((uu, vv))
    for u, v in quotient_edges:
        if find(u) == find(v):
            has_cycle = True
        else:
            parent[find(u)] = find(v)
    n_components = len({find(i) for i in range(len(V))})

    adj: dict[int, list[tuple[int, int]]] = {}
    for ei, (u, v) in enumerate(quotient_edges):
        adj.setdefault(u, []).append((v, ei))
        adj.setdefault(v, []).append((u, ei))

    angles: list[tuple[int, float]] = []
    eparent = list(range(len(quotient_edges)))

    def efind(x):
        while eparent[x] != x:
            eparent[x] = eparent[eparent[x]]
            x = eparent[x]
        return x

    for vtx, nbrs in adj.items():
        if len(nbrs) < 2:
            continue
        pairs = [
            angle_at(V[vtx], V[a], V[b])
            for (a, _), (b, _) in combinations(nbrs, 2)
        ]
        angles.append((vtx, float(min(pairs))))
        if len(nbrs) == 2 and pairs[0] >= np.pi - tol.eps_angle:
            eparent[efind(nbrs[0][1])] = efind(nbrs[1][1])
    segment_count = len({efind(i) for i in range(len(quotient_edges))})
    min_angle = min((a for _, a in angles), default=float(np.pi))
    return MdmReport(
        has_cycle=has_cycle,
        n_components=n_components,
        segment_count=segment_count,
        bound_ok=segment_count <= 2 * m_count - 3,
        min_angle=min_angle,
        vertex_angles=angles,
    )


def resample_path_network(net: MdmNetwork, n_vertices: int) -> MdmNetwork:
    """Uniform arc-length resampling of an open-chain network.

    Used to coarsen fine horseshoe polylines into workable inits for the
    numeric solver; endpoints are preserved exactly.
    """
    if n_vertices < 2:
        raise MdmError(f"need at least 2 vertices, got {n_vertices}")
    adj = _adjacency(len(net.vertices), net.edges)
    ends = [v for v, nb in adj.items() if len(nb) == 1]
    if len(ends) != 2 or any(len(nb) > 2 for nb in adj.values()):
        raise MdmError("resample_path_network needs an open chain")
    order = [min(ends)]
    prev = -1
    while True:
        nxt = [x for x in adj[order[-1]] if x != prev]
        if not nxt:
            break
        prev = order[-1]
        order.append(nxt[0])
    pts = net.vertices[order]
    if len(order) != len(net.vertices):
        raise MdmError("chain does not visit every vertex")
    seg = np.diff(pts, axis=0)
    cum = np.concatenate([[0.0], np.cumsum(np.linalg.norm(seg, axis=1))])
    s = cum[-1] * np.arange(n_vertices) / (n_vertices - 1)
    x = np.interp(s, cum, pts[:, 0])
    y = np.interp(s, cum, pts[:, 1])
    new = np.stack([x, y], axis=1)
    return MdmNetwork(new, [(i, i + 1) for i in range(n_vertices - 1)])
