"""Point-in-domain tests and boundary samplers for the benchmark domains.

A domain is a box with level-set regions {F < 0} cut out and further regions
added back.  When one coordinate is time the level sets may depend on it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from ..errors import IntegrationFailure

INTERIOR, EXCLUDED, ON_BOUNDARY = 0, 1, 2
LABELS = {INTERIOR: "interior", EXCLUDED: "excluded", ON_BOUNDARY: "on_boundary"}


@dataclass
class Region:
    """Set {p : level(p) < 0} with a sampler for its boundary.

    ``sampler(t, n)`` returns n points (full coordinates, time included) on
    the boundary at time t; t is ignored for steady domains.
    """
    name: str
    level: Callable[[np.ndarray], np.ndarray]
    sampler: Callable[[float, int], np.ndarray]
    time_dependent: bool = False


@dataclass
class BoundaryCounts:
    per_slice: int = 2000
    slices: int = 21
    surface: int = 30000


@dataclass
class Geometry:
    box: np.ndarray
    time_axis: int | None = None
    excised: list = field(default_factory=list)
    inclusions: list = field(default_factory=list)
    box_is_boundary: bool = True

    def __post_init__(self):
        self.box = np.asarray(self.box, dtype=np.float64)

    @property
    def dim(self):
        return self.box.shape[0]

    def in_box(self, points, tol=1e-12):
        lo, hi = self.box[:, 0] - tol, self.box[:, 1] + tol
        return np.all((points >= lo) & (points <= hi), axis=1)

    def inside(self, points):
        """Strict membership (boundary points count as inside)."""
        return classify_point(self, points) != EXCLUDED


def classify_point(geometry: Geometry, points, tol: float = 1e-10):
    """Vectorised classification into INTERIOR, EXCLUDED or ON_BOUNDARY.

    A point is excluded when it lies strictly inside an excised region and
    not inside an inclusion; it is on the boundary when some level set is
    within ``tol`` of zero and the point is not strictly inside the domain
    on both sides.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    n = pts.shape[0]
    in_inc = np.zeros(n, bool)
    on_inc = np.zeros(n, bool)
    for reg in geometry.inclusions:
        g = reg.level(pts)
        in_inc |= g < -tol
        on_inc |= np.abs(g) <= tol
    in_exc = np.zeros(n, bool)
    on_exc = np.zeros(n, bool)
    for reg in geometry.excised:
        f = reg.level(pts)
        in_exc |= f < -tol
        on_exc |= np.abs(f) <= tol
    codes = np.full(n, INTERIOR)
    codes[(on_exc | on_inc) & ~in_inc] = ON_BOUNDARY
    codes[in_exc & ~in_inc & ~on_inc] = EXCLUDED
    if np.ndim(points) == 1:
        return int(codes[0])
    return codes


def _level_normals(level, pts, spatial_axes, h=1e-7):
    g = np.zeros((pts.shape[0], len(spatial_axes)))
    for k, ax in enumerate(spatial_axes):
        e = np.zeros(pts.shape[1])
        e[ax] = h
        g[:, k] = (level(pts + e) - level(pts - e)) / (2 * h)
    nrm = np.linalg.norm(g, axis=1, keepdims=True)
    return g / np.where(nrm == 0, 1.0, nrm)


def _boundary_filter(geometry, region, pts, eps=1e-6):
    """Keep points where domain membership changes across the curve."""
    keep = geometry.in_box(pts)
    if len(geometry.excised) + len(geometry.inclusions) <= 1:
        return keep
    spatial = [ax for ax in range(pts.shape[1]) if ax != geometry.time_axis]
    nrm = _level_normals(region.level, pts, spatial)
    step = np.zeros_like(pts)
    step[:, spatial] = eps * nrm
    plus = classify_point(geometry, pts + step, tol=0.0) != EXCLUDED
    minus = classify_point(geometry, pts - step, tol=0.0) != EXCLUDED
    return keep & (plus != minus)


def sample_boundary(geometry: Geometry, t, counts: BoundaryCounts | None = None, seed: int = 0):
    """Boundary points of the curved regions at one time (or the surface).

    Returns a list of ``(points, tag)`` with one entry per region.  Points on
    portions of a region boundary that are hidden inside another region are
    dropped.  The samplers are deterministic; ``seed`` is accepted for
    interface stability.
    """
    counts = counts or BoundaryCounts()
    out = []
    for reg in list(geometry.excised) + list(geometry.inclusions):
        n = counts.per_slice if geometry.time_axis is not None else counts.surface
        pts = np.atleast_2d(reg.sampler(t, n))
        pts = pts[_boundary_filter(geometry, reg, pts)]
        out.append((pts, reg.name))
    return out


def fibonacci_sphere(n: int, radius: float = 1.0, center=(0.0, 0.0, 0.0)):
    """n nearly uniform points on a sphere via the golden-angle spiral."""
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = np.pi * (3.0 - np.sqrt(5.0)) * i
    pts = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    # renormalise so every point has unit norm to rounding
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return radius * pts + np.asarray(center)


def polar_curve(center, radius_fn, n: int, t=None):
    """Points c + r(theta) (cos theta, sin theta) on a uniform theta grid."""
    th = 2 * np.pi * np.arange(n) / n
    r = radius_fn(th)
    x = center[0] + r * np.cos(th)
    y = center[1] + r * np.sin(th)
    if t is None:
        return np.column_stack([x, y])
    return np.column_stack([x, y, np.full(n, float(t))])


@dataclass
class BoundaryTrajectory:
    """Material points carried by a planar velocity field w(x, y, t)."""
    initial_points: np.ndarray
    velocity: Callable[[np.ndarray, np.ndarray, float], tuple]
    rtol: float = 1e-10
    atol: float = 1e-10

    def _rhs(self, t, y):
        xy = y.reshape(-1, 2)
        wx, wy = self.velocity(xy[:, 0], xy[:, 1], t)
        return np.column_stack([wx, wy]).ravel()

    def flow(self, points, t0, t1):
        """Transport points from time t0 to t1 with RK45 (Dormand-Prince)."""
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        if t0 == t1 or pts.size == 0:
            return pts.copy()
        sol = solve_ivp(self._rhs, (t0, t1), pts.ravel(), method="RK45",
                        rtol=self.rtol, atol=self.atol)
        if not sol.success:
            raise IntegrationFailure(sol.message)
        return sol.y[:, -1].reshape(-1, 2)


def advect_boundary_points(traj: BoundaryTrajectory, t):
    """Positions of the seeded points at time t (scalar) or times t (array)."""
    ts = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if np.any(ts < 0):
        raise ValueError("advection starts at t = 0")
    y0 = np.asarray(traj.initial_points, dtype=np.float64)
    order = np.argsort(ts)
    out = [None] * ts.size
    if ts.max() == 0:
        out = [y0.copy() for _ in ts]
    else:
        sol = solve_ivp(traj._rhs, (0.0, float(ts.max())), y0.ravel(), method="RK45",
                        rtol=traj.rtol, atol=traj.atol, t_eval=np.unique(ts))
        if not sol.success:
            raise IntegrationFailure(sol.message)
        lookup = {float(tv): sol.y[:, k].reshape(-1, 2) for k, tv in enumerate(sol.t)}
        for k in order:
            out[k] = y0.copy() if ts[k] == 0 else lookup[float(ts[k])]
    if np.ndim(t) == 0:
        return out[0]
    return out
