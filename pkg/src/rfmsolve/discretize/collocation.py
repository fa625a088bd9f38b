"""Collocation point sets: interior grids, subdomain interfaces, boundaries."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from ..errors import EmptyInterior
from ..problems.geometry import (INTERIOR, BoundaryCounts, Geometry,
                                 classify_point, sample_boundary)
from .partition import Partition


@dataclass
class Interface:
    left: int
    right: int
    axis: int
    points: np.ndarray
    orders: tuple  # derivative orders s imposed across the interface


@dataclass
class BoundarySet:
    tag: str
    points: np.ndarray


@dataclass
class CollocationSets:
    interior: list            # per subdomain, (P_i, d) arrays
    interfaces: list = field(default_factory=list)
    boundary: list = field(default_factory=list)

    @property
    def n_interior(self):
        return sum(p.shape[0] for p in self.interior)

    @property
    def n_boundary(self):
        return sum(b.points.shape[0] for b in self.boundary)

    @property
    def n_interface(self):
        return sum(f.points.shape[0] for f in self.interfaces)


def subdomain_grid(partition: Partition, i: int, Q):
    """Uniform tensor grid with endpoints on subdomain i."""
    lo, hi = partition.lower(i), partition.upper(i)
    axes = [np.linspace(lo[d], hi[d], Q[d]) for d in range(partition.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def face_grid(partition: Partition, i: int, Q, axis: int, side: int):
    """Grid points of subdomain i on the face x_axis = lower (side 0) or upper (1)."""
    lo, hi = partition.lower(i), partition.upper(i)
    axes = [np.linspace(lo[d], hi[d], Q[d]) for d in range(partition.dim)]
    axes[axis] = np.array([lo[axis] if side == 0 else hi[axis]])
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def generate_collocation(partition: Partition, Q, geometry: Geometry,
                         boundary_counts: BoundaryCounts | None = None,
                         continuity_orders=None, pou: str = "a") -> CollocationSets:
    """Build interior, interface and boundary point sets.

    continuity_orders gives, per axis, the number of derivative orders
    (0..k-1) matched across interfaces; with pou='b' no interface rows are
    generated.
    """
    d = partition.dim
    Q = tuple(int(q) for q in np.broadcast_to(np.atleast_1d(Q), (d,)))
    if any(q < 2 for q in Q):
        raise ValueError("need at least two collocation points per axis")
    counts = boundary_counts or BoundaryCounts()
    if continuity_orders is None:
        continuity_orders = (2,) * d

    interior = []
    for i in range(partition.n_sub):
        pts = subdomain_grid(partition, i, Q)
        pts = pts[classify_point(geometry, pts) == INTERIOR]
        if pts.shape[0] == 0:
            raise EmptyInterior(f"subdomain {i} has no interior collocation points")
        interior.append(pts)

    interfaces = []
    if pou == "a":
        for i in range(partition.n_sub):
            idx = np.array(partition.multi_index(i))
            for ax in range(d):
                if idx[ax] + 1 >= partition.counts[ax] or continuity_orders[ax] == 0:
                    continue
                nb = idx.copy()
                nb[ax] += 1
                j = partition.flat_index(nb)
                pts = face_grid(partition, i, Q, ax, 1)
                pts = pts[classify_point(geometry, pts) == INTERIOR]
                if pts.shape[0]:
                    interfaces.append(Interface(i, j, ax, pts, tuple(range(continuity_orders[ax]))))

    boundary = []
    if geometry.box_is_boundary:
        for ax in range(d):
            for side in (0, 1):
                if ax == geometry.time_axis and side == 1:
                    continue  # no condition at the final time
                chunks = []
                for i in range(partition.n_sub):
                    if partition.multi_index(i)[ax] != (0 if side == 0 else partition.counts[ax] - 1):
                        continue
                    chunks.append(face_grid(partition, i, Q, ax, side))
                pts = np.vstack(chunks)
                pts = pts[classify_point(geometry, pts) == INTERIOR]
                tag = "initial" if ax == geometry.time_axis else f"face{ax}{'-+'[side]}"
                boundary.append(BoundarySet(tag, pts))
    if geometry.excised or geometry.inclusions:
        if geometry.time_axis is None:
            for pts, tag in sample_boundary(geometry, None, counts):
                boundary.append(BoundarySet(tag, pts))
        else:
            t0, t1 = geometry.box[geometry.time_axis]
            by_tag = {}
            for t in np.linspace(t0, t1, counts.slices):
                for pts, tag in sample_boundary(geometry, t, counts):
                    by_tag.setdefault(tag, []).append(pts)
            for tag, chunks in by_tag.items():
                boundary.append(BoundarySet(tag, np.vstack(chunks)))
    boundary = [b for b in boundary if b.points.shape[0]]
    return CollocationSets(interior, interfaces, boundary)


def write_collocation_csv(colloc: CollocationSets, path, coord_names=None):
    """Debug dump with columns x, y[, z|t], kind, tag."""
    d = colloc.interior[0].shape[1]
    names = list(coord_names or ["x", "y", "z"][:d])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + ["kind", "tag"])
        for i, pts in enumerate(colloc.interior):
            for p in pts:
                w.writerow([repr(float(v)) for v in p] + ["interior", f"sub{i}"])
        for f in colloc.interfaces:
            for p in f.points:
                w.writerow([repr(float(v)) for v in p] + ["interface", f"{f.left}|{f.right}|axis{f.axis}"])
        for b in colloc.boundary:
            for p in b.points:
                w.writerow([repr(float(v)) for v in p] + ["boundary", b.tag])
