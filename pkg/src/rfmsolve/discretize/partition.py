"""Box partitions and partition-of-unity weights."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyInterval


@dataclass(frozen=True)
class Partition:
    """Uniform tiling of a box into prod(counts) hyperrectangles.

    Subdomains are numbered in C order over the per-axis indices, so the last
    axis varies fastest.
    """
    box: np.ndarray        # (d, 2)
    counts: tuple
    centers: np.ndarray    # (M, d)
    half_widths: np.ndarray  # (M, d)

    @property
    def dim(self):
        return self.box.shape[0]

    @property
    def n_sub(self):
        return self.centers.shape[0]

    def lower(self, i):
        return self.centers[i] - self.half_widths[i]

    def upper(self, i):
        return self.centers[i] + self.half_widths[i]

    def multi_index(self, i):
        return np.unravel_index(i, self.counts)

    def flat_index(self, idx):
        return int(np.ravel_multi_index(tuple(idx), self.counts))

    def edges(self, axis):
        a, b = self.box[axis]
        return np.linspace(a, b, self.counts[axis] + 1)

    def owner(self, points):
        """Subdomain owning each point under half-open cells [a, b).

        The last cell along each axis is closed on the right so the whole box
        is covered exactly once.
        """
        points = np.atleast_2d(points)
        idx = []
        for ax in range(self.dim):
            e = self.edges(ax)
            k = np.searchsorted(e, points[:, ax], side="right") - 1
            idx.append(np.clip(k, 0, self.counts[ax] - 1))
        return np.ravel_multi_index(tuple(idx), self.counts)

    def contains(self, points, tol=0.0):
        points = np.atleast_2d(points)
        lo, hi = self.box[:, 0] - tol, self.box[:, 1] + tol
        return np.all((points >= lo) & (points <= hi), axis=1)


def build_partition(box, N) -> Partition:
    box = np.asarray(box, dtype=np.float64).reshape(-1, 2)
    N = tuple(int(n) for n in np.atleast_1d(N))
    if len(N) != box.shape[0]:
        raise ValueError(f"{len(N)} counts for a {box.shape[0]}-dimensional box")
    if any(n < 1 for n in N):
        raise ValueError("subdomain counts must be at least 1")
    if np.any(~(box[:, 1] > box[:, 0])):
        raise EmptyInterval(f"empty interval in box {box.tolist()}")
    edges = [np.linspace(a, b, n + 1) for (a, b), n in zip(box, N)]
    centers, half = [], []
    for idx in itertools.product(*(range(n) for n in N)):
        lo = np.array([edges[d][k] for d, k in enumerate(idx)])
        hi = np.array([edges[d][k + 1] for d, k in enumerate(idx)])
        centers.append((lo + hi) / 2)
        half.append((hi - lo) / 2)
    return Partition(box, N, np.array(centers), np.array(half))


def affine_map(center, half_width, x):
    """Normalized coordinates (x - mu) / sigma."""
    return (np.asarray(x, dtype=np.float64) - center) / half_width


def pou_eval(kind: str, y, order: int = 0):
    """Univariate PoU profile phi^a or phi^b (and derivatives of phi^b).

    phi^a is the indicator of |y| <= 1.  phi^b equals 1 on |y| <= 3/4,
    (1 - sin 2 pi |y|) / 2 on 3/4 <= |y| <= 5/4 and 0 beyond.
    """
    y = np.asarray(y, dtype=np.float64)
    a = np.abs(y)
    if kind == "a":
        if order:
            return np.zeros_like(y)
        return (a <= 1.0).astype(np.float64)
    if kind != "b":
        raise ValueError(f"unknown PoU kind {kind!r}")
    mid = (a > 0.75) & (a < 1.25)
    # sin(2 pi |y|) = sin(2 pi (|y| - 1)) keeps the argument small and makes
    # phi(y) + phi(2 - y) = 1 hold to rounding
    w = 2 * np.pi * (a - 1.0)
    if order == 0:
        out = np.where(a <= 0.75, 1.0, 0.0)
        return np.where(mid, (1.0 - np.sin(w)) / 2.0, out)
    if order == 1:
        return np.where(mid, -np.pi * np.cos(w) * np.sign(y), 0.0)
    if order == 2:
        return np.where(mid, 2 * np.pi**2 * np.sin(w), 0.0)
    if order == 3:
        return np.where(mid, 4 * np.pi**3 * np.cos(w) * np.sign(y), 0.0)
    raise ValueError("PoU derivatives are available up to order 3")


def pou_b_weight(partition: Partition, i: int, points, alpha=None):
    """d^alpha psi_i^b at points.

    Faces of subdomain i that lie on the outer box keep the flat branch
    (phi = 1 beyond the box), otherwise the weights would not sum to one next
    to the boundary.
    """
    points = np.atleast_2d(points)
    d = partition.dim
    alpha = (0,) * d if alpha is None else alpha
    y = affine_map(partition.centers[i], partition.half_widths[i], points)
    idx = partition.multi_index(i)
    out = np.ones(points.shape[0])
    for ax in range(d):
        yy = y[:, ax].copy()
        if idx[ax] == 0:
            yy = np.where(yy < 0, np.maximum(yy, -0.75), yy)
        if idx[ax] == partition.counts[ax] - 1:
            yy = np.where(yy > 0, np.minimum(yy, 0.75), yy)
        val = pou_eval("b", yy, alpha[ax])
        out = out * val / partition.half_widths[i, ax] ** alpha[ax]
    return out


def pou_a_weight(partition: Partition, i: int, points):
    """psi_i^a under the half-open ownership convention."""
    return (partition.owner(points) == i).astype(np.float64)
