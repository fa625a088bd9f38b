"""Residual and Jacobian assembly for the random feature collocation system.

Unknowns are laid out component-major: column ``(q * M + i) * J + j`` holds
the coefficient of feature j on subdomain i for solution component q.  Rows
come in a fixed order: interior equations (equation-major, then point),
interface continuity, boundary conditions.  Continuity and boundary rows are
linear in u and stored once as ``C u - g``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from ..errors import ConfigError, DimensionMismatch, OutsideDomain
from ..problems.symbolic import PdeProblem
from ..solvers import NlsSystem
from .collocation import CollocationSets
from .features import FeatureBank, eval_basis
from .partition import Partition, affine_map, pou_b_weight


def _sub_indices(alpha):
    return list(itertools.product(*(range(a + 1) for a in alpha)))


def _support_b(partition: Partition, i: int, points):
    """Mask of points where psi_i^b can be nonzero (|y| < 5/4 on every axis)."""
    y = affine_map(partition.centers[i], partition.half_widths[i], points)
    return np.all(np.abs(y) < 1.25, axis=1)


def basis_blocks(partition: Partition, bank: FeatureBank, points, alphas, pou: str = "a",
                 sub: int | None = None):
    """Feature blocks of the PoU-weighted expansion at points.

    Returns ``[(i, rows, {alpha: (len(rows), J)})]`` so that
    ``d^alpha u_q(points[rows]) = sum over entries of block @ u_q[i]``.
    With ``sub`` given (psi^a only) every point is attributed to that
    subdomain, which is how interior rows of a subdomain are formed.
    """
    points = np.atleast_2d(points)
    alphas = [tuple(a) for a in alphas]
    if pou == "a":
        if sub is not None:
            return [(sub, np.arange(points.shape[0]), eval_basis(bank, partition, sub, points, alphas))]
        owner = partition.owner(points)
        out = []
        for i in np.unique(owner):
            rows = np.flatnonzero(owner == i)
            out.append((int(i), rows, eval_basis(bank, partition, int(i), points[rows], alphas)))
        return out
    if pou != "b":
        raise ConfigError(f"unknown PoU {pou!r}")
    need = sorted({b for a in alphas for b in _sub_indices(a)})
    out = []
    for i in range(partition.n_sub):
        rows = np.flatnonzero(_support_b(partition, i, points))
        if rows.size == 0:
            continue
        pts = points[rows]
        phi = eval_basis(bank, partition, i, pts, need)
        psi = {b: pou_b_weight(partition, i, pts, b) for b in need}
        blocks = {}
        for a in alphas:
            acc = np.zeros((rows.size, bank.J))
            for b in _sub_indices(a):
                c = np.prod([comb(ai, bi) for ai, bi in zip(a, b)])
                rest = tuple(ai - bi for ai, bi in zip(a, b))
                acc += c * psi[b][:, None] * phi[rest]
            blocks[a] = acc
        out.append((i, rows, blocks))
    return out


@dataclass
class RowBlocks:
    interior: int
    continuity: int
    boundary: int

    @property
    def total(self):
        return self.interior + self.continuity + self.boundary


class RfmSystem:
    """Collocation system F(u) for one problem and discretization."""

    def __init__(self, problem: PdeProblem, partition: Partition, bank: FeatureBank,
                 colloc: CollocationSets, pou: str = "a"):
        if partition.dim != problem.dim:
            raise DimensionMismatch(f"{partition.dim}-d partition for a {problem.dim}-d problem")
        if pou == "b" and problem.max_order() > 2:
            raise ConfigError("psi^b is only supported for operators of order at most 2")
        self.problem, self.partition, self.bank, self.colloc, self.pou = (
            problem, partition, bank, colloc, pou)
        self.K = problem.n_components
        self.M = partition.n_sub
        self.J = bank.J
        self.n = self.K * self.M * self.J

        self.slot_keys = problem.slot_keys
        alphas = sorted({a for _, a in self.slot_keys})
        if pou == "a":
            self.interior_points = np.vstack(colloc.interior)
            self._interior = []
            start = 0
            for i, pts in enumerate(colloc.interior):
                (sub, rows, blk), = basis_blocks(partition, bank, pts, alphas, "a", sub=i)
                self._interior.append((sub, rows + start, blk))
                start += pts.shape[0]
        else:
            self.interior_points = np.unique(np.vstack(colloc.interior), axis=0)
            self._interior = basis_blocks(partition, bank, self.interior_points, alphas, "b")
        self.n_interior_points = self.interior_points.shape[0]
        self._source = problem.source(self.interior_points)
        self._build_linear_rows()
        self.blocks = RowBlocks(problem.n_equations * self.n_interior_points,
                                self.n_continuity, self.C.shape[0] - self.n_continuity)
        self.m = self.blocks.total

    # --- layout ------------------------------------------------------------
    def cols(self, q: int, i: int):
        s = (q * self.M + i) * self.J
        return slice(s, s + self.J)

    def _coef(self, u, q, i):
        return u[self.cols(q, i)]

    def _check(self, u):
        u = np.asarray(u, dtype=np.float64)
        if u.shape != (self.n,):
            raise DimensionMismatch(f"expected {self.n} coefficients, got shape {u.shape}")
        return u

    # --- linear rows -------------------------------------------------------
    def _build_linear_rows(self):
        d = self.partition.dim
        rows, rhs = [], []
        for face in (self.colloc.interfaces if self.pou == "a" else []):
            alphas = []
            for s in face.orders:
                a = [0] * d
                a[face.axis] = s
                alphas.append(tuple(a))
            left = eval_basis(self.bank, self.partition, face.left, face.points, alphas)
            right = eval_basis(self.bank, self.partition, face.right, face.points, alphas)
            for q in range(self.K):
                for a in alphas:
                    blk = np.zeros((face.points.shape[0], self.n))
                    blk[:, self.cols(q, face.left)] = left[a]
                    blk[:, self.cols(q, face.right)] = -right[a]
                    rows.append(blk)
                    rhs.append(np.zeros(face.points.shape[0]))
        self.n_continuity = sum(r.shape[0] for r in rows)
        self.boundary_tags = []
        for bset in self.colloc.boundary:
            conds = self.problem.conditions(bset.tag)
            alphas = sorted({c.alpha for c in conds})
            entries = basis_blocks(self.partition, self.bank, bset.points, alphas, self.pou)
            for c in conds:
                blk = np.zeros((bset.points.shape[0], self.n))
                for i, r, b in entries:
                    blk[r, self.cols(c.component, i)] += b[c.alpha]
                rows.append(blk)
                rhs.append(c.value(bset.points))
                self.boundary_tags.append((bset.tag, c.component, c.alpha, bset.points.shape[0]))
        if rows:
            self.C = np.vstack(rows)
            self.g = np.concatenate(rhs)
        else:
            self.C = np.zeros((0, self.n))
            self.g = np.zeros(0)

    # --- interior ----------------------------------------------------------
    def _slots(self, u):
        P = self.n_interior_points
        vals = []
        for q, a in self.slot_keys:
            v = np.zeros(P)
            for i, r, blk in self._interior:
                v[r] += blk[a] @ self._coef(u, q, i)
            vals.append(v)
        return vals

    def residual(self, u):
        u = self._check(u)
        slots = self._slots(u)
        pts = self.interior_points
        interior = [self.problem.operator(e, pts, slots) - self._source[e]
                    for e in range(self.problem.n_equations)]
        return np.concatenate(interior + [self.C @ u - self.g])

    def jacobian(self, u):
        u = self._check(u)
        slots = self._slots(u)
        pts = self.interior_points
        P = self.n_interior_points
        Jm = np.empty((self.m, self.n))
        for e in range(self.problem.n_equations):
            blk = Jm[e * P:(e + 1) * P]
            blk[:] = 0.0
            for (q, a), dp in self.problem.operator_partials(e, pts, slots):
                for i, r, b in self._interior:
                    blk[r, self.cols(q, i)] += dp[r, None] * b[a]
        Jm[self.blocks.interior:] = self.C
        return Jm

    def to_nls(self, scaling: str = "row_scale_c100") -> NlsSystem:
        return NlsSystem(self.n, self.m, self.residual, self.jacobian, scaling)

    # --- post-processing ---------------------------------------------------
    def evaluate(self, u, points, orders=((),), component: int | None = None):
        return evaluate_solution(self.partition, self.bank, u, points, orders, self.pou,
                                 self.K, component)


def evaluate_solution(partition: Partition, bank: FeatureBank, u, points, orders=None,
                      pou: str = "a", n_components: int = 1, component: int | None = None):
    """Field values and partials of the PoU expansion at points.

    Returns ``{alpha: (K, P)}`` (or ``(P,)`` arrays when ``component`` is
    given).  ``orders`` lists multi-indices; the default is the value only.
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if not np.all(partition.contains(points, tol=1e-12)):
        raise OutsideDomain("evaluation point outside the partition box")
    d = partition.dim
    orders = [(0,) * d] if orders is None else [tuple(a) if len(a) else (0,) * d for a in orders]
    M, J = partition.n_sub, bank.J
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (n_components * M * J,):
        raise DimensionMismatch(f"expected {n_components * M * J} coefficients, got {u.shape}")
    U = u.reshape(n_components, M, J)
    out = {a: np.zeros((n_components, points.shape[0])) for a in orders}
    for i, rows, blk in basis_blocks(partition, bank, points, orders, pou):
        for a in orders:
            out[a][:, rows] += U[:, i] @ blk[a].T
    if component is not None:
        return {a: v[component] for a, v in out.items()}
    return out


def assemble_residual(problem, partition, bank, colloc, u, pou="a"):
    return RfmSystem(problem, partition, bank, colloc, pou).residual(u)


def assemble_jacobian(problem, partition, bank, colloc, u, pou="a"):
    return RfmSystem(problem, partition, bank, colloc, pou).jacobian(u)


def build_system(problem: PdeProblem, N, Q, J, R=1.0, seed=0, pou="a", boundary_counts=None):
    """Partition, features, collocation and assembled system in one call."""
    from ..problems.geometry import BoundaryCounts
    from .collocation import generate_collocation
    from .features import sample_features
    from .partition import build_partition

    part = build_partition(problem.box, N)
    bank = sample_features(part, J, R, seed)
    orders = tuple(int(k) for k in problem.operator_orders)
    colloc = generate_collocation(part, Q, problem.geometry, boundary_counts or BoundaryCounts(),
                                  continuity_orders=orders, pou=pou)
    return RfmSystem(problem, part, bank, colloc, pou)
