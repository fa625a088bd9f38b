"""Benchmark problem definitions.

Each entry gives the operator twice: in its natural (divergence or complex)
form, used only to derive the manufactured source from the exact solution,
and hand-expanded in slot form, used by assembly.  The two are compared by
the source-consistency tests.
"""
from __future__ import annotations

import math

import numpy as np
import sympy as sp

from ..errors import UnknownProblem
from .geometry import (BoundaryTrajectory, Geometry, Region, advect_boundary_points,
                       fibonacci_sphere, polar_curve)
from .symbolic import PdeProblem, SlotFactory

x, y, z, t = sp.symbols("x y z t", real=True)
XYZ = (x, y, z)
XYT = (x, y, t)


def _grad(U, coords):
    return [sp.diff(U, c) for c in coords]


def _div(V, coords):
    return sum(sp.diff(v, c) for v, c in zip(V, coords))


def _lap(U, coords):
    return sum(sp.diff(U, c, 2) for c in coords)


def _dirichlet(K, d):
    return [(q, (0,) * d) for q in range(K)]


def _box_faces(d, time_axis, K):
    tags = {}
    for ax in range(d):
        for side in "-+":
            if ax == time_axis:
                continue
            tags[f"face{ax}{side}"] = _dirichlet(K, d)
    if time_axis is not None:
        tags["initial"] = _dirichlet(K, d)
    return tags


# --------------------------------------------------------------------------
# steady 3D problems on the unit cube


def _unit_cube():
    return Geometry(np.array([[0.0, 1.0]] * 3))


def cubic_elliptic_3d(**_):
    S = SlotFactory("xyz")
    op = -(S(0, "xx") + S(0, "yy") + S(0, "zz")) + S(0) ** 3
    return PdeProblem(
        "cubic_elliptic_3d", XYZ, [[0, 1]] * 3, None, 1, ("u",), [op], (2, 2, 2),
        _unit_cube(), [sp.sin(sp.pi * x) * sp.sin(sp.pi * y) * sp.sin(sp.pi * z)],
        lambda U, X: [-_lap(U[0], X) + U[0] ** 3],
        defaults=dict(N=(2, 2, 2), Q=(20, 20, 20), J=400))


def cubic_elliptic_2d(**_):
    """Two-dimensional restriction of the cubic elliptic benchmark."""
    S = SlotFactory("xy")
    op = -(S(0, "xx") + S(0, "yy")) + S(0) ** 3
    return PdeProblem(
        "cubic_elliptic_2d", (x, y), [[0, 1]] * 2, None, 1, ("u",), [op], (2, 2),
        Geometry(np.array([[0.0, 1.0]] * 2)), [sp.sin(sp.pi * x) * sp.sin(sp.pi * y)],
        lambda U, X: [-_lap(U[0], X) + U[0] ** 3],
        defaults=dict(N=(2, 2), Q=(15, 15), J=200))


def quasilinear_elliptic_3d(**_):
    S = SlotFactory("xyz")
    u = S(0)
    lap = S(0, "xx") + S(0, "yy") + S(0, "zz")
    grad2 = S(0, "x") ** 2 + S(0, "y") ** 2 + S(0, "z") ** 2
    op = -(1 + u**2) * lap - 2 * u * grad2
    exact = (x + y + z) * sp.sin(sp.pi * x) * sp.sin(sp.pi * y) * sp.cos(sp.pi * z)
    return PdeProblem(
        "quasilinear_elliptic_3d", XYZ, [[0, 1]] * 3, None, 1, ("u",), [op], (2, 2, 2),
        _unit_cube(), [exact],
        lambda U, X: [-_div([(1 + U[0] ** 2) * g for g in _grad(U[0], X)], X)],
        defaults=dict(N=(2, 2, 2), Q=(20, 20, 20), J=800))


def strongly_nonlinear_elliptic_3d(**_):
    S = SlotFactory("xyz")
    g = [S(0, "x"), S(0, "y"), S(0, "z")]
    H = [[S(0, a + b) for b in "xyz"] for a in "xyz"]
    lap = H[0][0] + H[1][1] + H[2][2]
    op = -(1 + sum(gi**2 for gi in g)) * lap - 2 * sum(g[i] * g[j] * H[i][j]
                                                       for i in range(3) for j in range(3))
    exact = sp.sin(x * (1 - x)) * sp.sin(y * (1 - y)) * sp.exp(z + sp.Rational(1, 2))

    def natural(U, X):
        G = _grad(U[0], X)
        lam = 1 + sum(c**2 for c in G)
        return [-_div([lam * c for c in G], X)]
    return PdeProblem(
        "strongly_nonlinear_elliptic_3d", XYZ, [[0, 1]] * 3, None, 1, ("u",), [op], (2, 2, 2),
        _unit_cube(), [exact], natural,
        defaults=dict(N=(2, 2, 2), Q=(20, 20, 20), J=400))


def helmholtz_cosh_3d(**_):
    S = SlotFactory("xyz")
    op = S(0, "xx") + S(0, "yy") + S(0, "zz") - 100 * S(0) + 10 * sp.cosh(S(0))
    exact = (2 + x**2 + y**2 + z**2) * sp.sin(sp.pi * x) * sp.sin(sp.pi * y) * sp.sin(sp.pi * z)
    return PdeProblem(
        "helmholtz_cosh_3d", XYZ, [[0, 1]] * 3, None, 1, ("u",), [op], (2, 2, 2),
        _unit_cube(), [exact],
        lambda U, X: [_lap(U[0], X) - 100 * U[0] + 10 * sp.cosh(U[0])],
        defaults=dict(N=(2, 2, 2), Q=(20, 20, 20), J=400))


def diffusion_reaction_ball(**_):
    S = SlotFactory("xyz")
    u = S(0)
    lap = S(0, "xx") + S(0, "yy") + S(0, "zz")
    grad2 = S(0, "x") ** 2 + S(0, "y") ** 2 + S(0, "z") ** 2
    op = -(1 + u**2) * lap - 2 * u * grad2 + (u**3 - u) + sp.exp(u)
    exact = (x**2 + y**2 + z**2) * sp.sin(sp.pi * x) * sp.sin(sp.pi * y) * sp.sin(sp.pi * z)
    sphere = Region("sphere", lambda p: 1.0 - np.sum(p**2, axis=1),
                    lambda t_, n: fibonacci_sphere(n))
    geo = Geometry(np.array([[-1.0, 1.0]] * 3), excised=[sphere], box_is_boundary=False)

    def natural(U, X):
        G = _grad(U[0], X)
        return [-_div([(1 + U[0] ** 2) * c for c in G], X) + U[0] ** 3 - U[0] + sp.exp(U[0])]
    return PdeProblem(
        "diffusion_reaction_ball", XYZ, [[-1, 1]] * 3, None, 1, ("u",), [op], (2, 2, 2),
        geo, [exact], natural, condition_map={"sphere": _dirichlet(1, 3)},
        defaults=dict(N=(2, 2, 2), Q=(30, 30, 30), J=400))


def gray_scott_3d(F=0.060, k=0.062, **_):
    S = SlotFactory("xyz")
    u, v = S(0), S(1)
    lu = S(0, "xx") + S(0, "yy") + S(0, "zz")
    lv = S(1, "xx") + S(1, "yy") + S(1, "zz")
    F_, k_ = sp.nsimplify(F), sp.nsimplify(k)
    ops = [(1 + u**2) * lu - u * v**2 + F_ * (1 - u),
           (1 + v**2) * lv + u * v**2 - (F_ + k_) * v]
    exact = [sp.sin(x * (1 - x)) * sp.sin(y * (1 - y)) * sp.exp(z),
             sp.sin(sp.pi * x) * sp.sin(sp.pi * y) * sp.sin(sp.pi * z)]

    def natural(U, X):
        a, b = U
        return [(1 + a**2) * _lap(a, X) - a * b**2 + F_ * (1 - a),
                (1 + b**2) * _lap(b, X) + a * b**2 - (F_ + k_) * b]
    return PdeProblem(
        "gray_scott_3d", XYZ, [[0, 1]] * 3, None, 2, ("u", "v"), ops, (2, 2, 2),
        _unit_cube(), exact, natural, params=dict(F=F, k=k),
        defaults=dict(N=(2, 2, 2), Q=(20, 20, 20), J=400))


def self_convergence_elliptic_3d(**_):
    S = SlotFactory("xyz")
    u = S(0)
    lap = S(0, "xx") + S(0, "yy") + S(0, "zz")
    grad2 = S(0, "x") ** 2 + S(0, "y") ** 2 + S(0, "z") ** 2
    op = -(1 + u**2) * lap - 2 * u * grad2
    return PdeProblem(
        "self_convergence_elliptic_3d", XYZ, [[0, 1]] * 3, None, 1, ("u",), [op], (2, 2, 2),
        _unit_cube(), None, None, constant_source=[1],
        boundary_values={(0, (0, 0, 0)): sp.Integer(0)},
        defaults=dict(N=(2, 2, 2), Q=(20, 20, 20), J=400))


# --------------------------------------------------------------------------
# space-time problems (coordinates x, y, t)


def _circle(name, center_fn, r, time_dependent=True):
    def level(p):
        cx, cy = center_fn(p[:, 2])
        return (p[:, 0] - cx) ** 2 + (p[:, 1] - cy) ** 2 - r**2

    def sampler(tt, n):
        cx, cy = center_fn(np.array([tt]))
        return polar_curve((cx[0], cy[0]), lambda th: np.full_like(th, r), n, tt)
    return Region(name, level, sampler, time_dependent)


def allen_cahn_moving_hole(r=0.1, **_):
    S = SlotFactory("xyt")
    u = S(0)
    op = S(0, "t") - (S(0, "xx") + S(0, "yy")) + u**3 - u
    exact = 2 * sp.sin(x * (1 - x)) * sp.sin(y * (1 - y)) * sp.exp(t + 1)

    def center(tt):
        tt = np.asarray(tt, dtype=np.float64)
        return 0.5 + 0.2 * np.cos(np.pi * tt), 0.5 + 0.2 * np.sin(np.pi * tt)
    hole = _circle("hole", center, r)
    geo = Geometry(np.array([[0.0, 1.0], [0.0, 1.0], [0.0, 1.0]]), time_axis=2, excised=[hole])
    cmap = _box_faces(3, 2, 1)
    cmap["hole"] = _dirichlet(1, 3)
    return PdeProblem(
        "allen_cahn_moving_hole", XYT, [[0, 1]] * 3, 2, 1, ("u",), [op], (2, 2, 1), geo,
        [exact], lambda U, X: [sp.diff(U[0], t) - _lap(U[0], (x, y)) + U[0] ** 3 - U[0]],
        condition_map=cmap, params=dict(r=r),
        defaults=dict(N=(2, 2, 2), Q=(20, 20, 20), J=400))


def _flower_level(sign):
    # F = x^2 + (y - yc)^2 - (0.3 + 0.1 cos 4 theta)^2 with yc = sign (0.5 - 0.4 t)
    def level(p):
        yc = sign * (0.5 - 0.4 * p[:, 2])
        dy = p[:, 1] - yc
        th = np.arctan2(dy, p[:, 0])
        return p[:, 0] ** 2 + dy**2 - (0.3 + 0.1 * np.cos(4 * th)) ** 2

    def sampler(tt, n):
        yc = sign * (0.5 - 0.4 * tt)
        return polar_curve((0.0, yc), lambda th: 0.3 + 0.1 * np.cos(4 * th), n, tt)
    return level, sampler


def klein_gordon_flowers(beta=1.0, **_):
    S = SlotFactory("xyt")
    u = S(0)
    b = sp.nsimplify(beta)
    op = S(0, "tt") - (S(0, "xx") + S(0, "yy")) + u + b * u**2
    exact = (x + y + t + 2) / (1 + x**2 + y**2)
    l1, s1 = _flower_level(+1)
    l2, s2 = _flower_level(-1)
    geo = Geometry(np.array([[-1.0, 1.0], [-1.0, 1.0], [0.0, 2.0]]), time_axis=2,
                   excised=[Region("flower1", l1, s1, True), Region("flower2", l2, s2, True)])
    cmap = _box_faces(3, 2, 1)
    cmap["initial"] = [(0, (0, 0, 0)), (0, (0, 0, 1))]
    cmap["flower1"] = cmap["flower2"] = _dirichlet(1, 3)
    return PdeProblem(
        "klein_gordon_flowers", XYT, [[-1, 1], [-1, 1], [0, 2]], 2, 1, ("u",), [op], (2, 2, 2),
        geo, [exact],
        lambda U, X: [sp.diff(U[0], t, 2) - _lap(U[0], (x, y)) + U[0] + b * U[0] ** 2],
        condition_map=cmap, params=dict(beta=beta),
        defaults=dict(N=(2, 2, 2), Q=(30, 30, 30), J=400))


def rdc_velocity(xx, yy, tt):
    c = np.cos(np.pi * tt / 10)
    return (c * np.sin(np.pi * xx) ** 2 * np.sin(2 * np.pi * yy),
            -c * np.sin(np.pi * yy) ** 2 * np.sin(2 * np.pi * xx))


class AdvectedDisk:
    """Disk transported by the flow; membership by tracing points back to t=0."""

    def __init__(self, center=(0.5, 0.75), radius=0.15, rtol=1e-10, atol=1e-10):
        self.center = np.asarray(center, dtype=np.float64)
        self.radius = radius
        self.traj = BoundaryTrajectory(np.zeros((0, 2)), rdc_velocity, rtol, atol)

    def level(self, p):
        out = np.empty(p.shape[0])
        for tv in np.unique(p[:, 2]):
            sel = p[:, 2] == tv
            back = self.traj.flow(p[sel, :2], float(tv), 0.0)
            out[sel] = np.sum((back - self.center) ** 2, axis=1) - self.radius**2
        return out

    def sampler(self, tt, n):
        th = 2 * np.pi * np.arange(n) / n
        init = self.center + self.radius * np.column_stack([np.cos(th), np.sin(th)])
        traj = BoundaryTrajectory(init, rdc_velocity, self.traj.rtol, self.traj.atol)
        xy = advect_boundary_points(traj, float(tt))
        return np.column_stack([xy, np.full(n, float(tt))])


def rdc_advected_hole(alpha=1.0, beta=1.0, **_):
    S = SlotFactory("xyt")
    u, v = S(0), S(1)
    a_, b_ = sp.nsimplify(alpha), sp.nsimplify(beta)
    c = sp.cos(sp.pi * t / 10)
    w = (c * sp.sin(sp.pi * x) ** 2 * sp.sin(2 * sp.pi * y),
         -c * sp.sin(sp.pi * y) ** 2 * sp.sin(2 * sp.pi * x))
    ops = [S(0, "t") + w[0] * S(0, "x") + w[1] * S(0, "y") - (S(0, "xx") + S(0, "yy")) + a_ * u * v,
           S(1, "t") + w[0] * S(1, "x") + w[1] * S(1, "y") - (S(1, "xx") + S(1, "yy"))
           + b_ * sp.exp(u) * v**2]
    exact = [sp.sin(x * (1 - x)) * sp.sin(y * (1 - y)) * sp.exp(t),
             sp.sin(sp.pi * x) * sp.sin(sp.pi * y) * sp.sin(sp.pi * t)]

    def natural(U, X):
        P, V = U
        adv = lambda f: sp.diff(f, t) + w[0] * sp.diff(f, x) + w[1] * sp.diff(f, y)
        return [adv(P) - _lap(P, (x, y)) + a_ * P * V,
                adv(V) - _lap(V, (x, y)) + b_ * sp.exp(P) * V**2]
    disk = AdvectedDisk()
    geo = Geometry(np.array([[0.0, 1.0]] * 3), time_axis=2,
                   excised=[Region("hole", disk.level, disk.sampler, True)])
    cmap = _box_faces(3, 2, 2)
    cmap["hole"] = _dirichlet(2, 3)
    return PdeProblem(
        "rdc_advected_hole", XYT, [[0, 1]] * 3, 2, 2, ("u", "v"), ops, (2, 2, 1), geo,
        exact, natural, condition_map=cmap, params=dict(alpha=alpha, beta=beta),
        defaults=dict(N=(2, 2, 2), Q=(20, 20, 20), J=400))


def lotka_volterra_star(**_):
    S = SlotFactory("xyt")
    u, v = S(0), S(1)
    ops = [S(0, "t") - (S(0, "xx") + S(0, "yy")) - u + u * v,
           S(1, "t") - (S(1, "xx") + S(1, "yy")) + v - u * v]
    exact = [sp.sin(sp.pi * x) * sp.sin(sp.pi * y) * sp.exp(t),
             (x**2 + y**2 + t**2 + 2) / (t + 1)]

    def natural(U, X):
        P, V = U
        return [sp.diff(P, t) - _lap(P, (x, y)) - P + P * V,
                sp.diff(V, t) - _lap(V, (x, y)) + V - P * V]
    c = 0.02 * math.sqrt(5.0)
    rad = lambda th: 0.4 + 0.2 * np.sin(20 * th)

    def level(p):
        dx, dy = p[:, 0] - c, p[:, 1] - c
        return dx**2 + dy**2 - rad(np.arctan2(dy, dx)) ** 2
    star = Region("star", level, lambda tt, n: polar_curve((c, c), rad, n, tt), False)
    geo = Geometry(np.array([[-1.0, 1.0], [-1.0, 1.0], [0.0, 2.0]]), time_axis=2, excised=[star])
    cmap = _box_faces(3, 2, 2)
    cmap["star"] = _dirichlet(2, 3)
    return PdeProblem(
        "lotka_volterra_star", XYT, [[-1, 1], [-1, 1], [0, 2]], 2, 2, ("u", "v"), ops, (2, 2, 1),
        geo, exact, natural, condition_map=cmap,
        defaults=dict(N=(2, 2, 2), Q=(20, 20, 20), J=400))


COMPLEX_HOLES = (((1.75, 1.78), 0.1845), ((2.12, 1.78), 0.1845), ((2.05, 1.30), 0.20))
COMPLEX_INCLUSIONS = (((1.75, 1.78), 0.06), ((2.12, 1.78), 0.06),
                      ((2.05, 1.30), 0.08), ((2.20, 1.30), 0.06))


def nonlinear_diffusion_complex(holes=COMPLEX_HOLES, inclusions=COMPLEX_INCLUSIONS, **_):
    S = SlotFactory("xyt")
    u = S(0)
    op = S(0, "t") - (1 + u**2) * (S(0, "xx") + S(0, "yy")) - 2 * u * (S(0, "x") ** 2 + S(0, "y") ** 2)
    exact = (2 * (x + y + t) / (1 + x**2 + y**2)
             * (sp.tanh(sp.sin(sp.pi * x) * sp.cos(sp.pi * y) * sp.exp(-t)) + 1))

    def natural(U, X):
        G = _grad(U[0], (x, y))
        return [sp.diff(U[0], t) - _div([(1 + U[0] ** 2) * g for g in G], (x, y))]

    def disk(name, c, r):
        return _circle(name, lambda tt: (np.full_like(np.asarray(tt, float), c[0]),
                                         np.full_like(np.asarray(tt, float), c[1])), r, False)
    exc = [disk(f"hole{k}", c, r) for k, (c, r) in enumerate(holes)]
    inc = [disk(f"inclusion{k}", c, r) for k, (c, r) in enumerate(inclusions)]
    geo = Geometry(np.array([[1.5, 2.5], [1.0, 2.0], [0.0, 1.0]]), time_axis=2,
                   excised=exc, inclusions=inc)
    cmap = _box_faces(3, 2, 1)
    for reg in exc + inc:
        cmap[reg.name] = _dirichlet(1, 3)
    return PdeProblem(
        "nonlinear_diffusion_complex", XYT, [[1.5, 2.5], [1.0, 2.0], [0, 1]], 2, 1, ("u",), [op],
        (2, 2, 1), geo, [exact], natural, condition_map=cmap,
        params=dict(holes=holes, inclusions=inclusions),
        defaults=dict(N=(2, 2, 2), Q=(20, 20, 20), J=400))


def kdv_2d(**_):
    S = SlotFactory("xyt")
    u = S(0)
    op = S(0, "t") - u * S(0, "x") - u * S(0, "y") + S(0, "xxx") + S(0, "yyy")
    exact = 10 - (x**3 + y**3 + t**3)

    def natural(U, X):
        P = U[0]
        return [sp.diff(P, t) - P * sp.diff(P, x) - P * sp.diff(P, y)
                + sp.diff(P, x, 3) + sp.diff(P, y, 3)]
    cmap = _box_faces(3, 2, 1)
    cmap["face0-"] = [(0, (0, 0, 0)), (0, (1, 0, 0))]
    cmap["face1-"] = [(0, (0, 0, 0)), (0, (0, 1, 0))]
    return PdeProblem(
        "kdv_2d", XYT, [[0, 1]] * 3, 2, 1, ("u",), [op], (3, 3, 1),
        Geometry(np.array([[0.0, 1.0]] * 3), time_axis=2), [exact], natural,
        condition_map=cmap, defaults=dict(N=(2, 2, 2), Q=(20, 20, 20), J=400))


def schrodinger_2d(**_):
    S = SlotFactory("xyt")
    u, v = S(0), S(1)
    mod2 = u**2 + v**2
    half = sp.Rational(1, 2)
    # i h_t + (1/2) lap h + |h|^2 h with h = u + i v, split into real/imag parts
    ops = [-S(1, "t") + half * (S(0, "xx") + S(0, "yy")) + mod2 * u,
           S(0, "t") + half * (S(1, "xx") + S(1, "yy")) + mod2 * v]
    exact = [(x - 1) ** 3 + (y - 1) ** 3 + (t - 1) ** 3,
             2 * sp.sin(x * (1 - x)) * sp.sin(y * (1 - y)) * sp.exp(t)]

    def natural(U, X):
        h = U[0] + sp.I * U[1]
        expr = (sp.I * sp.diff(h, t) + half * (sp.diff(h, x, 2) + sp.diff(h, y, 2))
                + (U[0] ** 2 + U[1] ** 2) * h)
        re, im = sp.expand(expr).as_real_imag()
        return [re, im]
    return PdeProblem(
        "schrodinger_2d", XYT, [[0, 1]] * 3, 2, 2, ("u", "v"), ops, (2, 2, 1),
        Geometry(np.array([[0.0, 1.0]] * 3), time_axis=2), exact, natural,
        condition_map=_box_faces(3, 2, 2), defaults=dict(N=(2, 2, 2), Q=(20, 20, 20), J=400))


def burgers_2d(Re=100.0, **_):
    S = SlotFactory("xyt")
    u, v = S(0), S(1)
    Re_ = sp.nsimplify(Re)
    ops = [S(0, "t") + u * S(0, "x") + v * S(0, "y") - (S(0, "xx") + S(0, "yy")) / Re_,
           S(1, "t") + u * S(1, "x") + v * S(1, "y") - (S(1, "xx") + S(1, "yy")) / Re_]
    e = 1 / (4 * (1 + sp.exp((-4 * x + 4 * y - t) * Re_ / 32)))
    exact = [sp.Rational(3, 4) - e, sp.Rational(3, 4) + e]

    def natural(U, X):
        P, V = U
        return [sp.diff(P, t) + P * sp.diff(P, x) + V * sp.diff(P, y) - _lap(P, (x, y)) / Re_,
                sp.diff(V, t) + P * sp.diff(V, x) + V * sp.diff(V, y) - _lap(V, (x, y)) / Re_]
    return PdeProblem(
        "burgers_2d", XYT, [[0, 1]] * 3, 2, 2, ("u", "v"), ops, (2, 2, 1),
        Geometry(np.array([[0.0, 1.0]] * 3), time_axis=2), exact, natural,
        condition_map=_box_faces(3, 2, 2), params=dict(Re=Re),
        defaults=dict(N=(2, 2, 2), Q=(20, 20, 20), J=400))


def navier_stokes_2d(**_):
    S = SlotFactory("xyt")
    u, v = S(0), S(1)
    ops = [S(0, "t") + u * S(0, "x") + v * S(0, "y") + S(2, "x") - (S(0, "xx") + S(0, "yy")),
           S(1, "t") + u * S(1, "x") + v * S(1, "y") + S(2, "y") - (S(1, "xx") + S(1, "yy")),
           S(0, "x") + S(1, "y")]
    pi = sp.pi
    exact = [-sp.cos(pi * x) * sp.sin(pi * y) * sp.exp(-2 * pi**2 * t),
             sp.sin(pi * x) * sp.cos(pi * y) * sp.exp(-2 * pi**2 * t),
             -(sp.cos(2 * pi * x) + sp.cos(2 * pi * y)) / 4 * sp.exp(-4 * pi**2 * t)]

    def natural(U, X):
        P, V, Pr = U
        return [sp.diff(P, t) + P * sp.diff(P, x) + V * sp.diff(P, y) + sp.diff(Pr, x) - _lap(P, (x, y)),
                sp.diff(V, t) + P * sp.diff(V, x) + V * sp.diff(V, y) + sp.diff(Pr, y) - _lap(V, (x, y)),
                sp.diff(P, x) + sp.diff(V, y)]
    return PdeProblem(
        "navier_stokes_2d", XYT, [[0, 1]] * 3, 2, 3, ("u", "v", "p"), ops, (2, 2, 1),
        Geometry(np.array([[0.0, 1.0]] * 3), time_axis=2), exact, natural,
        condition_map=_box_faces(3, 2, 3), defaults=dict(N=(2, 2, 2), Q=(20, 20, 20), J=400))


CATALOG = {
    "cubic_elliptic_3d": cubic_elliptic_3d,
    "quasilinear_elliptic_3d": quasilinear_elliptic_3d,
    "strongly_nonlinear_elliptic_3d": strongly_nonlinear_elliptic_3d,
    "helmholtz_cosh_3d": helmholtz_cosh_3d,
    "diffusion_reaction_ball": diffusion_reaction_ball,
    "gray_scott_3d": gray_scott_3d,
    "allen_cahn_moving_hole": allen_cahn_moving_hole,
    "klein_gordon_flowers": klein_gordon_flowers,
    "rdc_advected_hole": rdc_advected_hole,
    "lotka_volterra_star": lotka_volterra_star,
    "nonlinear_diffusion_complex": nonlinear_diffusion_complex,
    "self_convergence_elliptic_3d": self_convergence_elliptic_3d,
    "kdv_2d": kdv_2d,
    "schrodinger_2d": schrodinger_2d,
    "burgers_2d": burgers_2d,
    "navier_stokes_2d": navier_stokes_2d,
    "cubic_elliptic_2d": cubic_elliptic_2d,
}


def make_problem(name: str, **params) -> PdeProblem:
    try:
        factory = CATALOG[name]
    except KeyError:
        raise UnknownProblem(f"unknown problem {name!r}; known: {', '.join(sorted(CATALOG))}") from None
    return factory(**params)
