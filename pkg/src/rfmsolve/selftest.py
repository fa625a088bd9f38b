"""Quick property checks runnable from an installed package (``rfm selftest``)."""
from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from . import linalg
from .discretize.assembly import build_system
from .discretize.partition import pou_eval
from .problems import PROBLEM_NAMES, make_problem
from .problems.geometry import INTERIOR, BoundaryCounts, classify_point
from .solvers import SolverConfig, amipn_solve, check_jacobian, ipn_solve


def _sketch_qr(rng):
    worst = 0.0
    for k in range(20):
        A = rng.standard_normal((300, 60))
        SA = linalg.apply_count_sketch(linalg.make_sketch_plan(300, 60, 3.0, k), A)
        R = linalg.thin_qr(SA)
        Q = sla.solve_triangular(R, SA.T, trans="T").T  # (SA) R^{-1}
        worst = max(worst, np.abs(Q.T @ Q - np.eye(60)).max())
    return worst <= 1e-10, f"max |Q^T Q - I| = {worst:.1e}"


def _lsqr(rng):
    worst = 0.0
    for _ in range(20):
        m, n = rng.integers(20, 200), rng.integers(5, 50)
        n = min(n, m)
        A, b = rng.standard_normal((m, n)), rng.standard_normal(m)
        x = linalg.lsqr(A, b, 1e-14, 10 * n).solution
        ref = np.linalg.pinv(A) @ b
        worst = max(worst, np.linalg.norm(x - ref) / np.linalg.norm(ref))
    return worst <= 1e-8, f"worst relative error {worst:.1e}"


def _pou(rng):
    y = rng.uniform(0.75, 1.25, 1000)
    err = np.abs(pou_eval("b", y) + pou_eval("b", 2 - y) - 1).max()
    return err <= 1e-15, f"max deviation {err:.1e}"


def _sources(rng):
    worst = 0.0
    for name in PROBLEM_NAMES:
        p = make_problem(name)
        if not p.has_exact:
            continue
        pts = p.box[:, 0] + rng.random((300, p.dim)) * (p.box[:, 1] - p.box[:, 0])
        pts = pts[classify_point(p.geometry, pts) == INTERIOR][:100]
        slots, f = p.exact_slots(pts), p.source(pts)
        for e in range(p.n_equations):
            worst = max(worst, np.abs(p.operator(e, pts, slots) - f[e]).max())
    return worst <= 1e-10, f"worst residual {worst:.1e}"


def _jacobian(rng):
    p = make_problem("cubic_elliptic_2d")
    s = build_system(p, (2, 2), 6, 20, boundary_counts=BoundaryCounts(50, 3, 500))
    err = check_jacobian(s.to_nls(), rng.standard_normal(s.n) * 0.1)
    return err <= 1e-5, f"relative error {err:.1e}"


def _degeneracy(rng):
    p = make_problem("cubic_elliptic_2d")
    nls = build_system(p, (2, 2), 8, 30).to_nls()
    a = ipn_solve(nls, np.zeros(nls.n_unknowns), SolverConfig(max_outer=4))
    b = amipn_solve(nls, np.zeros(nls.n_unknowns), SolverConfig(max_outer=4, m_max=1, tau_rel=0.0))
    same = a.residual_history == b.residual_history and all(
        np.array_equal(x, y) for x, y in zip(a.iterates, b.iterates))
    return same, f"{len(a.iterates)} iterates compared"


CHECKS = [("sketch QR orthonormality", _sketch_qr), ("LSQR vs pseudoinverse", _lsqr),
          ("PoU profile identity", _pou), ("manufactured sources", _sources),
          ("Jacobian vs finite differences", _jacobian), ("IPN / AMIPN degeneracy", _degeneracy)]


def run_selftest(verbose: bool = True) -> bool:
    rng = np.random.default_rng(0)
    ok_all = True
    for name, fn in CHECKS:
        try:
            ok, detail = fn(rng)
        except Exception as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        ok_all &= ok
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return ok_all
