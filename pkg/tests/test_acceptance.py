"""Acceptance criteria 1-14, each at its stated tolerance.

Every test records a one-line PASS/FAIL verdict (printed as it runs and
again in the terminal summary) before asserting.
"""
import resource
import time
import tracemalloc

import numpy as np
import pytest
import scipy.linalg as sla

from rfmsolve import linalg
from rfmsolve.bench import ExperimentConfig, run_experiment
from rfmsolve.discretize.assembly import build_system
from rfmsolve.discretize.collocation import generate_collocation
from rfmsolve.discretize.partition import build_partition, pou_a_weight, pou_eval
from rfmsolve.problems import PROBLEM_NAMES, make_problem
from rfmsolve.problems.geometry import INTERIOR, BoundaryCounts, Geometry, classify_point
from rfmsolve.solvers import NlsSystem, SolverConfig, amipn_solve, check_jacobian, ipn_solve

from conftest import ACCEPTANCE_LINES
from oracles import matrix_with_condition


def verdict(n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  criterion {n:2d}: {detail}"
    ACCEPTANCE_LINES[n] = line
    print(line)
    assert ok, line


# --- property-based ----------------------------------------------------------------

def test_c01_sketch_qr_orthonormality():
    rng = np.random.default_rng(101)
    worst = 0.0
    for k in range(20):
        A = rng.standard_normal((300, 60))
        SA = linalg.apply_count_sketch(linalg.make_sketch_plan(300, 60, 3.0, k), A)
        R = linalg.thin_qr(SA)
        Q = sla.solve_triangular(R, SA.T, trans="T").T
        worst = max(worst, np.abs(Q.T @ Q - np.eye(60)).max())
    verdict(1, worst <= 1e-10, f"max |Q^T Q - I| over 20 matrices = {worst:.2e} (limit 1e-10)")


def test_c02_preconditioned_condition_number():
    kappas = []
    for seed in range(20):
        rng = np.random.default_rng(seed)
        A = matrix_with_condition(rng, 500, 100, 1e8)
        R = linalg.thin_qr(linalg.apply_count_sketch(linalg.make_sketch_plan(500, 100, 3.0, seed), A))
        kappas.append(linalg.estimate_condition(sla.solve_triangular(R, A.T, trans="T").T))
    good = sum(k <= 3.0 for k in kappas)
    verdict(2, good >= 18, f"kappa(J R^-1) <= 3 in {good}/20 seeds (need 18); "
                           f"range {min(kappas):.2f}..{max(kappas):.2f}, median {np.median(kappas):.2f}")


def test_c03_lsqr_vs_pseudoinverse():
    rng = np.random.default_rng(303)
    worst = 0.0
    for _ in range(50):
        m = int(rng.integers(2, 201))
        n = int(rng.integers(1, min(m, 50) + 1))
        A, b = rng.standard_normal((m, n)), rng.standard_normal(m)
        x = linalg.lsqr(A, b, 1e-14, 20 * n).solution
        ref = np.linalg.pinv(A) @ b
        worst = max(worst, np.linalg.norm(x - ref) / np.linalg.norm(ref))
    verdict(3, worst <= 1e-8, f"worst relative error over 50 systems = {worst:.2e} (limit 1e-8)")


def test_c04_jacobian_finite_differences():
    worst, where = 0.0, ""
    counts = BoundaryCounts(per_slice=200, slices=6, surface=2000)
    for name in PROBLEM_NAMES:
        p = make_problem(name)
        s = build_system(p, (2,) * p.dim, 6, 20, boundary_counts=counts)
        u = np.random.default_rng(4).standard_normal(s.n) * 0.1
        err = check_jacobian(s.to_nls(), u, n_coords=100)
        if err >= worst:
            worst, where = err, name
    verdict(4, worst <= 1e-5, f"worst column error {worst:.2e} ({where}) over {len(PROBLEM_NAMES)} problems")


def test_c05_manufactured_sources():
    worst, where = 0.0, ""
    for name in PROBLEM_NAMES:
        p = make_problem(name)
        if not p.has_exact:
            continue
        rng = np.random.default_rng(5)
        pts = p.box[:, 0] + rng.random((600, p.dim)) * (p.box[:, 1] - p.box[:, 0])
        pts = pts[classify_point(p.geometry, pts) == INTERIOR][:100]
        f, slots = p.source(pts), p.exact_slots(pts)
        for e in range(p.n_equations):
            err = np.abs(p.operator(e, pts, slots) - f[e]).max()
            if err >= worst:
                worst, where = err, name
    verdict(5, worst <= 1e-10, f"worst pointwise residual {worst:.2e} ({where})")


def test_c06_ipn_amipn_degeneracy():
    nls = build_system(make_problem("cubic_elliptic_2d"), (2, 2), 15, 100).to_nls()
    u0 = np.zeros(nls.n_unknowns)
    a = ipn_solve(nls, u0, SolverConfig(seed=7))
    b = amipn_solve(nls, u0, SolverConfig(seed=7, m_max=1, tau_rel=0.0))
    same = (len(a.iterates) == len(b.iterates)
            and all(np.array_equal(x, y) for x, y in zip(a.iterates, b.iterates))
            and a.residual_history == b.residual_history)
    verdict(6, same, f"{len(a.iterates)} IPN iterates vs {len(b.iterates)} AMIPN iterates, bit-identical={same}")


def test_c07_affine_exactness():
    rng = np.random.default_rng(707)
    A, b = rng.standard_normal((500, 100)), rng.standard_normal(500)
    nls = NlsSystem(100, 500, lambda u: A @ u - b, lambda u: A.copy())
    opt = np.linalg.norm(A @ np.linalg.lstsq(A, b, rcond=None)[0] - b)
    cfg = SolverConfig()
    details, ok = [], True
    for name, solve in (("ipn", ipn_solve), ("amipn", amipn_solve)):
        rep = solve(nls, np.zeros(100), cfg)
        gap = rep.residual_history[1] - opt
        # one outer iteration reaches the optimum; the next one only confirms stagnation
        good = gap <= 10 * cfg.eta * rep.residual_history[0] and rep.termination == "stagnation"
        ok &= good
        details.append(f"{name}: gap after 1 step {gap:.1e}, IT={rep.IT}, {rep.termination}")
    verdict(7, ok, "; ".join(details))


def test_c08_klein_gordon_topology():
    geo = make_problem("klein_gordon_flowers").geometry
    g = np.linspace(-1, 1, 200)
    X, Y = np.meshgrid(g, g, indexing="ij")
    overlap = {}
    for tv in (0.0, 1.0, 2.0):
        pts = np.column_stack([X.ravel(), Y.ravel(), np.full(X.size, tv)])
        inside = [reg.level(pts) < 0 for reg in geo.excised]
        overlap[tv] = int(np.sum(inside[0] & inside[1]))
    ok = overlap[0.0] == 0 and overlap[1.0] > 0 and overlap[2.0] == 0
    verdict(8, ok, f"grid points inside both obstacles: t=0 {overlap[0.0]}, t=1 {overlap[1.0]}, "
                   f"t=2 {overlap[2.0]} (need 0, >0, 0)")


def test_c09_pou_identities():
    y = np.random.default_rng(909).uniform(0.75, 1.25, 1000)
    dev_b = np.abs(pou_eval("b", y) + pou_eval("b", 2 - y) - 1).max()
    part = build_partition([[0, 1]] * 3, (2, 2, 2))
    colloc = generate_collocation(part, 20, Geometry(np.array([[0.0, 1.0]] * 3)))
    pts = np.vstack(colloc.interior)
    total = sum(pou_a_weight(part, i, pts) for i in range(part.n_sub))
    dev_a = np.abs(total - 1).max()
    verdict(9, dev_b <= 1e-15 and dev_a == 0,
            f"phi^b identity deviation {dev_b:.1e}; psi^a sum deviation {dev_a:.1e} at {len(pts)} points")


# --- desk-scale reproductions ------------------------------------------------------

@pytest.mark.slow
def test_c10_cubic_elliptic_2d_sweep():
    t0 = time.perf_counter()
    reps = [run_experiment(ExperimentConfig("cubic_elliptic_2d", N=(2, 2), Q=15, J=J))
            for J in (100, 200, 400)]
    e = [r.relative_l2[0] for r in reps]
    decreasing = e[0] > e[1] > e[2]
    ratios = [e[0] / e[1], e[1] / e[2]]
    counts_ok = all(r.IT <= 6 and r.NJ <= 4 for r in reps)
    ok = decreasing and min(ratios) >= 5 and e[2] <= 1e-6 and counts_ok
    verdict(10, ok, f"L2 = {e[0]:.2e}, {e[1]:.2e}, {e[2]:.2e}; ratios {ratios[0]:.1f}, {ratios[1]:.2f}; "
                    f"(IT, NJ) = {[(r.IT, r.NJ) for r in reps]}; {time.perf_counter() - t0:.0f} s")


@pytest.mark.slow
def test_c11_cubic_elliptic_3d():
    tracemalloc.start()
    rep = run_experiment(ExperimentConfig("cubic_elliptic_3d", N=(2, 2, 2), Q=12, J=200))
    peak = tracemalloc.get_traced_memory()[1] / 2**30
    tracemalloc.stop()
    rss = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 2**20
    h = rep.residual_history
    monotone = all(b <= a for a, b in zip(h, h[1:]))
    e = rep.relative_l2[0]
    ok = e <= 1e-3 and monotone and peak <= 4.0
    verdict(11, ok, f"L2 {e:.3e} (limit 1e-3); history monotone={monotone}; peak traced memory "
                    f"{peak:.2f} GB (process max RSS {rss:.2f} GB); IT {rep.IT}, NJ {rep.NJ}, "
                    f"solve {rep.solve_seconds:.0f} s")


@pytest.mark.slow
def test_c12_helmholtz_ipn_vs_amipn():
    base = dict(N=(2, 2, 2), Q=12, J=200)
    ipn = run_experiment(ExperimentConfig("helmholtz_cosh_3d", solver="ipn", **base))
    am = run_experiment(ExperimentConfig("helmholtz_cosh_3d", solver="amipn", **base))
    e1, e2 = ipn.relative_l2[0], am.relative_l2[0]
    within = max(e1, e2) <= 2 * min(e1, e2)
    speedup = ipn.solve_seconds / am.solve_seconds
    ok = am.NJ < ipn.NJ and within and speedup >= 1.2
    verdict(12, ok, f"NJ amipn {am.NJ} vs ipn {ipn.NJ}; L2 {e2:.3e} vs {e1:.3e}; "
                    f"speedup {speedup:.2f} (need 1.2)")


@pytest.mark.slow
def test_c13_allen_cahn_moving_hole():
    rep = run_experiment(ExperimentConfig("allen_cahn_moving_hole", N=(2, 2, 2), Q=10, J=150))
    system = rep.solution[0]
    hole = system.problem.geometry.excised[0]
    pts = np.vstack(list(system.colloc.interior) + [f.points for f in system.colloc.interfaces]
                    + [b.points for b in system.colloc.boundary])
    # strictly inside the hole at the point's own time coordinate
    inside = int(np.sum(hole.level(pts) < -1e-10))
    e = rep.relative_l2[0]
    ok = rep.termination == "stagnation" and e <= 1e-3 and inside == 0
    verdict(13, ok, f"termination {rep.termination}; L2 {e:.3e} (limit 1e-3); "
                    f"collocation points inside the hole: {inside} of {len(pts)}")


@pytest.mark.slow
def test_c14_gray_scott():
    rep = run_experiment(ExperimentConfig("gray_scott_3d", N=(2, 2, 2), Q=10, J=150))
    eu, ev = rep.relative_l2
    ok = max(eu, ev) <= 5e-3 and max(eu, ev) <= 10 * min(eu, ev)
    verdict(14, ok, f"L2 u {eu:.3e}, v {ev:.3e} (limit 5e-3, ratio {max(eu, ev) / min(eu, ev):.2f}); "
                    f"IT {rep.IT}, NJ {rep.NJ}")
