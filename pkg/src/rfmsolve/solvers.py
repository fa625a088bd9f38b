"""Outer nonlinear least-squares iterations.

``ipn_solve`` and ``amipn_solve`` are sketch-preconditioned inexact Newton
methods; ``lm_solve`` and ``gauss_newton_solve`` are dense baselines.  All
solvers minimise ||F(u)||_2 for an :class:`NlsSystem`.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as sla

from . import linalg
from .errors import FactorizationFailure, RankDeficient, SketchTooWide

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
# added to the sketch seed when a sketch turns out rank deficient
_RETRY_SALT = 0x9E3779B97F4A7C15


@dataclass
class NlsSystem:
    """Residual/Jacobian pair for F: R^n -> R^m.

    ``jacobian_eval`` must return a fresh float64 array on each call; the
    solvers overwrite it in place.
    """
    n_unknowns: int
    m_residuals: int
    residual_eval: Callable[[np.ndarray], np.ndarray]
    jacobian_eval: Callable[[np.ndarray], np.ndarray]
    scaling: str = "none"  # "none" | "row_scale_c100"

    def __post_init__(self):
        if self.scaling not in ("none", "row_scale_c100"):
            raise ValueError(f"unknown scaling {self.scaling!r}")


@dataclass(frozen=True)
class LineSearch:
    lo: float = 0.0
    hi: float = 2.0
    alpha_tol: float = 1e-3
    max_evals: int = 40


@dataclass
class SolverConfig:
    gamma: float = 3.0
    eta: float = 1e-6
    epsilon: float = 1e-10
    max_outer: int = 50
    m_max: int = 3
    tau_rel: float = 1e-3
    line_search: LineSearch = field(default_factory=LineSearch)
    seed: int = 0
    # Relative floor on diag(R) during the solve.  The sketched factor of an
    # RFM Jacobian routinely has diagonal ratios far below 1e-12, so only
    # exactly singular or non-finite factors are rejected by default.
    rank_tol: float = 0.0
    # Truncation level of the pivoted LQ map used when m < n.
    lq_rank_tol: float = 1e-12
    scale_c: float = 100.0
    lsqr_max_iter: int | None = None

    def __post_init__(self):
        if not self.gamma > 1:
            raise ValueError("gamma must exceed 1")
        if not self.eta > 0 or not self.epsilon > 0:
            raise ValueError("eta and epsilon must be positive")
        if self.m_max < 1 or self.max_outer < 1:
            raise ValueError("m_max and max_outer must be at least 1")
        if not self.tau_rel >= 0:
            raise ValueError("tau_rel must be non-negative")
        if self.rank_tol < 0 or self.lq_rank_tol < 0:
            raise ValueError("rank tolerances must be non-negative")
        ls = self.line_search
        if isinstance(ls, dict):
            self.line_search = ls = LineSearch(**ls)
        if not ls.lo < ls.hi or ls.alpha_tol <= 0 or ls.max_evals < 2:
            raise ValueError("invalid line-search bracket")


@dataclass
class SolverReport:
    outer_iterations: int
    jacobian_evaluations: int
    residual_history: list
    inner_lsqr_counts: list
    precondition_seconds: list
    total_seconds: float
    final_u: np.ndarray
    termination: str  # stagnation | max_outer | line_search_failure | gradient_tolerance
    iterates: list = field(default_factory=list)
    unscaled_residual_history: list = field(default_factory=list)
    preconditioner_kinds: list = field(default_factory=list)
    # scaled norm at the start of each outer step, under that step's row weights
    step_start_residuals: list = field(default_factory=list)

    @property
    def IT(self):
        return self.outer_iterations

    @property
    def NJ(self):
        return self.jacobian_evaluations


def golden_section(phi, lo: float, hi: float, alpha_tol: float = 1e-3,
                   max_evals: int = 40):
    """Golden-section minimiser of phi on [lo, hi].

    Stops when the bracket is narrower than alpha_tol or after max_evals
    evaluations, returning the best point evaluated so far.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    a, b = float(lo), float(hi)
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = phi(c), phi(d)
    evals = 2
    best = min((fc, c), (fd, d))
    while b - a > alpha_tol and evals < max_evals:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = phi(c)
            best = min(best, (fc, c))
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = phi(d)
            best = min(best, (fd, d))
        evals += 1
    return best[1], best[0]


class _Objective:
    """phi(alpha) = ||lam * F(z + alpha d)|| with the best residual cached."""

    def __init__(self, system, lam, z, d):
        self.system, self.lam, self.z, self.d = system, lam, z, d
        self.best = None  # (phi, alpha, F)

    def __call__(self, alpha):
        F = np.asarray(self.system.residual_eval(self.z + alpha * self.d), dtype=np.float64)
        val = float(np.linalg.norm(F * self.lam)) if self.lam is not None else float(np.linalg.norm(F))
        if not np.isfinite(val):
            val = math.inf
        if self.best is None or val < self.best[0]:
            self.best = (val, alpha, F)
        return val


def _line_search(system, lam, z, d, phi0, ls: LineSearch):
    """Golden section with a backtracking fallback.

    Returns (alpha, phi, F) for an accepted step.  When no step reduces the
    objective below phi0 the result is (None, best_phi, None).
    """
    obj = _Objective(system, lam, z, d)
    golden_section(obj, ls.lo, ls.hi, ls.alpha_tol, ls.max_evals)
    if obj.best[0] < phi0:
        return obj.best[1], obj.best[0], obj.best[2]
    for j in range(11):
        alpha = 2.0 ** -j
        val = obj(alpha)
        if val < phi0:
            return alpha, val, obj.best[2]
    return None, obj.best[0], None


class _Preconditioned:
    """Scaled, right-preconditioned Jacobian at one refresh point."""

    def __init__(self, system, u, config, seed, report):
        t0 = time.perf_counter()
        J = np.ascontiguousarray(system.jacobian_eval(u), dtype=np.float64)
        F = np.asarray(system.residual_eval(u), dtype=np.float64)
        if J.shape != (system.m_residuals, system.n_unknowns):
            raise ValueError(f"Jacobian has shape {J.shape}, expected "
                             f"{(system.m_residuals, system.n_unknowns)}")
        self.lam = None
        if system.scaling == "row_scale_c100":
            J, F, self.lam = linalg.row_scale(J, F.copy(), config.scale_c, inplace=True)
        self.F = F  # scaled residual at u
        m, n = J.shape
        self.kind, self.R, self.P = _factor(J, config, seed)
        if self.kind == "lq":
            self.Jt = J @ self.P  # m x m
        else:
            self.Jt = linalg.right_precondition_in_place(J, self.R, config.rank_tol)
        self.seconds = time.perf_counter() - t0
        report.precondition_seconds.append(self.seconds)
        report.preconditioner_kinds.append(self.kind)

    def direction(self, rhs, config):
        res = linalg.lsqr(self.Jt, rhs, config.eta, config.lsqr_max_iter)
        if self.kind == "lq":
            return self.P @ res.solution, res.iterations
        return linalg.solve_upper(self.R, res.solution), res.iterations


def _factor(J, config, seed):
    """Pick the right preconditioner for J.

    Tall enough systems use the count sketch (retrying once on a degenerate
    sketch).  When m < ceil(gamma n) the sketch cannot compress, so R comes
    from J itself.  When m < n a column-pivoted QR of J^T, truncated where
    |R_ii| falls below lq_rank_tol |R_00|, gives the map P = Q1 R11^{-T} onto
    the numerically resolved part of the row space.
    """
    m, n = J.shape
    if m < n:
        Q1, R1, _ = sla.qr(J.T, mode="economic", pivoting=True, check_finite=False)
        diag = np.abs(np.diag(R1))
        if not np.all(np.isfinite(diag)) or diag[0] == 0:
            raise RankDeficient("Jacobian is zero or non-finite")
        r = int(np.count_nonzero(diag > config.lq_rank_tol * diag[0]))
        P = sla.solve_triangular(R1[:r, :r], Q1[:, :r].T, lower=False, check_finite=False).T
        return "lq", None, np.ascontiguousarray(P)
    try:
        plan = linalg.make_sketch_plan(m, n, config.gamma, seed)
    except SketchTooWide:
        return "qr", linalg.thin_qr(J, config.rank_tol), None
    try:
        R = linalg.thin_qr(linalg.apply_count_sketch(plan, J), config.rank_tol)
    except RankDeficient:
        plan = linalg.make_sketch_plan(m, n, config.gamma, (seed + _RETRY_SALT) % 2**64)
        R = linalg.thin_qr(linalg.apply_count_sketch(plan, J), config.rank_tol)
    return "sketch", R, None


def _norm(F, lam):
    return float(np.linalg.norm(F * lam if lam is not None else F))


def _new_report():
    return SolverReport(0, 0, [], [], [], 0.0, None, "max_outer")


def ipn_solve(system: NlsSystem, u0, config: SolverConfig | None = None) -> SolverReport:
    """Inexact preconditioned Newton: one fresh preconditioned Jacobian per step."""
    return _amipn(system, u0, config or SolverConfig(), reuse=False)


def amipn_solve(system: NlsSystem, u0, config: SolverConfig | None = None) -> SolverReport:
    """Adaptive multi-step variant reusing the preconditioned Jacobian."""
    return _amipn(system, u0, config or SolverConfig(), reuse=True)


def _amipn(system, u0, config, reuse):
    """Shared driver.  With reuse=False every outer iteration takes exactly one
    inner step and refreshes the Jacobian, which is the IPN iteration; AMIPN
    with m_max=1 and tau_rel=0 follows the identical code path."""
    t_start = time.perf_counter()
    u = np.array(u0, dtype=np.float64).ravel()
    if u.size != system.n_unknowns:
        raise ValueError(f"u0 has length {u.size}, system has {system.n_unknowns} unknowns")
    m_max = config.m_max if reuse else 1
    tau = config.tau_rel if reuse else 0.0
    rep = _new_report()
    rep.iterates.append(u.copy())

    pc = _Preconditioned(system, u, config, config.seed, rep)
    rep.jacobian_evaluations = 1
    fresh = True
    F_u = pc.F  # scaled residual at u under the current weights
    rep.residual_history.append(_norm(F_u, None))
    rep.unscaled_residual_history.append(_norm(F_u, 1.0 / pc.lam if pc.lam is not None else None))

    for k in range(config.max_outer):
        rep.outer_iterations = k + 1
        phi_u = _norm(F_u, None)
        z, Fz, phi_z = u, F_u, phi_u
        lsqr_total = 0
        failed_best = math.inf
        flag = True
        for i in range(m_max):
            d, its = pc.direction(-Fz, config)
            lsqr_total += its
            step = _line_search(system, pc.lam, z, d, phi_z, config.line_search)
            if step[0] is None:
                if i == 0 and not fresh:
                    # a stale Jacobian gave no descent: refresh and retry
                    pc = _Preconditioned(system, z, config, config.seed + k, rep)
                    rep.jacobian_evaluations += 1
                    fresh = True
                    Fz = F_u = pc.F
                    phi_z = phi_u = _norm(F_u, None)
                    d, its = pc.direction(-Fz, config)
                    lsqr_total += its
                    step = _line_search(system, pc.lam, z, d, phi_z, config.line_search)
                if step[0] is None:
                    failed_best = step[1]
                    if i > 0 and tau > 0:
                        flag = False
                    break
            alpha, phi_new, F_raw = step
            z_new = z + alpha * d
            F_new = F_raw * pc.lam if pc.lam is not None else F_raw
            early = np.linalg.norm(F_new - Fz) < tau * phi_u
            z, Fz, phi_z = z_new, F_new, phi_new
            if early:
                flag = False
                break
        rep.inner_lsqr_counts.append(lsqr_total)
        rep.step_start_residuals.append(phi_u)

        no_progress = z is u
        u_prev_phi = phi_u
        u, F_u = z, Fz
        rep.iterates.append(u.copy())
        rep.residual_history.append(phi_z)
        F_plain = F_u / pc.lam if pc.lam is not None else F_u
        rep.unscaled_residual_history.append(float(np.linalg.norm(F_plain)))
        if no_progress:
            # No step length reduced the residual along a fresh direction.  If
            # the best trial point is within epsilon of the current residual
            # the iteration has simply stagnated.
            flat = abs(failed_best - u_prev_phi) < config.epsilon
            rep.termination = "stagnation" if flat else "line_search_failure"
            break
        if abs(phi_z - u_prev_phi) < config.epsilon:
            rep.termination = "stagnation"
            break
        if k == config.max_outer - 1:
            rep.termination = "max_outer"
            break
        if flag or not reuse:
            pc = _Preconditioned(system, u, config, config.seed + k + 1, rep)
            rep.jacobian_evaluations += 1
            fresh = True
            F_u = pc.F
        else:
            fresh = False
    rep.final_u = u
    rep.total_seconds = time.perf_counter() - t_start
    return rep


def _baseline(system, u0, max_iter, grad_tol, step_fn):
    """Shared loop for the undamped/damped Gauss-Newton baselines.

    With row scaling the weights are recomputed from each new Jacobian, as
    in the preconditioned solvers, and the step and gradient test use the
    scaled pair.
    """
    t0 = time.perf_counter()
    u = np.array(u0, dtype=np.float64).ravel()
    rep = _new_report()
    rep.iterates.append(u.copy())
    F = np.asarray(system.residual_eval(u), dtype=np.float64)
    rep.unscaled_residual_history.append(float(np.linalg.norm(F)))
    rep.termination = "max_outer"
    lam = None
    for k in range(max_iter):
        J = np.asarray(system.jacobian_eval(u), dtype=np.float64)
        rep.jacobian_evaluations += 1
        Fs = F
        if system.scaling == "row_scale_c100":
            J, Fs, lam = linalg.row_scale(J, F.copy(), inplace=True)
        if k == 0:
            rep.residual_history.append(float(np.linalg.norm(Fs)))
        rep.step_start_residuals.append(float(np.linalg.norm(Fs)))
        if np.linalg.norm(J.T @ Fs) < grad_tol:
            rep.termination = "gradient_tolerance"
            break
        rep.outer_iterations = k + 1
        u = u + step_fn(J, Fs)
        F = np.asarray(system.residual_eval(u), dtype=np.float64)
        rep.iterates.append(u.copy())
        rep.residual_history.append(float(np.linalg.norm(F * lam if lam is not None else F)))
        rep.unscaled_residual_history.append(float(np.linalg.norm(F)))
    if not rep.residual_history:
        rep.residual_history.append(rep.unscaled_residual_history[0])
    rep.final_u = u
    rep.total_seconds = time.perf_counter() - t0
    return rep


def lm_solve(system: NlsSystem, u0, max_iter: int = 180, grad_tol: float = 1e-6,
             damping: Callable[[float], float] | None = None) -> SolverReport:
    """Levenberg-Marquardt with lambda_k = ||F_k|| (or ``damping(||F_k||)``)."""
    def step(J, F):
        fn = float(np.linalg.norm(F))
        lam = fn if damping is None else damping(fn)
        A = J.T @ J
        A[np.diag_indices_from(A)] += lam
        try:
            c = sla.cho_factor(A, lower=False, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise FactorizationFailure(str(exc)) from exc
        return -sla.cho_solve(c, J.T @ F, check_finite=False)
    return _baseline(system, u0, max_iter, grad_tol, step)


def gauss_newton_solve(system: NlsSystem, u0, max_iter: int = 60,
                       grad_tol: float = 1e-6) -> SolverReport:
    """Undamped Gauss-Newton with the step from a dense QR least-squares solve."""
    def step(J, F):
        m, n = J.shape
        if m < n:
            raise RankDeficient("Gauss-Newton needs at least as many residuals as unknowns")
        Q, R = sla.qr(J, mode="economic", check_finite=False)
        linalg._check_diagonal(np.diag(R), linalg.RANK_TOL)
        return -sla.solve_triangular(R, Q.T @ F, check_finite=False)
    return _baseline(system, u0, max_iter, grad_tol, step)


def check_jacobian(system: NlsSystem, u, n_coords: int = 100, seed: int = 0,
                   rel_step: float = 1e-6):
    """Worst relative error between J(u) columns and central differences of F.

    Returns the maximum over ``n_coords`` randomly chosen columns of
    ||J[:, j] - (F(u + h e_j) - F(u - h e_j)) / 2h|| / max(||J[:, j]||, 1e-300)
    with h = rel_step * (1 + |u_j|).
    """
    u = np.asarray(u, dtype=np.float64)
    rng = np.random.default_rng(seed)
    cols = rng.choice(u.size, size=min(n_coords, u.size), replace=False)
    J = np.asarray(system.jacobian_eval(u))
    worst = 0.0
    for j in cols:
        h = rel_step * (1.0 + abs(u[j]))
        e = np.zeros_like(u)
        e[j] = h
        fd = (np.asarray(system.residual_eval(u + e)) - np.asarray(system.residual_eval(u - e))) / (2 * h)
        scale = max(np.linalg.norm(J[:, j]), np.linalg.norm(fd), 1e-300)
        worst = max(worst, float(np.linalg.norm(J[:, j] - fd) / scale))
    return worst
