"""Experiment driver: config -> discretization -> solve -> error report."""
from __future__ import annotations

import csv
import dataclasses
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .discretize.assembly import build_system, evaluate_solution
from .errors import ConfigError, ZeroReference
from .problems import make_problem
from .problems.geometry import INTERIOR, BoundaryCounts, classify_point
from .solvers import SolverConfig, amipn_solve, gauss_newton_solve, ipn_solve, lm_solve

SOLVERS = ("ipn", "amipn", "lm", "gauss_newton")
BASE_COLUMNS = ["problem", "solver", "Nx", "Ny", "Nz", "Qx", "Qy", "Qz", "J", "seed", "IT", "NJ",
                "assemble_s", "solve_s", "precond_s", "residual"]

# target relative L2 error per component at Q = 20^3, J = 400
PAPER_SCALE_ROWS = {
    "cubic_elliptic_3d": [5.38e-05],
    "strongly_nonlinear_elliptic_3d": [7.28e-05],
    "helmholtz_cosh_3d": [2.54e-05],
    "gray_scott_3d": [7.60e-05, 5.00e-05],
    "allen_cahn_moving_hole": [7.70e-05],
    "rdc_advected_hole": [6.99e-05, 5.48e-05],
    "lotka_volterra_star": [3.36e-04, 3.70e-05],
    "nonlinear_diffusion_complex": [2.01e-05],
    "kdv_2d": [5.48e-06],
    "schrodinger_2d": [2.75e-05, 1.86e-04],
    "burgers_2d": [4.93e-04, 4.15e-04],
}


def _tuple(v, d, name):
    t = tuple(int(x) for x in np.broadcast_to(np.atleast_1d(v), (d,)))
    if any(x < 1 for x in t):
        raise ConfigError(f"{name} must be positive, got {v!r}")
    return t


@dataclass
class ExperimentConfig:
    problem: str
    N: tuple = None
    Q: tuple = None
    J: int = None
    solver: str = "amipn"
    solver_params: dict = field(default_factory=dict)
    R: float = 1.0
    pou: str = "a"
    seed: int = 0
    eval_grid: tuple = 50
    output: str | None = None
    problem_params: dict = field(default_factory=dict)
    boundary_counts: dict = field(default_factory=dict)

    def resolve(self):
        """Fill problem defaults and validate; returns (config, problem)."""
        try:
            prob = make_problem(self.problem, **self.problem_params)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        d = prob.dim
        dflt = prob.defaults
        cfg = dataclasses.replace(
            self,
            N=_tuple(self.N if self.N is not None else dflt["N"], d, "N"),
            Q=_tuple(self.Q if self.Q is not None else dflt["Q"], d, "Q"),
            J=int(self.J if self.J is not None else dflt["J"]),
            eval_grid=_tuple(self.eval_grid, d, "eval_grid"))
        if cfg.J < 1:
            raise ConfigError("J must be positive")
        if cfg.solver not in SOLVERS:
            raise ConfigError(f"unknown solver {cfg.solver!r}; choose from {', '.join(SOLVERS)}")
        if cfg.pou not in ("a", "b"):
            raise ConfigError(f"unknown PoU {cfg.pou!r}")
        if not cfg.R > 0:
            raise ConfigError("feature range R must be positive")
        try:
            cfg.solver_config()
            BoundaryCounts(**cfg.boundary_counts)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        return cfg, prob

    def solver_config(self):
        if self.solver in ("ipn", "amipn"):
            return SolverConfig(**{"seed": self.seed, **self.solver_params})
        return None


@dataclass
class ErrorReport:
    config: ExperimentConfig
    relative_l2: list
    relative_h1: list
    residual_norm: float
    IT: int
    NJ: int
    assemble_seconds: float
    solve_seconds: float
    precondition_seconds_total: float
    lsqr_iteration_totals: list
    termination: str
    status: str = "ok"
    m: int = 0
    n: int = 0
    solution: object = None  # (system, coefficients) for reuse as a reference
    residual_history: list = field(default_factory=list)
    unscaled_residual_history: list = field(default_factory=list)

    def row(self, n_components: int | None = None):
        c = self.config
        K = n_components or len(self.relative_l2)
        pad = lambda v, k: (list(v) + [math.nan] * k)[:k]
        dims = lambda t: list(t) + [""] * (3 - len(t))
        return ([c.problem, c.solver] + dims(c.N) + dims(c.Q)
                + [c.J, c.seed, self.IT, self.NJ, _f(self.assemble_seconds), _f(self.solve_seconds),
                   _f(self.precondition_seconds_total), _f(self.residual_norm)]
                + [_f(v) for v in pad(self.relative_l2, K)]
                + [_f(v) for v in pad(self.relative_h1, K)] + [self.status])


def _f(v):
    return "" if v is None or (isinstance(v, float) and math.isnan(v)) else repr(float(v))


def csv_header(n_components: int = 1, compare: bool = False):
    cols = (BASE_COLUMNS + [f"err_l2_c{k}" for k in range(n_components)]
            + [f"err_h1_c{k}" for k in range(n_components)] + ["status"])
    return cols + ["speedup"] if compare else cols


# --------------------------------------------------------------------------
# error metrics


def _values(field_, points):
    return np.asarray(field_(points) if callable(field_) else field_, dtype=np.float64)


def relative_l2_error(numerical, exact, points=None):
    """sqrt(sum (u_n - u)^2) / sqrt(sum u^2) over the grid points.

    ``numerical`` and ``exact`` are callables on an (P, d) array or arrays of
    values already sampled on the grid.
    """
    un, ue = _values(numerical, points), _values(exact, points)
    if un.size == 0:
        raise ValueError("empty evaluation grid")
    den = float(np.sum(ue**2))
    if den == 0:
        raise ZeroReference("reference field vanishes on the grid")
    return math.sqrt(float(np.sum((un - ue) ** 2)) / den)


def relative_h1_error(numerical, exact, points=None):
    """Discrete relative H1 error.

    Each field is a callable returning ``(values (P,), gradient (P, d))`` or
    such a pair already sampled.
    """
    un, gn = numerical(points) if callable(numerical) else numerical
    ue, ge = exact(points) if callable(exact) else exact
    un, ue = np.asarray(un, float), np.asarray(ue, float)
    gn, ge = np.asarray(gn, float).reshape(un.size, -1), np.asarray(ge, float).reshape(ue.size, -1)
    den = float(np.sum(ue**2) + np.sum(ge**2))
    if den == 0:
        raise ZeroReference("reference field and gradient vanish on the grid")
    return math.sqrt(float(np.sum((un - ue) ** 2) + np.sum((gn - ge) ** 2)) / den)


def evaluation_grid(problem, counts):
    """Uniform grid over the box restricted to points interior at their own time."""
    axes = [np.linspace(a, b, k) for (a, b), k in zip(problem.box, counts)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.column_stack([m.ravel() for m in mesh])
    return pts[classify_point(problem.geometry, pts) == INTERIOR]


def _grad_orders(problem):
    d = problem.dim
    axes = [ax for ax in range(d) if ax != problem.time_axis]
    return [tuple(int(k == ax) for k in range(d)) for ax in axes]


def field_errors(problem, numerical_eval, reference_eval, points):
    """Per-component relative L2 and H1 errors.

    Both evaluators map (points, orders) -> {alpha: (K, P)}.  The H1
    gradient uses the spatial axes only.
    """
    zero = (0,) * problem.dim
    grads = _grad_orders(problem)
    orders = [zero] + grads
    num = numerical_eval(points, orders)
    ref = reference_eval(points, orders)
    l2, h1 = [], []
    for q in range(problem.n_components):
        l2.append(relative_l2_error(num[zero][q], ref[zero][q]))
        gn = np.stack([num[a][q] for a in grads], axis=1)
        ge = np.stack([ref[a][q] for a in grads], axis=1)
        h1.append(relative_h1_error((num[zero][q], gn), (ref[zero][q], ge)))
    return l2, h1


def exact_evaluator(problem):
    def ev(points, orders):
        return {a: np.stack([problem.exact_derivative(q, a, points)
                             for q in range(problem.n_components)]) for a in orders}
    return ev


def system_evaluator(system, u):
    def ev(points, orders):
        return evaluate_solution(system.partition, system.bank, u, points, orders,
                                 system.pou, system.K)
    return ev


# --------------------------------------------------------------------------
# runs


def _solve(cfg, nls):
    u0 = np.zeros(nls.n_unknowns)
    if cfg.solver == "ipn":
        return ipn_solve(nls, u0, cfg.solver_config())
    if cfg.solver == "amipn":
        return amipn_solve(nls, u0, cfg.solver_config())
    params = dict(cfg.solver_params)
    if cfg.solver == "lm":
        return lm_solve(nls, u0, **params)
    return gauss_newton_solve(nls, u0, **params)


def run_experiment(config: ExperimentConfig, reference=None) -> ErrorReport:
    """Build, solve and score one configuration.

    ``reference`` is an evaluator used instead of the exact solution (the
    self-convergence study); without either, the error columns are NaN.
    """
    cfg, prob = config.resolve()
    t0 = time.perf_counter()
    system = build_system(prob, cfg.N, cfg.Q, cfg.J, cfg.R, cfg.seed, cfg.pou,
                          BoundaryCounts(**cfg.boundary_counts))
    nls = system.to_nls("row_scale_c100")
    assemble_s = time.perf_counter() - t0
    rep = _solve(cfg, nls)
    u = rep.final_u
    resid = float(np.linalg.norm(system.residual(u)))
    pts = evaluation_grid(prob, cfg.eval_grid)
    ref = reference or (exact_evaluator(prob) if prob.has_exact else None)
    if ref is not None:
        l2, h1 = field_errors(prob, system_evaluator(system, u), ref, pts)
    else:
        l2 = h1 = [math.nan] * prob.n_components
    ok = rep.termination in ("stagnation", "gradient_tolerance")
    return ErrorReport(cfg, l2, h1, resid, rep.IT, rep.NJ, assemble_s, rep.total_seconds,
                       float(sum(rep.precondition_seconds)), list(rep.inner_lsqr_counts),
                       rep.termination, "ok" if ok else rep.termination, system.m, system.n,
                       solution=(system, u), residual_history=list(rep.residual_history),
                       unscaled_residual_history=list(rep.unscaled_residual_history))


def _failed_report(cfg, exc):
    nan = math.nan
    K = 1
    try:
        K = make_problem(cfg.problem, **cfg.problem_params).n_components
        cfg = cfg.resolve()[0]
    except Exception:
        pass
    return ErrorReport(cfg, [nan] * K, [nan] * K, nan, 0, 0, nan, nan, nan, [], "error",
                       f"error:{type(exc).__name__}: {exc}".replace("\n", " "))


def _safe_run(cfg, reference=None):
    try:
        return run_experiment(cfg, reference)
    except Exception as exc:  # recorded in the row, the sweep continues
        return _failed_report(cfg, exc)


def run_sweep(configs, compare=None, out=None, plot_data=None):
    """Run configs in order and write one CSV row per run.

    ``compare`` is a pair of solver names; each config then runs once per
    solver and the second row of each pair carries the solve-time ratio.
    Problems without an exact solution are scored against the run with the
    largest J (then Q) of the same problem, whose own error columns are empty.
    Returns ``(header, rows, reports)``.
    """
    configs = list(configs)
    runs = []
    for cfg in configs:
        if compare:
            runs.extend(dataclasses.replace(cfg, solver=s) for s in compare)
        else:
            runs.append(cfg)
    reports = [None] * len(runs)

    # reference runs for problems lacking a closed form
    refs = {}
    for k, cfg in enumerate(runs):
        try:
            rc, prob = cfg.resolve()
        except Exception:
            continue
        if prob.has_exact:
            continue
        key = (cfg.problem, cfg.solver)
        size = (rc.J, np.prod(rc.Q))
        if key not in refs or size > refs[key][0]:
            refs[key] = (size, k)
    for (name, solver), (_, k) in refs.items():
        reports[k] = _safe_run(runs[k])
        sol = reports[k].solution
        refs[(name, solver)] = system_evaluator(*sol) if sol is not None else None
        if sol is not None:
            reports[k].status = "reference" if reports[k].status == "ok" else reports[k].status
    for k, cfg in enumerate(runs):
        if reports[k] is None:
            reports[k] = _safe_run(cfg, refs.get((cfg.problem, cfg.solver)))

    K = max([len(r.relative_l2) for r in reports], default=1)
    header = csv_header(K, bool(compare))
    rows = []
    for k, r in enumerate(reports):
        row = r.row(K)
        if compare:
            speed = ""
            if k % len(compare) == len(compare) - 1:
                base = reports[k - len(compare) + 1]
                if r.solve_seconds and not math.isnan(r.solve_seconds) and not math.isnan(base.solve_seconds):
                    speed = repr(base.solve_seconds / r.solve_seconds)
            row.append(speed)
        rows.append(row)
    if out is not None:
        write_csv(out, header, rows)
    if plot_data is not None:
        write_plot_data(plot_data, reports, K)
    return header, rows, reports


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def write_plot_data(path, reports, K):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["problem", "solver", "J"] + [f"err_l2_c{k}" for k in range(K)])
        for r in reports:
            w.writerow([r.config.problem, r.config.solver, r.config.J]
                       + [_f(v) for v in (list(r.relative_l2) + [math.nan] * K)[:K]])


def row_failed(row, header):
    status = row[header.index("status")]
    return status not in ("ok", "reference")


def paper_scale_configs(problems=None):
    names = problems or list(PAPER_SCALE_ROWS)
    d3 = lambda: (2, 2, 2)
    return [ExperimentConfig(p, N=d3(), Q=(20, 20, 20), J=400) for p in names]


def check_paper_scale(report: ErrorReport, factor: float = 10.0):
    """True when every component error is within ``factor`` of the target value."""
    target = PAPER_SCALE_ROWS[report.config.problem]
    return all(e <= factor * t for e, t in zip(report.relative_l2, target))
