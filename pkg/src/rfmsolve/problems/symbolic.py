"""Symbolic problem model.

Interior operators are written in *slot form*: sympy expressions in the
coordinates and in symbols standing for partial derivatives of each solution
component (``u0_000`` is component 0, ``u0_200`` its second x derivative).
Slot partials come from ``sympy.diff`` and everything is lambdified once.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import sympy as sp

from ..errors import NoExactSolution
from .geometry import Geometry


def slot_symbol(q: int, alpha) -> sp.Symbol:
    return sp.Symbol(f"u{q}_" + "".join(str(int(a)) for a in alpha))


def parse_slot(sym: sp.Symbol):
    q, a = sym.name[1:].split("_")
    return int(q), tuple(int(c) for c in a)


class SlotFactory:
    """``S(q, 'xx')`` gives the slot of d^2 u_q / dx^2 for named axes."""

    def __init__(self, axis_names):
        self.axis_names = tuple(axis_names)

    def __call__(self, q: int, axes: str = ""):
        alpha = [0] * len(self.axis_names)
        for ch in axes:
            alpha[self.axis_names.index(ch)] += 1
        return slot_symbol(q, alpha)


def _lambdify(coords, args, expr):
    f = sp.lambdify(list(coords) + list(args), expr, modules="numpy")

    def call(points, *vals):
        cols = [points[:, k] for k in range(points.shape[1])]
        out = f(*cols, *vals)
        return np.broadcast_to(np.asarray(out, dtype=np.float64), (points.shape[0],)).copy()
    return call


@dataclass
class BoundaryCondition:
    component: int
    alpha: tuple
    value: Callable  # points -> (P,)


@dataclass
class PdeProblem:
    name: str
    coords: tuple                 # sympy symbols, time last when present
    box: np.ndarray
    time_axis: int | None
    n_components: int
    component_names: tuple
    equations: list               # slot-form operator per equation
    operator_orders: tuple        # highest derivative order per axis
    geometry: Geometry
    exact: list | None            # sympy expressions per component
    natural: Callable | None      # (list of exprs, coords) -> list of operator exprs
    constant_source: list | None = None  # used when there is no exact solution
    condition_map: dict = field(default_factory=dict)  # tag -> [(q, alpha)]
    boundary_values: dict | None = None  # (q, alpha) -> sympy expr, overrides exact
    defaults: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.box = np.asarray(self.box, dtype=np.float64)
        self.dim = len(self.coords)
        self.slots = sorted({s for e in self.equations for s in e.free_symbols
                             if s not in self.coords}, key=lambda s: s.name)
        self._op = [_lambdify(self.coords, self.slots, e) for e in self.equations]
        self._dop = [[(parse_slot(s), _lambdify(self.coords, self.slots, sp.diff(e, s)))
                      for s in self.slots if sp.diff(e, s) != 0]
                     for e in self.equations]
        if self.exact is not None:
            lhs = self.natural(list(self.exact), self.coords)
            self.source_exprs = list(lhs)
        elif self.constant_source is not None:
            self.source_exprs = [sp.sympify(c) for c in self.constant_source]
        else:
            raise ValueError("need an exact solution or a constant source")
        self._src = [_lambdify(self.coords, [], e) for e in self.source_exprs]
        self._exact_cache = {}

    # --- interior operator -------------------------------------------------
    @property
    def slot_keys(self):
        return [parse_slot(s) for s in self.slots]

    @property
    def n_equations(self):
        return len(self.equations)

    def operator(self, e: int, points, slot_vals):
        return self._op[e](points, *slot_vals)

    def operator_partials(self, e: int, points, slot_vals):
        """[((q, alpha), d op_e / d slot)] for the slots op_e depends on."""
        return [(key, fn(points, *slot_vals)) for key, fn in self._dop[e]]

    def source(self, points):
        pts = np.atleast_2d(points)
        return np.stack([f(pts) for f in self._src])

    # --- exact solution ----------------------------------------------------
    @property
    def has_exact(self):
        return self.exact is not None

    def exact_derivative(self, q: int, alpha, points):
        if self.exact is None:
            raise NoExactSolution(f"{self.name} has no closed-form solution")
        key = (q, tuple(alpha))
        if key not in self._exact_cache:
            expr = self.exact[q]
            for c, k in zip(self.coords, alpha):
                if k:
                    expr = sp.diff(expr, c, k)
            self._exact_cache[key] = _lambdify(self.coords, [], expr)
        return self._exact_cache[key](np.atleast_2d(points))

    def exact_slots(self, points):
        """Slot values of the exact solution, ordered as ``self.slots``."""
        return [self.exact_derivative(q, a, points) for q, a in self.slot_keys]

    # --- boundary ----------------------------------------------------------
    def conditions(self, tag: str):
        """Boundary conditions (component, multi-index, data) for a tag."""
        zero = (0,) * self.dim
        pairs = self.condition_map.get(tag)
        if pairs is None:
            pairs = [(q, zero) for q in range(self.n_components)]
        out = []
        for q, alpha in pairs:
            if self.boundary_values is not None and (q, alpha) in self.boundary_values:
                fn = _lambdify(self.coords, [], self.boundary_values[(q, alpha)])
            else:
                fn = (lambda q_, a_: (lambda p: self.exact_derivative(q_, a_, p)))(q, alpha)
            out.append(BoundaryCondition(q, tuple(alpha), fn))
        return out

    def max_order(self):
        return max(self.operator_orders)


def manufactured_source(problem: PdeProblem, p):
    """Source term at p, from the operator applied analytically to the exact
    solution (or the problem's constant right-hand side)."""
    pts = np.atleast_2d(np.asarray(p, dtype=np.float64))
    out = problem.source(pts)
    return out[:, 0] if np.ndim(p) == 1 else out
