"""Benchmark problems, geometries and manufactured sources."""
from .catalog import CATALOG, make_problem
from .symbolic import PdeProblem, manufactured_source

PROBLEM_NAMES = tuple(CATALOG)
