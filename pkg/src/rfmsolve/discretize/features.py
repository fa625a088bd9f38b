"""Random tanh features on normalized subdomain coordinates."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import OrderTooHigh
from .partition import Partition


@dataclass(frozen=True)
class FeatureBank:
    J: int
    R: float
    seed: int
    weights: np.ndarray  # (M, J, d)
    biases: np.ndarray   # (M, J)
    activation: str = "tanh"


def sample_features(partition: Partition, J: int, R: float = 1.0, seed: int = 0) -> FeatureBank:
    """Draw k_ij and b_ij uniformly from [-R, R], one generator per subdomain."""
    if J < 1:
        raise ValueError("need at least one feature per subdomain")
    if not R > 0:
        raise ValueError("feature range R must be positive")
    d = partition.dim
    W = np.empty((partition.n_sub, J, d))
    B = np.empty((partition.n_sub, J))
    for i in range(partition.n_sub):
        rng = np.random.default_rng([int(seed), i])
        W[i] = rng.uniform(-R, R, size=(J, d))
        B[i] = rng.uniform(-R, R, size=J)
    return FeatureBank(J, float(R), int(seed), W, B)


def tanh_derivatives(z, order: int):
    """[t, t', t'', t'''][:order + 1] for t = tanh(z)."""
    t = np.tanh(z)
    out = [t]
    if order >= 1:
        t1 = 1.0 - t * t
        out.append(t1)
    if order >= 2:
        t2 = -2.0 * t * t1
        out.append(t2)
    if order >= 3:
        out.append(-2.0 * (t1 * t1 + t * t2))
    return out


def multi_indices(d: int, max_order: int):
    """All multi-indices of total order <= max_order, graded."""
    out = []
    for k in range(max_order + 1):
        out.extend(a for a in itertools.product(range(k + 1), repeat=d) if sum(a) == k)
    return out


def eval_basis(bank: FeatureBank, partition: Partition, sub: int, x, orders):
    """Values and partials of the J features of one subdomain at points x.

    Returns a dict mapping each requested multi-index to a (P, J) array.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    orders = [tuple(int(v) for v in a) for a in orders]
    top = max((sum(a) for a in orders), default=0)
    if top > 3:
        raise OrderTooHigh(f"derivative order {top} requested, at most 3 supported")
    mu, sig = partition.centers[sub], partition.half_widths[sub]
    K = bank.weights[sub]  # (J, d)
    z = ((x - mu) / sig) @ K.T + bank.biases[sub]
    tders = tanh_derivatives(z, top)
    scaled = K / sig  # chain-rule factor k_j / sigma_j per axis
    out = {}
    for a in orders:
        fac = np.ones(bank.J)
        for ax, p in enumerate(a):
            if p:
                fac = fac * scaled[:, ax] ** p
        out[a] = tders[sum(a)] * fac
    return out
