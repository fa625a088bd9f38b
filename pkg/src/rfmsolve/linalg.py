"""Dense randomized linear algebra used by the Newton solvers.

Matrices are plain C-ordered ``float64`` numpy arrays.  The count sketch is
represented by its hash (one bucket and one sign per input row) and is never
formed as a dense ``s x m`` matrix.
"""
from __future__ import annotations

import math
import struct
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.linalg import blas
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from .errors import DimensionMismatch, RankDeficient, SketchTooWide, ZeroRowWarning

RANK_TOL = 1e-12
_MAGIC = b"RFMM"


def sketch_rows(n: int, gamma: float) -> int:
    """Sketch size ``ceil(gamma * n)``, robust to float noise in the product."""
    return int(math.ceil(round(gamma * n, 9)))


@dataclass(frozen=True)
class SketchPlan:
    input_rows: int
    output_rows: int
    bucket: np.ndarray
    sign: np.ndarray
    seed: int

    def operator(self) -> sp.csr_array:
        """Sparse ``s x m`` representation with one nonzero per column."""
        m = self.input_rows
        return sp.csr_array((self.sign, (self.bucket, np.arange(m))),
                            shape=(self.output_rows, m))


def make_sketch_plan(m: int, n: int, gamma: float, seed: int) -> SketchPlan:
    """Draw the bucket/sign hash of a count sketch compressing m rows to ceil(gamma*n).

    The hash comes from a Philox counter-based generator keyed by ``seed`` so
    plans are bit-identical across platforms.
    """
    if m < 1 or n < 1:
        raise ValueError(f"need m >= 1 and n >= 1, got m={m}, n={n}")
    if not gamma > 1:
        raise ValueError(f"oversampling factor must exceed 1, got {gamma}")
    s = sketch_rows(n, gamma)
    if m < s:
        raise SketchTooWide(f"cannot sketch {m} rows down to {s} rows")
    rng = np.random.Generator(np.random.Philox(key=int(seed) % 2**64))
    bucket = rng.integers(0, s, size=m, dtype=np.int64)
    sign = rng.integers(0, 2, size=m).astype(np.float64) * 2.0 - 1.0
    return SketchPlan(m, s, bucket, sign, int(seed))


def apply_count_sketch(plan: SketchPlan, J: np.ndarray) -> np.ndarray:
    """Return S @ J with B[b] = sum over rows i hashed to b of sign(i) * J[i].

    One scatter pass over J; within each bucket rows are summed in increasing
    row order, so the result does not depend on scheduling.
    """
    J = np.asarray(J, dtype=np.float64)
    if J.ndim == 1:
        J = J[:, None]
    if J.shape[0] != plan.input_rows:
        raise DimensionMismatch(
            f"plan expects {plan.input_rows} rows, matrix has {J.shape[0]}")
    return np.asarray(plan.operator() @ J)


def thin_qr(B: np.ndarray, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Upper-triangular factor R (positive diagonal) of a Householder QR of B.

    Raises RankDeficient when min|R_ii| < rank_tol * max|R_jj|.
    """
    B = np.asarray(B, dtype=np.float64)
    m, n = B.shape
    if m < n:
        raise DimensionMismatch(f"thin QR needs rows >= cols, got {B.shape}")
    R = sla.qr(B, mode="r", check_finite=False)[0][:n]
    R = np.triu(R)
    d = np.diag(R)
    signs = np.where(d < 0, -1.0, 1.0)
    R *= signs[:, None]
    _check_diagonal(np.diag(R), rank_tol)
    return R


def _check_diagonal(d: np.ndarray, rank_tol: float) -> None:
    d = np.abs(d)
    if not np.all(np.isfinite(d)):
        raise RankDeficient("non-finite entry on the triangular diagonal")
    big = d.max() if d.size else 0.0
    if big == 0.0 or d.min() <= rank_tol * big:
        ratio = d.min() / big if big else 0.0
        raise RankDeficient(f"diagonal ratio {ratio:.3e} below tolerance {rank_tol:.1e}")


def right_precondition_in_place(J: np.ndarray, R: np.ndarray,
                                rank_tol: float = RANK_TOL) -> np.ndarray:
    """Overwrite J with J @ inv(R) by row-wise triangular solves.

    J must be a C- or F-contiguous float64 array; no second m x n buffer is
    allocated.
    """
    if J.ndim != 2 or J.shape[1] != R.shape[0] or R.shape[0] != R.shape[1]:
        raise DimensionMismatch(f"cannot precondition {J.shape} by {R.shape}")
    if J.dtype != np.float64:
        raise TypeError("J must be float64 to be updated in place")
    _check_diagonal(np.diag(R), rank_tol)
    R = np.asarray(R, dtype=np.float64, order="F")
    if J.flags.c_contiguous:
        # J.T is a Fortran view: J^T <- R^{-T} J^T
        out = blas.dtrsm(1.0, R, J.T, side=0, lower=0, trans_a=1, overwrite_b=1)
        target = J.T
    elif J.flags.f_contiguous:
        out = blas.dtrsm(1.0, R, J, side=1, lower=0, trans_a=0, overwrite_b=1)
        target = J
    else:
        raise ValueError("J must be contiguous to be preconditioned in place")
    if not np.shares_memory(out, J):
        target[...] = out
    return J


def solve_upper(R: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Back-substitution x = inv(R) y."""
    return sla.solve_triangular(R, y, lower=False, check_finite=False)


@dataclass
class LsqrResult:
    solution: np.ndarray
    iterations: int
    final_relative_residual: float
    termination: str  # "tolerance_met" | "max_iterations"


def lsqr(A, b: np.ndarray, eta: float, max_iter: int | None = None) -> LsqrResult:
    """Golub-Kahan LSQR for min ||A y - b||_2 with atol = btol = eta.

    ``A`` is a dense array or anything exposing ``matvec``/``rmatvec``.
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    op = A if isinstance(A, LinearOperator) else aslinearoperator(A)
    m, n = op.shape
    b = np.asarray(b, dtype=np.float64).ravel()
    if b.size != m:
        raise DimensionMismatch(f"rhs has length {b.size}, operator has {m} rows")
    if max_iter is None:
        max_iter = 2 * n
    atol = btol = eta
    eps = np.finfo(float).eps

    x = np.zeros(n)
    beta = np.linalg.norm(b)
    if beta == 0.0:
        return LsqrResult(x, 0, 0.0, "tolerance_met")
    u = b / beta
    v = op.rmatvec(u)
    alpha = np.linalg.norm(v)
    if alpha == 0.0:
        # b is orthogonal to range(A): x = 0 is already optimal
        return LsqrResult(x, 0, 1.0, "tolerance_met")
    v = v / alpha
    w = v.copy()

    phibar, rhobar = beta, alpha
    bnorm = beta
    anorm2 = 0.0
    xxnorm = 0.0
    ddnorm = 0.0
    res = 1.0
    z = 0.0
    cs2, sn2 = -1.0, 0.0
    itn = 0
    termination = "max_iterations"
    while itn < max_iter:
        itn += 1
        u = op.matvec(v) - alpha * u
        beta = np.linalg.norm(u)
        if beta > 0:
            u /= beta
            anorm2 += alpha**2 + beta**2
            v = op.rmatvec(u) - beta * v
            alpha = np.linalg.norm(v)
            if alpha > 0:
                v /= alpha
        else:
            anorm2 += alpha**2

        rho = math.hypot(rhobar, beta)
        cs, sn = rhobar / rho, beta / rho
        theta = sn * alpha
        rhobar = -cs * alpha
        phi = cs * phibar
        phibar = sn * phibar
        tau = sn * phi

        t1, t2 = phi / rho, -theta / rho
        dk = w / rho
        x += t1 * w
        w = v + t2 * w
        ddnorm += dk @ dk

        # running estimate of ||x|| (Paige & Saunders)
        delta = sn2 * rho
        gambar = -cs2 * rho
        rhs = phi - delta * z
        zbar = rhs / gambar
        xnorm = math.sqrt(xxnorm + zbar**2)
        gamma = math.hypot(gambar, theta)
        cs2, sn2 = gambar / gamma, theta / gamma
        z = rhs / gamma
        xxnorm += z**2

        anorm = math.sqrt(anorm2)
        rnorm = phibar
        arnorm = alpha * abs(tau)
        res = rnorm / bnorm
        test2 = arnorm / (anorm * rnorm + eps) if rnorm > 0 else 0.0
        rtol = btol + atol * anorm * xnorm / bnorm
        if res <= rtol or test2 <= atol or 1.0 + res <= 1.0 or 1.0 + test2 <= 1.0:
            termination = "tolerance_met"
            break
        if beta == 0.0 or alpha == 0.0:
            termination = "tolerance_met"
            break
    return LsqrResult(x, itn, float(res), termination)


def row_scale(J: np.ndarray, F: np.ndarray, c: float = 100.0, inplace: bool = False):
    """Scale row i of J and F[i] by c / max_j |J_ij|.

    Rows of J that are identically zero keep a factor of 1 and trigger a
    ZeroRowWarning.  Returns ``(J, F, lam)``.
    """
    if J.shape[0] != np.shape(F)[0]:
        raise DimensionMismatch(f"{J.shape[0]} Jacobian rows vs {np.shape(F)[0]} residuals")
    if not c > 0:
        raise ValueError("scale target c must be positive")
    rowmax = np.abs(J).max(axis=1)
    zero = rowmax == 0.0
    if zero.any():
        warnings.warn(f"{int(zero.sum())} zero Jacobian rows left unscaled",
                      ZeroRowWarning, stacklevel=2)
    lam = np.where(zero, 1.0, c / np.where(zero, 1.0, rowmax))
    if inplace:
        J *= lam[:, None]
        F *= lam
        return J, F, lam
    return J * lam[:, None], np.asarray(F) * lam, lam


def estimate_condition(A: np.ndarray) -> float:
    """sigma_max / sigma_min from a full SVD (test-scale matrices only)."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] < A.shape[1]:
        raise DimensionMismatch(f"need a tall matrix, got {A.shape}")
    s = np.linalg.svd(A, compute_uv=False)
    if s[-1] <= s[0] * max(A.shape) * np.finfo(float).eps:
        raise RankDeficient("matrix is numerically rank deficient")
    return float(s[0] / s[-1])


def save_matrix(path, A: np.ndarray) -> None:
    """Write the 'RFMM' debug dump: magic, u64 rows, u64 cols, f64 LE data."""
    A = np.ascontiguousarray(A, dtype="<f8")
    rows, cols = A.shape
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<QQ", rows, cols))
        fh.write(A.tobytes())


def load_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError(f"{path} is not an RFMM matrix dump")
        rows, cols = struct.unpack("<QQ", fh.read(16))
        data = np.frombuffer(fh.read(8 * rows * cols), dtype="<f8")
    if data.size != rows * cols:
        raise ValueError(f"{path} is truncated")
    return data.reshape(rows, cols).astype(np.float64)
