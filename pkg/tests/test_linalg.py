import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rfmsolve import linalg
from rfmsolve.errors import DimensionMismatch, RankDeficient, SketchTooWide, ZeroRowWarning
from oracles import dense_sketch, matrix_with_condition


# --- count sketch ---------------------------------------------------------

def test_sketch_size_for_gamma_three():
    plan = linalg.make_sketch_plan(100, 10, 3.0, 7)
    assert plan.output_rows == 30
    assert plan.bucket.shape == (100,) and plan.sign.shape == (100,)


def test_small_plan_ranges():
    plan = linalg.make_sketch_plan(4, 1, 2.0, 0)
    assert plan.output_rows == 2
    assert set(plan.bucket) <= {0, 1}
    assert set(plan.sign) <= {-1.0, 1.0}


def test_sketch_too_wide():
    with pytest.raises(SketchTooWide):
        linalg.make_sketch_plan(5, 3, 3.0, 0)


def test_sketch_rows_ignores_float_noise():
    # 1.1 * 10 is 11.000000000000002 in floating point
    assert linalg.sketch_rows(10, 1.1) == 11
    assert linalg.sketch_rows(100, 3.0) == 300


def test_plan_is_reproducible():
    a = linalg.make_sketch_plan(500, 40, 3.0, 11)
    b = linalg.make_sketch_plan(500, 40, 3.0, 11)
    c = linalg.make_sketch_plan(500, 40, 3.0, 12)
    assert np.array_equal(a.bucket, b.bucket) and np.array_equal(a.sign, b.sign)
    assert not np.array_equal(a.bucket, c.bucket)


def test_identity_sketch():
    J = np.random.default_rng(0).standard_normal((6, 3))
    plan = linalg.SketchPlan(6, 6, np.arange(6), np.ones(6), 0)
    assert np.array_equal(linalg.apply_count_sketch(plan, J), J)


def test_hand_built_sketch_of_identity():
    plan = linalg.SketchPlan(4, 2, np.array([0, 1, 0, 1]), np.array([1.0, -1.0, 1.0, 1.0]), 0)
    B = linalg.apply_count_sketch(plan, np.eye(4))
    assert np.array_equal(B, [[1, 0, 1, 0], [0, -1, 0, 1]])


def test_sketch_matches_dense_operator():
    rng = np.random.default_rng(3)
    J = rng.standard_normal((200, 20))
    plan = linalg.make_sketch_plan(200, 20, 3.0, 5)
    np.testing.assert_allclose(linalg.apply_count_sketch(plan, J), dense_sketch(plan) @ J,
                               rtol=1e-14, atol=1e-14)


def test_sketch_row_mismatch():
    plan = linalg.make_sketch_plan(40, 4, 3.0, 0)
    with pytest.raises(DimensionMismatch):
        linalg.apply_count_sketch(plan, np.zeros((39, 4)))


def test_isometry_in_expectation():
    x = np.random.default_rng(1).standard_normal(300)
    vals = [np.sum(linalg.apply_count_sketch(linalg.make_sketch_plan(300, 10, 3.0, s), x) ** 2)
            for s in range(200)]
    assert abs(np.mean(vals) / np.sum(x**2) - 1) < 0.05


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32), a=st.floats(-10, 10), b=st.floats(-10, 10))
def test_sketch_is_linear(seed, a, b):
    rng = np.random.default_rng(seed)
    J1, J2 = rng.standard_normal((90, 5)), rng.standard_normal((90, 5))
    plan = linalg.make_sketch_plan(90, 5, 3.0, seed)
    lhs = linalg.apply_count_sketch(plan, a * J1 + b * J2)
    rhs = a * linalg.apply_count_sketch(plan, J1) + b * linalg.apply_count_sketch(plan, J2)
    scale = max(1.0, np.abs(lhs).max())
    assert np.abs(lhs - rhs).max() <= 1e-13 * scale * 10


# --- QR and preconditioning ------------------------------------------------

def test_qr_of_identity():
    np.testing.assert_allclose(linalg.thin_qr(np.eye(3)), np.eye(3), atol=1e-15)


def test_qr_hand_example():
    R = linalg.thin_qr(np.array([[3.0, 0], [4, 0], [0, 1]]))
    np.testing.assert_allclose(R, [[5, 0], [0, 1]], atol=1e-14)


def test_qr_duplicated_column():
    A = np.random.default_rng(0).standard_normal((10, 3))
    A[:, 2] = A[:, 0]
    with pytest.raises(RankDeficient):
        linalg.thin_qr(A)


def test_qr_wide_input():
    with pytest.raises(DimensionMismatch):
        linalg.thin_qr(np.zeros((2, 3)))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32), m=st.integers(8, 60), n=st.integers(1, 8))
def test_qr_reconstruction(seed, m, n):
    B = np.random.default_rng(seed).standard_normal((m, n))
    R = linalg.thin_qr(B)
    assert np.all(np.diag(R) > 0)
    assert np.allclose(R, np.triu(R))
    Q = np.linalg.solve(R.T, B.T).T
    assert np.abs(Q.T @ Q - np.eye(n)).max() <= 1e-12
    assert np.abs(Q @ R - B).max() <= 1e-10 * np.abs(B).max()


def test_precondition_identity_and_diagonal():
    J = np.array([[2.0, 2.0]])
    out = linalg.right_precondition_in_place(J.copy(), np.eye(2))
    np.testing.assert_array_equal(out, [[2.0, 2.0]])
    J = np.array([[2.0, 2.0]])
    linalg.right_precondition_in_place(J, np.array([[2.0, 0], [0, 1]]))
    np.testing.assert_allclose(J, [[1.0, 2.0]])


def test_precondition_is_in_place_for_both_layouts():
    rng = np.random.default_rng(2)
    R = np.triu(rng.standard_normal((5, 5))) + 5 * np.eye(5)
    for order in "CF":
        J = np.array(rng.standard_normal((12, 5)), order=order)
        ref = J @ np.linalg.inv(R)
        out = linalg.right_precondition_in_place(J, R)
        assert out is J
        np.testing.assert_allclose(J, ref, rtol=1e-12, atol=1e-12)


def test_precondition_errors():
    with pytest.raises(DimensionMismatch):
        linalg.right_precondition_in_place(np.zeros((3, 2)), np.eye(3))
    with pytest.raises(RankDeficient):
        linalg.right_precondition_in_place(np.ones((3, 2)), np.diag([1.0, 0.0]))


def test_sketched_preconditioner_orthonormalises_sketch():
    rng = np.random.default_rng(4)
    J = rng.standard_normal((300, 60))
    plan = linalg.make_sketch_plan(300, 60, 3.0, 1)
    R = linalg.thin_qr(linalg.apply_count_sketch(plan, J))
    Jt = linalg.right_precondition_in_place(J.copy(), R)
    Q = linalg.apply_count_sketch(plan, Jt)
    assert np.abs(Q.T @ Q - np.eye(60)).max() <= 1e-10


def test_preconditioned_condition_number_is_independent_of_kappa():
    # kappa(J R^-1) = kappa(S Q) for Q an orthonormal basis of range(J); for an
    # s x n random embedding it concentrates near (1 + 1/sqrt(g)) / (1 - 1/sqrt(g))
    g = 3.0
    predicted = (1 + g**-0.5) / (1 - g**-0.5)
    for kappa in (1e2, 1e8):
        vals = []
        for seed in range(10):
            rng = np.random.default_rng(100 + seed)
            J = matrix_with_condition(rng, 500, 100, kappa)
            plan = linalg.make_sketch_plan(500, 100, g, seed)
            R = linalg.thin_qr(linalg.apply_count_sketch(plan, J), rank_tol=0.0)
            vals.append(linalg.estimate_condition(linalg.right_precondition_in_place(J, R, 0.0)))
        assert abs(np.median(vals) / predicted - 1) < 0.15


# --- LSQR ------------------------------------------------------------------

def test_lsqr_identity():
    res = linalg.lsqr(np.eye(3), np.array([1.0, 2, 3]), 1e-12)
    np.testing.assert_allclose(res.solution, [1, 2, 3], rtol=1e-12)
    assert res.iterations <= 2


def test_lsqr_hand_example():
    A = np.array([[1.0, 0], [0, 1], [1, 1]])
    res = linalg.lsqr(A, np.ones(3), 1e-12)
    np.testing.assert_allclose(res.solution, [2 / 3, 2 / 3], rtol=1e-12)


def test_lsqr_zero_rhs():
    res = linalg.lsqr(np.ones((4, 2)), np.zeros(4), 1e-8)
    assert res.iterations == 0 and not res.solution.any()


def test_lsqr_iteration_cap():
    A = matrix_with_condition(np.random.default_rng(0), 80, 40, 1e6)
    res = linalg.lsqr(A, np.ones(80), 1e-14, max_iter=3)
    assert res.iterations == 3 and res.termination == "max_iterations"


def test_lsqr_rejects_bad_inputs():
    with pytest.raises(ValueError):
        linalg.lsqr(np.eye(2), np.ones(2), 0.0)
    with pytest.raises(DimensionMismatch):
        linalg.lsqr(np.eye(2), np.ones(3), 1e-6)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32), m=st.integers(1, 200), n=st.integers(1, 50))
def test_lsqr_matches_pseudoinverse(seed, m, n):
    n = min(n, m)
    rng = np.random.default_rng(seed)
    A, b = rng.standard_normal((m, n)), rng.standard_normal(m)
    x = linalg.lsqr(A, b, 1e-12, 10 * n).solution
    ref = np.linalg.pinv(A) @ b
    assert np.linalg.norm(x - ref) <= 1e-8 * max(np.linalg.norm(ref), 1e-300)


# --- row scaling -----------------------------------------------------------

def test_row_scale_formula():
    J, F, lam = linalg.row_scale(np.array([[0.5, -2.0, 1.0]]), np.array([1.0]), 100.0)
    assert lam[0] == 50.0
    np.testing.assert_array_equal(J, [[25.0, -100.0, 50.0]])
    assert F[0] == 50.0


def test_row_scale_fixed_point():
    J = np.array([[100.0, 3.0], [-1.0, -100.0]])
    out, F, lam = linalg.row_scale(J, np.ones(2))
    np.testing.assert_array_equal(out, J)
    np.testing.assert_array_equal(lam, 1.0)


def test_row_scale_zero_row_warns():
    with pytest.warns(ZeroRowWarning):
        J, F, lam = linalg.row_scale(np.array([[0.0, 0.0], [1.0, 2.0]]), np.array([3.0, 1.0]))
    assert lam[0] == 1.0 and F[0] == 3.0


def test_row_scale_in_place():
    J, F = np.array([[2.0, 4.0]]), np.array([1.0])
    out, Fo, _ = linalg.row_scale(J, F, inplace=True)
    assert out is J and Fo is F and J[0, 1] == 100.0


def test_scaled_minimiser_equals_weighted_oracle():
    rng = np.random.default_rng(5)
    J, F = rng.standard_normal((20, 5)) * rng.uniform(0.01, 100, (20, 1)), rng.standard_normal(20)
    Js, Fs, lam = linalg.row_scale(J, F)
    x = np.linalg.lstsq(Js, -Fs, rcond=None)[0]
    W = np.diag(lam**2)
    ref = np.linalg.solve(J.T @ W @ J, -J.T @ W @ F)
    np.testing.assert_allclose(x, ref, rtol=1e-10, atol=1e-12)


def test_row_scale_all_rows_reach_target():
    J = np.random.default_rng(6).standard_normal((30, 7))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        out, _, _ = linalg.row_scale(J, np.zeros(30), 7.0)
    np.testing.assert_allclose(np.abs(out).max(axis=1), 7.0, rtol=1e-15)


# --- condition estimate and dumps ------------------------------------------

def test_condition_examples():
    assert linalg.estimate_condition(np.eye(4)) == pytest.approx(1.0)
    A = np.zeros((4, 2))
    A[0, 0], A[1, 1] = 10.0, 1.0
    assert linalg.estimate_condition(A) == pytest.approx(10.0)
    rng = np.random.default_rng(0)
    U, _ = np.linalg.qr(rng.standard_normal((6, 2)))
    V, _ = np.linalg.qr(rng.standard_normal((2, 2)))
    assert linalg.estimate_condition(U @ np.diag([1, 1e-8]) @ V.T) == pytest.approx(1e8, rel=0.01)
    with pytest.raises(RankDeficient):
        linalg.estimate_condition(np.ones((3, 2)))


def test_matrix_dump_roundtrip(tmp_path):
    A = np.random.default_rng(0).standard_normal((7, 3))
    path = tmp_path / "a.rfmm"
    linalg.save_matrix(path, A)
    raw = path.read_bytes()
    assert raw[:4] == b"RFMM" and int.from_bytes(raw[4:12], "little") == 7
    assert len(raw) == 4 + 16 + 8 * 21
    np.testing.assert_array_equal(linalg.load_matrix(path), A)
    (tmp_path / "bad").write_bytes(b"XXXX")
    with pytest.raises(ValueError):
        linalg.load_matrix(tmp_path / "bad")
