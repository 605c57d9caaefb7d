"""Static eigensolver and bordered-system solver tests.

Oracles are independent of the implementation: closed-form 2x2
eigenvalues, characteristic-polynomial roots for 3x3, and numpy's
general solver for linear systems.
"""

import numpy as np
import pytest

from eigentrack import densela
from eigentrack.densela import (AsymmetryError, JacobiConvergenceError,
                                MatrixShapeError, solve, solve_augmented,
                                solve_batch, sym_eig, sym_eig_batch)
from eigentrack.flows import builtin_flows


def random_symmetric(rng, n, scale=1.0):
    M = rng.standard_normal((n, n)) * scale
    return (M + M.T) / 2.0


# ------------------------------------------------------------------ sym_eig

def test_identity_decomposition():
    dec = sym_eig(np.eye(3))
    assert np.array_equal(dec.eigenvalues, np.ones(3))
    assert np.array_equal(dec.eigenvectors, np.eye(3))


def test_diagonal_matrix_sorted_and_signed():
    dec = sym_eig(np.diag([3.0, 1.0, 2.0]))
    assert np.array_equal(dec.eigenvalues, np.array([1.0, 2.0, 3.0]))
    want = np.zeros((3, 3))
    want[1, 0] = want[2, 1] = want[0, 2] = 1.0   # e2, e3, e1 columns
    assert np.array_equal(dec.eigenvectors, want)


def test_two_by_two_closed_form(rng):
    for _ in range(25):
        a, b, c = rng.standard_normal(3) * 3.0
        A = np.array([[a, b], [b, c]])
        mid, rad = (a + c) / 2.0, np.hypot((a - c) / 2.0, b)
        dec = sym_eig(A)
        assert dec.eigenvalues == pytest.approx([mid - rad, mid + rad],
                                                abs=1e-12)
        R = A @ dec.eigenvectors - dec.eigenvectors * dec.eigenvalues
        assert np.abs(R).max() < 1e-12


def test_three_by_three_characteristic_polynomial(rng):
    for _ in range(10):
        A = random_symmetric(rng, 3, scale=2.0)
        tr = np.trace(A)
        m2 = (A[0, 0] * A[1, 1] - A[0, 1] ** 2
              + A[0, 0] * A[2, 2] - A[0, 2] ** 2
              + A[1, 1] * A[2, 2] - A[1, 2] ** 2)
        det = np.linalg.det(A)
        roots = np.sort(np.roots([1.0, -tr, m2, -det]).real)
        dec = sym_eig(A)
        assert dec.eigenvalues == pytest.approx(roots, abs=1e-9)


def test_benchmark_matrix_invariants():
    A = builtin_flows()["A_s"].sample(0.7)
    dec = sym_eig(A)
    V, w = dec.eigenvectors, dec.eigenvalues
    n = A.shape[0]
    assert np.linalg.norm(V.T @ V - np.eye(n)) <= 1e-10
    assert np.linalg.norm(A @ V - V * w) <= 1e-10 * max(1.0, np.linalg.norm(A))
    assert np.linalg.norm(V * w @ V.T - A) <= 1e-9
    assert (np.diff(w) >= 0).all()


def test_eigenvector_sign_convention(rng):
    # largest-magnitude component of every eigenvector is positive
    A = random_symmetric(rng, 5)
    V = sym_eig(A).eigenvectors
    for i in range(5):
        col = V[:, i]
        assert col[np.argmax(np.abs(col))] > 0


def test_asymmetric_input_rejected():
    M = np.array([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(AsymmetryError):
        sym_eig(M)


def test_bad_shapes_rejected():
    with pytest.raises(MatrixShapeError):
        sym_eig(np.ones((2, 3)))
    with pytest.raises(MatrixShapeError):
        sym_eig_batch(np.ones((4, 4)))


def test_batch_equals_scalar(rng):
    As = np.stack([random_symmetric(rng, 4) for _ in range(6)])
    w_b, V_b = sym_eig_batch(As)
    for i in range(6):
        dec = sym_eig(As[i])
        assert np.array_equal(w_b[i], dec.eigenvalues)
        assert np.array_equal(V_b[i], dec.eigenvectors)


def test_batch_with_mixed_difficulty(rng):
    # a nearly diagonal member must not perturb a generic one
    easy = np.diag([1.0, 2.0, 3.0])
    hard = random_symmetric(rng, 3)
    w_b, V_b = sym_eig_batch(np.stack([easy, hard]))
    assert np.array_equal(w_b[0], np.array([1.0, 2.0, 3.0]))
    assert np.linalg.norm(hard @ V_b[1] - V_b[1] * w_b[1]) < 1e-10


# -------------------------------------------------------------------- solve

def test_solve_well_conditioned(rng):
    for _ in range(20):
        P = rng.standard_normal((5, 5)) + 5.0 * np.eye(5)
        q = rng.standard_normal(5)
        rep = solve(P, q)
        assert rep.method == "direct"
        assert 0.0 < rep.rpr <= 1.0
        assert rep.x == pytest.approx(np.linalg.solve(P, q), rel=1e-9)


def test_solve_singular_minimum_norm():
    rep = solve(np.diag([1.0, 0.0]), np.array([3.0, 0.0]))
    assert rep.method == "least-squares"
    assert rep.x == pytest.approx([3.0, 0.0], abs=1e-12)


def test_solve_singular_inconsistent_rhs():
    # unsatisfiable second row: least-squares keeps the consistent part
    rep = solve(np.diag([1.0, 0.0]), np.array([3.0, 5.0]))
    assert rep.method == "least-squares"
    assert rep.x == pytest.approx([3.0, 0.0], abs=1e-12)


def test_solve_augmented_zero_rows():
    rep = solve_augmented(np.diag([1.0, 0.0]), np.array([3.0, 0.0]))
    assert rep.method == "least-squares"
    assert rep.x == pytest.approx([3.0, 0.0], abs=1e-12)
    assert rep.rpr < 1e-12


def test_solve_batch_matches_scalar(rng):
    Ps = np.stack([rng.standard_normal((4, 4)) + 4.0 * np.eye(4)
                   for _ in range(5)])
    qs = rng.standard_normal((5, 4))
    reports = solve_batch(Ps, qs)
    for i, rep in enumerate(reports):
        single = solve(Ps[i], qs[i])
        assert np.array_equal(rep.x, single.x)
        assert rep.method == single.method


def test_solve_batch_mixed_singular(rng):
    good = rng.standard_normal((3, 3)) + 3.0 * np.eye(3)
    bad = np.zeros((3, 3))
    bad[0, 0] = 1.0
    Ps = np.stack([good, bad])
    qs = np.stack([np.ones(3), np.array([2.0, 0.0, 0.0])])
    reports = solve_batch(Ps, qs)
    assert reports[0].method == "direct"
    assert reports[1].method == "least-squares"
    assert reports[0].x == pytest.approx(np.linalg.solve(good, np.ones(3)),
                                         rel=1e-9)
    assert reports[1].x == pytest.approx([2.0, 0.0, 0.0], abs=1e-12)


def test_solve_shape_errors():
    with pytest.raises(MatrixShapeError):
        solve(np.ones((2, 3)), np.ones(2))
    with pytest.raises(MatrixShapeError):
        solve(np.eye(3), np.ones(4))
    with pytest.raises(MatrixShapeError):
        solve_batch(np.ones((2, 3, 3)), np.ones((3, 3)))


def test_norm_helpers():
    assert densela.fro_norm(np.array([[3.0, 0.0], [0.0, 4.0]])) == 5.0
    assert densela.two_norm(np.array([3.0, 4.0])) == 5.0
