"""Dense linear algebra kernels used by the predictor.

Three jobs: a symmetric eigensolver (cyclic threshold Jacobi) for startup
and restart eigendata, a partial-pivoting LU solve for the bordered
per-pair systems, and a minimum-norm least-squares fallback for the near
singular ones.  The Jacobi and LU routines are written batch-first --
operating on a stack of matrices along the leading axis -- because the
harness decomposes tens of thousands of small matrices per scenario; the
single-matrix entry points are the batch routines applied to a stack of
one, so both paths produce identical floating-point results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "EigenDecomposition",
    "LinearSolveReport",
    "MatrixShapeError",
    "AsymmetryError",
    "JacobiConvergenceError",
    "sym_eig",
    "sym_eig_batch",
    "solve",
    "solve_batch",
    "solve_augmented",
    "fro_norm",
    "two_norm",
]


class MatrixShapeError(ValueError):
    pass


class AsymmetryError(ValueError):
    pass


class JacobiConvergenceError(RuntimeError):
    pass


@dataclass
class EigenDecomposition:
    """Eigenvalues sorted ascending; column i of ``eigenvectors`` pairs
    with ``eigenvalues[i]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass
class LinearSolveReport:
    """Solution plus how it was obtained.

    ``method`` is "direct" (LU with partial pivoting) or "least-squares"
    (minimum-norm solution of the zero-row-augmented system).  ``rpr`` is
    the reciprocal pivot ratio min|pivot|/max|pivot| for the direct path,
    or the reciprocal singular-value ratio for the fallback -- a crude,
    dimensionless conditioning indicator.
    """

    x: np.ndarray
    method: str
    rpr: float


def fro_norm(M) -> float:
    return float(np.linalg.norm(np.asarray(M, dtype=float)))


def two_norm(v) -> float:
    return float(np.linalg.norm(np.asarray(v, dtype=float).ravel()))


_STOP_REL = 1e-14      # sweep until off(B) <= _STOP_REL * ||A||_F
_ASYM_REL = 1e-12
_MAX_SWEEPS = 40
_PIVOT_REL = 1e-12     # smallest acceptable pivot, relative to ||P||_F


def _offdiag_norm(W):
    # summed directly from the off-diagonal entries: the subtraction
    # ||W||^2 - ||diag||^2 would drown a converged matrix's tiny true
    # off-norm in cancellation noise of order eps*||W||^2
    n = W.shape[1]
    off = W.copy()
    off[:, np.arange(n), np.arange(n)] = 0.0
    return np.sqrt((off * off).sum(axis=(1, 2)))


def sym_eig_batch(As, max_sweeps: int = _MAX_SWEEPS):
    """Cyclic threshold Jacobi on a stack of symmetric matrices.

    Returns ``(w, V)`` with ``w`` of shape (B, n) ascending per matrix and
    ``V`` of shape (B, n, n), columns sign-normalized so the entry of
    largest magnitude in each eigenvector is positive.  All matrices are
    swept in lockstep; one that has already converged receives identity
    rotations, so each result is independent of what shares the stack.
    """
    As = np.asarray(As, dtype=float)
    if As.ndim != 3 or As.shape[1] != As.shape[2]:
        raise MatrixShapeError(f"expected a (B, n, n) stack, got {As.shape}")
    B, n, _ = As.shape
    norms = np.sqrt((As * As).sum(axis=(1, 2)))
    asym = np.sqrt(((As - As.transpose(0, 2, 1)) ** 2).sum(axis=(1, 2)))
    if np.any(asym > _ASYM_REL * norms):
        raise AsymmetryError("input is not symmetric to working tolerance")

    work = As.copy()
    V = np.zeros_like(work)
    V[:, np.arange(n), np.arange(n)] = 1.0
    stop = _STOP_REL * norms
    # when every pivot is below this, the off-diagonal norm is below stop,
    # so skipping them cannot stall convergence
    skip = stop / (2.0 * n * n)

    done = _offdiag_norm(work) <= stop
    sweeps = 0
    while not done.all():
        if sweeps >= max_sweeps:
            raise JacobiConvergenceError(
                f"no convergence in {max_sweeps} sweeps; defective input?")
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[:, p, q]
                active = (~done) & (np.abs(apq) > skip)
                if not active.any():
                    continue
                app = work[:, p, p]
                aqq = work[:, q, q]
                denom = np.where(active, apq, 1.0)
                theta = (aqq - app) / (2.0 * denom)
                t = np.where(theta >= 0, 1.0, -1.0) / (
                    np.abs(theta) + np.sqrt(1.0 + theta * theta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                c = np.where(active, c, 1.0)[:, None]
                s = np.where(active, s, 0.0)[:, None]
                rp = work[:, p, :].copy()
                rq = work[:, q, :]
                work[:, p, :] = c * rp - s * rq
                work[:, q, :] = s * rp + c * rq
                cp = work[:, :, p].copy()
                cq = work[:, :, q]
                work[:, :, p] = c * cp - s * cq
                work[:, :, q] = s * cp + c * cq
                vp = V[:, :, p].copy()
                vq = V[:, :, q]
                V[:, :, p] = c * vp - s * vq
                V[:, :, q] = s * vp + c * vq
        sweeps += 1
        done = _offdiag_norm(work) <= stop

    w = work[:, np.arange(n), np.arange(n)].copy()
    order = np.argsort(w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    V = np.take_along_axis(V, order[:, None, :], axis=2)
    # deterministic signs: largest-magnitude entry of each column positive
    peak = np.argmax(np.abs(V), axis=1)                      # (B, n)
    peak_vals = np.take_along_axis(V, peak[:, None, :], axis=1)[:, 0, :]
    V = V * np.where(peak_vals < 0.0, -1.0, 1.0)[:, None, :]
    return w, V


def sym_eig(A, max_sweeps: int = _MAX_SWEEPS) -> EigenDecomposition:
    """Decompose one symmetric matrix; see sym_eig_batch."""
    w, V = sym_eig_batch(np.asarray(A, dtype=float)[None], max_sweeps=max_sweeps)
    return EigenDecomposition(eigenvalues=w[0], eigenvectors=V[0])


def solve_augmented(P, q) -> LinearSolveReport:
    """Minimum-norm least-squares solve of the zero-row-augmented system.

    One all-zero row is appended to P (and a zero entry to q) and the
    resulting rectangular system is solved in the least-squares sense via
    the SVD.  For nonsingular P this agrees with the direct solve; for
    singular P it picks the minimum-norm solution, which keeps the
    predictor finite through exact eigenvalue collisions.
    """
    P = np.asarray(P, dtype=float)
    q = np.asarray(q, dtype=float).ravel()
    m = P.shape[0]
    if P.shape != (m, m) or q.shape != (m,):
        raise MatrixShapeError(f"bad shapes {P.shape}, {q.shape}")
    Pa = np.vstack([P, np.zeros((1, m))])
    qa = np.append(q, 0.0)
    x, _, _, sv = np.linalg.lstsq(Pa, qa, rcond=None)
    rpr = float(sv[-1] / sv[0]) if sv.size and sv[0] > 0 else 0.0
    return LinearSolveReport(x=x, method="least-squares", rpr=rpr)


def solve_batch(Ps, qs, pivot_rel: float = _PIVOT_REL):
    """Row-pivoted Gaussian elimination on a stack of square systems.

    Forward-eliminates the augmented matrices [P | q] in lockstep, then
    back-substitutes.  Any system whose smallest pivot falls to or below
    ``pivot_rel * ||P||_F`` is handed to solve_augmented instead.  Returns
    a list of LinearSolveReport, one per system.
    """
    Ps = np.asarray(Ps, dtype=float)
    qs = np.asarray(qs, dtype=float)
    if Ps.ndim != 3 or Ps.shape[1] != Ps.shape[2]:
        raise MatrixShapeError(f"expected a (B, m, m) stack, got {Ps.shape}")
    B, m, _ = Ps.shape
    if qs.shape != (B, m):
        raise MatrixShapeError(f"rhs shape {qs.shape} does not match {Ps.shape}")

    aug = np.concatenate([Ps, qs[:, :, None]], axis=2)
    thresh = pivot_rel * np.sqrt((Ps * Ps).sum(axis=(1, 2)))
    flagged = np.zeros(B, dtype=bool)
    minpiv = np.full(B, np.inf)
    maxpiv = np.zeros(B)
    safe_diag = np.empty((B, m))
    bidx = np.arange(B)

    for k in range(m):
        rel = np.argmax(np.abs(aug[:, k:, k]), axis=1)
        src = k + rel
        rows_k = aug[bidx, k, :].copy()
        aug[bidx, k, :] = aug[bidx, src, :]
        aug[bidx, src, :] = rows_k
        piv = aug[:, k, k]
        apiv = np.abs(piv)
        flagged |= apiv <= thresh
        minpiv = np.minimum(minpiv, apiv)
        maxpiv = np.maximum(maxpiv, apiv)
        safe = np.where(apiv <= thresh, 1.0, piv)
        safe_diag[:, k] = safe
        if k + 1 < m:
            mult = aug[:, k + 1:, k] / safe[:, None]
            aug[:, k + 1:, k:] -= mult[:, :, None] * aug[:, k, None, k:]

    x = np.zeros((B, m))
    for k in range(m - 1, -1, -1):
        acc = aug[:, k, m]
        if k + 1 < m:
            acc = acc - (aug[:, k, k + 1:m] * x[:, k + 1:]).sum(axis=1)
        x[:, k] = acc / safe_diag[:, k]

    with np.errstate(invalid="ignore"):
        rpr = np.where(maxpiv > 0, minpiv / maxpiv, 0.0)

    reports = []
    for b in range(B):
        if flagged[b]:
            reports.append(solve_augmented(Ps[b], qs[b]))
        else:
            reports.append(LinearSolveReport(x=x[b], method="direct",
                                             rpr=float(rpr[b])))
    return reports


def solve(P, q) -> LinearSolveReport:
    """Solve one square system; see solve_batch for the pivoting rules."""
    P = np.asarray(P, dtype=float)
    q = np.asarray(q, dtype=float).ravel()
    m = P.shape[0]
    if P.shape != (m, m):
        raise MatrixShapeError(f"P must be square, got {P.shape}")
    if q.shape != (m,):
        raise MatrixShapeError(f"rhs length {q.shape[0]} != {m}")
    return solve_batch(P[None], q[None])[0]
