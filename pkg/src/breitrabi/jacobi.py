"""Cyclic Jacobi eigensolver for small real-symmetric matrices."""

from __future__ import annotations

import math

import numpy as np

__all__ = ["JacobiConvergenceError", "jacobi_eigh"]

OFF_TOL = 1e-14
MAX_SWEEPS = 100


class JacobiConvergenceError(RuntimeError):
    pass


def _off_norm(a: np.ndarray) -> float:
    # summed directly; ||A||^2 - sum(diag^2) cancels catastrophically near convergence
    off = a[~np.eye(a.shape[0], dtype=bool)]
    return float(math.sqrt(np.sum(off * off)))


def jacobi_eigh(matrix, tol: float = OFF_TOL, max_sweeps: int = MAX_SWEEPS):
    """Eigenvalues (ascending) and column eigenvectors of a symmetric matrix.

    Sweeps stop once the off-diagonal Frobenius norm drops below
    ``tol * max(1, ||A||_F)``.
    """
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, float(np.abs(a).max(initial=0.0)))):
        raise ValueError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    n = a.shape[0]
    v = np.eye(n)
    scale = max(1.0, float(np.linalg.norm(a)))
    sweeps = 0
    while _off_norm(a) >= tol * scale:
        if sweeps >= max_sweeps:
            raise JacobiConvergenceError(
                f"no convergence after {max_sweeps} sweeps (off-diagonal norm {_off_norm(a):.3e})"
            )
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                # rotation angle zeroing a[p, q]; stable tangent form
                diff = a[q, q] - a[p, p]
                if abs(diff) > 1e150 * abs(apq):
                    # tau would overflow; small-angle limit t = apq / diff
                    t = apq / diff
                else:
                    tau = diff / (2.0 * apq)
                    t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]
