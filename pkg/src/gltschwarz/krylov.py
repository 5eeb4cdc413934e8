"""Conjugate gradients and GMRES with optional Schwarz preconditioning."""
import json
from dataclasses import dataclass, field

import numpy as np

__all__ = ["SolveReport", "cg", "gmres", "TABLE_RESTART"]

# Restart length used by the registered iteration tables.
TABLE_RESTART = 20


@dataclass
class SolveReport:
    method: str
    precond: str
    iterations: int
    converged: bool
    residual_history: list = field(repr=False)
    final_true_residual: float
    cap: int
    breakdown: bool = False

    def to_dict(self, **context):
        out = {
            "method": self.method,
            "precond": self.precond,
            "nu": context.get("nu"),
            "overlap": context.get("overlap"),
            "n": context.get("n"),
            "dim": context.get("dim"),
            "iterations": self.iterations,
            "converged": self.converged,
            "final_residual": self.final_true_residual,
        }
        return out

    def to_json(self, **context):
        return json.dumps(self.to_dict(**context))


def _prepare(A, b, cap):
    b = np.asarray(b)
    if b.ndim != 1 or b.shape[0] != A.shape[0]:
        raise ValueError(f"dimension mismatch: matrix {A.shape}, rhs {b.shape}")
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        raise ValueError("right-hand side must be nonzero")
    if cap is None:
        cap = A.shape[0]
    return b, bnorm, int(cap)


def _describe(P):
    return "none" if P is None else P.describe()


def cg(A, b, tol=1e-6, cap=None, P=None):
    """Preconditioned conjugate gradients from ``x0 = 0``.

    Stops when the true residual ``||b - A x||`` drops to ``tol * ||b||``.
    A breakdown (``p^H A p <= 0`` or ``r^H z <= 0``, possible with a
    non-HPD preconditioner) is reported as ``iterations = cap``,
    ``converged = False``.
    """
    b, bnorm, cap = _prepare(A, b, cap)
    dtype = np.result_type(b.dtype, A.dtype, float)
    x = np.zeros(b.shape[0], dtype=dtype)
    r = b.astype(dtype)
    hist = [bnorm]
    target = tol * bnorm

    def report(it, conv, brk=False):
        res = float(np.linalg.norm(b - A @ x))
        return SolveReport("cg" if P is None else "pcg", _describe(P), it, conv,
                           hist, res, cap, brk)

    z = r.copy() if P is None else P.apply_inverse(r)
    p = z.copy()
    rz = np.vdot(r, z).real
    for it in range(1, cap + 1):
        if rz <= 0.0:
            return report(cap, False, True)
        Ap = A @ p
        pAp = np.vdot(p, Ap).real
        if pAp <= 0.0:
            return report(cap, False, True)
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        true = float(np.linalg.norm(b - A @ x))
        hist.append(true)
        if true <= target:
            return report(it, True)
        z = r.copy() if P is None else P.apply_inverse(r)
        rz_new = np.vdot(r, z).real
        p = z + (rz_new / rz) * p
        rz = rz_new
    return report(cap, False)


def _givens(f, g):
    # Rotation with [[c, s], [-conj(s), c]] @ [f, g] = [r, 0], c real.
    if g == 0:
        return 1.0, 0.0 * g, f
    if f == 0:
        return 0.0, np.conj(g) / abs(g), abs(g)
    af = abs(f)
    norm = np.hypot(af, abs(g))
    phase = f / af
    return af / norm, phase * np.conj(g) / norm, phase * norm


def gmres(A, b, tol=1e-6, cap=None, P=None, restart=None):
    """Left-preconditioned GMRES from ``x0 = 0``.

    Arnoldi runs on ``P^{-1} A`` with modified Gram-Schmidt and Givens
    rotations.  A cycle ends when the preconditioned residual estimate
    meets an inner tolerance that starts at ``tol * ||P^{-1} b||``; the
    true residual is then recomputed and, if it is still too large, the
    inner tolerance is tightened and a new cycle starts.

    Parameters
    ----------
    restart : int, optional
        Cycle length.  ``None`` keeps the whole basis (no restarting).
    cap : int, optional
        Bound on the total number of inner iterations (default ``dim``).
    """
    b, bnorm, cap = _prepare(A, b, cap)
    n = b.shape[0]
    dtype = np.result_type(b.dtype, A.dtype, float)
    m = cap if restart is None else min(int(restart), cap)
    m = max(m, 1)
    psolve = (lambda v: v.copy()) if P is None else P.apply_inverse
    eps = np.finfo(float).eps
    atol = tol * bnorm

    x = np.zeros(n, dtype=dtype)
    r = b.astype(dtype)
    hist = []
    inner = 0
    rnorm = bnorm
    presid = 0.0
    breakdown = False
    pb_norm = float(np.linalg.norm(psolve(r)))
    ptol_factor = 1.0
    ptol = pb_norm * min(ptol_factor, atol / bnorm)
    V = np.zeros((m + 1, n), dtype=dtype)
    H = np.zeros((m, m + 1), dtype=dtype)  # column-major Hessenberg, H[col, row]
    rot = np.zeros((m, 2), dtype=dtype)

    while inner < cap:
        v0 = psolve(r)
        beta = float(np.linalg.norm(v0))
        if not hist:
            hist.append(beta)
        if beta == 0.0:
            break
        V[0] = v0 / beta
        S = np.zeros(m + 1, dtype=dtype)
        S[0] = beta
        H[:] = 0
        breakdown = False
        col = 0
        for col in range(m):
            w = psolve(A @ V[col])
            h0 = np.linalg.norm(w)
            for k in range(col + 1):
                hk = np.vdot(V[k], w)
                H[col, k] = hk
                w -= hk * V[k]
            h1 = np.linalg.norm(w)
            H[col, col + 1] = h1
            if h1 <= eps * h0:
                H[col, col + 1] = 0
                breakdown = True
            else:
                V[col + 1] = w / h1
            for k in range(col):
                c, s = rot[k]
                n0, n1 = H[col, k], H[col, k + 1]
                H[col, k] = c * n0 + s * n1
                H[col, k + 1] = -np.conj(s) * n0 + c * n1
            c, s, mag = _givens(H[col, col], H[col, col + 1])
            rot[col] = c, s
            H[col, col] = mag
            H[col, col + 1] = 0
            tmp = -np.conj(s) * S[col]
            S[col] = c * S[col]
            S[col + 1] = tmp
            presid = float(abs(tmp))
            inner += 1
            hist.append(presid)
            if presid <= ptol or breakdown or inner >= cap:
                break
        # back substitution on the rotated Hessenberg system
        if H[col, col] == 0:
            S[col] = 0
        y = S[:col + 1].copy()
        for k in range(col, -1, -1):
            if y[k] != 0:
                y[k] /= H[k, k]
                y[:k] -= y[k] * H[k, :k]
        x += y @ V[:col + 1]
        r = b - A @ x
        rnorm = float(np.linalg.norm(r))
        if rnorm <= atol or breakdown:
            break
        if presid <= ptol:
            ptol_factor = max(eps, 0.25 * ptol_factor)
        else:
            ptol_factor = min(1.0, 1.5 * ptol_factor)
        ptol = presid * min(ptol_factor, atol / rnorm)

    converged = rnorm <= atol
    return SolveReport("gmres" if P is None else "pgmres", _describe(P), inner, bool(converged),
                       hist, rnorm, cap, breakdown)
