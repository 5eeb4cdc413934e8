"""Hot numerical kernels in two interchangeable flavours.

Every kernel exists as an explicit-loop version (compiled with numba when
available) and a vectorised pure-numpy version.  Both flavours share the
same signatures and storage conventions, so the rest of the package only
talks to the table returned by :func:`get_kernels`.

Band storage
------------
A band LU with ``kl`` sub- and ``ku`` super-diagonals is kept in an
array ``ab`` of shape ``(n, 2*kl + ku + 1)`` where ``ab[j, kv + i - j]``
holds entry ``(i, j)`` and ``kv = kl + ku``.  This is the LAPACK
``gbtrf`` layout transposed so that a matrix column is contiguous.
"""
import numpy as np

from ._backend import njit, requested_backend

__all__ = ["get_kernels", "KERNEL_NAMES"]

KERNEL_NAMES = (
    "dense_lu",
    "dense_lu_solve",
    "band_lu",
    "band_lu_solve",
    "csr_matmat",
    "spline_basis",
    "element_matrices_1d",
    "element_matrices_2d",
)


# ---------------------------------------------------------------------------
# loop kernels (numba targets)
# ---------------------------------------------------------------------------


def _dense_lu_loops(a, piv):
    # Right-looking LU with partial pivoting, in place, row-major friendly.
    n = a.shape[0]
    info = 0
    for k in range(n):
        p = k
        best = abs(a[k, k])
        for i in range(k + 1, n):
            v = abs(a[i, k])
            if v > best:
                best = v
                p = i
        piv[k] = p
        if best == 0.0:
            if info == 0:
                info = k + 1
            continue
        if p != k:
            for c in range(n):
                t = a[k, c]
                a[k, c] = a[p, c]
                a[p, c] = t
        inv = 1.0 / a[k, k]
        for i in range(k + 1, n):
            lik = a[i, k] * inv
            a[i, k] = lik
            if lik != 0.0:
                for c in range(k + 1, n):
                    a[i, c] -= lik * a[k, c]
    return info


def _dense_lu_solve_loops(lu, piv, b):
    # b has shape (n, m) and is overwritten with the solution.
    n = lu.shape[0]
    m = b.shape[1]
    for k in range(n):
        p = piv[k]
        if p != k:
            for c in range(m):
                t = b[k, c]
                b[k, c] = b[p, c]
                b[p, c] = t
    for i in range(n):
        for k in range(i):
            lik = lu[i, k]
            if lik != 0.0:
                for c in range(m):
                    b[i, c] -= lik * b[k, c]
    for i in range(n - 1, -1, -1):
        for k in range(i + 1, n):
            uik = lu[i, k]
            if uik != 0.0:
                for c in range(m):
                    b[i, c] -= uik * b[k, c]
        inv = 1.0 / lu[i, i]
        for c in range(m):
            b[i, c] *= inv
    return b


def _band_lu_loops(ab, kl, ku, piv):
    n = ab.shape[0]
    kv = kl + ku
    info = 0
    ju = 0
    for j in range(n):
        km = min(kl, n - 1 - j)
        jp = 0
        best = abs(ab[j, kv])
        for t in range(1, km + 1):
            v = abs(ab[j, kv + t])
            if v > best:
                best = v
                jp = t
        piv[j] = j + jp
        if best == 0.0:
            if info == 0:
                info = j + 1
            continue
        ju = max(ju, min(j + ku + jp, n - 1))
        if jp != 0:
            # swap rows j and j + jp over columns j..ju
            for c in range(j, ju + 1):
                r1 = kv + j - c
                r2 = kv + j + jp - c
                t2 = ab[c, r1]
                ab[c, r1] = ab[c, r2]
                ab[c, r2] = t2
        inv = 1.0 / ab[j, kv]
        for t in range(1, km + 1):
            ab[j, kv + t] *= inv
        for c in range(j + 1, ju + 1):
            f = ab[c, kv + j - c]
            if f != 0.0:
                for t in range(1, km + 1):
                    ab[c, kv + j - c + t] -= ab[j, kv + t] * f
    return info


def _band_lu_solve_loops(ab, kl, ku, piv, b):
    n = ab.shape[0]
    m = b.shape[1]
    kv = kl + ku
    for j in range(n):
        lm = min(kl, n - 1 - j)
        p = piv[j]
        if p != j:
            for c in range(m):
                t = b[j, c]
                b[j, c] = b[p, c]
                b[p, c] = t
        for t in range(1, lm + 1):
            lij = ab[j, kv + t]
            if lij != 0.0:
                for c in range(m):
                    b[j + t, c] -= lij * b[j, c]
    for j in range(n - 1, -1, -1):
        inv = 1.0 / ab[j, kv]
        for c in range(m):
            b[j, c] *= inv
        lo = max(0, j - kv)
        for i in range(lo, j):
            uij = ab[j, kv + i - j]
            if uij != 0.0:
                for c in range(m):
                    b[i, c] -= uij * b[j, c]
    return b


def _csr_matmat_loops(indptr, indices, data, x, out):
    nrow = indptr.shape[0] - 1
    m = x.shape[1]
    for i in range(nrow):
        for c in range(m):
            out[i, c] = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            v = data[k]
            col = indices[k]
            for c in range(m):
                out[i, c] += v * x[col, c]
    return out


def _spline_basis_loops(knots, p, span, u, out):
    # Values and first derivatives of the p + 1 nonzero B-splines on a span
    # (Cox-de Boor triangle, derivative from the degree p - 1 row).
    left = np.zeros(p + 1)
    right = np.zeros(p + 1)
    ndu = np.zeros((p + 1, p + 1))
    ndu[0, 0] = 1.0
    for j in range(1, p + 1):
        left[j] = u - knots[span + 1 - j]
        right[j] = knots[span + j] - u
        saved = 0.0
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved
    for r in range(p + 1):
        out[0, r] = ndu[r, p]
        out[1, r] = 0.0
    if p > 0:
        for r in range(p + 1):
            d = 0.0
            if r >= 1:
                d += ndu[r - 1, p - 1] / ndu[p, r - 1]
            if r <= p - 1:
                d -= ndu[r, p - 1] / ndu[p, r]
            out[1, r] = p * d
    return out


def _element_matrices_1d_loops(dphi, phi, weights, coef, stiff, mass):
    # dphi, phi: (nel, nq, p+1) physical values; weights: (nel, nq) with
    # the Jacobian folded in; coef: (nel, nq).
    nel, nq, nb = dphi.shape
    for e in range(nel):
        for a in range(nb):
            for b in range(nb):
                ks = 0.0
                ms = 0.0
                for q in range(nq):
                    w = weights[e, q]
                    ks += coef[e, q] * w * dphi[e, q, a] * dphi[e, q, b]
                    ms += w * phi[e, q, a] * phi[e, q, b]
                stiff[e, a, b] = ks
                mass[e, a, b] = ms
    return stiff, mass


def _element_matrices_2d_loops(phi1, dphi1, w1, phi2, dphi2, w2, coef, out):
    # Tensor-product stiffness with local index a = a1 + nb1 * a2.
    nel1, nq1, nb1 = phi1.shape
    nel2, nq2, nb2 = phi2.shape
    for e2 in range(nel2):
        for e1 in range(nel1):
            for a2 in range(nb2):
                for a1 in range(nb1):
                    ia = a1 + nb1 * a2
                    for b2 in range(nb2):
                        for b1 in range(nb1):
                            ib = b1 + nb1 * b2
                            s = 0.0
                            for q2 in range(nq2):
                                y0 = phi2[e2, q2, a2] * phi2[e2, q2, b2]
                                y1 = dphi2[e2, q2, a2] * dphi2[e2, q2, b2]
                                wy = w2[e2, q2]
                                for q1 in range(nq1):
                                    x0 = phi1[e1, q1, a1] * phi1[e1, q1, b1]
                                    x1 = dphi1[e1, q1, a1] * dphi1[e1, q1, b1]
                                    s += (coef[e2, e1, q2, q1] * wy * w1[e1, q1]
                                          * (x1 * y0 + x0 * y1))
                            out[e2, e1, ia, ib] = s
    return out


# ---------------------------------------------------------------------------
# numpy kernels
# ---------------------------------------------------------------------------


def _dense_lu_numpy(a, piv):
    n = a.shape[0]
    info = 0
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        piv[k] = p
        if a[p, k] == 0:
            if info == 0:
                info = k + 1
            continue
        if p != k:
            a[[k, p], :] = a[[p, k], :]
        a[k + 1:, k] /= a[k, k]
        a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k], a[k, k + 1:])
    return info


def _dense_lu_solve_numpy(lu, piv, b):
    n = lu.shape[0]
    for k in range(n):
        p = piv[k]
        if p != k:
            b[[k, p], :] = b[[p, k], :]
    for i in range(1, n):
        b[i] -= lu[i, :i] @ b[:i]
    for i in range(n - 1, -1, -1):
        b[i] -= lu[i, i + 1:] @ b[i + 1:]
        b[i] /= lu[i, i]
    return b


def _band_lu_numpy(ab, kl, ku, piv):
    n = ab.shape[0]
    kv = kl + ku
    info = 0
    ju = 0
    for j in range(n):
        km = min(kl, n - 1 - j)
        col = ab[j, kv:kv + km + 1]
        jp = int(np.argmax(np.abs(col)))
        piv[j] = j + jp
        if col[jp] == 0:
            if info == 0:
                info = j + 1
            continue
        ju = max(ju, min(j + ku + jp, n - 1))
        cols = np.arange(j, ju + 1)
        if jp != 0:
            r1 = kv + j - cols
            r2 = r1 + jp
            tmp = ab[cols, r1].copy()
            ab[cols, r1] = ab[cols, r2]
            ab[cols, r2] = tmp
        ab[j, kv + 1:kv + km + 1] /= ab[j, kv]
        if km > 0 and ju > j:
            c = cols[1:]
            f = ab[c, kv + j - c]
            rows = (kv + j - c)[:, None] + np.arange(1, km + 1)[None, :]
            ab[c[:, None], rows] -= f[:, None] * ab[j, kv + 1:kv + km + 1][None, :]
    return info


def _band_lu_solve_numpy(ab, kl, ku, piv, b):
    n = ab.shape[0]
    kv = kl + ku
    for j in range(n):
        lm = min(kl, n - 1 - j)
        p = piv[j]
        if p != j:
            b[[j, p], :] = b[[p, j], :]
        if lm:
            b[j + 1:j + lm + 1] -= np.outer(ab[j, kv + 1:kv + lm + 1], b[j])
    for j in range(n - 1, -1, -1):
        b[j] /= ab[j, kv]
        lo = max(0, j - kv)
        if lo < j:
            b[lo:j] -= np.outer(ab[j, kv + lo - j:kv], b[j])
    return b


def _csr_matmat_numpy(indptr, indices, data, x, out):
    nrow = indptr.shape[0] - 1
    rows = np.repeat(np.arange(nrow), np.diff(indptr))
    prod = data[:, None] * x[indices]
    out[...] = 0
    np.add.at(out, rows, prod)
    return out


def _spline_basis_numpy(knots, p, span, u, out):
    # Same triangle as the loop kernel, vectorised over each row.
    left = u - knots[span + 1 - np.arange(1, p + 1)]
    right = knots[span + np.arange(1, p + 1)] - u
    N = np.array([1.0])
    rows = [N]
    for j in range(1, p + 1):
        denom = right[:j] + left[j - 1::-1]
        temp = N / denom
        new = np.zeros(j + 1)
        new[:j] += right[:j] * temp
        new[1:] += left[j - 1::-1] * temp
        N = new
        rows.append(N)
    out[0, :] = N
    out[1, :] = 0.0
    if p > 0:
        prev = rows[p - 1]
        denom_hi = right[:p] + left[p - 1::-1]
        d = np.zeros(p + 1)
        d[1:] += prev / denom_hi
        d[:p] -= prev / denom_hi
        out[1, :] = p * d
    return out


def _element_matrices_1d_numpy(dphi, phi, weights, coef, stiff, mass):
    stiff[...] = np.einsum("eq,eqa,eqb->eab", coef * weights, dphi, dphi)
    mass[...] = np.einsum("eq,eqa,eqb->eab", weights, phi, phi)
    return stiff, mass


def _element_matrices_2d_numpy(phi1, dphi1, w1, phi2, dphi2, w2, coef, out):
    nel1, nq1, nb1 = phi1.shape
    nel2, nq2, nb2 = phi2.shape
    cw = coef * w2[:, None, :, None] * w1[None, :, None, :]
    xx0 = np.einsum("eqa,eqb->eqab", phi1, phi1)
    xx1 = np.einsum("eqa,eqb->eqab", dphi1, dphi1)
    yy0 = np.einsum("eqa,eqb->eqab", phi2, phi2)
    yy1 = np.einsum("eqa,eqb->eqab", dphi2, dphi2)
    loc = (np.einsum("EeQq,EQcd,eqab->Eecadb", cw, yy0, xx1)
           + np.einsum("EeQq,EQcd,eqab->Eecadb", cw, yy1, xx0))
    # loc axes: (e2, e1, a2, a1, b2, b1) -> flatten with a1 fastest
    out[...] = loc.reshape(nel2, nel1, nb1 * nb2, nb1 * nb2)
    return out


_LOOPS = {
    "dense_lu": _dense_lu_loops,
    "dense_lu_solve": _dense_lu_solve_loops,
    "band_lu": _band_lu_loops,
    "band_lu_solve": _band_lu_solve_loops,
    "csr_matmat": _csr_matmat_loops,
    "spline_basis": _spline_basis_loops,
    "element_matrices_1d": _element_matrices_1d_loops,
    "element_matrices_2d": _element_matrices_2d_loops,
}

_NUMPY = {
    "dense_lu": _dense_lu_numpy,
    "dense_lu_solve": _dense_lu_solve_numpy,
    "band_lu": _band_lu_numpy,
    "band_lu_solve": _band_lu_solve_numpy,
    "csr_matmat": _csr_matmat_numpy,
    "spline_basis": _spline_basis_numpy,
    "element_matrices_1d": _element_matrices_1d_numpy,
    "element_matrices_2d": _element_matrices_2d_numpy,
}

_CACHE = {}


class _KernelTable:
    def __init__(self, name, funcs):
        self.name = name
        for key, func in funcs.items():
            setattr(self, key, func)

    def __repr__(self):
        return f"<kernels backend={self.name}>"


def get_kernels(backend=None):
    """Return the kernel table for ``backend`` ('numba' or 'numpy').

    ``None`` picks the backend named by the ``GLTSCHWARZ_BACKEND``
    environment variable.
    """
    if backend is None:
        backend = requested_backend()
    if backend not in _CACHE:
        if backend == "numba":
            funcs = {k: njit(f) for k, f in _LOOPS.items()}
        elif backend == "numpy":
            funcs = dict(_NUMPY)
        else:
            raise ValueError(f"unknown backend {backend!r}")
        _CACHE[backend] = _KernelTable(backend, funcs)
    return _CACHE[backend]
