"""Structured square matrices, generated Toeplitz/diagonal matrices and band LU.

Index ranges in this module are 0-based and half-open, ``(lo, hi)``
meaning rows ``lo .. hi-1``.
"""
from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.sparse as sp

from .kernels import get_kernels
from .symbols import eval_symbol

__all__ = [
    "StructuredMatrix",
    "BandFactorization",
    "SingularMatrixError",
    "toeplitz",
    "diag_sampling",
    "matvec",
    "band_lu_factor",
    "band_lu_solve",
    "extract_principal_block",
    "read_matrix_market",
    "write_matrix_market",
    "RectBlock",
]

# Below this fill ratio a matrix is stored as CSR, above it densely.
_DENSE_FILL = 0.25


class SingularMatrixError(ArithmeticError):
    """Raised when LU meets an exactly zero pivot column."""

    def __init__(self, column, message=None):
        self.column = column
        super().__init__(message or f"matrix is singular: zero pivot in column {column}")


def _band_extent(rows, cols):
    if len(rows) == 0:
        return 0, 0
    diff = rows - cols
    return int(max(0, diff.max())), int(max(0, -diff.min()))


class StructuredMatrix:
    """Square real or complex matrix with known bandwidth.

    Stored as a ``scipy.sparse.csr_array`` when sparse enough, otherwise
    as a dense C-contiguous array.  Instances are treated as immutable.

    Attributes
    ----------
    dim : int
    kl, ku : int
        Lower and upper bandwidth.
    hermitian : bool
        True when the stored entries satisfy ``M == M^H`` exactly.
    """

    def __init__(self, data, hermitian=None):
        if sp.issparse(data):
            csr = sp.csr_array(data)
            csr.sum_duplicates()
            csr.eliminate_zeros()
            if csr.shape[0] != csr.shape[1]:
                raise ValueError(f"matrix must be square, got {csr.shape}")
            coo = csr.tocoo()
            self.kl, self.ku = _band_extent(coo.row, coo.col)
            n = csr.shape[0]
            if csr.nnz > _DENSE_FILL * n * n:
                self._dense = np.ascontiguousarray(csr.toarray())
                self._csr = None
            else:
                self._dense = None
                self._csr = csr
        else:
            a = np.array(data, copy=True)
            if a.ndim != 2 or a.shape[0] != a.shape[1]:
                raise ValueError(f"matrix must be square, got shape {a.shape}")
            if not np.iscomplexobj(a):
                a = a.astype(float)
            rows, cols = np.nonzero(a)
            self.kl, self.ku = _band_extent(rows, cols)
            n = a.shape[0]
            if len(rows) > _DENSE_FILL * n * n:
                self._dense = np.ascontiguousarray(a)
                self._csr = None
            else:
                self._dense = None
                self._csr = sp.csr_array(a)
        exact = self._is_exactly_hermitian()
        if hermitian is None:
            hermitian = exact
        elif hermitian and not exact:
            raise ValueError("matrix flagged hermitian but M != M^H as stored")
        self.hermitian = bool(hermitian)

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_coo(cls, rows, cols, vals, dim, hermitian=None):
        m = sp.coo_array((vals, (rows, cols)), shape=(dim, dim))
        return cls(m.tocsr(), hermitian=hermitian)

    # -- properties -----------------------------------------------------------

    @property
    def dim(self):
        return (self._dense if self._dense is not None else self._csr).shape[0]

    @property
    def shape(self):
        return (self.dim, self.dim)

    @property
    def bandwidth(self):
        return max(self.kl, self.ku)

    @property
    def dtype(self):
        return (self._dense if self._dense is not None else self._csr).dtype

    @property
    def is_dense(self):
        return self._dense is not None

    def _is_exactly_hermitian(self):
        if self._dense is not None:
            return bool(np.array_equal(self._dense, self._dense.conj().T))
        diff = self._csr - self._csr.conj().T
        return diff.count_nonzero() == 0

    # -- conversions ----------------------------------------------------------

    def todense(self):
        if self._dense is not None:
            return self._dense.copy()
        return self._csr.toarray()

    def tocsr(self):
        if self._csr is not None:
            return self._csr.copy()
        return sp.csr_array(self._dense)

    def coo(self):
        """Return ``(rows, cols, vals)`` of the stored nonzeros."""
        if self._dense is not None:
            rows, cols = np.nonzero(self._dense)
            return rows, cols, self._dense[rows, cols]
        c = self._csr.tocoo()
        return c.row, c.col, c.data

    # -- algebra --------------------------------------------------------------

    def matvec(self, v):
        return matvec(self, v)

    def __matmul__(self, v):
        return matvec(self, v)

    def block(self, rows, cols):
        """Rectangular slice ``M[rows[0]:rows[1], cols[0]:cols[1]]``."""
        r0, r1 = rows
        c0, c1 = cols
        if self._dense is not None:
            return RectBlock(self._dense[r0:r1, c0:c1])
        return RectBlock(self._csr[r0:r1, c0:c1])

    def __repr__(self):
        store = "dense" if self.is_dense else "csr"
        return (f"StructuredMatrix(dim={self.dim}, kl={self.kl}, ku={self.ku}, "
                f"hermitian={self.hermitian}, storage={store})")


class RectBlock:
    """A rectangular dense or CSR block that can act on vectors."""

    def __init__(self, data):
        if sp.issparse(data):
            self._csr = sp.csr_array(data)
            self._dense = None
            if self._csr.nnz > _DENSE_FILL * np.prod(self._csr.shape):
                self._dense = self._csr.toarray()
                self._csr = None
        else:
            self._dense = np.ascontiguousarray(data)
            self._csr = None

    @property
    def shape(self):
        return (self._dense if self._dense is not None else self._csr).shape

    def apply(self, x):
        if self._dense is not None:
            return self._dense @ x
        return _csr_apply(self._csr, x)


def _csr_apply(csr, x):
    x = np.asarray(x)
    vec = x.ndim == 1
    xx = x.reshape(x.shape[0], -1)
    dtype = np.result_type(csr.dtype, xx.dtype)
    out = np.empty((csr.shape[0], xx.shape[1]), dtype=dtype)
    get_kernels().csr_matmat(
        csr.indptr.astype(np.int64), csr.indices.astype(np.int64),
        csr.data.astype(dtype), np.ascontiguousarray(xx, dtype=dtype), out)
    return out[:, 0] if vec else out


def matvec(M, v):
    """Product ``M @ v`` for a vector or a block of column vectors."""
    v = np.asarray(v)
    if v.shape[0] != M.dim:
        raise ValueError(f"dimension mismatch: matrix {M.dim}, vector {v.shape[0]}")
    if M._dense is not None:
        return M._dense @ v
    return _csr_apply(M._csr, v)


# ---------------------------------------------------------------------------
# generated matrices
# ---------------------------------------------------------------------------


def toeplitz(coeffs, n):
    """Block Toeplitz matrix ``T_n = [f_{i-j}]``.

    Parameters
    ----------
    coeffs : array_like, shape (2m+1,) or (2m+1, s, s)
        ``f_{-m} .. f_m``.
    n : int
        Number of block rows.
    """
    c = np.asarray(coeffs)
    if c.ndim == 1:
        c = c[:, None, None]
    if c.shape[0] % 2 != 1:
        raise ValueError("coeffs must hold f_{-m}..f_m (odd length)")
    m = c.shape[0] // 2
    s = c.shape[1]
    if np.iscomplexobj(c) and not np.any(c.imag):
        c = c.real
    c = c.astype(complex if np.iscomplexobj(c) else float)
    herm = all(np.array_equal(c[m - k], c[m + k].conj().T) for k in range(m + 1))
    rows, cols, vals = [], [], []
    bi, bj = np.meshgrid(np.arange(s), np.arange(s), indexing="ij")
    for k in range(-min(m, n - 1), min(m, n - 1) + 1):
        blk = c[m + k]
        if not np.any(blk):
            continue
        # block row i, block column j = i - k
        i = np.arange(max(0, k), min(n, n + k))
        j = i - k
        rows.append((i[:, None, None] * s + bi[None]).ravel())
        cols.append((j[:, None, None] * s + bj[None]).ravel())
        vals.append(np.broadcast_to(blk, (len(i), s, s)).ravel())
    dim = n * s
    if not rows:
        return StructuredMatrix(sp.csr_array((dim, dim)), hermitian=True)
    return StructuredMatrix.from_coo(np.concatenate(rows), np.concatenate(cols),
                                     np.concatenate(vals), dim, hermitian=herm)


def diag_sampling(a, n):
    """Block-diagonal ``D_n(a) = diag(a(i/n))``, ``i = 1..n``."""
    blocks = [eval_symbol(a, (i / n,) * a.d, None) for i in range(1, n + 1)]
    s = a.s
    full = np.zeros((n * s, n * s), dtype=complex)
    for i, b in enumerate(blocks):
        full[i * s:(i + 1) * s, i * s:(i + 1) * s] = b
    if not np.any(full.imag):
        full = full.real
    return StructuredMatrix(sp.csr_array(full))


def extract_principal_block(M, rng):
    """Principal submatrix ``M[lo:hi, lo:hi]`` for ``rng = (lo, hi)``."""
    lo, hi = rng
    if not (0 <= lo < hi <= M.dim):
        raise IndexError(f"range {rng} out of bounds for dim {M.dim}")
    if M._dense is not None:
        sub = M._dense[lo:hi, lo:hi]
    else:
        sub = M._csr[lo:hi, lo:hi]
    return StructuredMatrix(sub, hermitian=M.hermitian)


# ---------------------------------------------------------------------------
# LU
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BandFactorization:
    """LU factors with partial pivoting, banded or dense layout."""

    factors: np.ndarray
    piv: np.ndarray
    kl: int
    ku: int
    dim: int
    layout: str  # 'band' or 'dense'

    @property
    def fill_bandwidth(self):
        return self.kl + self.ku


def band_lu_factor(M, backend=None):
    """Factor ``M`` with partial pivoting.

    The band layout is used while the band storage stays below half of a
    dense array; wider matrices fall back to dense LU.
    """
    kern = get_kernels(backend)
    n = M.dim
    kl, ku = M.kl, M.ku
    dtype = np.complex128 if np.iscomplexobj(np.empty(0, M.dtype)) else np.float64
    piv = np.zeros(n, dtype=np.int64)
    if (2 * kl + ku + 1) * 2 > n:
        a = np.ascontiguousarray(M.todense(), dtype=dtype)
        info = kern.dense_lu(a, piv)
        layout = "dense"
    else:
        kv = kl + ku
        a = np.zeros((n, 2 * kl + ku + 1), dtype=dtype)
        rows, cols, vals = M.coo()
        a[cols, kv + rows - cols] = vals
        info = kern.band_lu(a, kl, ku, piv)
        layout = "band"
    if info:
        raise SingularMatrixError(info - 1)
    a.setflags(write=False)
    piv.setflags(write=False)
    return BandFactorization(a, piv, kl, ku, n, layout)


def band_lu_solve(F, b, backend=None):
    """Solve with a factorization from :func:`band_lu_factor`.

    ``b`` may be a vector or an ``(n, k)`` block.
    """
    kern = get_kernels(backend)
    b = np.asarray(b)
    if b.shape[0] != F.dim:
        raise ValueError(f"dimension mismatch: factorization {F.dim}, rhs {b.shape[0]}")
    vec = b.ndim == 1
    bb = b.reshape(F.dim, -1)
    fac_complex = np.iscomplexobj(F.factors)
    if np.iscomplexobj(bb) and not fac_complex:
        re = _solve_block(kern, F, np.ascontiguousarray(bb.real, dtype=float))
        im = _solve_block(kern, F, np.ascontiguousarray(bb.imag, dtype=float))
        x = re + 1j * im
    else:
        x = _solve_block(kern, F, np.array(bb, dtype=F.factors.dtype, order="C"))
    return x[:, 0] if vec else x


def _solve_block(kern, F, x):
    if F.layout == "dense":
        return kern.dense_lu_solve(F.factors, F.piv, x)
    return kern.band_lu_solve(F.factors, F.kl, F.ku, F.piv, x)


# ---------------------------------------------------------------------------
# Matrix Market
# ---------------------------------------------------------------------------


def write_matrix_market(M, target, comment=""):
    """Write ``M`` in coordinate format (``symmetric`` when Hermitian and real)."""
    rows, cols, vals = M.coo()
    symmetric = M.hermitian and not np.iscomplexobj(vals)
    coo = sp.coo_array((vals, (rows, cols)), shape=M.shape)
    scipy.io.mmwrite(target, coo, comment=comment,
                     field="complex" if np.iscomplexobj(vals) else "real",
                     symmetry="symmetric" if symmetric else "general")


def read_matrix_market(source):
    """Read a coordinate Matrix Market file into a :class:`StructuredMatrix`."""
    m = scipy.io.mmread(source)
    if not sp.issparse(m):
        m = sp.csr_array(m)
    return StructuredMatrix(sp.csr_array(m))
