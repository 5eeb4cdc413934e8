"""Discretization matrices of the model problems and their reference symbols.

Families
--------
``toeplitz_abs_theta``
    Full ``T_n(|theta|)``.
``fd1d``
    Central differences for ``-(a u')' = f`` with ``h = 1/(n+1)``, no ``h^2``
    scaling.
``fem1d``
    Linear elements on the same mesh, scaled by ``1/(n+1)``.
``spline1d_c0``
    Degree ``p`` B-splines with interior knots repeated ``p`` times, scaled
    by ``1/n``; dimension ``p*n - 1``.
``iga2d``
    Tensor-product ``C^{p-1}`` B-splines on ``n x n`` elements, unscaled,
    dimension ``(n+p-2)^2`` with ``x1`` running fastest.
"""
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
import scipy.sparse as sp

from . import symbols as sy
from .kernels import get_kernels
from .matrices import StructuredMatrix

__all__ = [
    "FAMILIES",
    "ProblemSpec",
    "Assembled",
    "AssemblyError",
    "assemble",
    "gauss_legendre",
    "abs_theta_coeffs",
    "open_knots",
    "univariate_matrices",
    "coefficient_by_name",
]

FAMILIES = ("toeplitz_abs_theta", "fd1d", "fem1d", "spline1d_c0", "iga2d")


class AssemblyError(ValueError):
    """Invalid problem specification or non-positive coefficient."""


def coefficient_by_name(name, d=1):
    """Look up a named coefficient (``one``, ``1+x^2``, ``1+x1+x2``)."""
    try:
        func, label = sy.COEFFICIENTS[name]
    except KeyError:
        raise AssemblyError(f"unknown coefficient {name!r}; choose from {sorted(sy.COEFFICIENTS)}")
    if name == "one":
        return sy.coefficient(lambda *x: 1.0, label, d=d)
    if (name == "1+x1+x2") != (d == 2):
        raise AssemblyError(f"coefficient {name!r} does not live in dimension {d}")
    return sy.coefficient(func, label, d=d)


@dataclass(frozen=True)
class ProblemSpec:
    family: str
    n: int
    coefficient: Optional[sy.Symbol] = None
    p: Optional[int] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise AssemblyError(f"unknown family {self.family!r}")
        if self.n < 1:
            raise AssemblyError("n must be positive")
        if self.family == "spline1d_c0" and self.p not in (2, 3):
            raise AssemblyError(f"spline1d_c0 needs p in {{2, 3}}, got {self.p}")
        if self.family == "iga2d" and (self.p is None or self.p < 2):
            raise AssemblyError(f"iga2d needs p >= 2, got {self.p}")
        d = 2 if self.family == "iga2d" else 1
        if self.coefficient is not None and self.coefficient.d != d:
            raise AssemblyError(f"{self.family} needs a coefficient in dimension {d}")

    @property
    def coeff(self):
        d = 2 if self.family == "iga2d" else 1
        return self.coefficient or sy.coefficient(lambda *x: 1.0, "1", d=d)

    @property
    def dim(self):
        if self.family == "spline1d_c0":
            return self.p * self.n - 1
        if self.family == "iga2d":
            return (self.n + self.p - 2) ** 2
        return self.n


class Assembled(NamedTuple):
    A: StructuredMatrix
    symbol: Optional[sy.Symbol]
    scale_note: str


def gauss_legendre(npts, interval=(-1.0, 1.0)):
    """Gauss-Legendre nodes and weights mapped to ``interval``."""
    if not (1 <= npts <= 10):
        raise AssemblyError(f"gauss_legendre supports 1..10 points, got {npts}")
    x, w = np.polynomial.legendre.leggauss(npts)
    a, b = interval
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def abs_theta_coeffs(n):
    """``f_0 .. f_{n-1}`` of ``|theta|``: ``pi/2`` and ``((-1)^k - 1)/(pi k^2)``."""
    k = np.arange(n, dtype=float)
    c = np.empty(n)
    c[0] = math.pi / 2
    c[1:] = ((-1.0) ** k[1:] - 1.0) / (math.pi * k[1:] ** 2)
    return c


def _coef_values(a, pts):
    vals = np.array([a.func(tuple(np.atleast_1d(p)), None) for p in pts], dtype=float)
    if np.any(vals <= 0) or not np.all(np.isfinite(vals)):
        raise AssemblyError(f"coefficient {a.label!r} is not strictly positive at a quadrature node")
    return vals


def _toeplitz_abs(spec):
    c = abs_theta_coeffs(spec.n)
    idx = np.arange(spec.n)
    A = c[np.abs(idx[:, None] - idx[None, :])]
    return Assembled(StructuredMatrix(A, hermitian=True), sy.abs_theta(), "none (exact Fourier coefficients)")


def _fd1d(spec):
    n = spec.n
    h = 1.0 / (n + 1)
    mids = (np.arange(n + 1) + 0.5) * h  # x_j + h/2 for j = 0..n
    am = _coef_values(spec.coeff, mids)
    diag = am[:-1] + am[1:]
    off = -am[1:-1]
    A = sp.diags([off, diag, off], [-1, 0, 1], shape=(n, n), format="csr")
    return Assembled(StructuredMatrix(A, hermitian=True), sy.weighted(spec.coeff, sy.laplacian()),
                     "none (h^2 absorbed into the right-hand side)")


def _fem1d(spec):
    n = spec.n
    h = 1.0 / (n + 1)
    xq, wq = gauss_legendre(4, (0.0, 1.0))
    pts = (np.arange(n + 1)[:, None] + xq[None, :]) * h
    av = _coef_values(spec.coeff, pts.ravel()).reshape(pts.shape)
    # (1/(n+1)) * int_e a phi_i' phi_j' = (int_e a) / h * h = mean of a on e
    ke = av @ wq
    diag = ke[:-1] + ke[1:]
    off = -ke[1:-1]
    A = sp.diags([off, diag, off], [-1, 0, 1], shape=(n, n), format="csr")
    return Assembled(StructuredMatrix(A, hermitian=True), sy.weighted(spec.coeff, sy.laplacian()),
                     "scaled by 1/(n+1)")


def open_knots(n, p, multiplicity=1):
    """Open knot vector on ``[0, 1]`` with ``n`` uniform elements.

    Interior knots are repeated ``multiplicity`` times, giving
    ``C^{p - multiplicity}`` continuity.
    """
    inner = np.repeat(np.arange(1, n) / n, multiplicity)
    return np.concatenate([np.zeros(p + 1), inner, np.ones(p + 1)])


def _basis_tables(knots, p, nq, backend=None):
    """Basis values on every nonempty span at ``nq`` Gauss points.

    Returns ``spans``, ``phi``, ``dphi`` of shape ``(nel, nq, p+1)``,
    physical quadrature points and weights of shape ``(nel, nq)``.
    """
    kern = get_kernels(backend)
    xq, wq = gauss_legendre(nq, (0.0, 1.0))
    spans = [i for i in range(p, len(knots) - p - 1) if knots[i + 1] > knots[i]]
    nel = len(spans)
    phi = np.empty((nel, nq, p + 1))
    dphi = np.empty((nel, nq, p + 1))
    pts = np.empty((nel, nq))
    wts = np.empty((nel, nq))
    out = np.empty((2, p + 1))
    for e, s in enumerate(spans):
        a, b = knots[s], knots[s + 1]
        for q in range(nq):
            u = a + (b - a) * xq[q]
            kern.spline_basis(knots, p, s, u, out)
            phi[e, q] = out[0]
            dphi[e, q] = out[1]
            pts[e, q] = u
            wts[e, q] = (b - a) * wq[q]
    return np.array(spans), phi, dphi, pts, wts


def _scatter_1d(spans, p, local, nbasis):
    nel = len(spans)
    first = spans - p
    idx = first[:, None] + np.arange(p + 1)[None, :]
    rows = np.broadcast_to(idx[:, :, None], (nel, p + 1, p + 1)).ravel()
    cols = np.broadcast_to(idx[:, None, :], (nel, p + 1, p + 1)).ravel()
    return sp.coo_array((local.ravel(), (rows, cols)), shape=(nbasis, nbasis)).tocsr()


def _symmetrize(m):
    return (m + m.T) * 0.5


def univariate_matrices(knots, p, coeff=None, nq=None, backend=None):
    """Stiffness and mass matrices of all B-splines on ``knots``.

    Dirichlet rows and columns are not removed.  ``coeff`` is a scalar
    callable used in the stiffness integrand (default 1).
    """
    kern = get_kernels(backend)
    nq = nq or p + 1
    spans, phi, dphi, pts, wts = _basis_tables(knots, p, nq, backend)
    if coeff is None:
        cv = np.ones_like(pts)
    else:
        cv = _coef_values(coeff, pts.ravel()).reshape(pts.shape)
    stiff = np.empty((len(spans), p + 1, p + 1))
    mass = np.empty_like(stiff)
    kern.element_matrices_1d(dphi, phi, wts, cv, stiff, mass)
    nb = len(knots) - p - 1
    K = _symmetrize(_scatter_1d(spans, p, stiff, nb))
    M = _symmetrize(_scatter_1d(spans, p, mass, nb))
    return K, M


def _spline1d(spec):
    n, p = spec.n, spec.p
    knots = open_knots(n, p, multiplicity=p)
    K, _ = univariate_matrices(knots, p, spec.coeff)
    K = (K[1:-1, 1:-1] / n).tocsr()
    base = sy.spline_c0(p)
    sym = base if spec.coeff.label == "1" else sy.weighted(spec.coeff, base)
    return Assembled(StructuredMatrix(K, hermitian=True), sym, "scaled by 1/n")


def _iga2d(spec, backend=None):
    n, p = spec.n, spec.p
    kern = get_kernels(backend)
    knots = open_knots(n, p, multiplicity=1)
    nq = p + 1
    spans, phi, dphi, pts, wts = _basis_tables(knots, p, nq, backend)
    nel = len(spans)
    # coefficient at tensor quadrature points, axes (e2, e1, q2, q1)
    X1 = pts[None, :, None, :]
    X2 = pts[:, None, :, None]
    X1, X2 = np.broadcast_arrays(X1, X2)
    cv = _coef_values(spec.coeff, np.stack([X1.ravel(), X2.ravel()], axis=1)).reshape(X1.shape)
    nb = p + 1
    local = np.empty((nel, nel, nb * nb, nb * nb))
    kern.element_matrices_2d(phi, dphi, wts, phi, dphi, wts, np.ascontiguousarray(cv), local)
    nfull = n + p
    N = nfull - 2
    first = spans - p
    g1 = first[:, None] + np.arange(nb)[None, :]  # (nel, nb) global 1D indices
    # local index a = a1 + nb * a2 on element (e2, e1)
    gi1 = np.broadcast_to(g1[None, :, None, :], (nel, nel, nb, nb))  # (e2, e1, a2, a1)
    gi2 = np.broadcast_to(g1[:, None, :, None], (nel, nel, nb, nb))
    gi1 = gi1.reshape(nel, nel, nb * nb)
    gi2 = gi2.reshape(nel, nel, nb * nb)
    inside = (gi1 >= 1) & (gi1 <= N) & (gi2 >= 1) & (gi2 <= N)
    red = np.where(inside, (gi1 - 1) + N * (gi2 - 1), -1)
    rows = np.broadcast_to(red[:, :, :, None], local.shape)
    cols = np.broadcast_to(red[:, :, None, :], local.shape)
    keep = (rows >= 0) & (cols >= 0)
    K = sp.coo_array((local[keep], (rows[keep], cols[keep])), shape=(N * N, N * N)).tocsr()
    K = _symmetrize(K).tocsr()
    return Assembled(StructuredMatrix(K, hermitian=True), None,
                     "unscaled; no reference symbol (informational only)")


_BUILDERS = {
    "toeplitz_abs_theta": _toeplitz_abs,
    "fd1d": _fd1d,
    "fem1d": _fem1d,
    "spline1d_c0": _spline1d,
    "iga2d": _iga2d,
}


def assemble(spec):
    """Build ``(A, symbol, scale_note)`` for a :class:`ProblemSpec`."""
    return _BUILDERS[spec.family](spec)
