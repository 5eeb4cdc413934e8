"""Dense eigenvalues, eigenvalue-versus-symbol comparison and clustering counts."""
import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .symbols import symbol_eig_branches

__all__ = [
    "DistributionReport",
    "ClusterReport",
    "SpectraError",
    "eigenvalues_dense",
    "compare_to_symbol",
    "cluster_count",
    "trim_budget",
    "spectrum_of",
    "eigs_to_csv",
    "DENSE_GUARD",
]

DENSE_GUARD = 5000
_HERM_RTOL = 1e-12


class SpectraError(ValueError):
    pass


def _as_dense(M):
    if hasattr(M, "todense") and not isinstance(M, np.ndarray):
        return np.asarray(M.todense())
    return np.asarray(M)


def eigenvalues_dense(M, hermitian=None):
    """All eigenvalues of a dense square matrix.

    Hermitian input (auto-detected to a relative ``1e-12``) goes to the
    symmetric LAPACK driver and comes back real and ascending; anything
    else goes through the general Hessenberg-QR driver.
    """
    a = _as_dense(M)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise SpectraError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > DENSE_GUARD:
        raise SpectraError(f"dim {a.shape[0]} exceeds dense guard {DENSE_GUARD}")
    if hermitian is None:
        scale = max(1.0, float(np.abs(a).max())) if a.size else 1.0
        hermitian = bool(np.abs(a - a.conj().T).max() <= _HERM_RTOL * scale) if a.size else True
    if hermitian:
        return np.linalg.eigvalsh(0.5 * (a + a.conj().T))
    try:
        return np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise SpectraError(f"eigenvalue iteration did not converge: {exc}") from exc


def trim_budget(dim):
    """Number of outlier pairs dropped before measuring errors."""
    return math.ceil(4.0 * math.sqrt(dim))


@dataclass
class DistributionReport:
    n: int
    s: int
    dim: int
    mean_error: list  # per branch, after trimming
    max_error: list
    trim_count: int
    outliers: list
    discarded_imag: int

    @property
    def total_mean_error(self):
        return float(np.mean(self.mean_error))

    def to_dict(self):
        return {
            "n": self.n, "s": self.s, "dim": self.dim,
            "mean_error": self.mean_error, "max_error": self.max_error,
            "trim_count": self.trim_count, "outliers": self.outliers,
            "discarded_imag": self.discarded_imag,
        }


def _resample(sorted_vals, length):
    # Piecewise-linear quantile resampling onto ``length`` midpoints.
    m = len(sorted_vals)
    if m == length:
        return np.asarray(sorted_vals, dtype=float)
    src = (np.arange(m) + 0.5) / m
    dst = (np.arange(length) + 0.5) / length
    return np.interp(dst, src, sorted_vals)


def compare_to_symbol(eigs, sym, n=None, n_x=1, n_theta=None, imag_tol=1e-8):
    """Compare eigenvalues with the sampled eigenvalue branches of ``sym``.

    The sorted eigenvalues are cut into ``s`` consecutive groups of
    near-equal size; group ``i`` is paired with the sorted samples of
    branch ``i``.  The ``ceil(4 sqrt(dim))`` worst pairs are dropped.

    Parameters
    ----------
    eigs : array_like
        Eigenvalues; imaginary parts above ``imag_tol`` are counted in
        ``discarded_imag`` and ignored.
    n : int, optional
        Reported size parameter; also the default ``n_theta``.
    """
    ev = np.asarray(eigs)
    discarded = int(np.sum(np.abs(np.imag(ev)) > imag_tol)) if np.iscomplexobj(ev) else 0
    ev = np.sort(np.real(ev))
    dim = len(ev)
    s = sym.s
    if dim < s:
        raise SpectraError(f"need at least s={s} eigenvalues, got {dim}")
    n = n or math.ceil(dim / s)
    samples = symbol_eig_branches(sym, n_x=n_x, n_theta=n_theta or max(n, 1))
    sizes = [dim // s + (i < dim % s) for i in range(s)]
    cuts = np.concatenate([[0], np.cumsum(sizes)])
    errs, branch = [], []
    for i in range(s):
        grp = ev[cuts[i]:cuts[i + 1]]
        ref = _resample(samples.branch_values[i], len(grp))
        errs.append(np.abs(grp - ref))
        branch.append(np.full(len(grp), i))
    errs = np.concatenate(errs)
    branch = np.concatenate(branch)
    trim = min(trim_budget(dim), dim - s)
    order = np.argsort(errs, kind="stable")
    keep = np.zeros(dim, dtype=bool)
    keep[order[:dim - trim]] = True
    mean_err, max_err = [], []
    for i in range(s):
        e = errs[keep & (branch == i)]
        mean_err.append(float(e.mean()) if e.size else 0.0)
        max_err.append(float(e.max()) if e.size else 0.0)
    outliers = sorted(float(v) for v in ev[~keep])
    return DistributionReport(n, s, dim, mean_err, max_err, trim, outliers, discarded)


@dataclass
class ClusterReport:
    eps: list
    counts: list
    fractions: list
    dim: int

    def to_dict(self):
        return {"eps": self.eps, "counts": self.counts, "fractions": self.fractions, "dim": self.dim}


def cluster_count(eigs, eps_list, center=1.0):
    """Count eigenvalues farther than ``eps`` from ``center`` in the complex plane."""
    ev = np.asarray(eigs)
    dist = np.abs(ev - center)
    eps_list = [float(e) for e in eps_list]
    counts = [int(np.sum(dist > e)) for e in eps_list]
    dim = len(ev)
    return ClusterReport(eps_list, counts, [c / dim if dim else 0.0 for c in counts], dim)


def spectrum_of(P, what):
    """Eigenvalues tied to a preconditioner.

    ``what`` is one of ``precond`` (eigenvalues of ``P`` as reciprocals of
    those of ``P^{-1}``), ``precond-applied`` (``P^{-1} A``) or
    ``iteration`` (``I - P^{-1} A``).
    """
    inv = P.dense_inverse_image()
    if what == "precond":
        mu = eigenvalues_dense(inv)
        return 1.0 / mu
    A = P.A.todense()
    pa = inv @ A
    if what == "precond-applied":
        return eigenvalues_dense(pa, hermitian=False)
    if what == "iteration":
        return eigenvalues_dense(np.eye(P.dim) - pa, hermitian=False)
    raise SpectraError(f"unknown spectrum {what!r}")


def eigs_to_csv(eigs, stream=None, extra=None):
    """Write ``re,im`` rows (plus optional named columns of equal length)."""
    own = stream is None
    if own:
        stream = io.StringIO()
    ev = np.asarray(eigs)
    extra = extra or {}
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["re", "im", *extra.keys()])
    cols = list(extra.values())
    for j, v in enumerate(ev):
        row = [repr(float(np.real(v))), repr(float(np.imag(v)))]
        row += [repr(float(c[j])) if j < len(c) else "" for c in cols]
        w.writerow(row)
    return stream.getvalue() if own else None
