"""Block Jacobi / Gauss-Seidel and (restricted) additive / multiplicative Schwarz.

Kinds
-----
``bj``, ``bas``, ``bras``
    Additive: ``z = sum_i W_i^T A_i^{-1} R_i r``.
``bgs``, ``bms``, ``brms``
    Multiplicative: one sweep ``z <- z + W_i^T A_i^{-1} R_i (r - A z)``
    over ``i = 1..nu`` starting from ``z = 0``.

``W_i`` is the scheme's prolongation: ``full`` scatters into the whole
extended range, ``restricted`` only into the non-overlapping range and
``average`` into the extended range weighted by ``1/coverage``.
"""
import numpy as np

from .matrices import SingularMatrixError, band_lu_factor, band_lu_solve, extract_principal_block
from .partition import NotAdmissible, operators

__all__ = [
    "KINDS",
    "SchwarzPreconditioner",
    "SetupError",
    "setup",
    "apply_inverse",
    "apply_iteration",
    "dense_inverse_image",
    "DENSE_GUARD",
]

KINDS = ("bj", "bgs", "bas", "bms", "bras", "brms")
_ADDITIVE = {"bj", "bas", "bras"}
_DEFAULT_SCHEME = {"bj": "full", "bgs": "full", "bas": "full", "bms": "full",
                   "bras": "restricted", "brms": "restricted"}
DENSE_GUARD = 5000


class SetupError(ValueError):
    """Inconsistent configuration or a singular local block."""


class SchwarzPreconditioner:
    """A set-up Schwarz preconditioner; immutable once built.

    Use :func:`setup` to construct one.
    """

    def __init__(self, A, partition, kind, scheme, factors, ops, reverse, backend):
        self.A = A
        self.partition = partition
        self.kind = kind
        self.scheme = scheme
        self.factors = tuple(factors)
        self.ops = ops
        self.reverse = reverse
        self.backend = backend
        self.local_dims = tuple(hi - lo for lo, hi in partition.extended)
        self._columns = None
        if not self.additive:
            # residual updates only touch the columns the scatter writes to
            self._columns = tuple(A.block((0, A.dim), sc) for sc in ops.scatter)

    @property
    def additive(self):
        return self.kind in _ADDITIVE

    @property
    def dim(self):
        return self.A.dim

    @property
    def nu(self):
        return self.partition.nu

    @property
    def overlap(self):
        return self.partition.o

    def describe(self):
        return f"{self.kind.upper()}(nu={self.nu}, o={self.overlap}, scheme={self.scheme})"

    def _order(self):
        idx = range(self.nu)
        return reversed(idx) if self.reverse else idx

    def _local_solve(self, i, rhs):
        return band_lu_solve(self.factors[i], rhs, backend=self.backend)

    def apply_inverse(self, r):
        """Return ``P^{-1} r`` for a vector or a block of columns."""
        r = np.asarray(r)
        if r.shape[0] != self.dim:
            raise ValueError(f"dimension mismatch: preconditioner {self.dim}, rhs {r.shape[0]}")
        dtype = np.result_type(r.dtype, self.A.dtype, float)
        z = np.zeros(r.shape, dtype=dtype)
        if self.additive:
            for i in range(self.nu):
                local = self._local_solve(i, self.ops.restrict(i, r))
                self.ops.prolong(i, local, z)
            return z
        res = np.array(r, dtype=dtype)
        order = list(self._order())
        for step, i in enumerate(order):
            local = self._local_solve(i, self.ops.restrict(i, res))
            slo, shi, delta = self.ops.weighted(i, local)
            z[slo:shi] += delta
            if step + 1 < len(order):
                res -= self._columns[i].apply(delta)
        return z

    def apply_iteration(self, v):
        """Return ``T v = v - P^{-1} A v``."""
        v = np.asarray(v)
        return v - self.apply_inverse(self.A @ v)

    def iteration_product(self, v):
        """``T v`` through the product ``prod_i (I - W_i^T A_i^{-1} R_i A)``.

        Multiplicative kinds only; this path recomputes ``A v`` for every
        factor and shares no state with :meth:`apply_inverse`.
        """
        if self.additive:
            raise SetupError("the product form exists for multiplicative kinds only")
        v = np.array(v, dtype=np.result_type(np.asarray(v).dtype, self.A.dtype, float))
        for i in self._order():
            lo, hi = self.ops.gather[i]
            Av = self.A @ v
            local = self._local_solve(i, Av[lo:hi])
            corr = np.zeros_like(v)
            self.ops.prolong(i, local, corr)
            v = v - corr
        return v

    def dense_inverse_image(self):
        """Dense ``P^{-1}``, column ``j`` being ``P^{-1} e_j``."""
        if self.dim > DENSE_GUARD:
            raise SetupError(f"dim {self.dim} exceeds dense guard {DENSE_GUARD}")
        return self.apply_inverse(np.eye(self.dim))


def setup(A, partition, kind, scheme=None, reverse=False, backend=None):
    """Factor the local blocks and return a :class:`SchwarzPreconditioner`.

    Parameters
    ----------
    A : StructuredMatrix
    partition : Partition
    kind : {'bj', 'bgs', 'bas', 'bms', 'bras', 'brms'}
    scheme : {'full', 'restricted', 'average'}, optional
        Overrides the kind's default prolongation.  ``bj`` and ``bgs``
        only accept ``full``.
    reverse : bool
        Sweep multiplicative kinds from the last subdomain to the first.
    """
    kind = kind.lower()
    if kind not in KINDS:
        raise SetupError(f"unknown kind {kind!r}; choose from {KINDS}")
    if isinstance(partition, NotAdmissible):
        raise SetupError(f"partition not admissible: {partition.reason}")
    if partition.d_n != A.dim:
        raise SetupError(f"partition covers {partition.d_n} indices, matrix has {A.dim}")
    if kind in ("bj", "bgs"):
        if partition.o != 0:
            raise SetupError(f"{kind} requires overlap 0, got {partition.o}")
        if scheme not in (None, "full"):
            raise SetupError(f"{kind} uses the full scheme only")
    scheme = scheme or _DEFAULT_SCHEME[kind]
    ops = operators(partition, scheme)
    factors = []
    for i, rng in enumerate(partition.extended):
        try:
            factors.append(band_lu_factor(extract_principal_block(A, rng), backend=backend))
        except SingularMatrixError as exc:
            raise SetupError(f"local block of subdomain {i + 1} is singular (column {exc.column})") from exc
    return SchwarzPreconditioner(A, partition, kind, scheme, factors, ops, reverse, backend)


def apply_inverse(P, r):
    return P.apply_inverse(r)


def apply_iteration(P, A, v):
    if A is not P.A and A.dim != P.dim:
        raise ValueError("dimension mismatch")
    v = np.asarray(v)
    return v - P.apply_inverse(A @ v)


def dense_inverse_image(P):
    return P.dense_inverse_image()
