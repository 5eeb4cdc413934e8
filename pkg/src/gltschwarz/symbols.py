"""Scalar and matrix-valued spectral symbols.

A :class:`Symbol` is an evaluation callback ``(x, theta) -> s x s`` plus
metadata.  Symbols are only ever sampled, so no expression algebra is
kept around.
"""
import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Symbol",
    "SymbolSamples",
    "SymbolError",
    "eval_symbol",
    "symbol_eig_branches",
    "fourier_coeffs",
    "hermitian_eigvals",
    "laplacian",
    "abs_theta",
    "coefficient",
    "characteristic",
    "weighted",
    "spline_c0",
    "COEFFICIENTS",
]

HERMITIAN_TOL = 1e-12


class SymbolError(ValueError):
    """Raised for out-of-domain arguments or non-Hermitian samples."""


@dataclass(frozen=True)
class Symbol:
    """Measurable function ``(x, theta) -> C^{s x s}`` on ``[0,1]^d x [-pi,pi]^d``.

    Parameters
    ----------
    s : int
        Block size.
    d : int
        Spatial dimension, 1 or 2.
    func : callable
        ``func(x, theta)`` with ``x`` and ``theta`` tuples of length ``d``.
        May return a scalar when ``s == 1``.
    label : str
    hermitian : bool
        Whether every value is a Hermitian matrix.
    depends_on_x, depends_on_theta : bool
        Used to pick sampling grids.
    breakpoints : tuple of float
        Interior ``theta`` values where the function has a kink.  Fourier
        quadrature splits its panels there.
    """

    s: int
    d: int
    func: object
    label: str
    hermitian: bool = True
    depends_on_x: bool = False
    depends_on_theta: bool = True
    breakpoints: tuple = field(default=())

    def __call__(self, x=None, theta=None):
        return eval_symbol(self, x, theta)


@dataclass(frozen=True)
class SymbolSamples:
    """Sorted eigenvalue branches of a Hermitian symbol on a uniform grid."""

    branch_values: np.ndarray  # shape (s, grid size), rows sorted ascending
    grid: list

    @property
    def s(self):
        return self.branch_values.shape[0]

    def to_csv(self, stream=None):
        """Write ``branch,index,value`` rows; return the text when no stream."""
        own = stream is None
        if own:
            stream = io.StringIO()
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["branch", "index", "value"])
        for b, row in enumerate(self.branch_values):
            for i, v in enumerate(row):
                w.writerow([b, i, repr(float(v))])
        if own:
            return stream.getvalue()
        return None


def _as_point(value, d, name, lo, hi):
    if value is None:
        value = (0.0,) * d
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.shape != (d,):
        raise SymbolError(f"{name} must have {d} component(s), got shape {arr.shape}")
    if np.any(arr < lo - 1e-14) or np.any(arr > hi + 1e-14):
        raise SymbolError(f"{name}={arr.tolist()} outside [{lo}, {hi}]")
    return tuple(float(v) for v in arr)


def eval_symbol(sym, x=None, theta=None):
    """Evaluate ``sym`` at ``(x, theta)`` and return a complex ``s x s`` array."""
    xp = _as_point(x, sym.d, "x", 0.0, 1.0)
    tp = _as_point(theta, sym.d, "theta", -math.pi, math.pi)
    val = np.asarray(sym.func(xp, tp), dtype=complex)
    if val.ndim == 0:
        val = val.reshape(1, 1)
    if val.shape != (sym.s, sym.s):
        raise SymbolError(f"symbol {sym.label!r} returned shape {val.shape}, expected {(sym.s, sym.s)}")
    return val


def _jacobi_symmetric(a, sweeps=50):
    # Cyclic Jacobi on a small real symmetric matrix.
    a = np.array(a, dtype=float)
    m = a.shape[0]
    for _ in range(sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= 1e-15 * max(1.0, np.abs(a).max()):
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                if a[p, q] == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                if abs(2.0 * a[p, q]) < 1e-150 * abs(diff):
                    t = a[p, q] / diff  # tau would overflow
                else:
                    tau = diff / (2.0 * a[p, q])
                    t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                sn = t * c
                rot = np.eye(m)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = sn
                rot[q, p] = -sn
                a = rot.T @ a @ rot
    return np.sort(np.diag(a))


def hermitian_eigvals(h):
    """Ascending eigenvalues of a small Hermitian matrix.

    ``1 x 1`` and ``2 x 2`` use closed forms.  Larger sizes run cyclic
    Jacobi on the real symmetric embedding ``[[Re, -Im], [Im, Re]]``,
    whose spectrum is that of ``h`` with every eigenvalue doubled.
    """
    h = np.asarray(h, dtype=complex)
    m = h.shape[0]
    if m == 1:
        return np.array([h[0, 0].real])
    if m == 2:
        a, c = h[0, 0].real, h[1, 1].real
        b = abs(h[0, 1])
        mid = 0.5 * (a + c)
        rad = math.hypot(0.5 * (a - c), b)
        return np.array([mid - rad, mid + rad])
    emb = np.block([[h.real, -h.imag], [h.imag, h.real]])
    return _jacobi_symmetric(emb)[::2]


def symbol_eig_branches(sym, n_x=1, n_theta=64):
    """Sample the eigenvalue branches of a Hermitian symbol.

    Uses ``theta_j = j*pi/n_theta`` for ``j = 1..n_theta`` and, when the
    symbol depends on ``x``, ``x_i = i/n_x`` for ``i = 1..n_x``, taking the
    tensor grid.  Only ``d == 1`` symbols are supported.

    Returns
    -------
    SymbolSamples
    """
    if sym.d != 1:
        raise SymbolError("branch sampling is implemented for d = 1 symbols")
    if n_theta < 1 or n_x < 1:
        raise SymbolError("grid counts must be positive")
    thetas = [j * math.pi / n_theta for j in range(1, n_theta + 1)] if sym.depends_on_theta else [0.0]
    xs = [i / n_x for i in range(1, n_x + 1)] if sym.depends_on_x else [0.0]
    grid = [(x, t) for x in xs for t in thetas]
    vals = np.empty((sym.s, len(grid)))
    for k, (x, t) in enumerate(grid):
        h = eval_symbol(sym, (x,), (t,))
        scale = max(1.0, float(np.abs(h).max()))
        if np.abs(h - h.conj().T).max() > HERMITIAN_TOL * scale:
            raise SymbolError(f"symbol {sym.label!r} is not Hermitian at x={x}, theta={t}")
        vals[:, k] = hermitian_eigvals(h)
    return SymbolSamples(np.sort(vals, axis=1), grid)


def _gauss_panels(breaks, npts):
    x, w = np.polynomial.legendre.leggauss(npts)
    nodes, weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)


def fourier_coeffs(f, k_max, quad_points=8192, rule=None):
    """Fourier coefficients ``f_k = (1/2pi) int f(theta) exp(-ik theta)``.

    Parameters
    ----------
    f : Symbol
        A theta-only symbol with ``d == 1``.
    k_max : int
    quad_points : int
        Number of quadrature nodes.
    rule : {'trapezoid', 'gauss'}, optional
        Default is the periodic trapezoid rule, or composite Gauss-Legendre
        split at ``f.breakpoints`` when the symbol declares kinks.

    Returns
    -------
    ndarray, shape (2*k_max + 1, s, s)
        ``f_{-k_max} .. f_{k_max}``.
    """
    if f.d != 1 or f.depends_on_x:
        raise SymbolError("fourier_coeffs needs a theta-only symbol in d = 1")
    if k_max < 0 or quad_points < 1:
        raise SymbolError("k_max must be >= 0 and quad_points >= 1")
    if rule is None:
        rule = "gauss" if f.breakpoints else "trapezoid"
    if rule == "trapezoid":
        nodes = -math.pi + 2 * math.pi * np.arange(quad_points) / quad_points
        weights = np.full(quad_points, 2 * math.pi / quad_points)
    elif rule == "gauss":
        breaks = [-math.pi, *sorted(f.breakpoints), math.pi]
        per_panel = max(2, min(100, math.ceil(quad_points / (len(breaks) - 1))))
        # keep panels short so high-order Legendre rules stay accurate
        sub = max(1, math.ceil(quad_points / (per_panel * (len(breaks) - 1))))
        fine = []
        for a, b in zip(breaks[:-1], breaks[1:]):
            fine.extend(np.linspace(a, b, sub + 1)[:-1].tolist())
        fine.append(math.pi)
        nodes, weights = _gauss_panels(fine, per_panel)
    else:
        raise SymbolError(f"unknown quadrature rule {rule!r}")
    vals = np.stack([eval_symbol(f, (0.0,), (t,)) for t in nodes])
    ks = np.arange(-k_max, k_max + 1)
    phase = np.exp(-1j * np.outer(ks, nodes)) * weights[None, :]
    return np.einsum("kq,qab->kab", phase, vals) / (2 * math.pi)


# ---------------------------------------------------------------------------
# built-in symbols
# ---------------------------------------------------------------------------


def laplacian():
    """``2 - 2 cos(theta)``."""
    return Symbol(1, 1, lambda x, t: 2.0 - 2.0 * math.cos(t[0]), "2-2cos(theta)")


def abs_theta():
    """``|theta|``, kinked at 0."""
    return Symbol(1, 1, lambda x, t: abs(t[0]), "|theta|", breakpoints=(0.0,))


def coefficient(func, label, d=1):
    """Wrap a scalar function of ``x`` as an x-only symbol."""
    return Symbol(1, d, lambda x, t: func(*x), label, depends_on_x=True, depends_on_theta=False)


def characteristic(lo, hi, label=None):
    """Indicator of ``[lo, hi]`` on the unit interval."""
    return coefficient(lambda x: 1.0 if lo <= x <= hi else 0.0, label or f"chi[{lo},{hi}]")


def weighted(a, base):
    """``a(x) * base(theta)`` for a scalar coefficient ``a``."""
    if a.s != 1:
        raise SymbolError("weighted() expects a scalar coefficient")
    return Symbol(
        base.s,
        base.d,
        lambda x, t: a.func(x, t) * np.asarray(base.func(x, t), dtype=complex),
        f"({a.label})*({base.label})",
        hermitian=base.hermitian,
        depends_on_x=True,
        depends_on_theta=base.depends_on_theta,
        breakpoints=base.breakpoints,
    )


def _spline2(x, t):
    e = complex(math.cos(t[0]), math.sin(t[0]))
    return np.array([[4.0, -2.0 - 2.0 * e],
                     [-2.0 - 2.0 * e.conjugate(), 8.0 - 4.0 * math.cos(t[0])]]) / 3.0


def _spline3(x, t):
    e = complex(math.cos(t[0]), math.sin(t[0]))
    ec = e.conjugate()
    return np.array([[12.0, 3.0, -6.0 - 9.0 * e],
                     [3.0, 12.0, -9.0 - 6.0 * e],
                     [-6.0 - 9.0 * ec, -9.0 - 6.0 * ec, 36.0 - 6.0 * math.cos(t[0])]]) / 10.0


def spline_c0(p):
    """Symbol of the scaled ``C^0`` B-spline stiffness matrix, ``p`` in {2, 3}."""
    if p == 2:
        return Symbol(2, 1, _spline2, "spline-c0-p2")
    if p == 3:
        return Symbol(3, 1, _spline3, "spline-c0-p3")
    raise SymbolError(f"no C0 spline symbol for degree {p}")


# Named coefficients accepted on the command line.
COEFFICIENTS = {
    "one": (lambda *x: 1.0, "1"),
    "1+x^2": (lambda x: 1.0 + x * x, "1+x^2"),
    "1+x1+x2": (lambda x1, x2: 1.0 + x1 + x2, "1+x1+x2"),
}
