"""Compare the numba and pure-numpy kernel backends.

Times each hot kernel on representative inputs, plus an end-to-end
preconditioned solve, and prints a table of best-of-N wall times.

    python benchmarks/bench_kernels.py [--repeat 5] [--n 2560]
"""
import argparse
import time

import numpy as np
import scipy.sparse as sp

from gltschwarz.assembly import ProblemSpec, assemble
from gltschwarz.kernels import get_kernels
from gltschwarz.krylov import gmres
from gltschwarz.partition import make_partition
from gltschwarz.schwarz import setup


def best_of(fn, repeat):
    fn()  # warm-up, includes JIT compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def band_case(kern, n, kl=2, ku=2):
    rng = np.random.default_rng(0)
    ab = rng.standard_normal((n, 2 * kl + ku + 1))
    ab[:, kl + ku] += 10.0
    b = rng.standard_normal((n, 1))

    def run():
        f = ab.copy()
        piv = np.zeros(n, dtype=np.int64)
        kern.band_lu(f, kl, ku, piv)
        kern.band_lu_solve(f, kl, ku, piv, b.copy())
    return run


def dense_case(kern, n):
    rng = np.random.default_rng(1)
    a = rng.standard_normal((n, n)) + n * np.eye(n)
    b = rng.standard_normal((n, 1))

    def run():
        lu = a.copy()
        piv = np.zeros(n, dtype=np.int64)
        kern.dense_lu(lu, piv)
        kern.dense_lu_solve(lu, piv, b.copy())
    return run


def csr_case(kern, n):
    csr = sp.random_array((n, n), density=5.0 / n, rng=np.random.default_rng(2), format="csr")
    indptr = csr.indptr.astype(np.int64)
    indices = csr.indices.astype(np.int64)
    x = np.ones((n, 4))
    out = np.empty((n, 4))

    def run():
        out[:] = 0.0
        kern.csr_matmat(indptr, indices, csr.data, x, out)
    return run


def element_case(kern, nel, p=3):
    rng = np.random.default_rng(3)
    nb, nq = p + 1, p + 1
    phi = rng.standard_normal((nel, nq, nb))
    dphi = rng.standard_normal((nel, nq, nb))
    w = rng.uniform(size=(nel, nq))
    coef = rng.uniform(1, 2, (nel, nel, nq, nq))
    out = np.empty((nel, nel, nb * nb, nb * nb))

    def run():
        kern.element_matrices_2d(phi, dphi, w, phi, dphi, w, coef, out)
    return run


def solve_case(backend, n):
    A = assemble(ProblemSpec("fd1d", n)).A
    part = make_partition(n, 8, min(10, n // 8))
    b = np.ones(n)

    def run():
        P = setup(A, part, "brms", backend=backend)
        gmres(A, b, P=P)
    return run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=2560)
    args = ap.parse_args()
    n = args.n
    cases = [
        ("band LU + solve", lambda k, b: band_case(k, n * 8)),
        ("dense LU + solve", lambda k, b: dense_case(k, 200)),
        ("CSR x 4 columns", lambda k, b: csr_case(k, n * 8)),
        ("2D element matrices p=3", lambda k, b: element_case(k, 32)),
        ("BRMS setup + PGMRES", lambda k, b: solve_case(b, n)),
    ]
    print(f"{'case':<26}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for name, make in cases:
        t = {}
        for backend in ("numba", "numpy"):
            t[backend] = best_of(make(get_kernels(backend), backend), args.repeat)
        print(f"{name:<26}{1e3 * t['numba']:>12.3f}{1e3 * t['numpy']:>12.3f}{t['numpy'] / t['numba']:>9.1f}x")


if __name__ == "__main__":
    main()
