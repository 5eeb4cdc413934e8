import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gltschwarz import symbols as sy
from gltschwarz.assembly import ProblemSpec, assemble
from gltschwarz.partition import make_partition
from gltschwarz.schwarz import setup
from gltschwarz.spectra import (
    SpectraError,
    cluster_count,
    compare_to_symbol,
    eigenvalues_dense,
    eigs_to_csv,
    spectrum_of,
    trim_budget,
)

from conftest import tridiag


def fd_precond(n, nu, o, kind):
    A = assemble(ProblemSpec("fd1d", n)).A
    return setup(A, make_partition(n, nu, o), kind)


def test_eigenvalues_small_examples():
    np.testing.assert_allclose(eigenvalues_dense(np.diag([1.0, 2.0, 3.0])), [1, 2, 3])
    ev = eigenvalues_dense(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    np.testing.assert_allclose(np.sort_complex(ev), [-1j, 1j], atol=1e-15)


def test_eigenvalues_tridiagonal_analytic():
    want = [2 - 2 * math.cos(j * math.pi / 6) for j in range(1, 6)]
    np.testing.assert_allclose(eigenvalues_dense(tridiag(5)), want, atol=1e-10)


def test_eigenvalues_guards():
    with pytest.raises(SpectraError):
        eigenvalues_dense(np.ones((2, 3)))


def test_compare_exact_samples():
    n = 50
    samples = sy.symbol_eig_branches(sy.laplacian(), n_theta=n).branch_values[0]
    rep = compare_to_symbol(samples[::-1], sy.laplacian(), n=n)
    assert rep.mean_error == [0.0] and rep.max_error == [0.0]


def test_compare_tridiagonal_toeplitz_converges():
    errs = []
    for n in (100, 200):
        ev = eigenvalues_dense(tridiag(n))
        errs.append(compare_to_symbol(ev, sy.laplacian()).total_mean_error)
    assert errs[0] <= 0.02 and errs[1] < errs[0]


def test_compare_spline_branches_converge():
    reps = []
    for n in (100, 200):
        A = assemble(ProblemSpec("spline1d_c0", n, None, 2)).A
        reps.append(compare_to_symbol(eigenvalues_dense(A.todense()), sy.spline_c0(2), n=n))
    # the first branch is reproduced exactly (interior bubble modes), so
    # only its roundoff level is checked
    first, second = zip(reps[0].mean_error, reps[1].mean_error)
    assert max(first) <= 1e-12
    assert second[1] < second[0]
    assert reps[0].s == 2 and reps[0].dim == 199


def test_compare_report_fields():
    ev = np.concatenate([eigenvalues_dense(tridiag(30)), [50.0]]) + 0j
    ev[0] += 1j
    rep = compare_to_symbol(ev, sy.laplacian())
    assert rep.discarded_imag == 1
    assert rep.trim_count == trim_budget(31) == 23
    assert 50.0 in rep.outliers
    assert set(rep.to_dict()) >= {"mean_error", "max_error", "outliers"}


def test_cluster_count_examples():
    rep = cluster_count(np.ones(10), [0.1, 0.01])
    assert rep.counts == [0, 0] and rep.fractions == [0.0, 0.0]
    rep = cluster_count([1.0, 1.05, 1.2, 1 + 0.5j], [0.1, 0.04])
    assert rep.counts == [2, 3]


@pytest.mark.parametrize("n", [80, 160])
def test_cluster_bas_and_bms(n):
    bas = spectrum_of(fd_precond(n, 2, 5, "bas"), "precond-applied")
    assert abs(cluster_count(bas, [0.1]).counts[0] - 12) <= 2
    bms = spectrum_of(fd_precond(n, 2, 5, "bms"), "precond-applied")
    assert abs(cluster_count(bms, [0.1]).counts[0] - 1) <= 1


def test_reciprocal_identity_block_jacobi():
    n = 60
    P = fd_precond(n, 2, 0, "bj")
    blocks = np.concatenate([np.linalg.eigvalsh(tridiag(30))] * 2)
    np.testing.assert_allclose(np.sort(spectrum_of(P, "precond").real), np.sort(blocks), atol=1e-8)


def test_spectrum_of_rejects_unknown():
    with pytest.raises(SpectraError):
        spectrum_of(fd_precond(20, 2, 0, "bj"), "bogus")


@pytest.mark.parametrize("kind,o", [("bj", 0), ("bms", 0), ("bras", 0), ("brms", 0),
                                    ("bms", 10), ("bras", 10), ("brms", 10)])
def test_iteration_operator_clusters_at_zero(kind, o):
    frac = []
    for n in (40, 80, 160):
        ev = spectrum_of(fd_precond(n, 2, o, kind), "iteration")
        frac.append(np.mean(np.abs(ev) > 0.1))
    assert frac[0] > frac[1] > frac[2]


def test_bas_overlap_stays_within_half_of_one_after_trim():
    n = 320
    ev = spectrum_of(fd_precond(n, 2, 10, "bas"), "precond-applied")
    far = np.sort(np.abs(1 - ev))[::-1]
    assert np.abs(ev.imag).max() <= 1e-8
    assert np.all(far[trim_budget(n):] <= 0.55)


def test_csv_output():
    text = eigs_to_csv(np.array([1.0, 2.0 + 1j]), extra={"sym": [0.5]})
    lines = text.splitlines()
    assert lines[0] == "re,im,sym"
    assert lines[1] == "1.0,0.0,0.5" and lines[2] == "2.0,1.0,"


@given(st.integers(2, 60), st.integers(0, 2**32 - 1), st.sampled_from([1, 2, 3]))
def test_compare_permutation_invariant(n, seed, p):
    r = np.random.default_rng(seed)
    sym = sy.laplacian() if p == 1 else sy.spline_c0(p)
    ev = r.uniform(0, 4, size=max(n, sym.s))
    a = compare_to_symbol(ev, sym).to_dict()
    b = compare_to_symbol(r.permutation(ev), sym).to_dict()
    assert a == b
