import numpy as np
import pytest
from hypothesis import given, strategies as st

from gltschwarz.assembly import ProblemSpec, assemble
from gltschwarz.partition import make_partition
from gltschwarz.schwarz import KINDS, SetupError, apply_iteration, dense_inverse_image, setup
from gltschwarz.spectra import eigenvalues_dense

MULTIPLICATIVE = ("bgs", "bms", "brms")


def fd(n):
    return assemble(ProblemSpec("fd1d", n)).A


def abs_theta(n):
    return assemble(ProblemSpec("toeplitz_abs_theta", n)).A


def dense_sweep_operator(A, part, scheme):
    """Dense ``I - prod_i (I - W_i^T A_i^{-1} R_i A)`` applied to ``A^{-1}``.

    Built from explicit restriction matrices; shares no code with the
    sweep in the package.
    """
    a = A.todense()
    n = a.shape[0]
    cover = np.zeros(n)
    for lo, hi in part.extended:
        cover[lo:hi] += 1
    prod = np.eye(n)
    for (lo, hi), (rlo, rhi) in zip(part.extended, part.restricted):
        R = np.eye(n)[lo:hi]
        w = np.ones(hi - lo)
        if scheme == "restricted":
            w[:] = 0.0
            w[rlo - lo:rhi - lo] = 1.0
        elif scheme == "average":
            w = 1.0 / cover[lo:hi]
        W = np.diag(w) @ R
        ai = np.linalg.inv(R @ a @ R.T)
        prod = (np.eye(n) - W.T @ ai @ R @ a) @ prod
    return (np.eye(n) - prod) @ np.linalg.inv(a)


def test_single_subdomain_is_exact_solve(rng):
    A = fd(30)
    r = rng.standard_normal(30)
    for kind in KINDS:
        P = setup(A, make_partition(30, 1, 0), kind)
        z = P.apply_inverse(r)
        assert np.linalg.norm(A @ z - r) <= 1e-10 * np.linalg.norm(r)
        np.testing.assert_allclose(apply_iteration(P, A, r), 0.0, atol=1e-10)
        assert len(P.factors) == 1


def test_bj_local_blocks():
    P = setup(fd(40), make_partition(40, 2, 0), "bj")
    assert P.local_dims == (20, 20)
    inv = dense_inverse_image(P)
    t = np.linalg.inv(fd(20).todense())
    np.testing.assert_allclose(inv[:20, :20], t, atol=1e-12)
    np.testing.assert_allclose(inv[20:, 20:], t, atol=1e-12)
    assert np.all(inv[:20, 20:] == 0) and np.all(inv[20:, :20] == 0)


def test_bas_local_dims_with_overlap_30():
    P = setup(abs_theta(320), make_partition(320, 2, 30), "bas")
    assert P.local_dims == (190, 190)


def test_coincidence_without_overlap(rng):
    A = abs_theta(48)
    part = make_partition(48, 4, 0)
    r = rng.standard_normal(48)
    np.testing.assert_allclose(setup(A, part, "bas").apply_inverse(r),
                               setup(A, part, "bj").apply_inverse(r), atol=1e-12)
    np.testing.assert_allclose(setup(A, part, "bms").apply_inverse(r),
                               setup(A, part, "bgs").apply_inverse(r), atol=1e-12)
    np.testing.assert_allclose(setup(A, part, "bas").apply_iteration(r),
                               r - setup(A, part, "bj").apply_inverse(A @ r), atol=1e-12)


def test_bms_sweep_matches_dense_formula(rng):
    A = abs_theta(40)
    part = make_partition(40, 2, 10)
    r = rng.standard_normal(40)
    z = setup(A, part, "bms").apply_inverse(r)
    want = dense_sweep_operator(A, part, "full") @ r
    assert np.linalg.norm(z - want) <= 1e-10 * np.linalg.norm(want)


def test_brms_product_form_agrees(rng):
    A = fd(60)
    P = setup(A, make_partition(60, 3, 5), "brms")
    v = rng.standard_normal(60)
    np.testing.assert_allclose(P.iteration_product(v), v - P.apply_inverse(A @ v), atol=1e-12)


def test_bas_dense_image_symmetric():
    inv = dense_inverse_image(setup(fd(40), make_partition(40, 2, 10), "bas"))
    assert np.abs(inv - inv.T).max() <= 1e-10


def test_block_rhs_matches_columns(rng):
    A = fd(50)
    P = setup(A, make_partition(50, 3, 4), "brms")
    R = rng.standard_normal((50, 3))
    Z = P.apply_inverse(R)
    for k in range(3):
        np.testing.assert_allclose(Z[:, k], P.apply_inverse(R[:, k]), atol=1e-14)


def test_setup_errors():
    A = fd(40)
    with pytest.raises(SetupError):
        setup(A, make_partition(40, 2, 5), "bj")
    with pytest.raises(SetupError):
        setup(A, make_partition(40, 2, 0), "bgs", scheme="restricted")
    with pytest.raises(SetupError):
        setup(A, make_partition(40, 16, 5), "bas")
    with pytest.raises(SetupError):
        setup(A, make_partition(30, 2, 0), "bas")
    with pytest.raises(SetupError):
        setup(A, make_partition(40, 2, 0), "xyz")
    with pytest.raises(ValueError):
        setup(A, make_partition(40, 2, 0), "bj").apply_inverse(np.ones(3))
    with pytest.raises(SetupError):
        setup(A, make_partition(40, 2, 0), "bj").iteration_product(np.ones(40))


def test_default_schemes_and_describe():
    A = fd(40)
    part = make_partition(40, 2, 5)
    assert setup(A, part, "BRAS").scheme == "restricted"
    assert setup(A, part, "brms").scheme == "restricted"
    assert setup(A, part, "bms").scheme == "full"
    assert setup(A, part, "bas", scheme="average").describe() == "BAS(nu=2, o=5, scheme=average)"


def test_reverse_sweep(rng):
    A = fd(40)
    part = make_partition(40, 2, 5)
    r = rng.standard_normal(40)
    fwd = setup(A, part, "bms").apply_inverse(r)
    rev = setup(A, part, "bms", reverse=True).apply_inverse(r)
    assert not np.allclose(fwd, rev)
    P = setup(A, part, "bms", reverse=True)
    np.testing.assert_allclose(P.iteration_product(r), r - P.apply_inverse(A @ r), atol=1e-12)


@pytest.mark.parametrize("kind,o", [("bj", 0), ("bas", 5), ("bas", 10)])
def test_additive_preconditioned_spectrum_real_positive(kind, o):
    A = fd(80)
    P = setup(A, make_partition(80, 2, o), kind)
    inv = P.dense_inverse_image()
    ev = eigenvalues_dense(inv @ A.todense(), hermitian=False)
    assert np.abs(ev.imag).max() <= 1e-8 and ev.real.min() > 0
    assert np.linalg.eigvalsh(0.5 * (inv + inv.T)).min() > 0


@pytest.mark.parametrize("n", [160, 320])
@pytest.mark.parametrize("o", [5, 10])
def test_bas_overlap_cluster_at_two(n, o):
    # the overlap region is counted twice, so P^{-1} A ~ a_1 + a_2 = 2 there
    P = setup(fd(n), make_partition(n, 2, o), "bas")
    ev = P.dense_inverse_image() @ P.A.todense()
    ev = eigenvalues_dense(ev, hermitian=False)
    assert 2 * o - 4 <= np.sum(np.abs(ev - 2.0) < 0.1) <= 2 * o + 4


@st.composite
def configs(draw):
    n = draw(st.integers(8, 60))
    nu = draw(st.integers(1, 5))
    if nu > n:
        nu = n
    o = draw(st.integers(0, n // nu))
    kind = draw(st.sampled_from(MULTIPLICATIVE if o == 0 else ("bms", "brms")))
    scheme = draw(st.sampled_from(["full", "restricted", "average"])) if kind != "bgs" else None
    family = draw(st.sampled_from(["fd1d", "toeplitz_abs_theta"]))
    return family, n, nu, o, kind, scheme, draw(st.integers(0, 2**32 - 1))


@given(configs())
def test_sweep_matches_dense_formula_random(cfg):
    family, n, nu, o, kind, scheme, seed = cfg
    A = assemble(ProblemSpec(family, n)).A
    part = make_partition(n, nu, o)
    P = setup(A, part, kind, scheme=scheme)
    r = np.random.default_rng(seed).standard_normal(n)
    want = dense_sweep_operator(A, part, P.scheme) @ r
    assert np.linalg.norm(P.apply_inverse(r) - want) <= 1e-10 * np.linalg.norm(want)
    v = np.random.default_rng(seed + 1).standard_normal(n)
    np.testing.assert_allclose(P.iteration_product(v), P.apply_iteration(v), atol=1e-10)
