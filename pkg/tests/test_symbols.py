import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gltschwarz import symbols as sy


SPLINE2_F0 = np.array([[4.0, -2.0], [-2.0, 8.0]]) / 3.0
SPLINE2_F1 = np.array([[0.0, -2.0], [0.0, -2.0]]) / 3.0


def test_laplacian_vanishes_at_zero():
    assert sy.eval_symbol(sy.laplacian(), theta=0.0)[0, 0] == 0.0


def test_spline2_at_pi_is_diagonal():
    val = sy.eval_symbol(sy.spline_c0(2), theta=math.pi)
    np.testing.assert_allclose(val, np.diag([4.0, 12.0]) / 3.0, atol=1e-15)


def test_weighted_coefficient_substitution():
    a = sy.coefficient(lambda x: 1.0 + x * x, "1+x^2")
    sym = sy.weighted(a, sy.laplacian())
    assert sy.eval_symbol(sym, x=1.0, theta=math.pi)[0, 0] == pytest.approx(8.0)


def test_eval_shape_and_domain_checks():
    with pytest.raises(sy.SymbolError):
        sy.eval_symbol(sy.laplacian(), theta=4.0)
    with pytest.raises(sy.SymbolError):
        sy.eval_symbol(sy.laplacian(), x=(0.1, 0.2))
    assert sy.eval_symbol(sy.spline_c0(3), theta=0.3).shape == (3, 3)


def test_branches_of_laplacian_on_four_points():
    got = sy.symbol_eig_branches(sy.laplacian(), n_theta=4).branch_values[0]
    want = sorted([2 - 2 * math.cos(math.pi / 4), 2.0, 2 - 2 * math.cos(3 * math.pi / 4), 4.0])
    np.testing.assert_allclose(got, want, atol=1e-14)


def test_spline3_zero_eigenvalue_at_origin():
    val = sy.eval_symbol(sy.spline_c0(3), theta=0.0)
    np.testing.assert_allclose(val @ np.ones(3), 0.0, atol=1e-14)
    assert min(sy.hermitian_eigvals(val)) == pytest.approx(0.0, abs=1e-12)


def test_spline2_branch_extrema():
    b = sy.symbol_eig_branches(sy.spline_c0(2), n_theta=200).branch_values
    # grid starts at pi/200, so the minimum is only approached
    assert 0.0 <= b[0].min() < 1e-3
    assert b[1].max() == pytest.approx(4.0, abs=1e-12)


def test_spline2_branch_ranges_are_disjoint():
    # fine-grid oracle: dense 2x2 eigensolve of the symbol
    thetas = np.linspace(0, math.pi, 2001)
    ev = np.array([np.linalg.eigvalsh(sy.eval_symbol(sy.spline_c0(2), theta=t)) for t in thetas])
    assert ev[:, 0].max() == pytest.approx(4.0 / 3.0, abs=1e-9)
    assert ev[:, 1].min() == pytest.approx(8.0 / 3.0, abs=1e-9)
    assert ev[:, 0].max() < ev[:, 1].min()


def test_fourier_laplacian_exact():
    c = sy.fourier_coeffs(sy.laplacian(), 4)[:, 0, 0]
    np.testing.assert_allclose(c[4], 2.0, atol=1e-12)
    np.testing.assert_allclose(c[3], -1.0, atol=1e-12)
    np.testing.assert_allclose(c[5], -1.0, atol=1e-12)
    assert np.abs(c[[0, 1, 2, 6, 7, 8]]).max() <= 1e-10


def test_fourier_abs_theta():
    c = sy.fourier_coeffs(sy.abs_theta(), 2)[:, 0, 0]
    assert c[2] == pytest.approx(math.pi / 2, abs=1e-10)
    assert c[3] == pytest.approx(-2.0 / math.pi, abs=1e-10)
    assert abs(c[4]) <= 1e-10


def test_fourier_spline2():
    c = sy.fourier_coeffs(sy.spline_c0(2), 2)
    np.testing.assert_allclose(c[2], SPLINE2_F0, atol=1e-10)
    np.testing.assert_allclose(c[3], SPLINE2_F1, atol=1e-10)
    np.testing.assert_allclose(c[1], SPLINE2_F1.T, atol=1e-10)
    assert np.abs(c[[0, 4]]).max() <= 1e-10


def test_fourier_rejects_x_dependence():
    with pytest.raises(sy.SymbolError):
        sy.fourier_coeffs(sy.weighted(sy.coefficient(lambda x: x, "x"), sy.laplacian()), 1)


def test_samples_csv_header():
    text = sy.symbol_eig_branches(sy.laplacian(), n_theta=2).to_csv()
    assert text.splitlines()[0] == "branch,index,value"
    assert len(text.splitlines()) == 3


@pytest.mark.parametrize("sym", [sy.laplacian(), sy.abs_theta(), sy.spline_c0(2), sy.spline_c0(3),
                                 sy.weighted(sy.coefficient(lambda x: 1 + x * x, "a"), sy.spline_c0(2))],
                         ids=lambda s: s.label)
def test_hermitian_flag_consistent(sym):
    worst = 0.0
    for x in np.linspace(0, 1, 50):
        for t in np.linspace(-math.pi, math.pi, 50):
            v = sy.eval_symbol(sym, x=x, theta=t)
            worst = max(worst, np.abs(v - v.conj().T).max())
    assert sym.hermitian and worst <= 1e-12


@given(st.lists(st.floats(-3, 3, allow_nan=False), min_size=1, max_size=5),
       st.lists(st.floats(-3, 3, allow_nan=False), min_size=0, max_size=4))
def test_fourier_trig_polynomial_exact(cos_c, sin_c):
    def f(x, t):
        th = t[0]
        v = sum(a * math.cos(k * th) for k, a in enumerate(cos_c))
        return v + sum(b * math.sin((k + 1) * th) for k, b in enumerate(sin_c))

    m = max(len(cos_c) - 1, len(sin_c))
    sym = sy.Symbol(1, 1, f, "trig", hermitian=False)
    c = sy.fourier_coeffs(sym, m + 2, quad_points=256)[:, 0, 0]
    want = np.zeros(2 * m + 5, dtype=complex)
    mid = m + 2
    want[mid] += cos_c[0]
    for k, a in enumerate(cos_c[1:], start=1):
        want[mid + k] += a / 2
        want[mid - k] += a / 2
    for k, b in enumerate(sin_c, start=1):
        want[mid + k] += b / 2j
        want[mid - k] -= b / 2j
    np.testing.assert_allclose(c, want, atol=1e-10)


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1),
       st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_hermitian_eigvals_match_lapack(a, b, c, d, e, f):
    h = np.array([[a, b + 1j * e, c], [b - 1j * e, d, f], [c, f, a - d]])
    np.testing.assert_allclose(sy.hermitian_eigvals(h), np.linalg.eigvalsh(h), atol=1e-10)


@given(st.integers(1, 40), st.sampled_from([2, 3]))
def test_branches_ordered(n_theta, p):
    b = sy.symbol_eig_branches(sy.spline_c0(p), n_theta=n_theta).branch_values
    assert np.all(np.diff(b, axis=1) >= 0)
    # pointwise ordering before sorting
    for t in np.linspace(0.01, math.pi, n_theta):
        ev = sy.hermitian_eigvals(sy.eval_symbol(sy.spline_c0(p), theta=t))
        assert np.all(np.diff(ev) >= -1e-12)
