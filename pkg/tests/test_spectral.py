import numpy as np
import pytest
import scipy.special as sp
from hypothesis import given
from hypothesis import strategies as st

from polefree.errors import DegenerateError, DomainError
from polefree.spectral import (
    CoefficientApprox,
    EigenProblem,
    approximate,
    assemble_bessel_multiple,
    assemble_bessel_single,
    bessel_j,
    bessel_j_roots,
    bessel_y,
    build_grid,
    eigenvalue_ratio_error,
    multiple_coefficients,
    multiple_interval,
    reference_eigenvalues,
    refine_eigenvalues,
    run_table,
    single_coefficient,
    solve_eigen,
)

J21_SQ = 26.374616427163  # 5.135622301840683**2


# -- grid ------------------------------------------------------------------


@pytest.mark.parametrize("interval", [(0.0, 1.0), (0.0, np.log(2.0)), (-2.0, 3.0)])
def test_grid_identities(interval):
    g = build_grid(64, interval)
    x = g.nodes
    assert x[0] == interval[0] and x[-1] == interval[1]
    assert np.all(np.diff(x) > 0)
    np.testing.assert_allclose(g.D1 @ x, 1.0, atol=1e-9)
    np.testing.assert_allclose(g.D1.sum(axis=1), 0.0, atol=1e-10)
    np.testing.assert_allclose(g.D2 @ x**2, 2.0, atol=1e-8)
    np.testing.assert_allclose(g.D2, g.D1 @ g.D1, rtol=1e-8, atol=1e-8 * np.abs(g.D2).max())


def test_grid_exact_on_polynomials():
    g = build_grid(256)
    x = g.nodes
    np.testing.assert_allclose(g.D1 @ x, 1.0, atol=1e-9)
    np.testing.assert_allclose(g.D1.sum(axis=1), 0.0, atol=1e-10)
    np.testing.assert_allclose(g.D2 @ x**2, 2.0, atol=1e-8)


def test_grid_needs_four_points():
    with pytest.raises(DomainError):
        build_grid(3)


# -- Bessel functions --------------------------------------------------------


def test_bessel_trivial_values():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(2, 0.0) == 0.0
    assert abs(bessel_j(2, 5.135622301840683)) < 1e-9
    assert bessel_j(-3, 2.0) == pytest.approx(-bessel_j(3, 2.0))


@pytest.mark.parametrize("m", [0, 1, 2, 3, 5, 8])
def test_bessel_j_against_scipy(m):
    x = np.linspace(0.0, 60.0, 601)
    got = np.array([bessel_j(m, v) for v in x])
    np.testing.assert_allclose(got, sp.jv(m, x), rtol=0, atol=1e-10)


@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_bessel_y_against_scipy(m):
    x = np.linspace(0.05, 60.0, 300)
    got = np.array([bessel_y(m, v) for v in x])
    want = sp.yv(m, x)
    # absolute 1e-10 wherever |Y| is O(1); near the origin Y blows up and we ask for 1e-13 relative
    tol = np.maximum(1e-10, 1e-13 * np.abs(want))
    assert np.all(np.abs(got - want) <= tol)


def test_bessel_y_domain():
    with pytest.raises(DomainError):
        bessel_y(1, 0.0)
    with pytest.raises(DomainError):
        bessel_j(1, -1.0)


@given(st.floats(1.0, 30.0), st.integers(0, 4))
def test_wronskian(x, m):
    w = bessel_j(m + 1, x) * bessel_y(m, x) - bessel_j(m, x) * bessel_y(m + 1, x)
    assert abs(w - 2 / (np.pi * x)) < 1e-9


def test_reference_eigenvalues():
    assert reference_eigenvalues(2, 1)[0] == pytest.approx(J21_SQ, abs=1e-9)
    assert reference_eigenvalues(0, 1)[0] == pytest.approx(2.404825557695773**2, rel=1e-11)
    r = bessel_j_roots(2, 20)
    assert np.all(np.diff(r) > 0)
    from scipy.special import jn_zeros

    np.testing.assert_allclose(r, jn_zeros(2, 20), atol=2e-12)


# -- pencils and eigenvalues ---------------------------------------------------


def test_solve_eigen_diagonal():
    d = np.array([5.0, 1.0, 3.0, 2.0, 4.0])
    res = solve_eigen(EigenProblem(np.diag(d), np.eye(5)), 3)
    np.testing.assert_allclose(res.values, [1.0, 2.0, 3.0])
    assert not res.flagged.any()
    with pytest.raises(DomainError):
        solve_eigen(EigenProblem(np.diag(d), np.eye(5)), 4)


def test_dirichlet_laplacian():
    # a = 1, m = 0 and p = 1 gives y'' = -lambda y on [0, 1]
    coeff = CoefficientApprox([lambda x: np.ones_like(x)])
    prob = assemble_bessel_single(coeff, 1.0, 0, build_grid(128))
    assert not prob.B[0].any() and not prob.B[-1].any()
    lam = solve_eigen(prob, 10).values
    np.testing.assert_allclose(lam, (np.pi * np.arange(1, 11)) ** 2, rtol=1e-8)


def test_single_exact_coefficient():
    a, m = 4.0, 2
    coeff = approximate(single_coefficient(a), (0, 1), "exact", 0)
    lam = solve_eigen(assemble_bessel_single(coeff, a, m, build_grid(256)), 20).values
    errs = [eigenvalue_ratio_error(v, a, m) for v in lam]
    assert max(errs) < 1e-6
    # the ratio is so steep that a 1e-12 relative shift in lambda_1 costs ~3e-7;
    # one extended-precision inverse-iteration pass takes it below 1e-9
    ld = assemble_bessel_single(coeff, a, m, build_grid(256, dtype=np.longdouble))
    lam1 = float(refine_eigenvalues(ld, lam[:1])[0])
    assert eigenvalue_ratio_error(lam1, a, m) < 1e-9


def test_ratio_error_off_spectrum():
    a, m = 4.0, 2
    coeff = approximate(single_coefficient(a), (0, 1), "exact", 0)
    lam = solve_eigen(assemble_bessel_single(coeff, a, m, build_grid(128)), 3).values
    assert eigenvalue_ratio_error(0.5 * (lam[0] + lam[1]), a, m) > 1e-2
    with pytest.raises(DomainError):
        eigenvalue_ratio_error(-1.0, a, m)


def test_multiple_exact_coefficients():
    iv = multiple_interval(1.0)
    coeff = approximate(multiple_coefficients(1.0), iv, "exact", 0)
    lam = solve_eigen(assemble_bessel_multiple(coeff, 1.0, 2, build_grid(256, iv)), 20).values
    assert lam[0] == pytest.approx(J21_SQ, rel=1e-7)
    np.testing.assert_allclose(lam, reference_eigenvalues(2, 20), rtol=1e-8)


def test_scaling_the_shared_representation_leaves_eigenvalues():
    iv = multiple_interval(1.0)
    coeff = approximate(multiple_coefficients(1.0), iv, "rational", 5)
    g = build_grid(128, iv)
    base = solve_eigen(assemble_bessel_multiple(coeff, 1.0, 2, g), 15).values
    for c in (1e-3, 7.0, 1e4):
        scaled = solve_eigen(assemble_bessel_multiple(coeff.scaled(c), 1.0, 2, g), 15).values
        np.testing.assert_allclose(scaled, base, rtol=1e-10)


def test_grid_convergence_of_reference_runs():
    a, m = 4.0, 2
    coeff = approximate(single_coefficient(a), (0, 1), "exact", 0)
    l128 = solve_eigen(assemble_bessel_single(coeff, a, m, build_grid(128)), 20).values
    l256 = solve_eigen(assemble_bessel_single(coeff, a, m, build_grid(256)), 20).values
    np.testing.assert_allclose(l128, l256, rtol=1e-9)


def test_nonpositive_denominator_rejected():
    coeff = CoefficientApprox([lambda x: np.ones_like(x)], lambda x: x - 0.5, "rational")
    with pytest.raises(DegenerateError):
        assemble_bessel_single(coeff, 1.0, 0, build_grid(16))


def test_unknown_mode():
    with pytest.raises(DomainError):
        approximate(single_coefficient(1.0), (0, 1), "spline", 3)


# -- tables ------------------------------------------------------------------


@pytest.fixture(scope="module")
def table_single():
    return run_table("single", range(4, 11))


@pytest.fixture(scope="module")
def table_multiple():
    return run_table("multiple", range(4, 11))


def test_rational_beats_polynomial_single(table_single):
    by = {(r.num_coefs, r.mode): r for r in table_single}
    for n in (5, 6, 7):
        assert by[n, "rational"].eig_error * 1e2 <= by[n, "polynomial"].eig_error


def test_table_approximation_error_e8x(table_single):
    by = {(r.num_coefs, r.mode): r for r in table_single}
    assert by[6, "polynomial"].approx_error == pytest.approx(88.85, rel=1e-3)
    assert by[6, "rational"].approx_error < 1.6436e-4


@pytest.mark.parametrize("which", ["single", "multiple"])
def test_eigen_error_tracks_coefficient_error(which, request):
    rows = request.getfixturevalue(f"table_{which}")
    for mode in ("polynomial", "rational"):
        sel = [r for r in rows if r.mode == mode]
        for r in sel:
            for s in sel:
                if r.approx_error < s.approx_error:
                    assert r.eig_error <= 10 * s.eig_error


def test_table_cardinality(table_multiple):
    assert len(table_multiple) == 14
    assert {r.mode for r in table_multiple} == {"polynomial", "rational"}


def test_unknown_case():
    with pytest.raises(DomainError):
        run_table("triple", [3])
