import itertools
import math

import numpy as np
import pytest
from scipy import integrate

from s4rg.gauss import GaussianBlock, central_moment, cumulant_map, expectation, log_norm, log_norm_constant, wick_moment
from s4rg.maps import Couplings, nn_unit_block
from s4rg.oracle import hermite_moment, quad_central_moment, quad_moment_2d
from s4rg.poly import const, monomial, project_basis, var

sa, sb, s1 = var("s_a"), var("s_b"), var("s_1")


def nn_block(K, b, u=0.0):
    return nn_unit_block(Couplings(K, u, 0.0, b))


@pytest.mark.parametrize("k,var_,expected", [(4, 1.0, 3.0), (8, 1.0, 105.0), (3, 2.0, 0.0), (0, 0.7, 1.0)])
def test_central_moment_exact(k, var_, expected):
    assert central_moment(k, var_) == expected


def test_central_moment_quadrature():
    # adaptive quadrature of t^4 e^{-2t^2} / e^{-2t^2}: 3/16
    assert quad_central_moment(4, 0.25) == pytest.approx(3 / 16, rel=1e-10)
    assert central_moment(4, 0.25) == 3 / 16
    with pytest.raises(ValueError):
        central_moment(2, 0.0)


def test_wick_examples():
    rho = 0.3
    cov = [[1, rho], [rho, 1]]
    assert wick_moment((2, 0), np.eye(2)) == 1
    assert wick_moment((1, 1), cov) == pytest.approx(0.3)
    oracle = quad_moment_2d((2, 2), cov)
    assert oracle == pytest.approx(1.18, rel=1e-8)
    assert wick_moment((2, 2), cov) == pytest.approx(oracle, rel=1e-8)
    assert wick_moment((1, 2), cov) == 0
    with pytest.raises(ValueError):
        wick_moment((1, 1, 0), cov)


COV3 = np.array([[1.3, 0.4, -0.2], [0.4, 0.8, 0.25], [-0.2, 0.25, 0.6]])


def test_wick_matches_dense_quadrature_all_monomials():
    for exps in itertools.product(range(9), repeat=3):
        if sum(exps) > 8:
            continue
        w, q = wick_moment(exps, COV3), hermite_moment(exps, COV3)
        assert w == pytest.approx(q, rel=1e-8, abs=1e-12), exps


def test_wick_matches_adaptive_quadrature_2d():
    cov = COV3[:2, :2]
    for exps in [(1, 1), (3, 1), (2, 4), (5, 3), (0, 6)]:
        assert wick_moment(exps, cov) == pytest.approx(quad_moment_2d(exps, cov), rel=1e-8)


def test_block_invariants():
    with pytest.raises(ValueError):
        GaussianBlock(("s_1",), np.array([[-1.0]]), (sa,))
    with pytest.raises(ValueError):
        GaussianBlock(("s_1", "s_2"), np.array([[2.0, 1.0], [0.0, 2.0]]), (sa, sb))
    with pytest.raises(ValueError):
        GaussianBlock(("s_1",), np.array([[1.0]]), (s1,))


def test_log_norm_nn_unit():
    block, _ = nn_block(1.0, 1.0)
    bc = project_basis(log_norm(block))
    assert bc.c_ss == pytest.approx(1.0)
    assert bc.c_s2 == pytest.approx(1 / 2 - 1)


def test_log_norm_zero_linear_is_passthrough():
    pt = 3 * sa * sb - sb**4
    block = GaussianBlock(("s_1",), np.array([[2.0]]), (const(0.0),), pt)
    assert log_norm(block) == pt


def test_log_norm_nn_unit_K2_by_quadrature():
    K, b = 2.0, 1.0
    block, _ = nn_block(K, b)

    def logI(x, y):
        val, _ = integrate.quad(lambda s: math.exp(2 * K * (x + y) * s - 2 * b * s * s), -15, 15, epsrel=1e-12)
        return math.log(val)

    # ln I(x,y) - ln I(x,0) - ln I(0,y) + ln I(0,0) isolates c_ss * x y
    grid = [(-0.5, 0.3), (0.4, 0.7), (0.25, -0.6)]
    fits = [(logI(x, y) - logI(x, 0) - logI(0, y) + logI(0, 0)) / (x * y) for x, y in grid]
    assert fits == pytest.approx([4.0] * 3, rel=1e-9)
    assert project_basis(log_norm(block)).c_ss == pytest.approx(4.0, rel=1e-12)


def test_log_norm_constant():
    block, _ = nn_block(1.0, 1.0)
    assert log_norm_constant(block) == pytest.approx(0.5 * math.log(2 * math.pi) - 0.5 * math.log(4.0))


def test_expectation_mean_and_first_order():
    K, b, u = 0.9, 1.4, 0.3
    block, V = nn_block(K, b, u)
    assert expectation(block, s1).allclose((sa + sb) * (K / (2 * b)), rtol=1e-14)
    bc = project_basis(expectation(block, V))
    assert bc.c_ss == pytest.approx(-3 * K**2 * u / b**3, rel=1e-12)


def test_expectation_s1_quartic_by_quadrature():
    K, b = 0.7, 1.3
    block, _ = nn_block(K, b)
    poly = expectation(block, s1**4)
    for x, y in itertools.product(np.linspace(-1, 1, 5), repeat=2):
        w = lambda s: math.exp(2 * K * (x + y) * s - 2 * b * s * s)  # noqa: E731
        num, _ = integrate.quad(lambda s: s**4 * w(s), -12, 12, epsrel=1e-12)
        den, _ = integrate.quad(w, -12, 12, epsrel=1e-12)
        assert poly.evaluate({"s_a": x, "s_b": y}) == pytest.approx(num / den, rel=1e-9)


def test_expectation_completed_square():
    K, b = 0.6, 0.8
    block, _ = nn_block(K, b)
    mean = (sa + sb) * (K / (2 * b))
    var_ = expectation(block, s1 * s1) - expectation(block, s1) ** 2
    assert expectation(block, s1).allclose(mean)
    assert var_.allclose(const(1 / (4 * b)), atol=1e-14)


def test_expectation_linear_and_boundary_identity():
    block, _ = nn_block(0.8, 1.1, 0.2)
    P, Q = s1**3 * sa - 2 * s1**2, 0.5 * s1**4 + sb
    assert expectation(block, P + 3 * Q).allclose(expectation(block, P) + 3 * expectation(block, Q), rtol=1e-12)
    B = sa**2 * sb - 4 * sb**3
    assert expectation(block, B) == B


def test_expectation_two_site_block():
    A = np.array([[3.0, -0.5], [-0.5, 2.0]])
    block = GaussianBlock(("s_1", "s_2"), A, (sa * 0.7, sb * 0.4 + sa * 0.1))
    P = var("s_1") ** 2 * var("s_2") ** 2
    cov = np.linalg.inv(A)
    mu = np.linalg.solve(A, [0.7 * 0.3, 0.4 * -0.5 + 0.1 * 0.3])
    # E[(mu1+t1)^2 (mu2+t2)^2] at (s_a, s_b) = (0.3, -0.5), by Gauss-Hermite in whitened coordinates
    z, w = np.polynomial.hermite_e.hermegauss(10)
    w = w / math.sqrt(2 * math.pi)
    L = np.linalg.cholesky(cov)
    tot = 0.0
    for i, j in itertools.product(range(10), repeat=2):
        t = L @ np.array([z[i], z[j]])
        tot += w[i] * w[j] * (mu[0] + t[0]) ** 2 * (mu[1] + t[1]) ** 2
    assert expectation(block, P).evaluate({"s_a": 0.3, "s_b": -0.5}) == pytest.approx(tot, rel=1e-12)


def test_cumulant_map_zero_perturbation():
    block, _ = nn_block(1.1, 0.9)
    res = cumulant_map(block, const(0.0), 2)
    assert res.h_prime.allclose(log_norm(block))
    assert res.per_order[1].is_zero() and res.per_order[2].is_zero()


def test_cumulant_map_sum_and_orders():
    block, V = nn_block(0.7, 1.2, 0.3)
    res = cumulant_map(block, V, 2)
    assert res.h_prime.allclose(res.per_order[0] + res.per_order[1] + res.per_order[2], rtol=1e-12, atol=1e-12)
    assert len(cumulant_map(block, V, 1).per_order) == 2
    with pytest.raises(ValueError):
        cumulant_map(block, V, 3)


def test_first_order_matches_published_block():
    K, b, u = 1.0, 1.0, 1.0
    block, V = nn_block(K, b, u)
    bc = project_basis(cumulant_map(block, V, 1).per_order[1])
    assert bc.as_tuple()[:3] == pytest.approx((-3.0, -1.5, -0.25), rel=1e-12)


def test_second_cumulant_shift_invariant():
    block, V = nn_block(0.8, 1.0, 0.4)
    a = cumulant_map(block, V, 2).per_order[2]
    b = cumulant_map(block, V + 7.5, 2).per_order[2]
    assert a.allclose(b, rtol=1e-9, atol=1e-9)


def test_second_order_engine_vs_quadrature_at_unit_point():
    from s4rg.oracle import basis_from_fit, fit_boundary_polynomial, unit_second_cumulant

    block, V = nn_block(1.0, 1.0, 1.0)
    eng = project_basis(cumulant_map(block, V, 2).per_order[2])
    fit = fit_boundary_polynomial(lambda x, y: unit_second_cumulant(1.0, 1.0, 1.0, x, y), 9, 1.0, 8)
    assert basis_from_fit(fit) == pytest.approx(eng.as_tuple(), rel=1e-8, abs=1e-9)
    # quadrature-confirmed value; differs from the tabulated 105/4
    assert eng.c_ss == pytest.approx(24.0, rel=1e-12)
