"""Quadrature cross-checks, independent of the Wick/cumulant engine.

Everything here integrates numerically (adaptive Gauss-Kronrod via
``scipy.integrate.quad`` or tensor Gauss-Hermite rules) and never touches
the pairing recursion in :mod:`s4rg.gauss`.
"""

from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np
from scipy import integrate

QUAD_TOL = 1e-10


def quad_central_moment(k: int, variance: float) -> float:
    sigma = math.sqrt(variance)
    lo, hi = -10 * sigma, 10 * sigma
    w = lambda t: math.exp(-0.5 * t * t / variance)  # noqa: E731
    num, _ = integrate.quad(lambda t: t**k * w(t), lo, hi, epsabs=0, epsrel=QUAD_TOL, limit=200)
    den, _ = integrate.quad(w, lo, hi, epsabs=0, epsrel=QUAD_TOL, limit=200)
    return num / den


def quad_moment_2d(exponents: Sequence[int], cov) -> float:
    """E[t1^a t2^b] under N(0, cov) by nested adaptive quadrature."""
    cov = np.asarray(cov, dtype=float)
    prec = np.linalg.inv(cov)
    s1, s2 = np.sqrt(np.diag(cov))
    a, b = exponents

    def dens(y, x):
        return math.exp(-0.5 * (prec[0, 0] * x * x + 2 * prec[0, 1] * x * y + prec[1, 1] * y * y))

    opts = dict(epsabs=0, epsrel=QUAD_TOL)
    num, _ = integrate.dblquad(lambda y, x: x**a * y**b * dens(y, x), -10 * s1, 10 * s1, -10 * s2, 10 * s2, **opts)
    den, _ = integrate.dblquad(dens, -10 * s1, 10 * s1, -10 * s2, 10 * s2, **opts)
    return num / den


def hermite_moment(exponents: Sequence[int], cov, nodes: int = 12) -> float:
    """E[prod t_i^k_i] under N(0, cov) with a tensor Gauss-Hermite rule.

    Exact (to rounding) for total degree < 2 * nodes.
    """
    cov = np.asarray(cov, dtype=float)
    n = len(exponents)
    chol = np.linalg.cholesky(cov)
    z, w = np.polynomial.hermite_e.hermegauss(nodes)
    w = w / math.sqrt(2 * math.pi)
    Z = np.stack(np.meshgrid(*([z] * n), indexing="ij"), axis=-1).reshape(-1, n)
    W = np.prod(np.stack(np.meshgrid(*([w] * n), indexing="ij"), axis=-1).reshape(-1, n), axis=1)
    T = Z @ chol.T
    return float(np.sum(W * np.prod(T ** np.asarray(exponents), axis=1)))


def _unit_exponent(s, K, b, u, h, sa, sb):
    return 2 * K * (sa + sb) * s - 2 * b * s * s - 4 * u * s**4 + 2 * h * s


def unit_log_trace(K: float, b: float, u: float, sa: float, sb: float, h: float = 0.0, boundary_field: float = 2.0) -> float:
    """ln of the exact single-site partial trace of the NN unit, boundary terms included."""
    sigma = 1 / math.sqrt(4 * b)
    mu = (2 * K * (sa + sb) + 2 * h) / (4 * b)
    peak = _unit_exponent(mu, K, b, u, h, sa, sb)
    f = lambda s: math.exp(_unit_exponent(s, K, b, u, h, sa, sb) - peak)  # noqa: E731
    val, _ = integrate.quad(f, mu - 12 * sigma, mu + 12 * sigma, epsabs=0, epsrel=1e-13, limit=400)
    boundary = -b * (sa * sa + sb * sb) - 2 * u * (sa**4 + sb**4) + boundary_field * h * (sa + sb)
    return math.log(val) + peak + boundary


def unit_second_cumulant(K: float, b: float, u: float, sa: float, sb: float, h: float = 0.0) -> float:
    """1/2(<V^2> - <V>^2) for V = -4u s1^4 under the Gaussian unit weight."""
    var = 1 / (4 * b)
    mu = (2 * K * (sa + sb) + 2 * h) / (4 * b)
    sigma = math.sqrt(var)
    w = lambda s: math.exp(-0.5 * (s - mu) ** 2 / var)  # noqa: E731
    opts = dict(epsabs=0, epsrel=1e-13, limit=200)
    lo, hi = mu - 10 * sigma, mu + 10 * sigma
    z, _ = integrate.quad(w, lo, hi, **opts)
    m1, _ = integrate.quad(lambda s: (-4 * u * s**4) * w(s), lo, hi, **opts)
    # central form keeps the subtraction well conditioned
    m1 /= z
    m2, _ = integrate.quad(lambda s: (-4 * u * s**4 - m1) ** 2 * w(s), lo, hi, **opts)
    return 0.5 * m2 / z


def _design(points: np.ndarray, monomials: Sequence[tuple[int, int]]) -> np.ndarray:
    return np.array([[x**i * y**j for i, j in monomials] for x, y in points])


def basis_from_fit(coeffs: dict[tuple[int, int], float]) -> tuple[float, float, float, float]:
    """(c_ss, c_s2, c_s4, c_s) from fitted monomial coefficients, symmetrized."""
    g = lambda i, j: coeffs.get((i, j), 0.0)  # noqa: E731
    return (g(1, 1), 0.5 * (g(2, 0) + g(0, 2)), 0.5 * (g(4, 0) + g(0, 4)), 0.5 * (g(1, 0) + g(0, 1)))


def fit_boundary_polynomial(fn, grid: int, half_width: float, max_degree: int, even_only: bool = False) -> dict[tuple[int, int], float]:
    """Least-squares fit of fn(s_a, s_b) on a grid x grid lattice by all monomials up to max_degree."""
    g = np.linspace(-half_width, half_width, grid)
    pts = np.array(list(itertools.product(g, g)))
    mons = [(i, d - i) for d in range(max_degree + 1) for i in range(d + 1) if not (even_only and d % 2)]
    y = np.array([fn(x, z) for x, z in pts])
    sol, *_ = np.linalg.lstsq(_design(pts, mons), y, rcond=None)
    return dict(zip(mons, sol))


def closure_basis(K: float, b: float, u: float, grid: int = 7, half_width: float = 0.5) -> tuple[float, float, float]:
    """Basis coefficients of the exact log partial trace (h = 0) from a grid fit.

    The fit uses every even-degree monomial up to degree 8 so off-basis
    terms do not leak into the basis slots.
    """
    fit = fit_boundary_polynomial(lambda x, z: unit_log_trace(K, b, u, x, z), grid, half_width, 8, even_only=True)
    return basis_from_fit(fit)[:3]
