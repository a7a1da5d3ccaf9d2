"""Gaussian partial traces and cumulant averages over decimated spins.

The reference weight over the decimated spins s is ``exp(-1/2 s.A.s + L.s)``
where each ``L_i`` is a polynomial in the boundary spins.  Averages are taken
by shifting ``s = mu + t`` with ``mu = A^-1 L`` and contracting products of
``t`` with Wick's theorem, covariance ``A^-1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Sequence

import numpy as np

from .poly import ONE, Monomial, SpinPolynomial, const, monomial


def central_moment(k: int, variance: float) -> float:
    """E[t^k] for t ~ N(0, variance)."""
    if variance <= 0:
        raise ValueError("variance must be positive")
    if k < 0:
        raise ValueError("k must be non-negative")
    if k % 2:
        return 0.0
    return _double_factorial(k - 1) * variance ** (k // 2)


def _double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2)) if n > 0 else 1


@lru_cache(maxsize=65536)
def _wick(exps: tuple[int, ...], cov: tuple[tuple[float, ...], ...]) -> float:
    if sum(exps) == 0:
        return 1.0
    if sum(exps) % 2:
        return 0.0
    # pair one copy of the first active variable with every remaining factor
    i = next(k for k, e in enumerate(exps) if e)
    rest = list(exps)
    rest[i] -= 1
    total = 0.0
    for j, e in enumerate(rest):
        if e == 0 or cov[i][j] == 0.0:
            continue
        nxt = rest.copy()
        nxt[j] -= 1
        total += e * cov[i][j] * _wick(tuple(nxt), cov)
    return total


def wick_moment(exponents: Sequence[int], covariance) -> float:
    """E[prod t_i^{k_i}] for a zero-mean Gaussian with the given covariance."""
    cov = np.atleast_2d(np.asarray(covariance, dtype=float))
    exps = tuple(int(e) for e in exponents)
    if cov.shape != (len(exps), len(exps)):
        raise ValueError(f"covariance shape {cov.shape} does not match {len(exps)} exponents")
    if any(e < 0 for e in exps):
        raise ValueError("exponents must be non-negative")
    return _wick(exps, tuple(map(tuple, cov.tolist())))


@dataclass(frozen=True, eq=False)
class GaussianBlock:
    decimated_vars: tuple[str, ...]
    quadratic: np.ndarray
    linear: tuple[SpinPolynomial, ...]
    passthrough: SpinPolynomial = field(default_factory=lambda: const(0.0))

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.quadratic, dtype=float))
        m = len(self.decimated_vars)
        object.__setattr__(self, "decimated_vars", tuple(self.decimated_vars))
        object.__setattr__(self, "linear", tuple(self.linear))
        object.__setattr__(self, "quadratic", A)
        if A.shape != (m, m) or len(self.linear) != m:
            raise ValueError("quadratic/linear dimensions do not match decimated_vars")
        if not np.allclose(A, A.T, rtol=0, atol=1e-14 * max(1.0, np.abs(A).max())):
            raise ValueError("quadratic form must be symmetric")
        try:
            np.linalg.cholesky(A)
        except np.linalg.LinAlgError:
            raise ValueError("quadratic form is not positive definite") from None
        dec = set(self.decimated_vars)
        for L in self.linear:
            if dec & set(L.variables()):
                raise ValueError("linear terms may not contain decimated variables")
        if dec & set(self.passthrough.variables()):
            raise ValueError("passthrough may not contain decimated variables")
        cov = np.linalg.solve(A, np.eye(m))
        object.__setattr__(self, "_cov", 0.5 * (cov + cov.T))

    @property
    def covariance(self) -> np.ndarray:
        return self._cov.copy()

    def mean(self) -> tuple[SpinPolynomial, ...]:
        """mu = A^-1 L, one boundary polynomial per decimated spin."""
        m = len(self.decimated_vars)
        return tuple(
            sum((self.linear[j] * float(self._cov[i, j]) for j in range(m)), const(0.0))
            for i in range(m)
        )


def log_norm(block: GaussianBlock) -> SpinPolynomial:
    """Boundary part of ln of the Gaussian integral: 1/2 L.A^-1.L + passthrough."""
    mu = block.mean()
    quad = sum((L * m for L, m in zip(block.linear, mu)), const(0.0))
    return quad * 0.5 + block.passthrough


def log_norm_constant(block: GaussianBlock) -> float:
    """The dropped boundary-independent constant 1/2 m ln(2 pi) - 1/2 ln det A."""
    m = len(block.decimated_vars)
    _, logdet = np.linalg.slogdet(block.quadratic)
    return 0.5 * m * math.log(2 * math.pi) - 0.5 * logdet


def _split(m: Monomial, decimated: tuple[str, ...]) -> tuple[tuple[int, ...], Monomial]:
    d = dict(m)
    exps = tuple(d.pop(name, 0) for name in decimated)
    return exps, monomial(d)


def expectation(block: GaussianBlock, P: SpinPolynomial) -> SpinPolynomial:
    """<P>_0 as a polynomial in the boundary spins."""
    dec = block.decimated_vars
    mu = block.mean()
    cov = block._cov
    mu_pows: dict[tuple[int, int], SpinPolynomial] = {}

    def mu_pow(i: int, n: int) -> SpinPolynomial:
        if (i, n) not in mu_pows:
            mu_pows[i, n] = mu[i] ** n
        return mu_pows[i, n]

    shifted: dict[tuple[int, ...], SpinPolynomial] = {}

    def shifted_moment(k: tuple[int, ...]) -> SpinPolynomial:
        # E[prod (mu_i + t_i)^{k_i}] by binomial expansion in the fluctuations
        if k in shifted:
            return shifted[k]
        acc: dict[Monomial, float] = {}
        for js in product(*(range(ki + 1) for ki in k)):
            w = wick_moment(js, cov)
            if w == 0.0:
                continue
            w *= math.prod(math.comb(ki, ji) for ki, ji in zip(k, js))
            term = const(w)
            for i, (ki, ji) in enumerate(zip(k, js)):
                if ki - ji:
                    term = term * mu_pow(i, ki - ji)
            for m, c in term.items():
                acc[m] = acc.get(m, 0.0) + c
        shifted[k] = SpinPolynomial(acc)
        return shifted[k]

    out: dict[Monomial, float] = {}
    for m, c in P.items():
        k, bmono = _split(m, dec)
        if not any(k):
            out[bmono] = out.get(bmono, 0.0) + c
            continue
        for mm, cc in shifted_moment(k).items():
            key = bmono if mm == ONE else monomial(list(mm) + list(bmono))
            out[key] = out.get(key, 0.0) + c * cc
    return SpinPolynomial(out)


@dataclass(frozen=True)
class CumulantResult:
    order: int
    h_prime: SpinPolynomial
    per_order: tuple[SpinPolynomial, ...]


def cumulant_map(block: GaussianBlock, V: SpinPolynomial, order: int = 2) -> CumulantResult:
    """Truncated cumulant expansion ln A + <V> + 1/2(<V^2> - <V>^2)."""
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    terms = [log_norm(block)]
    if order >= 1:
        v1 = expectation(block, V)
        terms.append(v1)
    if order >= 2:
        terms.append((expectation(block, V * V) - v1 * v1) * 0.5)
    total = const(0.0)
    for t in terms:
        total = total + t
    return CumulantResult(order, total, tuple(terms))
