"""Sparse polynomials over named spin variables with float coefficients.

A monomial is stored as a tuple of ``(name, exponent)`` pairs sorted by
variable name, with zero exponents never stored; the empty tuple is the
constant monomial.  Polynomials are immutable values.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping

Monomial = tuple[tuple[str, int], ...]

ONE: Monomial = ()


class AsymmetryError(ValueError):
    """Raised when a boundary polynomial is not symmetric under s_a <-> s_b."""


def monomial(exponents: Mapping[str, int] | Iterable[tuple[str, int]] = (), **kw: int) -> Monomial:
    """Canonical monomial key, e.g. ``monomial(s_a=3, s_b=1)``."""
    merged: dict[str, int] = defaultdict(int)
    items = exponents.items() if isinstance(exponents, Mapping) else exponents
    for name, e in list(items) + list(kw.items()):
        if e < 0:
            raise ValueError(f"negative exponent for {name!r}")
        merged[name] += int(e)
    return tuple(sorted((n, e) for n, e in merged.items() if e))


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    out = dict(m1)
    for n, e in m2:
        out[n] = out.get(n, 0) + e
    return tuple(sorted(out.items()))


class SpinPolynomial:
    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Monomial, float] | None = None):
        clean: dict[Monomial, float] = {}
        for m, c in (terms or {}).items():
            c = float(c)
            if c != 0.0:
                clean[monomial(m)] = clean.get(monomial(m), 0.0) + c
        self._terms = {m: c for m, c in clean.items() if c != 0.0}

    @classmethod
    def _raw(cls, terms: dict[Monomial, float]) -> SpinPolynomial:
        p = cls.__new__(cls)
        p._terms = {m: c for m, c in terms.items() if c != 0.0}
        return p

    @property
    def terms(self) -> dict[Monomial, float]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def variables(self) -> tuple[str, ...]:
        return tuple(sorted({n for m in self._terms for n, _ in m}))

    def degree(self) -> int:
        return max((sum(e for _, e in m) for m in self._terms), default=0)

    def is_zero(self) -> bool:
        return not self._terms

    def coeff(self, m: Monomial | Mapping[str, int]) -> float:
        if isinstance(m, Mapping):
            m = monomial(m)
        return self._terms.get(m, 0.0)

    def __len__(self) -> int:
        return len(self._terms)

    # arithmetic

    def __add__(self, other) -> SpinPolynomial:
        other = _coerce(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, 0.0) + c
        return SpinPolynomial._raw(out)

    __radd__ = __add__

    def __neg__(self) -> SpinPolynomial:
        return SpinPolynomial._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> SpinPolynomial:
        return self + (-_coerce(other))

    def __rsub__(self, other) -> SpinPolynomial:
        return _coerce(other) - self

    def __mul__(self, other) -> SpinPolynomial:
        if isinstance(other, (int, float)):
            return SpinPolynomial._raw({m: c * other for m, c in self._terms.items()})
        other = _coerce(other)
        out: dict[Monomial, float] = defaultdict(float)
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                out[_mono_mul(m1, m2)] += c1 * c2
        return SpinPolynomial._raw(out)

    __rmul__ = __mul__

    def __truediv__(self, x: float) -> SpinPolynomial:
        return self * (1.0 / x)

    def __pow__(self, n: int) -> SpinPolynomial:
        if n < 0 or int(n) != n:
            raise ValueError("exponent must be a non-negative integer")
        result = const(1.0)
        base = self
        n = int(n)
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, (SpinPolynomial, int, float)):
            return NotImplemented
        return self._terms == _coerce(other)._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def allclose(self, other, rtol: float = 1e-12, atol: float = 1e-12) -> bool:
        other = _coerce(other)
        for m in set(self._terms) | set(other._terms):
            a, b = self._terms.get(m, 0.0), other._terms.get(m, 0.0)
            if abs(a - b) > atol + rtol * max(abs(a), abs(b)):
                return False
        return True

    def evaluate(self, values: Mapping[str, float]) -> float:
        total = 0.0
        for m, c in self._terms.items():
            t = c
            for n, e in m:
                t *= values[n] ** e
            total += t
        return total

    def chop(self, tol: float) -> SpinPolynomial:
        """Drop terms with ``|coeff| <= tol``."""
        return SpinPolynomial._raw({m: c for m, c in self._terms.items() if abs(c) > tol})

    def __repr__(self) -> str:
        if not self._terms:
            return "SpinPolynomial(0)"
        parts = []
        for m, c in sorted(self._terms.items()):
            mono = "*".join(n if e == 1 else f"{n}^{e}" for n, e in m)
            parts.append(f"{c:g}" + (f"*{mono}" if mono else ""))
        return "SpinPolynomial(" + " + ".join(parts).replace("+ -", "- ") + ")"


def _coerce(x) -> SpinPolynomial:
    if isinstance(x, SpinPolynomial):
        return x
    if isinstance(x, (int, float)):
        return const(x)
    raise TypeError(f"cannot combine SpinPolynomial with {type(x).__name__}")


def var(name: str, c: float = 1.0) -> SpinPolynomial:
    return SpinPolynomial._raw({((name, 1),): float(c)})


def const(c: float) -> SpinPolynomial:
    return SpinPolynomial._raw({ONE: float(c)})


def add(p: SpinPolynomial, q: SpinPolynomial) -> SpinPolynomial:
    return p + q


def mul(p: SpinPolynomial, q: SpinPolynomial) -> SpinPolynomial:
    return p * q


def pow(p: SpinPolynomial, n: int) -> SpinPolynomial:  # noqa: A001
    return p**n


def coeff(p: SpinPolynomial, m: Monomial | Mapping[str, int]) -> float:
    return p.coeff(m)


@dataclass(frozen=True)
class BasisCoefficients:
    """Coefficients on the basis s_a s_b, s_a^2+s_b^2, s_a^4+s_b^4, s_a+s_b.

    ``residual_norm`` is the summed magnitude of everything projected away,
    constants included.
    """

    c_ss: float = 0.0
    c_s2: float = 0.0
    c_s4: float = 0.0
    c_s: float = 0.0
    residual_norm: float = 0.0

    def __add__(self, other: BasisCoefficients) -> BasisCoefficients:
        return BasisCoefficients(
            self.c_ss + other.c_ss,
            self.c_s2 + other.c_s2,
            self.c_s4 + other.c_s4,
            self.c_s + other.c_s,
            self.residual_norm + other.residual_norm,
        )

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.c_ss, self.c_s2, self.c_s4, self.c_s)


def project_basis(
    p: SpinPolynomial,
    boundary_vars: tuple[str, str] = ("s_a", "s_b"),
    tol: float = 1e-9,
) -> BasisCoefficients:
    """Project a boundary polynomial onto the Hamiltonian operator basis.

    Paired coefficients (s_a^k vs s_b^k) must agree to ``tol`` relative to
    their magnitude, otherwise :class:`AsymmetryError` is raised.
    """
    a, b = boundary_vars
    stray = set(p.variables()) - {a, b}
    if stray:
        raise ValueError(f"polynomial contains non-boundary variables {sorted(stray)}")

    def pair(k: int) -> tuple[float, Monomial, Monomial]:
        ma, mb = monomial({a: k}), monomial({b: k})
        ca, cb = p.coeff(ma), p.coeff(mb)
        if abs(ca - cb) > tol * max(1.0, abs(ca), abs(cb)):
            raise AsymmetryError(f"{a}^{k} coefficient {ca!r} != {b}^{k} coefficient {cb!r}")
        return 0.5 * (ca + cb), ma, mb

    c_s, m1a, m1b = pair(1)
    c_s2, m2a, m2b = pair(2)
    c_s4, m4a, m4b = pair(4)
    m_ss = monomial({a: 1, b: 1})
    used = {m_ss, m1a, m1b, m2a, m2b, m4a, m4b}
    residual = sum(abs(c) for m, c in p.items() if m not in used)
    return BasisCoefficients(p.coeff(m_ss), c_s2, c_s4, c_s, residual)
