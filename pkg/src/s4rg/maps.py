"""Recursion maps for the S^4 model on the triangular lattice.

Three cases are supported: nearest-neighbour (NN), NN in an external field
(FIELD) and next-nearest-neighbour (NNN).  Each case has a TABULATED backend
evaluating closed-form coefficient formulas; NN and FIELD additionally have a
DERIVED backend that performs the Gaussian decimation of the one-site unit
with the cumulant engine.

Coefficients come in three orders (zeroth, first, second cumulant) on the
basis ``s_a s_b``, ``s_a^2+s_b^2``, ``s_a^4+s_b^4``, ``s_a+s_b``; the spins are
then rescaled so the per-site quadratic term returns to ``-b/2 s^2``.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, replace
from typing import IO, Iterable

import numpy as np

from .gauss import GaussianBlock, cumulant_map
from .poly import BasisCoefficients, SpinPolynomial, const, project_basis, var


class DomainError(ValueError):
    """Couplings outside the region where a map is defined."""


class RescaleFailure(ArithmeticError):
    """The renormalized quadratic coefficient is non-negative; no real rescaling exists."""


@dataclass(frozen=True)
class Couplings:
    K: float
    u: float = 0.0
    h: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if not self.b > 0:
            raise DomainError(f"Gaussian parameter b must be positive, got {self.b}")

    def dimensionless(self) -> tuple[float, float, float]:
        """(K/b, u/b^2, h/b^(1/2))"""
        return (self.K / self.b, self.u / self.b**2, self.h / math.sqrt(self.b))


class Case(enum.Enum):
    NEAREST_NEIGHBOR = "nn"
    EXTERNAL_FIELD = "field"
    NEXT_NEAREST = "nnn"


class Backend(enum.Enum):
    TABULATED = "tabulated"
    DERIVED = "derived"


@dataclass(frozen=True)
class RGCase:
    case: Case
    backend: Backend = Backend.TABULATED

    def __post_init__(self):
        if self.backend is Backend.DERIVED and self.case is Case.NEXT_NEAREST:
            raise ValueError("the NNN map has no derived backend")


@dataclass(frozen=True)
class CoefficientBlocks:
    order0: BasisCoefficients
    order1: BasisCoefficients
    order2: BasisCoefficients
    flags: tuple[str, ...] = ()

    @property
    def orders(self) -> tuple[BasisCoefficients, BasisCoefficients, BasisCoefficients]:
        return (self.order0, self.order1, self.order2)

    def total(self) -> BasisCoefficients:
        return self.order0 + self.order1 + self.order2


def _require_no_field(c: Couplings, name: str):
    if c.h != 0:
        raise DomainError(f"{name} is defined for h = 0 only")


def nn_coeffs(c: Couplings) -> CoefficientBlocks:
    _require_no_field(c, "nn_coeffs")
    K, u, b = c.K, c.u, c.b
    return CoefficientBlocks(
        BasisCoefficients(K**2 / b, K**2 / (2 * b) - b, -2 * u),
        BasisCoefficients(-3 * K**2 * u / b**3, -3 * K**2 * u / (2 * b**3), -(K**4) * u / (4 * b**4)),
        BasisCoefficients(
            105 * K**2 * u**2 / (4 * b**5),
            105 * K**2 * u**2 / (8 * b**5),
            87 * K**4 * u**2 / (16 * b**6),
        ),
    )


def field_coeffs(c: Couplings, k04_literal: bool = False) -> CoefficientBlocks:
    """Field-case coefficients.

    The zeroth-order field coefficient defaults to ``(K + 2b) h / b``; with
    ``k04_literal=True`` the printed ``(K - 2b) h / b`` is used instead.  Only
    the ``+`` sign gives the relevant field eigenvalue near 2.875 at the
    Wilson-Fisher point; the ``-`` sign makes that eigenvalue negative.
    """
    K, u, h, b = c.K, c.u, c.h, c.b
    h2 = h * h
    second = 35 + 93 * h2 / b + 9 * h2**2 / b**2 + h2**3 / b**3
    sign = -1.0 if k04_literal else 1.0
    return CoefficientBlocks(
        BasisCoefficients(K**2 / b, (K**2 - 2 * b**2) / (2 * b), -2 * u, (K + sign * 2 * b) * h / b),
        BasisCoefficients(
            -3 * K**2 * u / b**4 * (b + h2),
            -3 * K**2 * u / (2 * b**4) * (b + h2),
            -(K**4) * u / (4 * b**4),
            -K * u * h / b**4 * (3 * b + h2),
        ),
        BasisCoefficients(
            3 * K**2 * u**2 / (4 * b**5) * second,
            3 * K**2 * u**2 / (8 * b**5) * second,
            K**4 * u**2 / (16 * b**6) * (87 + 174 * h2 / b + 17 * h2**2 / b**2),
            h * K * u**2 / (4 * b**5) * (105 + 105 * h2 / b + 21 * h2**2 / b**2 + h2**3 / b**3),
        ),
    )


NNN_NEAR_BOUNDARY = 1e-3


def nnn_coeffs(c: Couplings, k02_cubic: bool = False) -> CoefficientBlocks:
    """Next-nearest-neighbour coefficients (NNN bond at one quarter strength).

    ``k02_cubic`` replaces the ``-12 K^2`` term of the zeroth-order quadratic
    coefficient by the dimensionally consistent ``-12 K^3``.
    """
    _require_no_field(c, "nnn_coeffs")
    K, u, b = c.K, c.u, c.b
    D = 4 * b * b - K * K
    if abs(K) >= 2 * b:
        raise DomainError(f"NNN map requires |K| < 2b, got K={K}, b={b}")
    flags = ("near-domain-boundary",) if D < NNN_NEAR_BOUNDARY * 4 * b * b else ()
    k02_tail = 12 * K**3 if k02_cubic else 12 * K**2
    order0 = BasisCoefficients(
        (48 * K**2 * b + 51 * K**3) / (16 * D),
        -(96 * b**3 - 75 * K**2 * b - k02_tail) / (16 * D),
        -3 * u,
    )
    order1 = BasisCoefficients(
        3 * K**2 * u / (4 * b**3 * D**2),
        -(K**2) * u * (272 * b**4 + 128 * K * b**3 + 136 * K**2 * b**2 - 17 * K**4) / (64 * b**3 * D**2),
        -(K**4)
        * u
        * (4112 * b**4 + 2176 * K * b**3 + 2824 * K**2 * b**2 + 1088 * K**3 * b + 771 * K**4)
        / (4096 * b**4 * D**2),
    )
    poly23 = (
        15790080 * b**12 + 9469952 * b**11 * K + 6037504 * b**10 * K**2
        + 5431296 * b**9 * K**3 + 4420864 * b**8 * K**4 + 1114112 * b**7 * K**5
        + 185088 * b**6 * K**6 - 208896 * b**5 * K**7 - 152592 * b**4 * K**8
        + 13056 * b**3 * K**9 + 20808 * b**2 * K**10 - 867 * K**12
    )  # fmt: skip
    order2 = BasisCoefficients(
        -2 * K**2 * u**2
        * (656 * b**5 + 1802 * b**4 * K + 452 * b**3 * K**2 + 374 * b**2 * K**3 + 56 * b * K**4 + 17 * K**5)
        / (9 * D**5),
        -(K**2) * u**2
        * (2584 * b**5 + 1408 * b**4 * K + 1258 * b**3 * K**2 + 176 * b**2 * K**3 + 119 * b * K**4 + 8 * K**5)
        / (9 * D**5),
        K**4 * u**2 * poly23 / (24576 * (b * D) ** 6),
    )  # fmt: skip
    return CoefficientBlocks(order0, order1, order2, flags)


BOUNDARY = ("s_a", "s_b")


def nn_unit_block(c: Couplings, boundary_field: float = 2.0) -> tuple[GaussianBlock, SpinPolynomial]:
    """Gaussian block and perturbation V for the one-site NN unit.

    The decimated site carries ``2K(s_a + s_b) s_1 - 2b s_1^2 + 2h s_1`` and
    ``V = -4u s_1^4``; the boundary sites keep ``-b s^2 - 2u s^4`` plus
    ``boundary_field * h * s``.
    """
    sa, sb = var("s_a"), var("s_b")
    linear = (sa + sb) * (2 * c.K) + 2 * c.h
    passthrough = (sa * sa + sb * sb) * (-c.b) + (sa**4 + sb**4) * (-2 * c.u)
    if c.h:
        passthrough = passthrough + (sa + sb) * (boundary_field * c.h)
    block = GaussianBlock(("s_1",), np.array([[4 * c.b]]), (linear,), passthrough)
    V = var("s_1") ** 4 * (-4 * c.u)
    return block, V


def derive_coeffs(case: RGCase | Case, c: Couplings, k04_literal: bool = False) -> CoefficientBlocks:
    """Coefficients from the cumulant engine applied to the one-site unit.

    The boundary field weight is +2 (or -2 with ``k04_literal``), matching the
    corresponding tabulated zeroth-order field coefficient.
    """
    kind = case.case if isinstance(case, RGCase) else case
    if kind is Case.NEXT_NEAREST:
        raise ValueError("the NNN map has no derived backend")
    if kind is Case.NEAREST_NEIGHBOR:
        _require_no_field(c, "derive_coeffs(NN)")
    block, V = nn_unit_block(c, boundary_field=-2.0 if k04_literal else 2.0)
    res = cumulant_map(block, V, order=2)
    return CoefficientBlocks(*(project_basis(p, BOUNDARY) for p in res.per_order))


def rescale_extract(blocks: CoefficientBlocks, b: float) -> Couplings:
    """Renormalized couplings after rescaling s' = xi s.

    xi^2 = -2 C_s2 / b restores the per-site quadratic term to -b/2 s'^2;
    then K' = C_ss / xi^2, u' = -C_s4 / xi^4, h' = C_s / xi.
    """
    C = blocks.total()
    if not C.c_s2 < 0:
        raise RescaleFailure(f"quadratic coefficient {C.c_s2} is not negative")
    xi2 = -2.0 * C.c_s2 / b
    return Couplings(C.c_ss / xi2, -C.c_s4 / xi2**2, C.c_s / math.sqrt(xi2), b)


@dataclass(frozen=True)
class RGMap:
    """One recursion map with its options, usable on Couplings or coordinate vectors.

    Vectors are ``(K, u)`` for NN/NNN and ``(K, u, h)`` for FIELD; ``b`` is a
    fixed parameter of the map.
    """

    case: Case
    backend: Backend = Backend.TABULATED
    b: float = 1.0
    k04_literal: bool = False
    k02_cubic: bool = False

    def __post_init__(self):
        RGCase(self.case, self.backend)
        if not self.b > 0:
            raise DomainError("b must be positive")

    @property
    def rg_case(self) -> RGCase:
        return RGCase(self.case, self.backend)

    @property
    def dim(self) -> int:
        return 3 if self.case is Case.EXTERNAL_FIELD else 2

    @property
    def label(self) -> str:
        return self.case.value

    def with_b(self, b: float) -> RGMap:
        return replace(self, b=b)

    def coeffs(self, c: Couplings) -> CoefficientBlocks:
        if self.backend is Backend.DERIVED:
            return derive_coeffs(self.case, c, k04_literal=self.k04_literal)
        if self.case is Case.NEAREST_NEIGHBOR:
            return nn_coeffs(c)
        if self.case is Case.EXTERNAL_FIELD:
            return field_coeffs(c, k04_literal=self.k04_literal)
        return nnn_coeffs(c, k02_cubic=self.k02_cubic)

    def step(self, c: Couplings) -> Couplings:
        out = rescale_extract(self.coeffs(c), c.b)
        if self.case is not Case.EXTERNAL_FIELD:
            out = replace(out, h=0.0)
        return out

    def in_domain(self, x) -> bool:
        if self.case is Case.NEXT_NEAREST:
            return abs(x[0]) < 2 * self.b
        return True

    def couplings(self, x) -> Couplings:
        h = float(x[2]) if self.dim == 3 else 0.0
        return Couplings(float(x[0]), float(x[1]), h, self.b)

    def vector(self, c: Couplings) -> np.ndarray:
        return np.array([c.K, c.u, c.h][: self.dim], dtype=float)

    def scales(self) -> np.ndarray:
        """Natural units of each coordinate: b, b^2, b^(1/2)."""
        return np.array([self.b, self.b**2, math.sqrt(self.b)][: self.dim])

    def __call__(self, x) -> np.ndarray:
        return self.vector(self.step(self.couplings(x)))


def rg_step(case: RGCase | Case, c: Couplings, **options) -> Couplings:
    rc = case if isinstance(case, RGCase) else RGCase(case)
    return RGMap(rc.case, rc.backend, c.b, **options).step(c)


COEFF_COLUMNS = ("case", "backend", "order", "c_ss", "c_s2", "c_s4", "c_s", "residual_norm", "K", "b", "u", "h")


def coefficient_rows(rg_case: RGCase, c: Couplings, blocks: CoefficientBlocks) -> list[dict]:
    return [
        {
            "case": rg_case.case.value,
            "backend": rg_case.backend.value,
            "order": order,
            "c_ss": bc.c_ss,
            "c_s2": bc.c_s2,
            "c_s4": bc.c_s4,
            "c_s": bc.c_s,
            "residual_norm": bc.residual_norm,
            "K": c.K,
            "b": c.b,
            "u": c.u,
            "h": c.h,
        }
        for order, bc in enumerate(blocks.orders)
    ]


def write_coefficient_csv(rows: Iterable[dict], fh: IO[str]) -> None:
    w = csv.DictWriter(fh, fieldnames=COEFF_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: row[k] for k in COEFF_COLUMNS})
