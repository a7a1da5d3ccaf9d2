"""Scale powers and critical exponents from the leading RG eigenvalues."""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

D_LATTICE = 2
L_RESCALE = 2


class MarginalEigenvalueError(ValueError):
    """An eigenvalue that should be relevant is <= 1."""


class ComplexEigenvalueError(ValueError):
    """A leading eigenvalue is complex; the scaling relations assume real ones."""


def _real(lam, name: str) -> float:
    if isinstance(lam, complex):
        if lam.imag != 0.0:
            raise ComplexEigenvalueError(f"{name} = {lam} is complex")
        lam = lam.real
    lam = float(lam)
    if not lam > 1.0:
        raise MarginalEigenvalueError(f"{name} = {lam} is not relevant (needs > 1)")
    return lam


def scale_powers(
    lambda1: float, lambda3: float | None = None, d: int = D_LATTICE, L: float = L_RESCALE
) -> tuple[float, float | None]:
    """p = ln(lambda1) / (d ln L) and, if the field eigenvalue is given, q likewise."""
    p = math.log(_real(lambda1, "lambda1")) / (d * math.log(L))
    q = None if lambda3 is None else math.log(_real(lambda3, "lambda3")) / (d * math.log(L))
    return p, q


@dataclass(frozen=True)
class ExponentSet:
    p: float
    q: float | None
    alpha: float
    nu: float
    beta: float | None = None
    gamma: float | None = None
    delta: float | None = None
    eta: float | None = None
    d: int = D_LATTICE
    L: float = L_RESCALE

    def to_dict(self) -> dict:
        return asdict(self)


def exponent_set(p: float, q: float | None = None, d: int = D_LATTICE, L: float = L_RESCALE) -> ExponentSet:
    if not p > 0:
        raise ValueError(f"thermal scale power must be positive, got {p}")
    alpha = (2 * p - 1) / p
    nu = 1 / (p * d)
    if q is None:
        return ExponentSet(p, None, alpha, nu, d=d, L=L)
    if q == 1:
        raise ValueError("q = 1 makes delta singular")
    return ExponentSet(
        p,
        q,
        alpha,
        nu,
        beta=(1 - q) / p,
        gamma=(2 * q - 1) / p,
        delta=q / (1 - q),
        eta=2 + d * (1 - 2 * q),
        d=d,
        L=L,
    )


IDENTITY_NAMES = ("rushbrooke", "widom", "fisher", "josephson")


def identity_residuals(e: ExponentSet) -> np.ndarray:
    """Residuals of alpha+2beta+gamma=2, gamma=beta(delta-1), gamma=nu(2-eta), d nu=2-alpha."""
    if e.q is None:
        raise ValueError("identity residuals need the field scale power q")
    return np.array(
        [
            e.alpha + 2 * e.beta + e.gamma - 2,
            e.gamma - e.beta * (e.delta - 1),
            e.gamma - e.nu * (2 - e.eta),
            e.d * e.nu - (2 - e.alpha),
        ]
    )
