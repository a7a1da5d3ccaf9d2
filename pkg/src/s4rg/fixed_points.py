"""Fixed points of the recursion maps, their linearization and classification."""

from __future__ import annotations

import cmath
import enum
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .maps import Couplings, DomainError, RescaleFailure, RGMap

DEFAULT_REGION = ((0.0, 1.9), (0.0, 8.0))
CLASSIFY_TOL = 1e-6


class Kind(enum.Enum):
    TRIVIAL = "trivial"
    GAUSSIAN = "gaussian"
    WILSON_FISHER = "wilson_fisher"
    OTHER = "other"


@dataclass(frozen=True, eq=False)
class FixedPointRecord:
    case: str
    backend: str
    point: Couplings
    kind: Kind
    residual: float
    jacobian: np.ndarray
    eigenvalues: tuple[complex | float, ...]

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "backend": self.backend,
            "point": {"K": self.point.K, "u": self.point.u, "h": self.point.h, "b": self.point.b},
            "kind": self.kind.value,
            "residual": self.residual,
            "jacobian": self.jacobian.tolist(),
            "eigenvalues": [_eig_json(x) for x in self.eigenvalues],
        }


def _eig_json(x) -> dict | float:
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag, "abs": abs(x), "phase": cmath.phase(x)}
    return float(x)


def classify(point: Couplings, tol: float = CLASSIFY_TOL) -> Kind:
    k, v, _ = point.dimensionless()
    if abs(k) < tol and abs(v) < tol:
        return Kind.TRIVIAL
    if abs(v) < tol:
        return Kind.GAUSSIAN if k > 0 else Kind.OTHER
    if v > tol:
        return Kind.WILSON_FISHER
    return Kind.OTHER


def eigenvalues(m) -> tuple[complex | float, ...]:
    """Closed-form eigenvalues of a 2x2 or 3x3 matrix, sorted by |lambda| descending.

    Real roots come back as floats; complex pairs as complex.
    """
    a = np.asarray(m, dtype=float)
    if a.shape == (2, 2):
        tr = a[0, 0] + a[1, 1]
        det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        roots = _quadratic_roots(tr, det)
    elif a.shape == (3, 3):
        tr = np.trace(a)
        minors = (
            a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
            + a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0]
            + a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1]
        )  # fmt: skip
        roots = _cubic_roots(tr, minors, float(np.linalg.det(a)))
    else:
        raise ValueError(f"eigenvalues() supports 2x2 and 3x3 matrices, got {a.shape}")
    roots = [z if isinstance(z, complex) else float(z) for z in roots]
    return tuple(sorted(roots, key=lambda z: (-abs(z), -z.real if isinstance(z, complex) else -z)))


def _quadratic_roots(tr: float, det: float) -> list:
    disc = 0.25 * tr * tr - det
    if disc >= 0:
        s = math.sqrt(disc)
        # avoid cancellation in the smaller root
        big = 0.5 * tr + math.copysign(s, tr) if tr else s
        small = det / big if big else -s
        return [big, small]
    s = math.sqrt(-disc)
    return [complex(0.5 * tr, s), complex(0.5 * tr, -s)]


def _cubic_roots(c2: float, c1: float, c0: float) -> list:
    # lambda^3 - c2 lambda^2 + c1 lambda - c0 = 0; lambda = t + c2/3
    shift = c2 / 3.0
    p = c1 - c2 * c2 / 3.0
    q = -2.0 * c2**3 / 27.0 + c2 * c1 / 3.0 - c0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    scale = max(1.0, abs(c2), abs(c1), abs(c0))
    if abs(p) < 1e-14 * scale and abs(q) < 1e-14 * scale:
        return [shift] * 3
    if disc <= 0:
        r = math.sqrt(-p / 3.0)
        arg = max(-1.0, min(1.0, (3.0 * q) / (2.0 * p * r)))
        theta = math.acos(arg) / 3.0
        return [2.0 * r * math.cos(theta - 2.0 * math.pi * k / 3.0) + shift for k in range(3)]
    sq = math.sqrt(disc)
    u = math.copysign(abs(-q / 2.0 + sq) ** (1 / 3), -q / 2.0 + sq)
    v = math.copysign(abs(-q / 2.0 - sq) ** (1 / 3), -q / 2.0 - sq)
    real = u + v + shift
    re = -(u + v) / 2.0 + shift
    im = (u - v) * math.sqrt(3.0) / 2.0
    return [real, complex(re, im), complex(re, -im)]


def jacobian(rg_map: RGMap | Callable, point, step: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian with one Richardson refinement (steps h, h/2).

    ``point`` is a Couplings or a coordinate vector; ``step`` is relative to
    the natural scale of each coordinate.
    """
    if isinstance(point, Couplings):
        x0 = rg_map.vector(point)
    else:
        x0 = np.asarray(point, dtype=float)
    n = len(x0)
    scales = rg_map.scales() if isinstance(rg_map, RGMap) else np.ones(n)
    if step <= 0:
        raise ValueError("step must be positive")

    def central(hs: np.ndarray) -> np.ndarray:
        J = np.empty((n, n))
        for j in range(n):
            e = np.zeros(n)
            e[j] = hs[j]
            for x in (x0 + e, x0 - e):
                if isinstance(rg_map, RGMap) and not rg_map.in_domain(x):
                    raise DomainError(f"finite-difference stencil leaves the map domain at {x}")
            J[:, j] = (np.asarray(rg_map(x0 + e)) - np.asarray(rg_map(x0 - e))) / (2 * hs[j])
        return J

    hs = step * np.maximum(scales, np.abs(x0))
    return (4.0 * central(hs / 2) - central(hs)) / 3.0


def _residual(f: Callable, x: np.ndarray, scales: np.ndarray) -> np.ndarray:
    return (np.asarray(f(x)) - x) / scales


def _newton(f: Callable, x0: np.ndarray, scales: np.ndarray, tol: float, max_iter: int = 100) -> np.ndarray | None:
    """Damped Newton on g(x) = f(x) - x in dimensionless units; None if it fails."""
    x = x0.astype(float)
    try:
        g = _residual(f, x, scales)
    except (RescaleFailure, DomainError, ZeroDivisionError, OverflowError):
        return None
    n = len(x)
    polish = 0
    for _ in range(max_iter):
        gn = np.max(np.abs(g))
        if not np.isfinite(gn):
            return None
        if gn < tol:
            polish += 1
            if polish > 2 or gn == 0.0:
                return x
        try:
            J = np.empty((n, n))
            for j in range(n):
                hj = 1e-7 * max(scales[j], abs(x[j]))
                e = np.zeros(n)
                e[j] = hj
                J[:, j] = (_residual(f, x + e, scales) - _residual(f, x - e, scales)) / (2 * hj / scales[j])
            dy = np.linalg.solve(J, -g)
        except (RescaleFailure, DomainError, ZeroDivisionError, OverflowError, np.linalg.LinAlgError):
            return None
        t = 1.0
        for _ in range(21):
            xn = x + t * dy * scales
            try:
                gnew = _residual(f, xn, scales)
                if np.all(np.isfinite(gnew)) and np.max(np.abs(gnew)) < gn:
                    break
            except (RescaleFailure, DomainError, ZeroDivisionError, OverflowError):
                pass
            t *= 0.5
        else:
            return x if gn < tol else None
        x, g = xn, gnew
    return x if np.max(np.abs(g)) < tol else None


def find_fixed_points(
    rg_map: RGMap,
    region: Sequence[tuple[float, float]] = DEFAULT_REGION,
    starts: int = 24,
    tol: float = 1e-12,
    step: float = 1e-5,
) -> list[FixedPointRecord]:
    """Multi-start Newton search for fixed points inside ``region``.

    ``region`` bounds (K/b, u/b^2) in dimensionless units; the FIELD map is
    searched on its h = 0 slice and linearized in all three directions.
    Roots are deduplicated by dimensionless max-norm distance < 10 tol and
    returned sorted by (K, u).
    """
    b = rg_map.b
    scales2 = np.array([b, b * b])
    if rg_map.dim == 3:
        def f2(x):
            return rg_map(np.array([x[0], x[1], 0.0]))[:2]
    else:
        f2 = rg_map
    (k_lo, k_hi), (u_lo, u_hi) = region
    roots: list[np.ndarray] = []
    for k, v in itertools.product(np.linspace(k_lo, k_hi, starts), np.linspace(u_lo, u_hi, starts)):
        x = _newton(f2, np.array([k * b, v * b * b]), scales2, tol)
        if x is None:
            continue
        y = x / scales2
        slack = 1e-9
        if not (k_lo - slack <= y[0] <= k_hi + slack and u_lo - slack <= y[1] <= u_hi + slack):
            continue
        if any(np.max(np.abs(y - r / scales2)) < max(10 * tol, 1e-9) for r in roots):
            continue
        roots.append(x)
    roots.sort(key=lambda r: (round(r[0] / b, 9), round(r[1] / b**2, 9)))

    records = []
    for x in roots:
        point = rg_map.couplings(np.append(x, 0.0) if rg_map.dim == 3 else x)
        xv = rg_map.vector(point)
        residual = float(np.max(np.abs(_residual(rg_map, xv, rg_map.scales()))))
        J = jacobian(rg_map, point, step)
        records.append(
            FixedPointRecord(
                rg_map.case.value,
                rg_map.backend.value,
                point,
                classify(point),
                residual,
                J,
                eigenvalues(J),
            )
        )
    return records


def point_ids(records: Sequence[FixedPointRecord]) -> list[str]:
    """Stable labels such as ``gaussian`` or ``wilson_fisher_2`` for duplicates of a kind."""
    counts: dict[Kind, int] = {}
    ids = []
    for r in records:
        counts[r.kind] = counts.get(r.kind, 0) + 1
        ids.append(r.kind.value if counts[r.kind] == 1 else f"{r.kind.value}_{counts[r.kind]}")
    return ids


def wilson_fisher(records: Sequence[FixedPointRecord]) -> FixedPointRecord | None:
    wf = [r for r in records if r.kind is Kind.WILSON_FISHER]
    return wf[0] if wf else None

