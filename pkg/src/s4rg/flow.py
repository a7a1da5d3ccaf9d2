"""Iterating a recursion map and labelling where the flow ends up."""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np

from .maps import Couplings, DomainError, RescaleFailure, RGMap

MAX_ITER = 200
DIV_THRESHOLD = 1e6
CONV_TOL = 1e-9

FLOW_COLUMNS = ("K0", "u0", "h0", "b", "terminal", "fixed_point_id", "iterations")


class Terminal(enum.Enum):
    CONVERGED = "converged"
    DIVERGED = "diverged"
    RESCALE_FAILED = "rescale_failed"
    DOMAIN_ERROR = "domain_error"
    MAX_ITER = "max_iter"


@dataclass(frozen=True)
class FlowTrace:
    start: Couplings
    steps: list[Couplings] = field(default_factory=list)
    terminal: Terminal = Terminal.MAX_ITER
    fixed_point_id: str | None = None

    @property
    def iterations(self) -> int:
        return len(self.steps) - 1

    def to_dict(self) -> dict:
        return {
            "start": _cdict(self.start),
            "terminal": self.terminal.value,
            "fixed_point_id": self.fixed_point_id,
            "iterations": self.iterations,
            "steps": [_cdict(c) for c in self.steps],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _cdict(c: Couplings) -> dict:
    return {"K": c.K, "u": c.u, "h": c.h, "b": c.b}


def distance(a: Couplings, b: Couplings) -> float:
    """Dimensionless max-norm over (K/b, u/b^2, h/b^(1/2))."""
    return float(np.max(np.abs(np.subtract(a.dimensionless(), b.dimensionless()))))


def trace(
    rg_map: RGMap,
    start: Couplings,
    max_iter: int = MAX_ITER,
    div_threshold: float = DIV_THRESHOLD,
    conv_tol: float = CONV_TOL,
    known_points: Sequence[tuple[str, Couplings]] = (),
) -> FlowTrace:
    """Iterate ``rg_map`` from ``start`` until it settles, escapes or fails.

    A point counts as converged only if it is within ``conv_tol`` of a known
    fixed point *and* its own one-step residual is below ``10 * conv_tol``.
    """
    steps = [start]
    c = start
    while True:
        if not all(np.isfinite(c.dimensionless())) or max(map(abs, c.dimensionless())) > div_threshold:
            return FlowTrace(start, steps, Terminal.DIVERGED)
        for name, fp in known_points:
            if distance(c, fp) < conv_tol:
                try:
                    if distance(rg_map.step(c), c) < 10 * conv_tol:
                        return FlowTrace(start, steps, Terminal.CONVERGED, name)
                except (RescaleFailure, DomainError):
                    pass
        if len(steps) - 1 >= max_iter:
            return FlowTrace(start, steps, Terminal.MAX_ITER)
        try:
            c = rg_map.step(c)
        except RescaleFailure:
            return FlowTrace(start, steps, Terminal.RESCALE_FAILED)
        except DomainError:
            return FlowTrace(start, steps, Terminal.DOMAIN_ERROR)
        except (OverflowError, ZeroDivisionError):
            return FlowTrace(start, steps, Terminal.DIVERGED)
        steps.append(c)


def basin_scan(
    rg_map: RGMap,
    k_range: tuple[float, float],
    u_range: tuple[float, float],
    resolution: tuple[int, int] = (21, 21),
    h0: float = 0.0,
    known_points: Sequence[tuple[str, Couplings]] = (),
    **trace_kw,
) -> list[FlowTrace]:
    """Trace every point of a (K/b, u/b^2) grid; rows ordered K-major by grid index."""
    b = rg_map.b
    nk, nu = resolution
    out = []
    for k in np.linspace(*k_range, nk):
        for v in np.linspace(*u_range, nu):
            start = Couplings(float(k) * b, float(v) * b * b, h0, b)
            out.append(trace(rg_map, start, known_points=known_points, **trace_kw))
    return out


def write_flow_csv(traces: Sequence[FlowTrace], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(FLOW_COLUMNS)
    for t in traces:
        s = t.start
        w.writerow([repr(s.K), repr(s.u), repr(s.h), repr(s.b), t.terminal.value, t.fixed_point_id or "", t.iterations])
