"""Reproduction checks for the published fixed points, matrices and exponents.

Each ``criterion_*`` function returns a :class:`Check`.  Required checks
decide the exit status of ``s4rg validate``; the discrepancy items are
informational unless strict mode promotes them.
"""

from __future__ import annotations

import inspect
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import oracle
from .exponents import exponent_set, identity_residuals, scale_powers
from .fixed_points import eigenvalues, find_fixed_points, jacobian, wilson_fisher, Kind
from .maps import Backend, Case, Couplings, RescaleFailure, RGMap, derive_coeffs, field_coeffs, nn_coeffs

DEFAULT_SEED = 20100
NN_MATRIX = [[2.855, 2.895], [1.356, 2.447]]
FIELD_MATRIX = [[2.872, 3.032, 0.0], [1.307, 2.450, 0.0], [0.0, 0.0, 2.875]]


def default_seed() -> int:
    return int(os.environ.get("RG_S4_SEED", DEFAULT_SEED))


@dataclass
class Check:
    id: str
    title: str
    passed: bool
    required: bool = True
    detail: str = ""
    values: dict = field(default_factory=dict)

    def status(self, strict: bool = False) -> str:
        if self.passed:
            return "PASS"
        return "FAIL" if (self.required or strict) else "INFO"

    def to_dict(self, strict: bool = False) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "status": self.status(strict),
            "required": self.required,
            "detail": self.detail,
            "values": _jsonable(self.values),
        }


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    return x


def _max_residual(m: RGMap, c: Couplings) -> float:
    x = m.vector(c)
    return float(np.max(np.abs((m(x) - x) / m.scales())))


def _wf(m: RGMap):
    return wilson_fisher(find_fixed_points(m))


def criterion_1() -> Check:
    res = {b: _max_residual(RGMap(Case.NEAREST_NEIGHBOR, b=b), Couplings(b, 0.0, 0.0, b)) for b in (0.5, 1.0, 2.0)}
    return Check(
        "C1", "Gaussian fixed point K* = b, u* = 0 (NN)", all(r < 1e-12 for r in res.values()),
        detail=", ".join(f"b={b}: residual {r:.1e}" for b, r in res.items()), values={"residuals": list(res.values())},
    )  # fmt: skip


def _independent_wf() -> np.ndarray:
    # scipy's hybrid solver on the closed-form NN map, sharing no code with the multistart search
    def g(x):
        K, u = x
        c = nn_coeffs(Couplings(K, u))
        tot = c.total()
        xi2 = -2 * tot.c_s2
        return [tot.c_ss / xi2 - K, -tot.c_s4 / xi2**2 - u]

    return optimize.fsolve(g, [0.44, 0.35], xtol=1e-14)


def criterion_2() -> Check:
    rows = {}
    ok = True
    for case in (Case.NEAREST_NEIGHBOR, Case.EXTERNAL_FIELD):
        wf = _wf(RGMap(case))
        if wf is None:
            ok = False
            rows[case.value] = None
            continue
        rows[case.value] = (wf.point.K, wf.point.u)
        ok &= abs(wf.point.K - 0.436) < 1e-3 and abs(wf.point.u - 0.352) < 1e-3
    ind = _independent_wf()
    ok &= abs(ind[0] - 0.436) < 1e-3 and abs(ind[1] - 0.352) < 1e-3
    detail = "; ".join(f"{k}: K*={v[0]:.5f}, u*={v[1]:.5f}" if v else f"{k}: not found" for k, v in rows.items())
    detail += f"; independent solve K*={ind[0]:.5f}, u*={ind[1]:.5f} (target 0.436, 0.352 +/- 1e-3)"
    return Check("C2", "Wilson-Fisher point (0.436b, 0.352b^2)", bool(ok), detail=detail, values={"found": rows, "independent": ind})


def criterion_3() -> Check:
    e2 = eigenvalues(NN_MATRIX)
    e3 = eigenvalues(FIELD_MATRIX)
    ok = abs(e2[0] - 4.643) < 5e-4 and abs(e2[1] - 0.659) < 5e-4
    ok &= abs(e3[0] - 4.663) < 5e-4 and abs(e3[1] - 2.875) < 5e-4 and abs(e3[2] - 0.659) < 5e-4
    return Check(
        "C3", "Eigenvalues of the published matrices", bool(ok),
        detail=f"2x2 -> {tuple(round(x, 5) for x in e2)}; 3x3 -> {tuple(round(x, 5) for x in e3)}",
        values={"nn": e2, "field": e3},
    )  # fmt: skip


def criterion_4() -> Check:
    m = RGMap(Case.EXTERNAL_FIELD)
    wf = _wf(m)
    if wf is None:
        return Check("C4", "FIELD Jacobian at Wilson-Fisher point", False, detail="no Wilson-Fisher point found")
    J = wf.jacobian
    ev = sorted((float(np.real(x)) for x in wf.eigenvalues), reverse=True)
    target = (4.663, 2.875, 0.659)
    rel = [abs(a - t) / t for a, t in zip(ev, target)]
    off = max(abs(J[0, 2]), abs(J[1, 2]), abs(J[2, 0]), abs(J[2, 1]))
    ok = all(r < 0.03 for r in rel) and off < 1e-8 and all(not isinstance(x, complex) for x in wf.eigenvalues)
    return Check(
        "C4", "FIELD Jacobian at Wilson-Fisher point", bool(ok),
        detail=f"eigenvalues {tuple(round(x, 4) for x in ev)} (max rel dev {max(rel):.2%}), off-block max {off:.1e}",
        values={"jacobian": J, "eigenvalues": ev},
    )  # fmt: skip


def criterion_5() -> Check:
    p, q = scale_powers(4.663, 2.875)
    e = exponent_set(p, q)
    want = dict(p=1.110, q=0.762, alpha=1.099, beta=0.215, gamma=0.471, delta=3.197, eta=0.953, nu=0.450)
    got = {k: getattr(e, k) for k in want}
    field_ok = all(abs(got[k] - v) < 2e-3 for k, v in want.items())
    p1, _ = scale_powers(4.643)
    e1 = exponent_set(p1)
    p_ok, nu_ok = abs(p1 - 1.107) < 5e-4, abs(e1.nu - 0.451) < 5e-4
    mark = lambda ok: "ok" if ok else "MISS"  # noqa: E731
    detail = (
        ", ".join(f"{k}={got[k]:.4f}" for k in want)
        + f" [{mark(field_ok)}]; from 4.643 alone p={p1:.5f} (|dp|={abs(p1 - 1.107):.1e}) [{mark(p_ok)}], "
        f"nu={e1.nu:.5f} [{mark(nu_ok)}]"
    )
    values = dict(got, p_nn=p1, nu_nn=e1.nu)
    return Check("C5", "Scale powers and exponents", bool(field_ok and p_ok and nu_ok), detail=detail, values=values)


def criterion_6(seed: int | None = None) -> Check:
    rng = np.random.default_rng(default_seed() if seed is None else seed)
    worst = 0.0
    for p, q in zip(rng.uniform(0.5, 2, 1000), rng.uniform(0.3, 0.95, 1000)):
        worst = max(worst, float(np.max(np.abs(identity_residuals(exponent_set(p, q))))))
    return Check("C6", "Scaling identities on 1000 random (p, q)", worst < 1e-12, detail=f"max residual {worst:.1e}")


def nnn_summary(k02_cubic: bool) -> dict:
    m = RGMap(Case.NEXT_NEAREST, k02_cubic=k02_cubic)
    recs = find_fixed_points(m)
    gauss = [r for r in recs if r.kind is Kind.GAUSSIAN]
    wf = wilson_fisher(recs)
    nu = None
    if wf is not None:
        lam = max(abs(x) for x in wf.eigenvalues)
        if lam > 1:
            nu = exponent_set(scale_powers(lam)[0]).nu
    return {
        "gaussian": (gauss[0].point.K, gauss[0].point.u) if gauss else None,
        "wilson_fisher": (wf.point.K, wf.point.u) if wf else None,
        "nu": nu,
    }


def criterion_7() -> Check:
    lit = nnn_summary(False)
    alt = nnn_summary(True)
    ok = lit["gaussian"] is not None and abs(lit["gaussian"][0] - 0.829) / 0.829 < 0.01
    wf = lit["wilson_fisher"]
    ok &= wf is not None and abs(wf[0] - 0.257) / 0.257 < 0.05 and abs(wf[1] - 5.405) / 5.405 < 0.05
    ok &= lit["nu"] is not None and abs(lit["nu"] - 0.341) / 0.341 < 0.05

    def fmt(s):
        g, w, nu = s["gaussian"], s["wilson_fisher"], s["nu"]
        return (
            f"B={'none' if g is None else f'{g[0]:.4f}'}, "
            f"C={'none' if w is None else f'({w[0]:.4f}, {w[1]:.4f})'}, "
            f"nu={'n/a' if nu is None else f'{nu:.4f}'}"
        )

    return Check(
        "C7", "NNN fixed points (0.829b, 0), (0.257b, 5.405b^2), nu = 0.341", bool(ok),
        detail=f"as printed: {fmt(lit)}; with -12K^3: {fmt(alt)}",
        values={"as_printed": lit, "k02_cubic": alt},
    )  # fmt: skip


def random_samples(rng: np.random.Generator, n: int, with_field: bool) -> list[Couplings]:
    out = []
    for _ in range(n):
        b = float(rng.uniform(0.5, 2.0))
        h = float(rng.uniform(-1, 1) * math.sqrt(b)) if with_field else 0.0
        out.append(Couplings(float(rng.uniform(0.05, 1.5) * b), float(rng.uniform(0, 1) * b * b), h, b))
    return out


def _rel(a: float, b: float, floor: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), floor)


def derived_vs_tabulated(seed: int | None = None, n: int = 100) -> dict:
    """Worst relative deviation per (case, order) between engine and closed forms."""
    rng = np.random.default_rng(default_seed() if seed is None else seed)
    worst = {}
    for case, tab in ((Case.NEAREST_NEIGHBOR, nn_coeffs), (Case.EXTERNAL_FIELD, field_coeffs)):
        for c in random_samples(rng, n, case is Case.EXTERNAL_FIELD):
            d, t = derive_coeffs(case, c), tab(c)
            for order in range(3):
                dv, tv = d.orders[order].as_tuple(), t.orders[order].as_tuple()
                # coefficients that cancel to ~0 are judged against the block's own scale
                floor = 1e-3 * max(max(map(abs, dv)), max(map(abs, tv)), 1e-300)
                r = max(_rel(x, y, floor) for x, y in zip(dv, tv))
                key = (case.value, order)
                worst[key] = max(worst.get(key, 0.0), r)
    return worst


ORDER2_POINTS = ((1.0, 1.0, 1.0, 0.0), (0.7, 1.3, 0.2, 0.0), (0.7, 1.3, 0.2, 0.3), (1.2, 0.6, 0.5, -0.4))


def order2_engine_vs_quadrature() -> list[dict]:
    rows = []
    for K, b, u, h in ORDER2_POINTS:
        c = Couplings(K, u, h, b)
        eng = derive_coeffs(Case.EXTERNAL_FIELD if h else Case.NEAREST_NEIGHBOR, c).order2.as_tuple()
        fit = oracle.fit_boundary_polynomial(
            lambda x, z: oracle.unit_second_cumulant(K, b, u, x, z, h), 9, 1.0, 8
        )
        quad = oracle.basis_from_fit(fit)
        pub = field_coeffs(c).order2.as_tuple()
        scale = max(map(abs, eng))
        rows.append(
            {
                "K": K, "b": b, "u": u, "h": h,
                "engine": eng, "quadrature": quad, "published": pub,
                "engine_vs_quadrature": max(abs(x - y) for x, y in zip(eng, quad)) / scale,
            }
        )  # fmt: skip
    return rows


def criterion_8(seed: int | None = None) -> Check:
    worst = derived_vs_tabulated(seed)
    low = max(v for (case, order), v in worst.items() if order < 2)
    rows = order2_engine_vs_quadrature()
    quad_dev = max(r["engine_vs_quadrature"] for r in rows)
    ok = low < 1e-12 and quad_dev < 1e-8
    r0 = rows[0]
    detail = (
        f"orders 0-1 max rel dev {low:.1e}; order 2 engine vs quadrature {quad_dev:.1e}; "
        f"order 2 at K=b=u=1: engine {tuple(round(x, 4) for x in r0['engine'][:3])} "
        f"vs published {tuple(round(x, 4) for x in r0['published'][:3])}"
    )
    return Check(
        "C8", "Engine reproduces tabulated orders 0-1; order 2 matches quadrature", bool(ok),
        detail=detail, values={"worst": {f"{k[0]}/{k[1]}": v for k, v in worst.items()}, "order2": rows},
    )  # fmt: skip


def closure_discrepancy(K: float, b: float, u: float, backend: Backend = Backend.TABULATED) -> float:
    c = Couplings(K, u, 0.0, b)
    blocks = nn_coeffs(c) if backend is Backend.TABULATED else derive_coeffs(Case.NEAREST_NEIGHBOR, c)
    trunc = blocks.total().as_tuple()[:3]
    exact = oracle.closure_basis(K, b, u)
    return max(abs(x - y) for x, y in zip(trunc, exact))


def criterion_9() -> Check:
    K, b, u = 0.6, 1.0, 0.02
    tab, tab_half = closure_discrepancy(K, b, u), closure_discrepancy(K, b, u / 2)
    eng, eng_half = (closure_discrepancy(K, b, u, Backend.DERIVED), closure_discrepancy(K, b, u / 2, Backend.DERIVED))
    shrink_tab, shrink_eng = tab / tab_half, eng / eng_half
    ok = tab < 5e-4 and 6.0 <= shrink_tab <= 10.0
    return Check(
        "C9", "Truncated cumulant vs exact partial trace at (0.6, 1.0, 0.02)", bool(ok),
        detail=(
            f"tabulated |delta|={tab:.2e} (bound 5e-4), halving u shrinks it {shrink_tab:.1f}x; "
            f"engine |delta|={eng:.2e}, shrinks {shrink_eng:.1f}x"
        ),
        values={"tabulated": tab, "tabulated_half": tab_half, "engine": eng, "engine_half": eng_half},
    )  # fmt: skip


def closure_and_parity(seed: int | None = None, n: int = 1000) -> dict:
    """Violations of u=0 => u'=0, h=0 => h'=0 and h-parity over ``n`` evaluable samples per case.

    Samples whose step raises RescaleFailure are redrawn (and counted).
    """
    rng = np.random.default_rng(default_seed() if seed is None else seed)
    counts = {"u_closure": 0, "h_closure": 0, "parity": 0, "evaluated": 0, "rescale_failed": 0}
    for case in Case:
        m = RGMap(case)
        done = 0
        while done < n:
            (c,) = random_samples(rng, 1, case is Case.EXTERNAL_FIELD)
            try:
                out0 = m.step(Couplings(c.K, 0.0, c.h, c.b))
                if case is Case.EXTERNAL_FIELD:
                    out_h0 = m.step(Couplings(c.K, c.u, 0.0, c.b))
                    plus, minus = m.step(c), m.step(Couplings(c.K, c.u, -c.h, c.b))
            except RescaleFailure:
                counts["rescale_failed"] += 1
                continue
            done += 1
            counts["u_closure"] += out0.u != 0.0
            if case is Case.EXTERNAL_FIELD:
                counts["h_closure"] += out_h0.h != 0.0
                counts["parity"] += not (plus.K == minus.K and plus.u == minus.u and plus.h == -minus.h)
        counts["evaluated"] += done
    return counts


def criterion_10(seed: int | None = None) -> Check:
    cnt = closure_and_parity(seed)
    ok = cnt["u_closure"] == 0 and cnt["h_closure"] == 0 and cnt["parity"] == 0
    return Check(
        "C10", "Sub-manifold closure and field parity", ok,
        detail=", ".join(f"{k}={v}" for k, v in cnt.items()), values=cnt,
    )  # fmt: skip


def discrepancies() -> list[Check]:
    """Places where the published numbers and the computed ones part ways."""
    out = []
    nn = RGMap(Case.NEAREST_NEIGHBOR)
    wf = _wf(nn)
    out.append(
        Check(
            "D1", "NN Wilson-Fisher u*: 0.370b^2 (NN listing) vs 0.352b^2 (field listing)",
            abs(wf.point.u - 0.370) < 1e-3, required=False,
            detail=f"computed u*={wf.point.u:.5f}; matches 0.352, not 0.370",
        )
    )  # fmt: skip
    ev = [float(np.real(x)) for x in wf.eigenvalues]
    out.append(
        Check(
            "D2", "NN 2x2 matrix (lambda1=4.643) vs field h=0 block (lambda1=4.663)",
            abs(ev[0] - 4.643) < 5e-4, required=False,
            detail=f"computed J={np.round(wf.jacobian, 3).tolist()}, lambda={tuple(round(x, 4) for x in ev)}",
        )
    )  # fmt: skip
    lit, alt = nnn_summary(False), nnn_summary(True)
    out.append(
        Check(
            "D3", "NNN zeroth-order quadratic term '-12K^2' (vs dimensionally consistent -12K^3)",
            abs(lit["gaussian"][0] - 0.829) < 1e-3, required=False,
            detail=f"Gaussian K*: as printed {lit['gaussian'][0]:.4f}, with -12K^3 {alt['gaussian'][0]:.4f} (published 0.829)",
        )
    )  # fmt: skip
    r0 = order2_engine_vs_quadrature()[0]
    out.append(
        Check(
            "D4", "Second-order NN coefficients: engine vs published at K=b=u=1",
            max(abs(x - y) for x, y in zip(r0["engine"], r0["published"])) < 1e-9, required=False,
            detail=f"engine {tuple(round(x, 5) for x in r0['engine'][:3])} vs published (105/4, 105/8, 87/16)",
        )
    )  # fmt: skip
    lit_field = RGMap(Case.EXTERNAL_FIELD, k04_literal=True)
    J = jacobian(lit_field, Couplings(wf.point.K, wf.point.u, 0.0, 1.0))
    out.append(
        Check(
            "D5", "Zeroth-order field coefficient (K-2b)h/b as printed vs (K+2b)h/b",
            abs(J[2, 2] - 2.875) < 0.03 * 2.875, required=False,
            detail=f"printed sign gives dh'/dh={J[2, 2]:.4f}; corrected sign gives 2.8748 (published 2.875)",
        )
    )  # fmt: skip
    out.append(
        Check(
            "D6", "NNN Wilson-Fisher point and nu",
            lit["wilson_fisher"] is not None and abs(lit["wilson_fisher"][1] - 5.405) < 5e-3, required=False,
            detail=(
                f"computed C={tuple(round(x, 4) for x in lit['wilson_fisher'] or ())}, nu={lit['nu']:.4f}; "
                "published (0.257, 5.405), nu=0.341"
            ),
        )
    )  # fmt: skip
    return out


CRITERIA = (
    criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
    criterion_6, criterion_7, criterion_8, criterion_9, criterion_10,
)  # fmt: skip


def run_validation(seed: int | None = None) -> list[Check]:
    checks = []
    for fn in CRITERIA:
        checks.append(fn(seed) if "seed" in inspect.signature(fn).parameters else fn())
    return checks + discrepancies()


def exit_status(checks: list[Check], strict: bool = False) -> int:
    return int(any(c.status(strict) == "FAIL" for c in checks))
