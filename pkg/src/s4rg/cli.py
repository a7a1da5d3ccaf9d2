"""Command-line interface: ``s4rg {coeffs,fixed-points,exponents,flow,validate}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from . import validate as _validate
from .exponents import ComplexEigenvalueError, MarginalEigenvalueError, exponent_set, identity_residuals, scale_powers
from .fixed_points import eigenvalues, find_fixed_points, point_ids, wilson_fisher
from .flow import basin_scan, trace, write_flow_csv
from .maps import (
    COEFF_COLUMNS,
    Backend,
    Case,
    Couplings,
    DomainError,
    RescaleFailure,
    RGCase,
    RGMap,
    coefficient_rows,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NOT_FOUND = 0, 1, 2, 3

BOOL_KEYS = {"k04_literal", "k02_cubic", "trace", "json", "strict_paper"}


@dataclass
class RunConfig:
    case: str = "nn"
    backend: str = "tabulated"
    b: float = 1.0
    K: float = 1.0
    u: float = 0.0
    h: float = 0.0
    k_min: float = 0.0
    k_max: float = 1.9
    u_min: float = 0.0
    u_max: float = 8.0
    grid: int = 24
    grid_u: int | None = None
    tol: float = 1e-12
    step: float = 1e-5
    max_iter: int = 200
    div_threshold: float = 1e6
    conv_tol: float = 1e-9
    format: str | None = None
    output: str | None = None
    k04_literal: bool = False
    k02_cubic: bool = False
    trace: bool = False
    seed: int | None = None

    def rg_map(self, backend: str | None = None) -> RGMap:
        return RGMap(
            Case(self.case),
            Backend(backend or self.backend),
            self.b,
            k04_literal=self.k04_literal,
            k02_cubic=self.k02_cubic,
        )


class UsageError(Exception):
    pass


def read_config_file(path: str | Path) -> dict[str, str]:
    """Flat ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _coerce(key: str, value: str):
    if key in BOOL_KEYS:
        if value.lower() in ("1", "true", "yes", "on"):
            return True
        if value.lower() in ("0", "false", "no", "off"):
            return False
        raise UsageError(f"config key {key}: not a boolean: {value!r}")
    return value


def _add_common(p: argparse.ArgumentParser, *, couplings=True, region=False, flow=False):
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--case", choices=[c.value for c in Case])
    p.add_argument("--b", type=float, help="Gaussian parameter b > 0")
    p.add_argument("--format", choices=["table", "csv", "json"])
    p.add_argument("--output", "-o", help="write to this path instead of stdout")
    p.add_argument("--k04-literal", action="store_true", default=None, help="use the printed (K-2b)h/b field coefficient")
    p.add_argument("--k02-cubic", action="store_true", default=None, help="NNN: read -12K^2 as -12K^3")
    if couplings:
        p.add_argument("--K", type=float)
        p.add_argument("--u", type=float)
        p.add_argument("--h", type=float)
    if region:
        p.add_argument("--k-min", type=float, help="search box in K/b")
        p.add_argument("--k-max", type=float)
        p.add_argument("--u-min", type=float, help="search box in u/b^2")
        p.add_argument("--u-max", type=float)
        p.add_argument("--grid", type=int, help="grid points per axis")
        p.add_argument("--grid-u", type=int, help="grid points along u (default: --grid)")
        p.add_argument("--tol", type=float)
        p.add_argument("--step", type=float, help="relative finite-difference step")
    if flow:
        p.add_argument("--trace", action="store_true", default=None, help="trace one start (--K --u --h) and dump JSON")
        p.add_argument("--max-iter", type=int)
        p.add_argument("--div-threshold", type=float)
        p.add_argument("--conv-tol", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="s4rg", description="Real-space decimation RG for the S^4 spin model")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="coefficient blocks at given couplings")
    _add_common(p)
    p.add_argument("--backend", choices=["tabulated", "derived", "both"])
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("fixed-points", help="locate and linearize fixed points")
    _add_common(p, couplings=False, region=True)
    p.add_argument("--backend", choices=["tabulated", "derived"])
    p.set_defaults(func=cmd_fixed_points)

    p = sub.add_parser("exponents", help="critical exponents at the Wilson-Fisher point")
    _add_common(p, couplings=False, region=True)
    p.add_argument("--backend", choices=["tabulated", "derived"])
    p.set_defaults(func=cmd_exponents)

    p = sub.add_parser("flow", help="iterate the map over a grid of starts (CSV)")
    _add_common(p, region=True, flow=True)
    p.add_argument("--backend", choices=["tabulated", "derived"])
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("validate", help="check every reproduced number")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--strict-paper", action="store_true", help="treat published-number discrepancies as failures")
    p.add_argument("--seed", type=int, help="sampling seed (default: $RG_S4_SEED or %d)" % _validate.DEFAULT_SEED)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_validate)
    return parser


def make_config(args: argparse.Namespace, overrides: dict | None = None) -> RunConfig:
    values = dict(overrides or {})
    if getattr(args, "config", None):
        values = {**{k: _coerce(k, v) for k, v in read_config_file(args.config).items()}, **values}
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    cfg = RunConfig()
    known = {f.name: f for f in fields(RunConfig)}
    for k, v in values.items():
        if k not in known:
            raise UsageError(f"unknown config key {k!r}")
        default = getattr(cfg, k)
        try:
            if isinstance(v, str) and k not in ("case", "backend", "format", "output"):
                if isinstance(default, bool):
                    v = _coerce(k, v)
                elif isinstance(default, int) or k in ("grid_u", "seed"):
                    v = int(v)
                else:
                    v = float(v)
        except ValueError:
            raise UsageError(f"bad value for {k}: {v!r}") from None
        setattr(cfg, k, v)
    if cfg.case not in {c.value for c in Case}:
        raise UsageError(f"unknown case {cfg.case!r}")
    if cfg.backend not in ("tabulated", "derived", "both"):
        raise UsageError(f"unknown backend {cfg.backend!r}")
    if not cfg.b > 0:
        raise UsageError("b must be positive")
    return cfg


def _fmt(cfg: RunConfig, stream) -> str:
    if cfg.format:
        return cfg.format
    return "table" if getattr(stream, "isatty", lambda: False)() else "csv"


def _table(rows: list[dict], columns) -> str:
    def cell(v):
        if isinstance(v, float):
            return f"{v:.10g}"
        return str(v)

    body = [[cell(r.get(c, "")) for c in columns] for r in rows]
    widths = [max(len(str(c)), *(len(b[i]) for b in body)) if body else len(str(c)) for i, c in enumerate(columns)]
    lines = ["  ".join(str(c).rjust(w) for c, w in zip(columns, widths))]
    lines += ["  ".join(v.rjust(w) for v, w in zip(b, widths)) for b in body]
    return "\n".join(lines) + "\n"


def _csv(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def _emit(text: str, cfg_output: str | None, out) -> None:
    if cfg_output:
        Path(cfg_output).write_text(text)
    else:
        out.write(text)


def _render(rows, columns, fmt, json_obj=None) -> str:
    if fmt == "json":
        return json.dumps(rows if json_obj is None else json_obj, indent=2) + "\n"
    if fmt == "csv":
        return _csv(rows, columns)
    return _table(rows, columns)


def cmd_coeffs(cfg: RunConfig, out) -> int:
    c = Couplings(cfg.K, cfg.u, cfg.h, cfg.b)
    backends = ["derived", "tabulated"] if cfg.backend == "both" else [cfg.backend]
    rows = []
    blocks = {}
    for be in backends:
        m = cfg.rg_map(be)
        blocks[be] = m.coeffs(c)
        rows += coefficient_rows(RGCase(m.case, m.backend), c, blocks[be])
        if blocks[be].flags:
            print(f"warning: {', '.join(blocks[be].flags)}", file=sys.stderr)
    if cfg.backend == "both":
        for order in range(3):
            d, t = blocks["derived"].orders[order], blocks["tabulated"].orders[order]
            rows.append(
                {
                    "case": cfg.case, "backend": "delta", "order": order,
                    "c_ss": d.c_ss - t.c_ss, "c_s2": d.c_s2 - t.c_s2, "c_s4": d.c_s4 - t.c_s4, "c_s": d.c_s - t.c_s,
                    "residual_norm": d.residual_norm, "K": c.K, "b": c.b, "u": c.u, "h": c.h,
                }
            )  # fmt: skip
    _emit(_render(rows, COEFF_COLUMNS, _fmt(cfg, out)), cfg.output, out)
    return EXIT_OK


def _region(cfg: RunConfig):
    if cfg.k_min > cfg.k_max or cfg.u_min > cfg.u_max or cfg.grid < 1 or (cfg.grid_u is not None and cfg.grid_u < 1):
        raise UsageError("empty region or grid")
    return ((cfg.k_min, cfg.k_max), (cfg.u_min, cfg.u_max))


FP_COLUMNS = ("case", "backend", "id", "kind", "K", "u", "h", "b", "residual", "eigenvalues", "jacobian")


def _fp_rows(records) -> list[dict]:
    rows = []
    for rid, r in zip(point_ids(records), records):
        rows.append(
            {
                "case": r.case, "backend": r.backend, "id": rid, "kind": r.kind.value,
                "K": r.point.K, "u": r.point.u, "h": r.point.h, "b": r.point.b, "residual": r.residual,
                "eigenvalues": ";".join(f"{x:.10g}" for x in r.eigenvalues),
                "jacobian": ";".join(f"{x:.10g}" for x in r.jacobian.ravel()),
            }
        )  # fmt: skip
    return rows


def cmd_fixed_points(cfg: RunConfig, out) -> int:
    m = cfg.rg_map()
    if m.case is Case.NEXT_NEAREST and cfg.k_max >= 2:
        raise UsageError("NNN search region must satisfy K/b < 2")
    records = find_fixed_points(m, _region(cfg), cfg.grid, cfg.tol, cfg.step)
    fmt = _fmt(cfg, out)
    if fmt == "json":
        obj = {"count": len(records), "fixed_points": [dict(r.to_dict(), id=i) for i, r in zip(point_ids(records), records)]}
        text = json.dumps(obj, indent=2) + "\n"
    else:
        text = _render(_fp_rows(records), FP_COLUMNS, fmt)
        if fmt == "table":
            text += f"{len(records)} fixed point(s) found\n"
    _emit(text, cfg.output, out)
    return EXIT_OK


EXP_COLUMNS = (
    "case", "lambda1", "lambda3", "p", "q", "alpha", "beta", "gamma", "delta", "eta", "nu",
    "res_rushbrooke", "res_widom", "res_fisher", "res_josephson",
)  # fmt: skip


def exponent_report(m: RGMap, region=((0.0, 1.9), (0.0, 8.0)), grid: int = 24, tol: float = 1e-12) -> dict | None:
    """Exponents at the Wilson-Fisher point, or None if there is none."""
    wf = wilson_fisher(find_fixed_points(m, region, grid, tol))
    if wf is None:
        return None
    J = wf.jacobian
    thermal = eigenvalues(J[:2, :2])
    lam1 = thermal[0]
    lam3 = None
    if m.dim == 3:
        if max(abs(J[0, 2]), abs(J[1, 2]), abs(J[2, 0]), abs(J[2, 1])) > 1e-8:
            raise ValueError("field direction does not decouple at the fixed point")
        lam3 = float(J[2, 2])
    p, q = scale_powers(lam1, lam3)
    e = exponent_set(p, q)
    row = {"case": m.case.value, "lambda1": lam1, "lambda3": lam3, "point": {"K": wf.point.K, "u": wf.point.u}}
    row.update({k: getattr(e, k) for k in ("p", "q", "alpha", "beta", "gamma", "delta", "eta", "nu")})
    if q is not None:
        for name, r in zip(("rushbrooke", "widom", "fisher", "josephson"), identity_residuals(e)):
            row[f"res_{name}"] = float(r)
    return row


def cmd_exponents(cfg: RunConfig, out) -> int:
    m = cfg.rg_map()
    try:
        row = exponent_report(m, _region(cfg), cfg.grid, cfg.tol)
    except (MarginalEigenvalueError, ComplexEigenvalueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_FOUND
    if row is None:
        print("error: no Wilson-Fisher fixed point found", file=sys.stderr)
        return EXIT_NOT_FOUND
    fmt = _fmt(cfg, out)
    flat = {k: v for k, v in row.items() if k != "point"}
    _emit(_render([flat], EXP_COLUMNS, fmt, json_obj=row), cfg.output, out)
    return EXIT_OK


def cmd_flow(cfg: RunConfig, out) -> int:
    m = cfg.rg_map()
    # fixed points are located on the default box so labels do not depend on the scan grid
    recs = find_fixed_points(m, region=((0.0, 1.9), (0.0, 8.0)), starts=12)
    known = [(i, r.point) for i, r in zip(point_ids(recs), recs)]
    kw = dict(max_iter=cfg.max_iter, div_threshold=cfg.div_threshold, conv_tol=cfg.conv_tol, known_points=known)
    if cfg.trace:
        t = trace(m, Couplings(cfg.K, cfg.u, cfg.h, cfg.b), **kw)
        _emit(t.to_json(indent=2) + "\n", cfg.output, out)
        return EXIT_OK
    region = _region(cfg)
    traces = basin_scan(m, region[0], region[1], (cfg.grid, cfg.grid_u or cfg.grid), h0=cfg.h, **kw)
    if _fmt(cfg, out) == "json":
        text = json.dumps(
            [
                {"K0": t.start.K, "u0": t.start.u, "h0": t.start.h, "b": t.start.b, "terminal": t.terminal.value,
                 "fixed_point_id": t.fixed_point_id, "iterations": t.iterations}
                for t in traces
            ],
            indent=2,
        ) + "\n"  # fmt: skip
    else:
        buf = io.StringIO()
        write_flow_csv(traces, buf)
        text = buf.getvalue()
    _emit(text, cfg.output, out)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace, out) -> int:
    seed = args.seed if args.seed is not None else _validate.default_seed()
    checks = _validate.run_validation(seed)
    strict = args.strict_paper
    status = _validate.exit_status(checks, strict)
    if args.json:
        text = json.dumps(
            {"seed": seed, "strict": strict, "passed": status == 0, "checks": [c.to_dict(strict) for c in checks]},
            indent=2,
        ) + "\n"  # fmt: skip
    else:
        lines = [f"{c.status(strict):4s}  {c.id:4s} {c.title}\n        {c.detail}" for c in checks]
        n_fail = sum(c.status(strict) == "FAIL" for c in checks)
        lines.append(f"{len(checks)} items, {n_fail} failing (seed {seed})")
        text = "\n".join(lines) + "\n"
    _emit(text, args.output, out)
    return status


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            return args.func(args, out)
        cfg = make_config(args)
        if args.command == "flow":
            cfg = _flow_defaults(args, cfg)
        return args.func(cfg, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, RescaleFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _file_keys(args) -> set[str]:
    return set(read_config_file(args.config)) if getattr(args, "config", None) else set()


def _flow_defaults(args, cfg: RunConfig) -> RunConfig:
    """Flow scans default to a coarser box than the fixed-point search."""
    given = {f for f in ("k_min", "k_max", "u_min", "u_max", "grid") if getattr(args, f, None) is not None}
    given |= _file_keys(args)
    for key, val in (("k_min", 0.05), ("k_max", 1.9), ("u_min", 0.0), ("u_max", 1.0), ("grid", 20)):
        if key not in given:
            setattr(cfg, key, val)
    return cfg


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
