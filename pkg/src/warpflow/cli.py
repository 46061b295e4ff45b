"""Command line front end.

Subcommands: evolve, verify, reference, probe, sweep, dump-surface.
Exit codes follow the CI convention: 0 pass, 2 finding (an inequality or
monotonicity violated beyond tolerance), 1 runtime error, 64 usage error.
A JSON config file can seed any flags via --config; explicit flags win.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from multiprocessing import Pool

import numpy as np

from . import inequalities as ineq
from .ambient import WarpedSpace, parse_space_spec, probe_assumptions
from .flows import FlowSpec, FlowTrace, evolve
from .surface import (
    RadialGraph,
    dump_surface_csv,
    geometry,
    load_surface_csv,
    make_seed_surface,
    parse_grid_spec,
    parse_surface_spec,
)

__all__ = ["main", "RunConfig"]

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FINDING = 2
EXIT_USAGE = 64

_FLOW_NAMES = {
    "imcf": "imcf",
    "euclidean-inverse": "euclidean_inverse",
    "euclidean_inverse": "euclidean_inverse",
    "sx": "hyperbolic_sx",
    "hyperbolic-sx": "hyperbolic_sx",
    "hyperbolic_sx": "hyperbolic_sx",
    "bgl": "sphere_bgl",
    "sphere-bgl": "sphere_bgl",
    "sphere_bgl": "sphere_bgl",
}


class UsageError(ValueError):
    """Bad flags, specs, or cross-field constraints: exit 64."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    """Flat record of one CLI invocation; serializes round-trip."""

    command: str
    space: str = "euclidean"
    n: int = 2
    grid: str = "64x128"
    surface: str = "round:r0=1"
    surface_file: str | None = None
    flow: str | None = None
    k: int = 1
    t_final: float = 1.0
    report_dt: float | None = None
    cfl: float = 0.2
    max_rel_step: float = 1e-3
    eps_mono: float = 1e-6
    checks: list[str] = field(default_factory=list)
    ell: int = 0
    r: float | None = None
    invert: float | None = None
    r_max: float = 10.0
    samples: int = 100
    tol: float = 1e-8
    out: str | None = None
    fmt: str = "csv"
    workers: int = 1

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        return cls(**data)


def _positive_workers(value: str) -> int:
    w = int(value)
    if w < 1:
        raise UsageError(f"workers must be >= 1, got {w}")
    return w


def _build_parser() -> _Parser:
    parser = _Parser(prog="warpflow",
                     description="star-shaped hypersurface flows and inequality checks")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, surface=True):
        p.add_argument("--config", default=None, help="JSON file of flag defaults")
        p.add_argument("--space", default=argparse.SUPPRESS)
        p.add_argument("--n", type=int, choices=(1, 2), default=argparse.SUPPRESS)
        p.add_argument("--grid", default=argparse.SUPPRESS,
                       help="MxP for n=2, node count for n=1")
        if surface:
            p.add_argument("--surface", default=argparse.SUPPRESS)
            p.add_argument("--surface-file", dest="surface_file",
                           default=argparse.SUPPRESS,
                           help="load the surface from a dumped CSV instead")
        p.add_argument("--out", default=argparse.SUPPRESS)
        p.add_argument("--format", dest="fmt", choices=("csv", "json"),
                       default=argparse.SUPPRESS)
        p.add_argument("--workers", type=_positive_workers, default=argparse.SUPPRESS)

    p = sub.add_parser("evolve", help="run a flow and write its trace")
    common(p)
    p.add_argument("--flow", default=argparse.SUPPRESS,
                   help="imcf | euclidean-inverse | sx | bgl")
    p.add_argument("--k", type=int, default=argparse.SUPPRESS)
    p.add_argument("--t-final", dest="t_final", type=float, default=argparse.SUPPRESS)
    p.add_argument("--report-dt", dest="report_dt", type=float, default=argparse.SUPPRESS)
    p.add_argument("--cfl", type=float, default=argparse.SUPPRESS)
    p.add_argument("--max-rel-step", dest="max_rel_step", type=float,
                   default=argparse.SUPPRESS)
    p.add_argument("--eps-mono", dest="eps_mono", type=float, default=argparse.SUPPRESS)

    p = sub.add_parser("verify", help="evaluate inequality deficits on one surface")
    common(p)
    p.add_argument("--check", action="append", dest="checks", default=argparse.SUPPRESS,
                   help="name[:k=..][,ell=..]; repeatable")
    p.add_argument("--tol", type=float, default=argparse.SUPPRESS)

    p = sub.add_parser("reference", help="geodesic-ball reference functions")
    p.add_argument("--config", default=None)
    p.add_argument("--space", default=argparse.SUPPRESS)
    p.add_argument("--n", type=int, choices=(1, 2), default=argparse.SUPPRESS)
    p.add_argument("--k", type=int, default=argparse.SUPPRESS)
    p.add_argument("--ell", type=int, default=argparse.SUPPRESS)
    p.add_argument("--r", type=float, default=argparse.SUPPRESS)
    p.add_argument("--invert", type=float, default=argparse.SUPPRESS,
                   help="invert chi_ell at this value instead of evaluating at --r")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"),
                   default=argparse.SUPPRESS)

    p = sub.add_parser("probe", help="sample warping-function assumptions")
    p.add_argument("--config", default=None)
    p.add_argument("--space", default=argparse.SUPPRESS)
    p.add_argument("--r-max", dest="r_max", type=float, default=argparse.SUPPRESS)
    p.add_argument("--samples", type=int, default=argparse.SUPPRESS)
    p.add_argument("--format", dest="fmt", choices=("csv", "json"),
                   default=argparse.SUPPRESS)

    p = sub.add_parser("sweep", help="min deficit over a surface family")
    common(p)
    p.add_argument("--check", action="append", dest="checks", default=argparse.SUPPRESS)
    p.add_argument("--tol", type=float, default=argparse.SUPPRESS)

    p = sub.add_parser("dump-surface", help="write a surface as CSV")
    common(p)

    return parser


def _merge_config(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=ns.command.replace("-", "_"))
    file_values: dict = {}
    if getattr(ns, "config", None):
        with open(ns.config) as fh:
            file_values = json.load(fh)
        if not isinstance(file_values, dict):
            raise UsageError(f"{ns.config}: config must be a JSON object")
    for key, val in file_values.items():
        if key in ("command", "config"):
            continue
        if not hasattr(cfg, key):
            raise UsageError(f"unknown config key {key!r}")
        setattr(cfg, key, val)
    for key, val in vars(ns).items():
        if key in ("command", "config"):
            continue
        setattr(cfg, key, val)
    if "workers" not in vars(ns) and "workers" not in file_values:
        cfg.workers = int(os.environ.get("WARPFLOW_WORKERS", "1"))
    if cfg.grid == "64x128" and cfg.n == 1:
        cfg.grid = "512"
    return cfg


def _build_space_grid(cfg: RunConfig) -> tuple[WarpedSpace, "object"]:
    try:
        space = parse_space_spec(cfg.space)
        grid = parse_grid_spec(cfg.grid, cfg.n, space.fiber_scale)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return space, grid


def _build_surface(cfg: RunConfig, space: WarpedSpace, grid) -> RadialGraph:
    if cfg.surface_file:
        return load_surface_csv(cfg.surface_file, space)
    try:
        family, params = parse_surface_spec(cfg.surface)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return make_seed_surface(space, grid, family, **params)


def _fmt_float(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return repr(float(x))


# ---------------------------------------------------------------- evolve

def _trace_columns(trace: FlowTrace, series: dict[str, np.ndarray]) -> list[tuple[str, list]]:
    spec = trace.spec
    n = trace.n
    first = trace.samples[0].report
    cols: list[tuple[str, list]] = [
        ("t", [s.t for s in trace.samples]),
        ("area", [s.report.area for s in trace.samples]),
        ("volume", [s.report.volume for s in trace.samples]),
    ]
    if first.quermass is not None:
        for j in range(n + 2):
            cols.append((f"W{j}", [s.report.W(j) for s in trace.samples]))
    for k in sorted(first.momenta):
        cols.append((f"momentum_{format(k, 'g')}",
                     [s.report.momentum(k) for s in trace.samples]))
    for k in range(1, n + 1):
        cols.append((f"phiE{k}", [s.report.phi_curvature(k) for s in trace.samples]))
    for name, vals in series.items():
        if name == "newton_maclaurin_margin":
            continue
        if spec.kind == "hyperbolic_sx":
            label = ("monotone_hyp_lhs" if name.startswith("phiE")
                     else f"monotone_hyp_{name}")
        elif spec.kind == "sphere_bgl":
            label = "monotone_sph_lhs"
        else:
            label = name
        cols.append((label, list(vals)))
    cols.append(("minH", [s.class_report.min_H for s in trace.samples]))
    for j in range(1, spec.k + 1):
        cols.append((f"minE{j}", [s.class_report.min_E[j] for s in trace.samples]))
    cols.append(("min_static_margin",
                 [s.class_report.static_margin for s in trace.samples]))
    cols.append(("dt", [s.dt for s in trace.samples]))
    return cols


def _write_table(path, columns: list[tuple[str, list]], fmt: str, meta: dict) -> None:
    out = sys.stdout if path is None else open(path, "w", newline="")
    try:
        if fmt == "csv":
            writer = csv.writer(out)
            writer.writerow([name for name, _ in columns])
            rows = len(columns[0][1])
            for i in range(rows):
                writer.writerow([vals[i] if isinstance(vals[i], str)
                                 else _fmt_float(vals[i]) for _, vals in columns])
        else:
            rows = len(columns[0][1])
            samples = [
                {name: (None if vals[i] is None
                        else (float(vals[i]) if not isinstance(vals[i], str) else vals[i]))
                 for name, vals in columns}
                for i in range(rows)
            ]
            json.dump({"meta": meta, "samples": samples}, out, sort_keys=True, indent=1)
            out.write("\n")
    finally:
        if path is not None:
            out.close()


def _series_monotone_ok(series: dict[str, np.ndarray], spec: FlowSpec) -> list[str]:
    """Names of series that violate their expected direction beyond eps_mono."""
    bad = []
    for name, vals in series.items():
        if name == "newton_maclaurin_margin":
            if np.min(vals) < -1e-10:
                bad.append(name)
            continue
        nondecreasing = name.startswith("W_")
        steps = np.diff(vals)
        scale = spec.eps_mono * np.maximum(np.abs(vals[1:]), np.abs(vals[:-1]))
        if nondecreasing:
            if np.any(steps < -scale):
                bad.append(name)
        elif np.any(steps > scale):
            bad.append(name)
    return bad


def cmd_evolve(cfg: RunConfig) -> int:
    if cfg.flow is None:
        raise UsageError("evolve requires --flow")
    kind = _FLOW_NAMES.get(cfg.flow.strip().lower())
    if kind is None:
        raise UsageError(f"unknown flow {cfg.flow!r}")
    space, grid = _build_space_grid(cfg)
    report_dt = cfg.report_dt if cfg.report_dt is not None else cfg.t_final / 100.0
    spec = FlowSpec(kind=kind, k=cfg.k, t_final=cfg.t_final, report_dt=report_dt,
                    cfl=cfg.cfl, max_rel_step=cfg.max_rel_step, eps_mono=cfg.eps_mono)
    try:
        spec.validate(space, cfg.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    graph = _build_surface(cfg, space, grid)

    trace = evolve(space, graph, spec)
    ks = sorted(trace.samples[0].report.momenta) if kind == "imcf" else None
    series = ineq.monotone_series(space, trace, spec, ks=ks)
    columns = _trace_columns(trace, series)
    meta = {"config": cfg.to_dict(), "termination": list(trace.termination),
            "findings": trace.findings}
    _write_table(cfg.out, columns, cfg.fmt, meta)

    bad = _series_monotone_ok(series, spec)
    if trace.findings or bad:
        for name in bad:
            print(f"finding: series {name} moves the wrong way", file=sys.stderr)
        for f in trace.findings:
            print(f"finding: {f}", file=sys.stderr)
        return EXIT_FINDING
    if trace.termination[0] != "reached_t_final":
        print(f"terminated early: {trace.termination}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


# ---------------------------------------------------------------- verify

def _parse_check(item: str) -> tuple[str, dict]:
    name, _, body = item.partition(":")
    name = name.strip().lower().replace("_", "-")
    params: dict[str, float] = {}
    if body:
        for piece in body.split(","):
            if "=" not in piece:
                raise UsageError(f"malformed check option {piece!r} in {item!r}")
            key, val = piece.split("=", 1)
            params[key.strip()] = float(val)
    return name, params


def _evaluate_check(space, graph, fields, name: str, params: dict) -> ineq.DeficitReport:
    k = params.get("k")
    ell = params.get("ell")
    if name in ("boundary-momentum", "girao"):
        return ineq.deficit_boundary_momentum(space, graph,
                                              1.0 if k is None else float(k), fields)
    if name == "weinstock":
        return ineq.deficit_weinstock_iso(space, graph, fields)
    if name == "phi-quermass":
        return ineq.deficit_phi_quermass_euclidean(space, graph,
                                                   1 if k is None else int(k), fields)
    if name == "kwong-miao":
        return ineq.kwong_miao_deficit(space, graph, 1 if k is None else int(k), fields)
    if name == "hyperbolic-ref":
        kk = 1 if k is None else int(k)
        ll = 0 if ell is None else int(ell)
        if ll > kk:
            raise UsageError(f"hyperbolic-ref requires ell <= k, got ell={ll} k={kk}")
        return ineq.deficit_hyperbolic_ref(space, graph, kk, ll, fields)
    if name == "sphere-ref":
        return ineq.deficit_sphere_ref(space, graph, 0 if ell is None else int(ell),
                                       fields)
    if name == "minkowski":
        kk = 1 if k is None else int(k)
        res = ineq.minkowski_residual(space, fields, kk)
        return ineq.DeficitReport(name="minkowski", lhs=res, rhs=0.0, k=kk,
                                  equality_expected=True)
    if name == "curve":
        return ineq.curve_kwww_deficit(space, graph, fields)
    raise UsageError(f"unknown check {name!r}")


def _deficit_rows(reports: list[ineq.DeficitReport]) -> list[tuple[str, list]]:
    cols = ["name", "k", "ell", "lhs", "rhs", "deficit", "relative_deficit",
            "class_flags"]
    table: dict[str, list] = {c: [] for c in cols}
    for rep in reports:
        d = rep.to_dict()
        table["name"].append(d["name"])
        table["k"].append("" if d["k"] is None else format(d["k"], "g"))
        table["ell"].append("" if d["ell"] is None else str(d["ell"]))
        for key in ("lhs", "rhs", "deficit", "relative_deficit"):
            table[key].append(_fmt_float(d[key]))
        table["class_flags"].append(
            ";".join(f"{k}={v}" for k, v in d["class_flags"].items()))
    return [(c, table[c]) for c in cols]


def cmd_verify(cfg: RunConfig) -> int:
    if not cfg.checks:
        raise UsageError("verify requires at least one --check")
    space, grid = _build_space_grid(cfg)
    graph = _build_surface(cfg, space, grid)
    fields = geometry(space, graph)
    reports = []
    for item in cfg.checks:
        name, params = _parse_check(item)
        try:
            reports.append(_evaluate_check(space, graph, fields, name, params))
        except UsageError:
            raise
        except ValueError as exc:
            raise UsageError(str(exc)) from exc

    if cfg.fmt == "json":
        payload = [rep.to_dict() for rep in reports]
        text = json.dumps(payload, sort_keys=True, indent=1) + "\n"
        if cfg.out:
            with open(cfg.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    else:
        _write_table(cfg.out, _deficit_rows(reports), "csv", {})

    worst = min(rep.deficit for rep in reports)
    if worst < -cfg.tol:
        print(f"finding: deficit {worst} below -{cfg.tol}", file=sys.stderr)
        return EXIT_FINDING
    return EXIT_OK


# ---------------------------------------------------------------- reference

def cmd_reference(cfg: RunConfig) -> int:
    try:
        space = parse_space_spec(cfg.space)
        if cfg.invert is not None:
            radius = ineq.ball_chi_inverse(space, cfg.ell, cfg.invert, cfg.n)
            values = {"chi_inverse": radius, "ell": cfg.ell, "w": cfg.invert}
        else:
            if cfg.r is None:
                raise UsageError("reference requires --r or --invert")
            values = {
                "r": cfg.r,
                "xi_k": ineq.ball_xi(space, cfg.k, cfg.r, cfg.n),
                "chi_ell": ineq.ball_chi(space, cfg.ell, cfg.r, cfg.n),
                "k": cfg.k,
                "ell": cfg.ell,
            }
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if cfg.fmt == "json":
        print(json.dumps(values, sort_keys=True))
    else:
        for key, val in values.items():
            print(f"{key} = {val}")
    return EXIT_OK


# ---------------------------------------------------------------- probe

def cmd_probe(cfg: RunConfig) -> int:
    try:
        space = parse_space_spec(cfg.space)
        report = probe_assumptions(space, cfg.r_max, cfg.samples)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if cfg.fmt == "json":
        payload = {
            "kind": report.kind,
            "r": list(report.r),
            "ratio2": list(report.ratio2),
            "verdicts": {k: {"holds": v[0], "violated_at": v[1]}
                         for k, v in report.verdicts.items()},
            "lambda_prime_unbounded": report.lambda_prime_unbounded,
            "sup_dlam": report.sup_dlam,
            "sup_ratio2": report.sup_ratio2,
            "liminf_ratio2": report.liminf_ratio2,
            "sup_ratio3": report.sup_ratio3,
        }
        print(json.dumps(payload, sort_keys=True))
    else:
        for line in report.summary_lines():
            print(line)
    return EXIT_OK


# ---------------------------------------------------------------- sweep

def _expand_range(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) == 2:
        lo, hi = float(parts[0]), float(parts[1])
        return [float(v) for v in range(int(lo), int(hi) + 1)]
    lo, hi, step = map(float, parts)
    count = int(round((hi - lo) / step)) + 1
    return [lo + i * step for i in range(count)]


def _sweep_members(surface_spec: str) -> list[tuple[str, dict]]:
    family, _, body = surface_spec.partition(":")
    family = family.strip()
    fixed: dict[str, float] = {}
    swept: tuple[str, list[float]] | None = None
    for item in body.split(","):
        if "=" not in item:
            raise UsageError(f"malformed surface option {item!r}")
        key, val = item.split("=", 1)
        key = key.strip()
        vals = _expand_range(val)
        if len(vals) == 1:
            fixed[key] = vals[0]
        elif swept is None:
            swept = (key, vals)
        else:
            raise UsageError("sweep supports one swept parameter at a time")
    if swept is None:
        return [(family, fixed)]
    key, vals = swept
    return [(family, {**fixed, key: v}) for v in vals]


def _sweep_one(args) -> tuple[dict, list[dict]]:
    space_spec, n, grid_spec, family, params, checks = args
    space = parse_space_spec(space_spec)
    grid = parse_grid_spec(grid_spec, n, space.fiber_scale)
    graph = make_seed_surface(space, grid, family, **params)
    fields = geometry(space, graph)
    reports = []
    for item in checks:
        name, cparams = _parse_check(item)
        reports.append(_evaluate_check(space, graph, fields, name, cparams).to_dict())
    return params, reports


def cmd_sweep(cfg: RunConfig) -> int:
    if not cfg.checks:
        raise UsageError("sweep requires at least one --check")
    members = _sweep_members(cfg.surface)
    parse_space_spec(cfg.space)  # validate early for exit 64
    tasks = [(cfg.space, cfg.n, cfg.grid, family, params, cfg.checks)
             for family, params in members]
    if cfg.workers > 1:
        with Pool(cfg.workers) as pool:
            results = pool.map(_sweep_one, tasks)
    else:
        results = [_sweep_one(t) for t in tasks]

    param_keys = sorted({k for _, params in members for k in params})
    check_names = [f"{rep['name']}" + (f"_k{format(rep['k'], 'g')}" if rep["k"] else "")
                   + (f"_l{rep['ell']}" if rep["ell"] is not None else "")
                   for rep in results[0][1]]
    columns: list[tuple[str, list]] = [(k, []) for k in param_keys]
    columns += [(name, []) for name in check_names]
    columns.append(("min_deficit", []))
    for params, reports in results:
        for idx, key in enumerate(param_keys):
            columns[idx][1].append(_fmt_float(params.get(key)))
        deficits = [rep["deficit"] for rep in reports]
        for j, rep in enumerate(reports):
            columns[len(param_keys) + j][1].append(_fmt_float(rep["deficit"]))
        columns[-1][1].append(_fmt_float(min(deficits)))
    _write_table(cfg.out, columns, cfg.fmt, {"config": cfg.to_dict()})

    worst = min(float(v) for v in columns[-1][1])
    return EXIT_FINDING if worst < -cfg.tol else EXIT_OK


# ---------------------------------------------------------------- dump

def cmd_dump_surface(cfg: RunConfig) -> int:
    if cfg.out is None:
        raise UsageError("dump-surface requires --out")
    space, grid = _build_space_grid(cfg)
    graph = _build_surface(cfg, space, grid)
    dump_surface_csv(graph, cfg.out)
    return EXIT_OK


_COMMANDS = {
    "evolve": cmd_evolve,
    "verify": cmd_verify,
    "reference": cmd_reference,
    "probe": cmd_probe,
    "sweep": cmd_sweep,
    "dump_surface": cmd_dump_surface,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
        cfg = _merge_config(ns)
        return _COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # runtime failure: exit 1
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
