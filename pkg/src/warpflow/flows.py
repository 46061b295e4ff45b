"""Inverse-curvature-type flows of radial graphs.

Normal speeds on the menu:

    imcf               f = 1/H                      (any ambient)
    euclidean_inverse  f = E_{k-1}/E_k              (euclidean)
    hyperbolic_sx      f = E_{k-1}/E_k - u_s/lambda'   (hyperbolic)
    sphere_bgl         f = lambda' E_{k-1}/E_k - u_s   (sphere, k = n)

The graph equation is du/dt = f v, the standard conversion of a normal
speed through <d_r, nu> = 1/v.  Stepping is explicit Heun with step-doubling
error control; a step is also rejected and halved when the flow's cone
condition breaks or a tracked monotone quantity moves the wrong way by more
than eps_mono relative, and a persistent wrong-way move is recorded as a
finding instead of being smoothed away.

Two stabilization details beyond the plain scheme:

* On the lat-lon grid the phi modes near the poles carry metric frequencies
  of order (P/2)/sin(theta), far above the colatitude resolution, and any
  explicit step that respects the colatitude CFL is unstable for them.  The
  tendency is therefore passed through a ring-wise longitude filter with
  cutoff (P/2) sin(theta), standard practice for global spectral grids; for
  smooth graphs the removed content is far below truncation error.

* In the euclidean ambient the speeds above are 1-homogeneous in the graph,
  so the stored graph is renormalized by the round-sphere growth factor with
  the scale tracked in log space, keeping the nodal values O(1) on long
  runs.  Physical values are reconstructed at sample times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ambient import WarpedSpace
from .grid import SphereGrid
from .quantities import (
    QuantityReport,
    full_report,
    quermassintegrals,
    surface_integral,
    weighted_volume,
)
from .surface import (
    ClassReport,
    GeometryFields,
    RadialGraph,
    convexity_class,
    geometry,
)

__all__ = [
    "FlowSpec",
    "FlowTrace",
    "TraceSample",
    "ConeViolation",
    "speed",
    "step",
    "evolve",
    "variational_check",
]

FLOW_KINDS = ("imcf", "euclidean_inverse", "hyperbolic_sx", "sphere_bgl")

# relative local-error budget for the step-doubling pair
_STEP_TOL = 1e-8
_MAX_GUARD_HALVINGS = 20
_MAX_TOTAL_HALVINGS = 40
_SPHERE_IMCF_MIN_H = 1e-3


class ConeViolation(RuntimeError):
    """A flow speed was requested outside its admissible curvature cone."""


@dataclass(frozen=True)
class FlowSpec:
    """Flow selection plus stepping and monitoring parameters."""

    kind: str
    k: int = 1
    t_final: float = 1.0
    report_dt: float = 0.1
    cfl: float = 0.2
    max_rel_step: float = 1e-3
    eps_mono: float = 1e-6
    report_ks: tuple[float, ...] = (1.0, 2.0)

    def validate(self, space: WarpedSpace, n: int) -> None:
        if self.kind not in FLOW_KINDS:
            raise ValueError(f"unknown flow kind {self.kind!r}")
        if not 1 <= self.k <= n:
            raise ValueError(f"flow order k = {self.k} outside 1..{n}")
        if self.kind == "euclidean_inverse" and space.kind != "euclidean":
            raise ValueError("euclidean_inverse flow requires the euclidean ambient")
        if self.kind == "hyperbolic_sx" and space.kind != "hyperbolic":
            raise ValueError("hyperbolic_sx flow requires the hyperbolic ambient")
        if self.kind == "sphere_bgl":
            if space.kind != "sphere":
                raise ValueError("sphere_bgl flow requires the sphere ambient")
            if self.k != n:
                raise ValueError(f"sphere_bgl supports k = n = {n} only")
        if self.t_final <= 0 or self.report_dt <= 0:
            raise ValueError("t_final and report_dt must be positive")
        if not 0 < self.cfl <= 1 or self.max_rel_step <= 0 or self.eps_mono <= 0:
            raise ValueError("cfl must be in (0, 1], max_rel_step and eps_mono positive")


def _fail_cone(kind: str, grid: SphereGrid, mask: np.ndarray, quantity: str) -> None:
    idx = int(np.argmax(mask.ravel()))
    raise ConeViolation(
        f"{kind}: cone condition {quantity} > 0 fails at {grid.node_label(idx)}"
    )


def speed(spec: FlowSpec, space: WarpedSpace, fields: GeometryFields) -> np.ndarray:
    """Nodal normal speed of the chosen flow; raises ConeViolation off-cone."""
    n, k = fields.n, spec.k
    grid = fields.grid
    if spec.kind == "imcf":
        H = fields.H
        if np.any(H <= 0):
            _fail_cone("imcf", grid, H <= 0, "H")
        return 1.0 / H

    Ek = fields.E[k]
    Ekm1 = fields.E[k - 1]
    if np.any(Ek <= 0):
        _fail_cone(spec.kind, grid, Ek <= 0, f"E_{k}")
    if k >= 2 and np.any(Ekm1 <= 0):
        _fail_cone(spec.kind, grid, Ekm1 <= 0, f"E_{k - 1}")
    ratio = Ekm1 / Ek

    if spec.kind == "euclidean_inverse":
        return ratio
    if spec.kind == "hyperbolic_sx":
        if np.any(fields.dlam <= 0):
            _fail_cone(spec.kind, grid, fields.dlam <= 0, "lambda'")
        return ratio - fields.support / fields.dlam
    # sphere_bgl
    return fields.dlam * ratio - fields.support


def step(space: WarpedSpace, graph: RadialGraph, spec: FlowSpec, dt: float) -> RadialGraph:
    """One forward-Euler graph update u <- u + dt f v."""
    fields = geometry(space, graph)
    f = speed(spec, space, fields)
    return graph.with_values(graph.u + dt * f * fields.v)


def _make_polar_filter(grid: SphereGrid):
    """Ring-wise longitude filter with cutoff ~ (P/2) sin(theta)."""
    if grid.n == 1:
        return lambda F: F
    M, P = grid.shape
    mcut = np.maximum(4, np.floor(0.5 * P * np.sin(grid.theta))).astype(int)
    m = np.arange(P // 2 + 1)
    mask = (m[None, :] <= mcut[:, None]).astype(float)

    def apply(F: np.ndarray) -> np.ndarray:
        return np.fft.irfft(np.fft.rfft(F, axis=1) * mask, n=P, axis=1)

    return apply


def _speed_curvature_derivative(spec: FlowSpec, fields: GeometryFields) -> np.ndarray:
    """Nodal bound on |df/dkappa_i|, the diffusion strength of the speed."""
    n, k = fields.n, spec.k
    if spec.kind == "imcf":
        return 1.0 / fields.H**2
    if k == 1:
        d = (1.0 / n) / fields.E[1] ** 2
    else:
        # n = 2, k = 2: E_1/E_2 = (1/kappa_1 + 1/kappa_2)/2
        d = 0.5 / np.min(np.abs(fields.kappa), axis=0) ** 2
    if spec.kind == "sphere_bgl":
        d = fields.dlam * d
    return d


def _dt_bound(spec: FlowSpec, space: WarpedSpace, fields: GeometryFields,
              f: np.ndarray) -> float:
    """Proposal dt = min(CFL on the metric spacing, relative-step cap)."""
    grid = fields.grid
    dtheta = (np.pi / grid.shape[0]) if grid.n == 2 else (2.0 * np.pi / grid.shape[0])
    h_geo = float(fields.lam.min()) * dtheta * grid.fiber_scale
    if spec.kind == "imcf":
        diffusion = float(np.max(1.0 / (fields.H**2 * fields.lam**2 * fields.v**2)))
    else:
        diffusion = float(np.max(
            _speed_curvature_derivative(spec, fields) / fields.lam**2))
    dt_cfl = spec.cfl * h_geo**2 / diffusion
    rate = float(np.max(np.abs(f) * fields.v / fields.u))
    dt_cap = spec.max_rel_step / rate if rate > 0 else math.inf
    return min(dt_cfl, dt_cap)


def _monitor_values(spec: FlowSpec, space: WarpedSpace, graph: RadialGraph,
                    fields: GeometryFields) -> dict[str, tuple[float, int]]:
    """Tracked monotone quantities: name -> (value, expected direction).

    Direction -1 means nonincreasing along the flow, +1 nondecreasing.
    Values computed on the (possibly renormalized) stored graph; all
    nonincreasing monitors here are scale invariant in the euclidean ambient.
    """
    n, k = fields.n, spec.k
    out: dict[str, tuple[float, int]] = {}
    if spec.kind == "imcf":
        kf = float(k)
        mom = surface_integral(fields, fields.lam**kf)
        wv = weighted_volume(space, graph, kf)
        if space.has_inner_boundary:
            lam_a = float(space.lam(space.a))
            gamma = lam_a**kf * lam_a**n * space.fiber_area(n)
        else:
            gamma = 0.0
        q = fields.area ** (-(n + kf) / n) * (mom - kf * wv - kf / (n + kf) * gamma)
        out[f"Q_imcf_{k}"] = (q, -1)
        return out

    W, _ = quermassintegrals(space, graph, fields)
    phi_ek = surface_integral(fields, space.phi(graph.u) * fields.E[k])
    lhs = phi_ek + k * W[k - 1]
    if spec.kind == "euclidean_inverse":
        qk = W[k] ** (-(n + 2 - k) / (n + 1 - k)) * lhs
        out[f"Qk_euclid_{k}"] = (qk, -1)
    elif spec.kind == "hyperbolic_sx":
        out[f"phiE{k}_plus_{k}W{k - 1}"] = (lhs, -1)
        out["W_0"] = (float(W[0]), +1)
        out["W_1"] = (float(W[1]), +1)
    else:  # sphere_bgl
        out[f"phiE{k}_plus_{k}W{k - 1}"] = (lhs, -1)
    return out


def _wrong_way(old: dict[str, tuple[float, int]], new: dict[str, tuple[float, int]],
               eps: float) -> str | None:
    for name, (val_old, direction) in old.items():
        val_new = new[name][0]
        scale = max(abs(val_old), abs(val_new), 1e-300)
        if direction < 0 and val_new - val_old > eps * scale:
            return name
        if direction > 0 and val_old - val_new > eps * scale:
            return name
    return None


def _required_cone_holds(spec: FlowSpec, fields: GeometryFields) -> bool:
    if spec.kind == "imcf":
        return bool(fields.H.min() > 0)
    if spec.kind == "sphere_bgl":
        return bool(fields.kappa.min() > 0)
    ok = all(fields.E[j].min() > 0 for j in range(1, spec.k + 1))
    if spec.kind == "hyperbolic_sx":
        ok = ok and bool(fields.dlam.min() > 0)
    return ok


def _admissibility_error(spec: FlowSpec, report: ClassReport) -> str | None:
    if spec.kind == "imcf" and not report.mean_convex:
        return f"imcf needs a mean convex start, min H = {report.min_H:.3e}"
    if spec.kind in ("euclidean_inverse", "hyperbolic_sx") and not report.k_convex:
        return (f"{spec.kind} needs a {spec.k}-convex start, "
                f"min E = {min(report.min_E.values()):.3e}")
    if spec.kind == "sphere_bgl" and not report.convex:
        return f"sphere_bgl needs a strictly convex start, min kappa = {report.min_kappa:.3e}"
    return None


@dataclass(frozen=True)
class TraceSample:
    """State and integrals recorded at one report time."""

    t: float
    u: np.ndarray                 # physical nodal radii
    log_scale: float              # log of the tracked renormalization factor
    report: QuantityReport
    class_report: ClassReport
    max_speed: float
    dt: float


@dataclass
class FlowTrace:
    """Time series of one flow run."""

    space_kind: str
    n: int
    spec: FlowSpec
    grid: SphereGrid
    samples: list[TraceSample] = field(default_factory=list)
    findings: list[dict] = field(default_factory=list)
    termination: tuple = ("reached_t_final",)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def series(self, getter) -> np.ndarray:
        return np.array([getter(s) for s in self.samples])

    def quermass_series(self, k: int) -> np.ndarray:
        return np.array([s.report.W(k) for s in self.samples])

    def sample_graph(self, i: int) -> RadialGraph:
        return RadialGraph(grid=self.grid, u=self.samples[i].u,
                           space_kind=self.space_kind)


def evolve(space: WarpedSpace, graph0: RadialGraph, spec: FlowSpec) -> FlowTrace:
    """Run the flow with adaptive explicit stepping and monotonicity guards."""
    grid = graph0.grid
    n = grid.n
    spec.validate(space, n)

    fields0 = geometry(space, graph0)
    start_class = convexity_class(fields0, space, graph0, spec.k)
    problem = _admissibility_error(spec, start_class)
    if problem is not None:
        raise ValueError(f"inadmissible initial surface: {problem}")

    if space.kind == "euclidean" and spec.kind in ("imcf", "euclidean_inverse"):
        # round-sphere growth rate of the stored graph
        renorm_rate = 1.0 / n if spec.kind == "imcf" else 1.0
    else:
        renorm_rate = 0.0

    polar_filter = _make_polar_filter(grid)
    trace = FlowTrace(space_kind=space.kind, n=n, spec=spec, grid=grid)
    report_ks = tuple(sorted(set(map(float, spec.report_ks)) | {float(spec.k)}))

    def rhs(u_arr: np.ndarray) -> np.ndarray:
        g = RadialGraph(grid=grid, u=u_arr, space_kind=space.kind)
        flds = geometry(space, g)
        return polar_filter(speed(spec, space, flds) * flds.v)

    def record(t: float, u_arr: np.ndarray, log_scale: float, dt_used: float) -> None:
        if trace.samples and t <= trace.samples[-1].t + 1e-15 * spec.t_final:
            return
        u_phys = u_arr * math.exp(log_scale) if renorm_rate else u_arr
        g_phys = RadialGraph(grid=grid, u=u_phys, space_kind=space.kind)
        f_phys = geometry(space, g_phys)
        rep = full_report(space, g_phys, ks=report_ks, fields=f_phys)
        cls = convexity_class(f_phys, space, g_phys, spec.k)
        f_speed = speed(spec, space, f_phys)
        trace.samples.append(TraceSample(
            t=t, u=u_phys.copy(), log_scale=log_scale, report=rep,
            class_report=cls, max_speed=float(np.max(np.abs(f_speed))),
            dt=dt_used,
        ))

    u = graph0.u.copy()
    log_scale = 0.0
    t = 0.0
    record(0.0, u, 0.0, 0.0)

    fields = fields0
    graph = graph0
    f_now = speed(spec, space, fields)
    F0 = polar_filter(f_now * fields.v)
    monitors = _monitor_values(spec, space, graph, fields)
    dt_prev = math.inf
    eps_t = 1e-12 * spec.t_final
    next_report = min(spec.report_dt, spec.t_final)

    while t < spec.t_final - eps_t:
        dt_base = min(_dt_bound(spec, space, fields, f_now), 2.0 * dt_prev)
        dt = min(dt_base, next_report - t)
        halvings = 0
        guard_halvings = 0
        while True:
            if dt < 1e-12 * spec.t_final:
                trace.termination = ("step_underflow", t)
                record(t, u, log_scale, dt)
                return trace
            accept = True
            reason = None
            try:
                # Heun pair: one full step against two half steps
                f1 = rhs(u + dt * F0)
                u_full = u + 0.5 * dt * (F0 + f1)
                f2 = rhs(u + 0.5 * dt * F0)
                u_half = u + 0.25 * dt * (F0 + f2)
                f3 = rhs(u_half)
                f4 = rhs(u_half + 0.5 * dt * f3)
                u_cand = u_half + 0.25 * dt * (f3 + f4)
                err = float(np.max(np.abs(u_full - u_cand))) / max(
                    float(np.max(np.abs(u))), 1e-300)
                if err > _STEP_TOL:
                    accept, reason = False, "step error"
                else:
                    if renorm_rate:
                        u_cand = u_cand * math.exp(-renorm_rate * dt)
                    graph_cand = RadialGraph(grid=grid, u=u_cand, space_kind=space.kind)
                    fields_cand = geometry(space, graph_cand)
                    if not _required_cone_holds(spec, fields_cand):
                        accept, reason = False, "cone"
            except (ConeViolation, ValueError, FloatingPointError):
                accept, reason = False, "cone"

            if not accept:
                halvings += 1
                if reason == "cone" and halvings > _MAX_GUARD_HALVINGS:
                    trace.termination = ("cone_violation", t,
                                         f"{spec.kind} cone lost after {halvings} halvings")
                    record(t, u, log_scale, dt)
                    return trace
                if halvings > _MAX_TOTAL_HALVINGS:
                    trace.termination = ("step_underflow", t)
                    record(t, u, log_scale, dt)
                    return trace
                dt *= 0.5
                continue

            monitors_cand = _monitor_values(spec, space, graph_cand, fields_cand)
            bad = _wrong_way(monitors, monitors_cand, spec.eps_mono)
            if bad is not None and guard_halvings < _MAX_GUARD_HALVINGS:
                guard_halvings += 1
                dt *= 0.5
                continue
            if bad is not None:
                trace.findings.append({
                    "t": t + dt, "quantity": bad,
                    "old": monitors[bad][0], "new": monitors_cand[bad][0],
                    "note": "persistent wrong-way move after halvings",
                })
            break

        t += dt
        u = u_cand
        if renorm_rate:
            log_scale += renorm_rate * dt
        graph, fields, monitors = graph_cand, fields_cand, monitors_cand
        f_now = speed(spec, space, fields)
        F0 = polar_filter(f_now * fields.v)
        # a report-time clip should not throttle the next step; a halving should
        dt_prev = dt if (halvings or guard_halvings) else dt_base

        if t >= next_report - eps_t:
            record(t, u, log_scale, dt)
            next_report = min(next_report + spec.report_dt, spec.t_final)

        if (spec.kind == "imcf" and space.kind == "sphere"
                and float(fields.H.min()) <= _SPHERE_IMCF_MIN_H):
            trace.termination = ("equator_stop", t)
            if trace.samples[-1].t < t - eps_t:
                record(t, u, log_scale, dt)
            return trace

    trace.termination = ("reached_t_final",)
    if trace.samples[-1].t < spec.t_final - eps_t:
        record(t, u, log_scale, dt_prev)
    return trace


def variational_check(space: WarpedSpace, trace: FlowTrace, spec: FlowSpec,
                      k: int) -> float:
    """Max relative residual of dW_k/dt against int f E_k dmu over the trace.

    Uses centered differences across samples.  For k = n the same stencil is
    also checked against the weighted-curvature evolution identity
    d/dt (int Phi E_n + n W_{n-1}) = int (n+1) u_s E_n f dmu.
    """
    if not space.is_space_form:
        raise ValueError("variational check needs a space-form ambient")
    if len(trace.samples) < 3:
        raise ValueError("need at least 3 trace samples")
    n = trace.n
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in 0..{n}")

    times = trace.times
    Wk = trace.quermass_series(k)
    if k == n:
        lhs_series = np.array([s.report.phi_curvature(n) + n * s.report.W(n - 1)
                               for s in trace.samples])

    worst = 0.0
    for i in range(1, len(times) - 1):
        flds = geometry(space, trace.sample_graph(i))
        f = speed(spec, space, flds)
        dt2 = times[i + 1] - times[i - 1]
        dW = (Wk[i + 1] - Wk[i - 1]) / dt2
        flux = surface_integral(flds, f * flds.E[k])
        worst = max(worst, abs(dW - flux) / max(abs(dW), abs(flux), 1e-300))
        if k == n:
            dL = (lhs_series[i + 1] - lhs_series[i - 1]) / dt2
            fluxL = surface_integral(flds, (n + 1) * flds.support * flds.E[n] * f)
            worst = max(worst, abs(dL - fluxL) / max(abs(dL), abs(fluxL), 1e-300))
    return worst
