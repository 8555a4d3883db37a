"""Command-line runner: one subcommand per verification, CSV/SVG artifacts, a RESULT line.

Exit status is 0 when the verification passes, 2 when it runs but fails
(for example an infeasible curvature budget or a divergent volume series)
and 1 on configuration or runtime errors. The last line printed is always
``RESULT <subcommand> <pass|fail> key=value ...``.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable

import numpy as np

from .assembly.chain import ChainModel, cgvd_diagnostic, growth_truncation_planner
from .assembly.graphs import GraphPlan
from .assembly.matching import BlockTemplate, plan_assembly
from .assembly.schedules import ScaleSchedule, cyclic_cover_schedule
from .assembly.series import completeness_series, total_volume
from .config import SUBCOMMANDS, ConfigErrors, RunConfig, format_result, parse_config
from .curvature import (
    DiagonalMetric3D,
    GraphSurfaceMetric,
    TanhGenerator,
    WarpedCuspMetric,
    cusp_sectional_curvatures,
    diagonal_curvatures,
    plane_curvature_bounds,
    total_gaussian_curvature,
)
from .cusps import CuspModel, cumulative_volume, cusp_volume
from .errors import BudgetInfeasible, CuspforgeError, SideConditionError
from .fdcheck import fd_sectional_curvature
from .geodesics.experiments import InvisibilityReport, invisibility_witness, visibility_experiment
from .geodesics.flow import integrate_geodesic
from .geodesics.surfaces import GeodesicState, GraphSurface, RevolutionSurface
from .plotting import line_chart
from .profiles import ProfileFunction, make_decay_profile, smooth_kink

Outcome = tuple[bool, dict[str, Any], dict[str, str]]


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for v in row])
    return buf.getvalue()


def _profile(kind: str, a: float, mode: str = "exponential") -> ProfileFunction:
    if kind == "exp":
        return ProfileFunction.exponential(a, math.inf)
    if kind == "cosh":
        return ProfileFunction.cosh(a, math.inf)
    return make_decay_profile(a, mode)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_cusp(cfg: RunConfig) -> Outcome:
    p = cfg.params
    f = _profile(p["profile"], p["a"], p["mode"])
    model = CuspModel(p["n"], p["cross_section_volume"], f, p["a"])
    ts = np.linspace(p["a"], p["t_max"], p["points"])
    kr, kt = cusp_sectional_curvatures(f, ts)
    cum = cumulative_volume(model, ts)
    tangential = p["n"] >= 3
    rows = [(t, r, (k if tangential else None), v) for t, r, k, v in zip(ts, kr, kt, cum)]
    vol = cusp_volume(model)
    kmax = float(max(kr.max(), kt.max() if tangential else -math.inf))
    ok = not vol.divergent and kmax < 0
    metrics = {
        "volume": vol.value,
        "final_cumulative_volume": float(cum[-1]),
        "K_max": kmax,
        "K_min": float(min(kr.min(), kt.min() if tangential else math.inf)),
    }
    if vol.divergent:
        metrics["reason"] = "divergent-volume"
    return ok, metrics, {"cusp.csv": _csv(["t", "K_radial", "K_tangential", "cumulative_volume"], rows)}


def _cmd_curvature(cfg: RunConfig) -> Outcome:
    p = cfg.params
    rng = np.random.default_rng(cfg.seed)
    if p["metric"] == "graph":
        m = GraphSurfaceMetric(TanhGenerator(p["budget"]))
        totals = [total_gaussian_curvature(m, R) for R in p["radii"]]
        bound = -p["budget"] ** 2
        inside = all(bound <= v <= 0 for v in totals)
        monotone = all(b <= a for a, b in zip(totals, totals[1:]))
        rows = list(zip(p["radii"], totals))
        return (
            inside and monotone,
            {"min_total": min(totals), "bound": bound, "monotone": monotone},
            {"curvature.csv": _csv(["R", "total_gaussian_curvature"], rows)},
        )
    checks = []
    if p["metric"] == "fermi":
        m3 = DiagonalMetric3D.fermi()
        rs = np.linspace(max(p["t_lo"], 0.05), p["t_hi"], p["resolution"])
        vals = np.array([diagonal_curvatures(m3, float(r)) for r in rs])
        rows = [(r, *v) for r, v in zip(rs, vals)]
        for r in rng.uniform(max(p["t_lo"], 0.1), p["t_hi"], p["checks"]):
            exact = diagonal_curvatures(m3, float(r))
            pt = np.array([0.0, 0.0, float(r)])
            fd = [fd_sectional_curvature(m3.metric_tensor, pt, i, j) for i, j in ((0, 1), (0, 2), (1, 2))]
            checks += [abs(x - y) / max(1.0, abs(x)) for x, y in zip(exact, fd)]
        report = _csv(["r", "K_u_theta", "K_u_r", "K_theta_r"], rows)
        kmin, kmax = float(vals.min()), float(vals.max())
    else:
        f = _profile(p["profile"], p["a"], p["mode"])
        m = WarpedCuspMetric(p["n"], f)
        rep = plane_curvature_bounds(m, (p["t_lo"], p["t_hi"]), p["resolution"])
        report = rep.to_csv()
        kmin, kmax = rep.min, rep.max
        x0 = np.full(p["n"] - 1, 0.1)
        for t in rng.uniform(p["t_lo"], p["t_hi"], p["checks"]):
            kr, kt = cusp_sectional_curvatures(f, float(t))
            pt = np.concatenate([[t], x0])
            checks.append(abs(fd_sectional_curvature(m.metric_tensor, pt, 0, 1) - kr) / max(1.0, abs(kr)))
            if p["n"] >= 3:
                checks.append(abs(fd_sectional_curvature(m.metric_tensor, pt, 1, 2) - kt) / max(1.0, abs(kt)))
    worst = max(checks)
    return worst < 1e-6, {"K_min": kmin, "K_max": kmax, "fd_max_rel_error": worst}, {"curvature.csv": report}


def _cmd_smooth(cfg: RunConfig) -> Outcome:
    p = cfg.params
    A, a = p["A"], p["a"]
    h = smooth_kink(A, a)
    w = 1.0 / A
    ts = np.linspace(-w, w, p["grid"])
    v, d1, d2 = h._eval(ts)
    ratio = d2 / v
    left = lambda t: (math.exp(-A * (t + 2 * a)), -A * math.exp(-A * (t + 2 * a)), A * A * math.exp(-A * (t + 2 * a)))
    right = lambda t: (math.exp(2 * A * (t - a)), 2 * A * math.exp(2 * A * (t - a)), 4 * A * A * math.exp(2 * A * (t - a)))
    jet_err = 0.0
    for t, branch in ((-w, left), (w, right)):
        got, want = h.jet(t), branch(t)
        jet_err = max(jet_err, *(abs(x - y) / abs(y) for x, y in zip(got, want)))
    window = h.segments[1].hi
    ok = float(ratio.min()) > 1e-10 and jet_err < 1e-9
    rows = zip(ts, v, d1, d2, ratio)
    return (
        ok,
        {"min_ratio": float(ratio.min()), "jet_error": jet_err, "window": window},
        {"smooth.csv": _csv(["t", "h", "h1", "h2", "h2_over_h"], rows)},
    )


def _schedule(p) -> ScaleSchedule:
    kind = p["schedule"]
    if kind == "constant":
        return ScaleSchedule.constant(p["C"])
    if kind == "power":
        return ScaleSchedule.power(p["C"], p["b"], p["q"])
    if kind == "exponential":
        return ScaleSchedule.exponential(p["C"], p["beta"])
    if kind == "mixed":
        return ScaleSchedule.mixed(p["C"], p["beta"], p["b"], p["q"])
    return cyclic_cover_schedule(p["d"], p["m"], enforce_side_condition=p["enforce_side_condition"])


PORTS = {"line": ("L", "R", "C"), "chord": ("L", "R", "C"), "trivalent-tree": ("x", "y", "z"), "f2-cayley": tuple("aAbB")}


def _cmd_assemble(cfg: RunConfig) -> Outcome:
    p = cfg.params
    graph = GraphPlan(p["graph"])
    try:
        sched = _schedule(p)
    except SideConditionError as exc:
        return False, {"reason": "side-condition", "detail": str(exc).split(":")[0]}, {}
    vol = total_volume(graph, sched, p["block_volume"], p["n"])
    comp = completeness_series(sched)
    block = BlockTemplate.standard(PORTS[p["graph"]], n=p["n"])
    plan = plan_assembly(graph, sched, block, p["depth"])
    residual = plan.matching_residual()
    chords = plan.chord_inequalities()
    chords_ok = all(r[-1] for r in chords)
    ok = vol.convergent and comp.divergent and residual <= 1e-12 and chords_ok
    metrics: dict[str, Any] = {}
    if not vol.convergent:
        metrics["reason"] = "divergent-volume"
    elif not comp.divergent:
        metrics["reason"] = "incomplete"
    elif residual > 1e-12 or not chords_ok:
        metrics["reason"] = "matching"
    metrics.update(
        volume=vol.value,
        volume_series="convergent" if vol.convergent else "divergent",
        completeness_series="divergent" if comp.divergent else "convergent",
        matching_residual=residual,
        edges=len(plan.edges),
    )
    series_rows = []
    for k in range(p["depth"] + 1):
        lam = sched.divisor(k)
        series_rows.append((k, graph.count(k), lam, graph.count(k) * p["block_volume"] * lam ** (-p["n"]), 1.0 / lam))
    edge_rows = [(str(e.u), str(e.v), e.port_u, e.port_v, e.T_u, e.T_v, e.scale_u, e.scale_v) for e in plan.edges]
    return ok, metrics, {
        "assemble_series.csv": _csv(["k", "count", "divisor", "volume_term", "diameter_term"], series_rows),
        "assemble_plan.csv": _csv(["u", "v", "port_u", "port_v", "T_u", "T_v", "scale_u", "scale_v"], edge_rows),
    }


def _budget(p) -> Callable[[float], float]:
    c, k = p["coef"], p["rate"]
    if p["budget"] == "exp":
        return lambda r: c * math.exp(k * r)
    if p["budget"] == "power":
        return lambda r: c * r**k
    return lambda r: c


def _cmd_plan_growth(cfg: RunConfig) -> Outcome:
    p = cfg.params
    try:
        plan = growth_truncation_planner(
            _budget(p), n=p["n"], a=p["a"], horizon=p["horizon"], T_cap=p["T_cap"], grid=p["grid"]
        )
    except BudgetInfeasible as exc:
        return False, {"reason": "budget-infeasible", "radius": exc.radius}, {}
    rows = [(i, to, ti, s, r) for i, (to, ti, s, r) in enumerate(zip(plan.T_out, plan.T_in, plan.scales, plan.neck_radii))]
    svg = line_chart(
        [("b_p(r)", plan.grid, plan.b), ("budget f(r)", plan.grid, plan.budget)],
        title="curvature along the planned chain",
        xlabel="r",
        ylabel="|K|",
        logy=True,
    )
    return plan.verified, {"blocks": len(plan.T_out), "max_ratio": float(np.max(plan.b / plan.budget))}, {
        "plan_growth.csv": _csv(["block", "T_out", "T_in", "scale", "neck_radius"], rows),
        "plan_growth_grid.csv": _csv(["r", "b_p", "budget"], zip(plan.grid, plan.b, plan.budget)),
        "plan_growth.svg": svg,
    }


def _cmd_cgvd(cfg: RunConfig) -> Outcome:
    p = cfg.params
    if p["model"] == "cusp":
        f = _profile(p["profile"], p["a"])
        model = ChainModel.single_cusp(f, p["n"], p["a"], p["horizon"])
        rs = np.linspace(p["r_min"], p["r_max"], p["points"])
        res = cgvd_diagnostic(model, rs, p["width"])
        ok = bool(res.product[-1] < p["threshold"])
        metrics = {"final_product": float(res.product[-1])}
    else:
        plan = growth_truncation_planner(lambda r: math.exp(2 * r), n=p["n"], horizon=p["horizon"])
        res = cgvd_diagnostic(plan.chain, plan.neck_radii, p["width"])
        ok = bool(np.all(res.product >= p["threshold"]))
        metrics = {"min_neck_product": float(res.product.min()), "necks": len(plan.neck_radii)}
    svg = line_chart([("b^n Vol^2", res.r, res.product)], title="CGVD diagnostic", xlabel="r", ylabel="product", logy=True)
    return ok, metrics, {"cgvd.csv": res.to_csv(), "cgvd.svg": svg}


def _cmd_geodesic(cfg: RunConfig) -> Outcome:
    p = cfg.params
    if p["surface"] == "revolution":
        surface = RevolutionSurface.default(p["h"])
    elif p["surface"] == "cylinder":
        surface = RevolutionSurface.cylinder(p["h"])
    else:
        surface = GraphSurface()
    traj = integrate_geodesic(surface, GeodesicState(p["u0"], p["v0"], p["alpha0"]), p["length"], cfg.tol)
    metrics: dict[str, Any] = {"steps": traj.steps, "rejected": traj.rejected}
    ok = True
    if traj.drift is not None:
        metrics["clairaut_drift"] = traj.drift
        ok = traj.drift < p["drift_limit"]
    return ok, metrics, {"trajectory.csv": traj.to_csv()}


def _cmd_visibility(cfg: RunConfig) -> Outcome:
    p = cfg.params
    surface = RevolutionSurface.default(p["h"])
    rho0 = surface.phi.jet(p["z0"])[0]
    alpha0 = math.asin(p["ratio"] * p["h"] / rho0)
    arcs = [(p["step"] * k, p["step"] * k) for k in range(1, p["count"] + 1)]
    rep = visibility_experiment(surface, (p["z0"], 0.0), alpha0, arcs)
    svg = line_chart(
        [("min z along connecting segment", [r.n for r in rep.rows], rep.min_z)],
        title="escape experiment",
        xlabel="n",
        ylabel="min z",
    )
    slack = min(r.min_z - min(r.z1, r.z2) for r in rep.rows)
    return rep.passes, {"min_z_last": rep.min_z[-1], "increasing": rep.strictly_increasing, "endpoint_slack": slack}, {
        "visibility.csv": rep.to_csv(),
        "visibility.svg": svg,
    }


def _cmd_invisibility(cfg: RunConfig) -> Outcome:
    p = cfg.params
    metric = GraphSurfaceMetric(TanhGenerator(p["budget"]))

    def one(T: float):
        return invisibility_witness(metric, p["separation"], (T,), direction=p["direction"], cells=p["cells"]).rows[0]

    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        rows = list(pool.map(one, p["horizons"]))  # map keeps input order
    rep = InvisibilityReport(rows, p["separation"], metric.slope_budget)
    svg = line_chart(
        [("far-angle sum", [r.T for r in rows], [r.far_angle_sum for r in rows]),
         ("lower bound", [r.T for r in rows], [r.bound for r in rows])],
        title="far-angle sums of the witness triangles",
        xlabel="T",
        ylabel="angle sum",
    )
    return rep.passes, {
        "max_abs_integral": rep.max_abs_integral,
        "curvature_budget": rep.curvature_budget,
        "min_far_angle_sum": min(r.far_angle_sum for r in rows),
    }, {"invisibility.csv": rep.to_csv(), "invisibility.svg": svg}


HANDLERS: dict[str, Callable[[RunConfig], Outcome]] = {
    "cusp": _cmd_cusp,
    "curvature": _cmd_curvature,
    "smooth": _cmd_smooth,
    "assemble": _cmd_assemble,
    "plan-growth": _cmd_plan_growth,
    "cgvd": _cmd_cgvd,
    "geodesic": _cmd_geodesic,
    "visibility": _cmd_visibility,
    "invisibility": _cmd_invisibility,
}


def run(cfg: RunConfig, stdout=None) -> int:
    """Execute a validated configuration, write artifacts and print the RESULT line."""
    stdout = stdout or sys.stdout
    try:
        ok, metrics, artifacts = HANDLERS[cfg.subcommand](cfg)
    except (CuspforgeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(format_result(cfg.subcommand, False, {"reason": "error", "error": type(exc).__name__}), file=stdout)
        return 1
    os.makedirs(cfg.out, exist_ok=True)
    for name, text in sorted(artifacts.items()):
        with open(os.path.join(cfg.out, name), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        print(f"wrote {os.path.join(cfg.out, name)}", file=stdout)
    print(format_result(cfg.subcommand, ok, metrics), file=stdout)
    return 0 if ok else 2


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="cuspforge", description=__doc__.splitlines()[0])
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="path to a key = value configuration file")
    parser.add_argument("--out", help="output directory for CSV/SVG artifacts")
    parser.add_argument("--tol", type=float, help="integration tolerance in [1e-12, 1e-4]")
    parser.add_argument("--seed", type=int, help="seed for randomised test points")
    parser.add_argument("--threads", type=int, help="worker threads for parameter sweeps")
    args = parser.parse_args(argv)
    text = ""
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            print(format_result(args.subcommand, False, {"reason": "config-unreadable"}))
            return 1
    overrides = {"tol": args.tol, "seed": args.seed, "threads": args.threads, "out": args.out}
    try:
        cfg = parse_config(text, args.subcommand, overrides)
    except ConfigErrors as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        print(format_result(args.subcommand, False, {"reason": "config-error", "errors": len(exc.errors)}))
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
