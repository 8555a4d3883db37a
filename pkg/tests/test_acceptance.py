"""Acceptance checks, one test per criterion; each prints a PASS/FAIL line."""

import math

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from cuspforge.assembly import (
    BlockTemplate,
    ChainModel,
    GraphPlan,
    ScaleSchedule,
    cgvd_diagnostic,
    completeness_series,
    cyclic_cover_schedule,
    growth_truncation_planner,
    plan_assembly,
    total_volume,
)
from cuspforge.curvature import (
    GraphSurfaceMetric,
    WarpedCuspMetric,
    cusp_sectional_curvatures,
    plane_curvature_bounds,
    total_gaussian_curvature,
)
from cuspforge.cusps import CuspModel, cusp_volume
from cuspforge.errors import BudgetInfeasible
from cuspforge.fdcheck import fd_sectional_curvature
from cuspforge.geodesics import (
    GeodesicState,
    GraphSurface,
    RevolutionSurface,
    gauss_bonnet_triangle,
    integrate_geodesic,
    invisibility_witness,
    visibility_experiment,
)
from cuspforge.profiles import ProfileFunction, make_decay_profile, smooth_kink


def report(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_01_hyperbolic_reference():
    m = WarpedCuspMetric(3, ProfileFunction.cosh(-5.0, 5.0))
    rep = plane_curvature_bounds(m, (-5.0, 5.0), 1000)
    err = max(abs(v + 1) for fam in rep.families.values() for v in (fam.min, fam.max))
    report(1, "cosh profile has K_radial = K_tangential = -1", err < 1e-9, f"max |K+1| = {err:.2e}")


def test_criterion_02_curvature_blow_up():
    f = ProfileFunction.exponential(0.0, math.inf)
    ts = np.linspace(0.0, 10.0, 101)
    _, kt = cusp_sectional_curvatures(f, ts)
    exact = -(np.exp(2 * ts) + 1)
    closed = float(np.max(np.abs(kt / exact - 1)))
    m = WarpedCuspMetric(3, f)
    fd = max(
        abs(fd_sectional_curvature(m.metric_tensor, np.array([t, 0.1, 0.2]), 1, 2) / k - 1)
        for t, k in zip(ts[::5], exact[::5])
    )
    report(2, "exponential cusp K_tangential = -(e^2t + 1)", closed < 1e-9 and fd < 1e-6,
           f"closed-form rel {closed:.1e}, FD rel {fd:.1e}")


def test_criterion_03_volume_quadrature():
    def vol(n, a=0.0, T=math.inf):
        return cusp_volume(CuspModel(n, 1.0, ProfileFunction.exponential(0.0, math.inf), a, T)).value

    v2, v3 = vol(2), vol(3)
    split = abs(vol(3, 0.0, 2.5) + vol(3, 2.5) - v3)
    f = make_decay_profile(-1.0)
    whole = cusp_volume(CuspModel(3, 1.0, f, -1.0, 12.0)).value
    parts = cusp_volume(CuspModel(3, 1.0, f, -1.0, 0.4)).value + cusp_volume(CuspModel(3, 1.0, f, 0.4, 12.0)).value
    split = max(split, abs(parts - whole))
    ok = abs(v2 - 1) < 1e-8 and abs(v3 - 0.5) < 1e-8 and split < 1e-10
    report(3, "exponential cusp volumes 1 and 1/2, additive", ok, f"n=2 {v2!r}, n=3 {v3!r}, split {split:.1e}")


def test_criterion_04_smoothing():
    A, a = 2.0, 1.0
    h = smooth_kink(A, a)
    left = math.exp(-A * (-0.5 + 2 * a))
    right = math.exp(2 * A * (0.5 - a))
    want = {-0.5: (left, -A * left, A * A * left), 0.5: (right, 2 * A * right, 4 * A * A * right)}
    jet_err = max(abs(g - w) for t, ws in want.items() for g, w in zip(h.jet(t), ws))
    ts = np.linspace(-0.5, 0.5, 10_000)
    ratio = float(np.min(h.d2(ts) / h(ts)))
    report(4, "smooth_kink(2, 1) matches both branches and stays convex", jet_err < 1e-9 and ratio > 1e-10,
           f"jet error {jet_err:.1e}, min h''/h {ratio:.3f}")


def test_criterion_05_gauss_bonnet_budget():
    m = GraphSurfaceMetric()
    vals = [total_gaussian_curvature(m, R) for R in (5.0, 10.0, 20.0)]
    in_range = all(-0.098696 <= v <= 0 for v in vals)
    monotone = vals[0] >= vals[1] >= vals[2]
    report(5, "total curvature within [-pi^2/100, 0] and non-increasing", in_range and monotone,
           ", ".join(f"{v:.6f}" for v in vals))


def test_criterion_06_triangle_gauss_bonnet():
    S = GraphSurface()
    tri = [(-1.5, -1.0), (1.5, -0.5), (0.0, 1.5)]
    r1 = gauss_bonnet_triangle(S, tri, cells=1e4).residual
    r4 = gauss_bonnet_triangle(S, tri, cells=4e4).residual
    r_ref = gauss_bonnet_triangle(S, tri, cells=1e6).residual
    ok = r_ref < 1e-3 and r4 <= 0.5 * r1
    report(6, "geodesic triangle residual small and halving under refinement", ok,
           f"residuals {r1:.2e} -> {r4:.2e} (ratio {r1 / r4:.2f}), {r_ref:.2e} at 1e6 cells")


def test_criterion_07_invisibility_witness():
    rep = invisibility_witness(horizons=(5.0, 10.0, 20.0, 40.0))
    bound = math.pi - math.pi / 100 - math.pi**2 / 100 - 1e-3
    worst = min(r.far_angle_sum for r in rep.rows)
    report(7, "far-angle sums above pi - pi/100 - pi^2/100", worst >= bound and rep.passes,
           f"min far-angle sum {worst:.6f} vs bound {bound:.6f}")


def test_criterion_08_clairaut_conservation():
    S = RevolutionSurface.default()
    start = GeodesicState(0.0, 0.0, 0.7)
    d10 = integrate_geodesic(S, start, 100.0, 1e-10).drift
    d9 = integrate_geodesic(S, start, 100.0, 1e-9).drift
    ok = d10 < 1e-8 and d9 / d10 >= 10.0
    report(8, "Clairaut drift small and scaling with tolerance", ok,
           f"drift {d10:.2e} at 1e-10, {d9:.2e} at 1e-9 (ratio {d9 / d10:.1f})")


def test_criterion_09_escape_experiment():
    S = RevolutionSurface.default(h=1.0)
    alpha0 = math.asin(0.9 * S.h / S.phi(0.0))
    rep = visibility_experiment(S, (0.0, 0.0), alpha0, [(10.0 * k, 10.0 * k) for k in range(1, 7)])
    slack = min(r.min_z - min(r.z1, r.z2) for r in rep.rows)
    report(9, "connecting segments climb with n and stay above their endpoints", rep.passes,
           "min-z " + ", ".join(f"{z:.4f}" for z in rep.min_z) + f"; slack {slack:.1e}")


def test_criterion_10_series_verdicts():
    suite = [
        ("line", ScaleSchedule.constant(), 2, False),
        ("line", ScaleSchedule.power(1, 1, 1), 2, True),
        ("line", ScaleSchedule.power(1, 1, 0.5), 2, False),
        ("line", ScaleSchedule.power(1, 1, 0.5), 3, True),
        ("line", ScaleSchedule.power(1, 1, 0.3), 3, False),
        ("line", ScaleSchedule.exponential(1, 1.1), 2, True),
        ("line", ScaleSchedule.power(2, 2, 0.4), 2, False),
        ("chord", ScaleSchedule.power(1, 1, 1), 3, True),
        ("chord", ScaleSchedule.constant(3.0), 3, False),
        ("trivalent-tree", ScaleSchedule.exponential(1, 2), 2, True),
        ("trivalent-tree", ScaleSchedule.exponential(1, 2**0.5), 2, False),
        ("trivalent-tree", ScaleSchedule.exponential(1, 1.2), 3, False),
        ("trivalent-tree", ScaleSchedule.mixed(1, 2**0.5, 1, 1), 2, True),
        ("trivalent-tree", ScaleSchedule.mixed(1, 2**0.5, 1, 0.5), 2, False),
        ("trivalent-tree", ScaleSchedule.power(1, 1, 3), 2, False),
        ("f2-cayley", ScaleSchedule.exponential(1, 3), 2, True),
        ("f2-cayley", ScaleSchedule.exponential(1, 3**0.5), 2, False),
        ("f2-cayley", ScaleSchedule.mixed(1, 3**0.5, 1, 0.6), 2, True),
        ("f2-cayley", ScaleSchedule.exponential(1, 1.5), 3, True),
        ("f2-cayley", ScaleSchedule.exponential(1, 1.4), 3, False),
    ]
    mismatches = sum(total_volume(GraphPlan(g), s, 1.0, n).convergent is not want for g, s, n, want in suite)
    cyc = cyclic_cover_schedule(1, 2, enforce_side_condition=False)
    complete = completeness_series(cyc).divergent
    finite = total_volume(GraphPlan("line"), cyc, 1.0, 2).convergent
    report(10, "20-case series suite and cyclic-cover schedule", mismatches == 0 and complete and finite,
           f"{mismatches} mismatches of {len(suite)}; cyclic completeness divergent={complete}, volume convergent={finite}")


def test_criterion_11_matching():
    cases = [
        ("line", ScaleSchedule.power(1, 1, 1), ("L", "R", "C")),
        ("chord", ScaleSchedule.power(1, 1, 1), ("L", "R", "C")),
        ("trivalent-tree", ScaleSchedule.exponential(1, 2), ("x", "y", "z")),
        ("f2-cayley", ScaleSchedule.exponential(1, 3), tuple("aAbB")),
    ]
    worst = 0.0
    chord_ok = True
    for kind, sched, ports in cases:
        plan = plan_assembly(GraphPlan(kind), sched, BlockTemplate.standard(ports), depth=5)
        worst = max(worst, plan.matching_residual())
        if kind == "chord":
            rows = plan.chord_inequalities()
            chord_ok = bool(rows) and all(r[-1] for r in rows)
    report(11, "glued boundaries agree and chord port lengths in range", worst < 1e-12 and chord_ok,
           f"max residual {worst:.1e}, chord inequalities {'hold' if chord_ok else 'fail'}")


def test_criterion_12_cgvd():
    model = ChainModel.single_cusp(make_decay_profile(-1.0), 3, -1.0, 15.0)
    r = np.linspace(2.0, 15.0, 27)
    base = cgvd_diagnostic(model, r).product
    homothety = max(
        float(np.max(np.abs(cgvd_diagnostic(model.scaled(s), s * r, width=s).product / base - 1)))
        for s in (0.5, 3.0)
    )
    cusp = ChainModel.single_cusp(make_decay_profile(-1.0), 2, -1.0, 20.0)
    decay = float(cgvd_diagnostic(cusp, [10.0]).product[0])
    plan = growth_truncation_planner(lambda x: math.exp(2 * x))
    rs = [x + 1e-9 for x in plan.neck_radii if 1.0 < x < plan.chain.horizon - 1]
    floor = float(np.min(cgvd_diagnostic(plan.chain, rs).product))
    ok = homothety < 1e-9 and decay < 1e-6 and len(rs) >= 3 and floor > 1e-3
    report(12, "CGVD homothety invariance, cusp decay, planner chain bounded below", ok,
           f"homothety {homothety:.1e}, product at r=10 {decay:.2e}, chain floor {floor:.3f} over {len(rs)} necks")


def test_criterion_13_growth_planner():
    plan = growth_truncation_planner(lambda x: math.exp(2 * x))
    verified = plan.verified and bool(np.all(plan.b < np.exp(2 * plan.grid)))
    try:
        growth_truncation_planner(lambda x: 0.5)
        infeasible = False
    except BudgetInfeasible:
        infeasible = True
    report(13, "planner meets e^(2r) and rejects the constant budget 0.5", verified and infeasible,
           f"{len(plan.T_out)} blocks, max b/f {float(np.max(plan.b / plan.budget)):.3f}; const budget infeasible={infeasible}")
