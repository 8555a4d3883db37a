import math

import mpmath
import networkx as nx
import numpy as np
import pytest
from scipy.optimize import brentq

from cuspforge.assembly import (
    BlockTemplate,
    ChainModel,
    GraphPlan,
    ScaleSchedule,
    cgvd_diagnostic,
    completeness_series,
    cyclic_cover_schedule,
    displacement_growth_check,
    growth_truncation_planner,
    margulis_threshold,
    matching_truncation,
    plan_assembly,
    total_volume,
)
from cuspforge.assembly.graphs import bfs_counts
from cuspforge.assembly.matching import boundary_coefficient
from cuspforge.errors import BudgetInfeasible, ConfigError, HorizonError, SideConditionError, TailError
from cuspforge.profiles import ProfileFunction, make_decay_profile


def nx_ball(plan: GraphPlan, depth: int) -> nx.Graph:
    g = nx.Graph()
    frontier, seen = [plan.base], {plan.base}
    for _ in range(depth + 1):
        nxt = []
        for v in frontier:
            for w in plan.neighbors(v):
                g.add_edge(v, w)
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return g


@pytest.mark.parametrize("kind", ["line", "chord", "trivalent-tree", "f2-cayley"])
def test_shell_counts_against_networkx(kind):
    plan = GraphPlan(kind)
    depth = 6
    dist = nx.single_source_shortest_path_length(nx_ball(plan, depth), plan.base, cutoff=depth)
    want = [sum(1 for d in dist.values() if d == k) for k in range(depth + 1)]
    assert bfs_counts(plan, depth) == want
    assert [plan.count(k) for k in range(depth + 1)] == want
    for v, d in dist.items():
        assert plan.distance(v) == d


def test_shell_counts_closed_forms():
    assert [GraphPlan("trivalent-tree").count(k) for k in range(5)] == [1, 3, 6, 12, 24]
    assert [GraphPlan("f2-cayley").count(k) for k in range(5)] == [1, 4, 12, 36, 108]


def test_unknown_graph_kind():
    with pytest.raises(ValueError):
        GraphPlan("torus")


# graph, schedule, n, convergent (decided by hand from growth rate and p-test)
SERIES_SUITE = [
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


@pytest.mark.parametrize("kind,schedule,n,convergent", SERIES_SUITE)
def test_volume_series_verdicts(kind, schedule, n, convergent):
    v = total_volume(GraphPlan(kind), schedule, 1.0, n)
    assert v.convergent is convergent
    assert v.witness


def test_geometric_volume_value():
    # 1 + sum_{k>=1} 4 * 3^(k-1) * 1.5^(-3k) = 1 + (4/3) * 8
    v = total_volume(GraphPlan("f2-cayley"), ScaleSchedule.exponential(1, 1.5), 1.0, 3)
    assert v.value == pytest.approx(1 + 32 / 3, rel=1e-9)


def test_power_volume_value_against_mpmath():
    v = total_volume(GraphPlan("line"), ScaleSchedule.power(1, 1, 1), 2.0, 2)
    want = 2.0 * (1 + 2 * (mpmath.zeta(2) - 1))
    assert v.value == pytest.approx(float(want), rel=1e-12)


def test_tree_doubling_volume_value():
    v = total_volume(GraphPlan("trivalent-tree"), ScaleSchedule.exponential(1, 2), 1.0, 2)
    # 1 + sum 3 * 2^(k-1) * 4^-k = 1 + 1.5
    assert v.value == pytest.approx(2.5, rel=1e-9)


def test_completeness_series():
    assert completeness_series(ScaleSchedule.power(1, 1, 1)).divergent
    assert completeness_series(ScaleSchedule.power(1, 1, 2)).convergent
    assert completeness_series(ScaleSchedule.exponential(1, 2)).convergent
    assert completeness_series(ScaleSchedule.exponential(1, 2), enforce_min_diameter=True).divergent


def test_cyclic_cover_schedule_values():
    s = cyclic_cover_schedule(3, 2)
    eps = 1 - 2 ** (-1 / 3)
    for k in range(3):
        assert s.length_factor(k) == pytest.approx((1 - eps) ** (k + 1), rel=1e-12)
    for k in range(3, 20):
        assert s.length_factor(k) == pytest.approx(1 / (k - 3 + 2 + 1), rel=1e-12)


def test_cyclic_cover_side_condition():
    with pytest.raises(SideConditionError):
        cyclic_cover_schedule(1, 2)
    s = cyclic_cover_schedule(1, 2, enforce_side_condition=False)
    assert completeness_series(s).divergent
    assert total_volume(GraphPlan("line"), s, 1.0, 2).convergent


@pytest.mark.parametrize("d,m", [(2, 2), (3, 2), (3, 3), (5, 4), (1, 5)])
def test_side_condition_matches_real_inequality(d, m):
    holds = (m - 1) / m < m ** (-1 / d)
    if holds:
        assert cyclic_cover_schedule(d, m).params["side_condition"]
    else:
        with pytest.raises(SideConditionError):
            cyclic_cover_schedule(d, m)


def test_matching_truncation_formula():
    assert matching_truncation(0.5, 1.0, 4.0) == pytest.approx(4.0 + math.log(0.5))
    with pytest.raises(TailError):
        matching_truncation(0.01, 1.0, 1.0, tail_start=0.0)
    # a depth a few ulps short of the tail start is rounding, not a violation
    start = 2.9375
    shift = math.log(3.0 / 7.0)
    assert matching_truncation(3.0, 7.0, start - shift, tail_start=start) >= start


@pytest.mark.parametrize(
    "kind,schedule",
    [
        ("line", ScaleSchedule.power(1, 1, 1)),
        ("chord", ScaleSchedule.power(1, 1, 1)),
        ("trivalent-tree", ScaleSchedule.exponential(1, 2)),
        ("f2-cayley", ScaleSchedule.exponential(1, 3)),
    ],
)
def test_assembled_boundaries_match(kind, schedule):
    graph = GraphPlan(kind)
    ports = ("L", "R", "C") if kind in ("line", "chord") else (("x", "y", "z") if kind == "trivalent-tree" else tuple("aAbB"))
    plan = plan_assembly(graph, schedule, BlockTemplate.standard(ports), depth=4)
    assert plan.edges
    assert plan.matching_residual() < 1e-12
    for e in plan.edges:
        # independent recomputation of both conformal factors
        f = plan.block.ports[e.port_u].profile
        cu = 2 * e.scale_u * f(e.T_u)
        cv = 2 * e.scale_v * f(e.T_v)
        assert abs(cu - cv) <= 1e-12 * max(cu, cv)
        assert cu == boundary_coefficient(f, e.T_u, e.scale_u)


def test_chord_port_lengths():
    plan = plan_assembly(GraphPlan("chord"), ScaleSchedule.power(1, 1, 1), BlockTemplate.standard(), depth=5)
    rows = plan.chord_inequalities()
    assert rows
    for v, la, lb, lc, ok in rows:
        assert la + lb < lc < 2 * (la + lb)
        assert ok


def test_block_template_validation():
    with pytest.raises(ValueError):
        BlockTemplate.standard(offset=0.0)


# -- chain model and CGVD ---------------------------------------------------------


def exp_chain(n=2, horizon=20.0):
    return ChainModel.single_cusp(ProfileFunction.exponential(0.0, math.inf), n, 0.0, horizon)


def test_exponential_cusp_cgvd_closed_form():
    r = np.linspace(2.0, 20.0, 37)
    res = cgvd_diagnostic(exp_chain(), r)
    want = np.exp(-2 * r) * (math.e - 1) ** 2
    np.testing.assert_allclose(res.product, want, rtol=1e-10)
    np.testing.assert_allclose(res.b, 1.0)


def test_cgvd_homothety_invariance():
    model = ChainModel.single_cusp(make_decay_profile(-1.0), 3, -1.0, 15.0)
    r = np.linspace(2.0, 15.0, 27)
    base = cgvd_diagnostic(model, r)
    for s in (0.5, 3.0):
        scaled = cgvd_diagnostic(model.scaled(s), s * r, width=s)
        np.testing.assert_allclose(scaled.product, base.product, rtol=1e-9)


def test_cosh_matched_cusp_cgvd_decays():
    model = ChainModel.single_cusp(make_decay_profile(-1.0), 2, -1.0, 20.0)
    res = cgvd_diagnostic(model, [10.0])
    assert res.product[0] < 1e-6


def test_cgvd_rejects_out_of_range_radii():
    with pytest.raises(HorizonError):
        cgvd_diagnostic(exp_chain(), [0.5])
    with pytest.raises(HorizonError):
        cgvd_diagnostic(exp_chain(), [25.0])


def test_chain_volume_additivity():
    model = ChainModel.single_cusp(make_decay_profile(-1.0), 3, -1.0, 15.0)
    whole = model.volume_between(0.0, 15.0)
    parts = sum(model.volume_between(a, a + 1.5) for a in np.arange(0.0, 15.0, 1.5))
    assert parts == pytest.approx(whole, rel=1e-12)


def test_planner_exponential_budget_verifies():
    plan = growth_truncation_planner(lambda r: math.exp(2 * r))
    assert plan.verified
    assert np.all(plan.b < np.exp(2 * plan.grid))
    assert plan.chain.horizon >= 40.0
    # neighbours are matched on the exponential tail
    for T, Tn, s, s2 in zip(plan.T_out, plan.T_in, plan.scales, plan.scales[1:]):
        assert s * math.exp(-T) == pytest.approx(s2 * math.exp(-Tn), rel=1e-12)


def test_planner_constant_budget_is_infeasible():
    with pytest.raises(BudgetInfeasible) as err:
        growth_truncation_planner(lambda r: 0.5)
    assert err.value.radius is not None


def test_planner_rejects_decreasing_budget():
    with pytest.raises(ValueError):
        growth_truncation_planner(lambda r: math.exp(-r))


def test_planner_chain_cgvd_subsequence_bounded_away_from_zero():
    plan = growth_truncation_planner(lambda r: math.exp(2 * r))
    model = plan.chain
    # evaluate just after each neck, where b_p jumps
    rs = [r + 1e-9 for r in plan.neck_radii if 1.0 < r < model.horizon - 1]
    res = cgvd_diagnostic(model, rs)
    assert len(rs) >= 3
    assert np.min(res.product) > 1e-3


def test_b_p_is_running_maximum():
    plan = growth_truncation_planner(lambda r: math.exp(2 * r))
    b = plan.chain.b_p(plan.grid)
    assert np.all(np.diff(b) >= 0)


def test_displacement_growth():
    rep = displacement_growth_check(2.0, 100.0, 9801)
    assert rep.verdict
    root = brentq(lambda x: x - math.log(x) - math.log(1e6), 2.0, 100.0)
    assert root <= rep.first_above_1e6 < root + 0.01 + 1e-12


def test_margulis_threshold(monkeypatch):
    monkeypatch.delenv("CUSPFORGE_MU1", raising=False)
    with pytest.raises(ConfigError):
        margulis_threshold(2.0)
    assert margulis_threshold(2.0, mu1=0.3) == pytest.approx(0.15)
    monkeypatch.setenv("CUSPFORGE_MU1", "0.5")
    assert margulis_threshold(4.0) == pytest.approx(0.125)
    monkeypatch.setenv("CUSPFORGE_MU1", "abc")
    with pytest.raises(ConfigError):
        margulis_threshold(1.0)
