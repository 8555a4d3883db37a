import math

import numpy as np
import pytest
import sympy as sp

from cuspforge.curvature import (
    DiagonalMetric3D,
    GraphSurfaceMetric,
    TanhGenerator,
    WarpedCuspMetric,
    cusp_sectional_curvatures,
    diagonal_curvatures,
    graph_christoffel,
    graph_surface_gaussian,
    plane_curvature_bounds,
    total_gaussian_curvature,
)
from cuspforge.errors import AxisError, DomainError
from cuspforge.fdcheck import brioschi_curvature, fd_sectional_curvature
from cuspforge.profiles import ProfileFunction, make_decay_profile


def symbolic_sectional(g, coords, i, j, simplify=True):
    """Sectional curvature of a coordinate plane computed symbolically."""
    d = len(coords)
    ginv = g.inv()
    gam = [[[sum(ginv[k, l] * (sp.diff(g[l, a], coords[b]) + sp.diff(g[l, b], coords[a]) - sp.diff(g[a, b], coords[l]))
                 for l in range(d)) / 2 for b in range(d)] for a in range(d)] for k in range(d)]

    def riem(k, l, a, b):
        out = sp.diff(gam[k][b][l], coords[a]) - sp.diff(gam[k][a][l], coords[b])
        out += sum(gam[k][a][m] * gam[m][b][l] - gam[k][b][m] * gam[m][a][l] for m in range(d))
        return out

    num = sum(g[i, k] * riem(k, j, i, j) for k in range(d))
    out = num / (g[i, i] * g[j, j] - g[i, j] ** 2)
    return sp.simplify(out) if simplify else out


T, X1, X2 = sp.symbols("t x1 x2", real=True)
F = sp.Function("f")


@pytest.fixture(scope="module")
def warped_symbolic():
    conf = 4 * F(T) ** 2 / (1 - X1**2 - X2**2) ** 2
    g = sp.diag(1, conf, conf)
    coords = (T, X1, X2)
    return symbolic_sectional(g, coords, 0, 1), symbolic_sectional(g, coords, 1, 2)


def _subs_jet(expr, jet):
    v, d1, d2 = jet
    e = expr.subs(sp.Derivative(F(T), (T, 2)), d2).subs(sp.Derivative(F(T), T), d1).subs(F(T), v)
    return e


@pytest.mark.parametrize("profile", ["cosh", "exp", "decay"])
def test_warped_closed_forms_match_symbolic_riemann(warped_symbolic, profile):
    k_rad_sym, k_tan_sym = warped_symbolic
    f = {
        "cosh": ProfileFunction.cosh(),
        "exp": ProfileFunction.exponential(),
        "decay": make_decay_profile(-1.0),
    }[profile]
    for t in (0.1, 0.7, 2.3, 5.0):
        jet = f.jet(t)
        kr, kt = cusp_sectional_curvatures(f, t)
        want_r = float(_subs_jet(k_rad_sym, jet).subs({X1: 0.2, X2: -0.3}))
        want_t = float(_subs_jet(k_tan_sym, jet).subs({X1: 0.2, X2: -0.3}))
        assert kr == pytest.approx(want_r, rel=1e-12, abs=1e-14)
        assert kt == pytest.approx(want_t, rel=1e-12)


def test_cosh_profile_is_hyperbolic():
    m = WarpedCuspMetric(3, ProfileFunction.cosh(-5.0, 5.0))
    rep = plane_curvature_bounds(m, (-5.0, 5.0), 1000)
    for fam in ("radial", "tangential"):
        assert abs(rep.families[fam].min + 1) < 1e-9
        assert abs(rep.families[fam].max + 1) < 1e-9


def test_exponential_tangential_closed_form_and_fd():
    f = ProfileFunction.exponential(0.0, math.inf)
    m = WarpedCuspMetric(3, f)
    ts = np.linspace(0.0, 10.0, 201)
    _, kt = cusp_sectional_curvatures(f, ts)
    np.testing.assert_allclose(kt, -(np.exp(2 * ts) + 1), rtol=1e-9)
    for t in ts[::20]:
        p = np.array([t, 0.1, -0.05])
        fd = fd_sectional_curvature(m.metric_tensor, p, 1, 2)
        assert fd == pytest.approx(-(math.exp(2 * t) + 1), rel=1e-6)


def test_fd_oracle_radial_plane_on_decay_profile():
    f = make_decay_profile(-1.0)
    m = WarpedCuspMetric(3, f)
    for t in (-0.5, 0.3, 4.0):
        kr, _ = cusp_sectional_curvatures(f, t)
        fd = fd_sectional_curvature(m.metric_tensor, np.array([t, 0.0, 0.3]), 0, 1)
        assert fd == pytest.approx(kr, rel=1e-6, abs=1e-7)


def test_two_dimensional_cusp_has_no_tangential_family():
    m = WarpedCuspMetric(2, ProfileFunction.exponential())
    rep = plane_curvature_bounds(m, (0.0, 1.0), 10)
    assert set(rep.families) == {"radial"}


def test_curvature_bounds_reject_interval_outside_domain():
    m = WarpedCuspMetric(3, ProfileFunction.exponential(0.0, math.inf))
    with pytest.raises(DomainError):
        plane_curvature_bounds(m, (-1.0, 1.0), 10)


def test_curvature_report_csv_header():
    m = WarpedCuspMetric(3, ProfileFunction.exponential())
    text = plane_curvature_bounds(m, (0.0, 1.0), 3).to_csv()
    assert text.splitlines()[0] == "t_or_xy,K_family,value"
    lines = text.splitlines()
    assert len(lines) == 1 + 6 + 2
    assert lines[-2] == "min,all,-8.38905609893065"
    assert lines[-1] == "max,all,-1.0"


@pytest.mark.parametrize("r", [0.1, 0.5, 1.0, 3.0])
def test_fermi_coordinates_are_hyperbolic(r):
    m = DiagonalMetric3D.fermi()
    for k in diagonal_curvatures(m, r):
        assert k == pytest.approx(-1.0, abs=1e-12)
    p = np.array([0.2, 0.4, r])
    for i, j in ((0, 1), (0, 2), (1, 2)):
        assert fd_sectional_curvature(m.metric_tensor, p, i, j) == pytest.approx(-1.0, abs=1e-6)


def test_fermi_axis_raises():
    with pytest.raises(AxisError):
        diagonal_curvatures(DiagonalMetric3D.fermi(), 0.0)


def test_homothety_scales_curvature():
    m = DiagonalMetric3D.fermi()
    s = 3.0
    for k0, k1 in zip(diagonal_curvatures(m, 1.0), diagonal_curvatures(m.scaled(s), 1.0)):
        assert k1 == pytest.approx(k0 / s**2, rel=1e-12)
    w = WarpedCuspMetric(3, ProfileFunction.exponential())
    ws = w.scaled(s)
    kr0, kt0 = w.curvatures(2.0)
    # arc length of the scaled metric is s times the original one
    kr1, kt1 = ws.curvatures(2.0 * s)
    assert kr1 == pytest.approx(kr0 / s**2, rel=1e-12)
    assert kt1 == pytest.approx(kt0 / s**2, rel=1e-12)


@pytest.fixture(scope="module")
def graph_symbolic():
    x, y = sp.symbols("x y", real=True)
    b = sp.pi / 10
    g = lambda t: b / 2 * (t + sp.log(sp.cosh(t)))
    z = g(x) - g(y)
    zx, zy = sp.diff(z, x), sp.diff(z, y)
    E, Fc, G = 1 + zx**2, zx * zy, 1 + zy**2
    metric = sp.Matrix([[E, Fc], [Fc, G]])
    K = symbolic_sectional(metric, (x, y), 0, 1, simplify=False)
    return sp.lambdify((x, y), K, "mpmath"), x, y, metric


@pytest.mark.parametrize("x,y", [(0.0, 0.0), (0.5, -1.2), (-2.0, 3.0), (1.5, 1.5)])
def test_graph_gaussian_against_symbolic(graph_symbolic, x, y):
    K, *_ = graph_symbolic
    m = GraphSurfaceMetric(TanhGenerator())
    assert graph_surface_gaussian(m, x, y) == pytest.approx(float(K(x, y)), rel=1e-10, abs=1e-15)
    bri = brioschi_curvature(m.first_fundamental_form, x, y)
    assert bri == pytest.approx(float(K(x, y)), rel=1e-5, abs=1e-9)


def test_graph_gaussian_is_nonpositive():
    m = GraphSurfaceMetric()
    xs = np.linspace(-10, 10, 101)
    X, Y = np.meshgrid(xs, xs)
    assert np.all(graph_surface_gaussian(m, X, Y) <= 0)


def test_graph_christoffel_against_symbolic(graph_symbolic):
    _, x, y, metric = graph_symbolic
    coords = (x, y)
    ginv = metric.inv()

    def gamma(k, i, j):
        return sum(ginv[k, l] * (sp.diff(metric[l, i], coords[j]) + sp.diff(metric[l, j], coords[i])
                                 - sp.diff(metric[i, j], coords[l])) for l in range(2)) / 2

    pt = {x: 0.4, y: -0.9}
    want = [float(gamma(k, i, i).subs(pt)) for k, i in ((0, 0), (0, 1), (1, 0), (1, 1))]
    got = graph_christoffel(GraphSurfaceMetric(), 0.4, -0.9)
    np.testing.assert_allclose(got, want, rtol=1e-10, atol=1e-15)
    assert float(gamma(0, 0, 1).subs(pt)) == pytest.approx(0.0, abs=1e-15)


def test_total_curvature_within_budget_and_monotone():
    m = GraphSurfaceMetric()
    vals = [total_gaussian_curvature(m, R) for R in (5.0, 10.0, 20.0)]
    for v in vals:
        assert -0.098696 <= v <= 0.0
    assert vals[0] >= vals[1] >= vals[2]


def test_total_curvature_small_box_matches_scipy():
    from scipy.integrate import dblquad

    m = GraphSurfaceMetric()
    R = 1.0

    def integrand(y, x):
        return float(graph_surface_gaussian(m, x, y) * m.area_element(x, y))

    want, _ = dblquad(integrand, -R, R, -R, R, epsabs=1e-12, epsrel=1e-12)
    assert total_gaussian_curvature(m, R) == pytest.approx(want, abs=1e-8)
