import math

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad

from cuspforge.cusps import (
    CuspModel,
    ManifoldDescriptor,
    completeness_check,
    cumulative_volume,
    curvature_asymptotics,
    cusp_volume,
)
from cuspforge.profiles import ProfileFunction, make_decay_profile


def exp_cusp(n, a=0.0, T=math.inf, V=1.0):
    return CuspModel(n, V, ProfileFunction.exponential(a, math.inf), a, T)


@pytest.mark.parametrize("n,want", [(2, 1.0), (3, 0.5), (4, 1.0 / 3.0)])
def test_exponential_cusp_volume(n, want):
    assert cusp_volume(exp_cusp(n)).value == pytest.approx(want, abs=1e-8)


@pytest.mark.parametrize("mode", ["exponential", "cubic-decay"])
@pytest.mark.parametrize("n", [2, 3])
def test_decay_cusp_volume_against_mpmath(mode, n):
    f = make_decay_profile(-1.0, mode)
    got = cusp_volume(CuspModel(n, 2.0, f, -1.0)).value
    knots = [-1.0] + list(f.knots) + [mpmath.inf]
    want = 2.0 * mpmath.quad(lambda t: mpmath.mpf(f(float(t))) ** (n - 1), knots)
    assert got == pytest.approx(float(want), rel=1e-8)


def test_cosh_segment_truncated_volume_against_scipy():
    f = ProfileFunction.cosh(-2.0, 3.0)
    got = cusp_volume(CuspModel(3, 1.0, f, -2.0, 3.0)).value
    want, _ = quad(lambda t: math.cosh(t) ** 2, -2.0, 3.0, epsabs=0, epsrel=1e-13)
    assert got == pytest.approx(want, rel=1e-10)


@pytest.mark.parametrize("split", [0.3, 1.0, 7.5])
def test_volume_additivity(split):
    f = make_decay_profile(-1.0)
    whole = cusp_volume(CuspModel(3, 1.0, f, -1.0, 20.0)).value
    left = cusp_volume(CuspModel(3, 1.0, f, -1.0, split)).value
    right = cusp_volume(CuspModel(3, 1.0, f, split, 20.0)).value
    assert abs(left + right - whole) < 1e-10


def test_constant_profile_volume_diverges():
    c = CuspModel(3, 1.0, ProfileFunction.constant(1.0, 0.0, math.inf), 0.0)
    r = cusp_volume(c)
    assert r.divergent and math.isinf(r.value) and r.reason


def test_cumulative_volume_is_monotone_and_converges():
    c = exp_cusp(3)
    ts = np.linspace(0.0, 40.0, 101)
    vals = cumulative_volume(c, ts)
    assert vals[0] == 0.0
    assert np.all(np.diff(vals) >= 0)
    np.testing.assert_allclose(vals, 0.5 * (1 - np.exp(-2 * ts)), rtol=1e-12, atol=1e-15)


def test_volume_csv_has_running_total():
    text = cusp_volume(CuspModel(3, 1.0, make_decay_profile(-1.0), -1.0)).to_csv()
    lines = text.splitlines()
    assert lines[0] == "segment,contribution,cumulative"
    assert len(lines) >= 3


def test_manifold_volume_sums_parts():
    m = ManifoldDescriptor(2.0, (exp_cusp(3), exp_cusp(3)))
    assert m.volume() == pytest.approx(3.0, abs=1e-12)


def test_invalid_models_raise():
    with pytest.raises(ValueError):
        exp_cusp(1)
    with pytest.raises(ValueError):
        exp_cusp(3, V=0.0)
    with pytest.raises(ValueError):
        CuspModel(3, 1.0, ProfileFunction.exponential(), 2.0, 1.0)


def test_completeness():
    assert completeness_check(exp_cusp(3)).complete
    assert not completeness_check(exp_cusp(3, T=5.0)).complete


def test_exponential_cusp_curvature_blows_down():
    rep = curvature_asymptotics(exp_cusp(3))
    assert rep.blows_down
    assert rep.sup_curvature == pytest.approx(-1.0)


def test_cosh_matched_cusp_curvature_asymptotics():
    rep = curvature_asymptotics(CuspModel(3, 1.0, make_decay_profile(-1.0), -1.0))
    assert rep.blows_down
    assert np.all(rep.k_tangential < 0)
    assert np.all(rep.k_radial <= 0)


def test_cubic_decay_tangential_growth_exponent():
    rep = curvature_asymptotics(CuspModel(3, 1.0, make_decay_profile(-1.0, "cubic-decay"), -1.0))
    # f = c (t - t0)^-4 gives K_tan ~ -(t - t0)^8 / c^2; a log-log fit over
    # [10, 100] sees the slope 8 t / (t - t0) averaged over the window
    tail = make_decay_profile(-1.0, "cubic-decay").segments[-1].form
    ts = np.linspace(10.0, 100.0, 200)
    local = np.polyfit(np.log(ts), 8 * np.log(ts - tail.t0), 1)[0]
    assert rep.growth_exponent == pytest.approx(local, abs=0.05)
    assert 7.5 < rep.growth_exponent < 8.0


def test_scaled_cusp_volume_scales_by_power():
    c = CuspModel(3, 1.0, make_decay_profile(-1.0), -1.0)
    A = 2.0
    # metric divided by A^2 in dimension n scales volume by A^-n
    assert cusp_volume(c.scaled(A)).value == pytest.approx(cusp_volume(c).value / A**3, rel=1e-9)
