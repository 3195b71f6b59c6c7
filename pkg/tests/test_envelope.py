import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isslab import funcalg as fa
from isslab.dynamics import InputSignal, ISSCertificate, SystemModel, Trajectory, integrate
from isslab.envelope import (EnvelopeParams, EnvelopeReport, check_containment, cumulative_rate,
                             default_lagrange_constant, delta_term, envelope_corollary1,
                             envelope_corollary2, envelope_theorem1, envelope_theorem2, forced_response,
                             forced_response_direct, steady_tracking_error)
from isslab.errors import GridMismatch, MissingEquilibriumMap, NonPositiveRate, NotScalar
from isslab.matrix_bounds import error_matrix, scalar_bounds
from isslab.registry import get_example

one = lambda t: 1.0  # noqa: E731
ident = fa.identity()
id_cert = ISSCertificate(ident, ident, ident)
linear = get_example("linear_scalar").model


def grid(t_end, h=1e-3):
    return h * np.arange(int(round(t_end / h)) + 1)


# -- delta term -----------------------------------------------------------

def test_delta_zero_for_constant_input():
    d = delta_term(one, lambda u: 5.0, InputSignal.constant(2.0), grid(5.0))
    assert np.all(d == 0.0)


def test_delta_ramp_input():
    g = grid(1.0)
    d = delta_term(one, lambda u: 1.0, InputSignal(lambda t: t, lambda t: 1.0), g)
    assert -d[-1] == pytest.approx(1.0 - math.exp(-1.0), abs=1e-5)
    assert np.max(np.abs(-d - (1.0 - np.exp(-g)))) <= 1e-6


def test_delta_sinusoid_closed_form():
    # -int_0^t e^{-(t-s)} cos s ds = -(cos t + sin t - e^{-t}) / 2
    g = grid(math.pi)
    d = delta_term(one, lambda u: 1.0, InputSignal.sinusoid(), g)
    t = g[-1]
    assert d[-1] == pytest.approx(-0.5 * (math.cos(t) + math.sin(t) - math.exp(-t)), abs=1e-5)


def test_delta_quadrature_is_second_order():
    errs = []
    for h in (1e-2, 5e-3):
        g = grid(10.0, h)
        d = delta_term(one, lambda u: 1.0, InputSignal.sinusoid(), g)
        errs.append(np.max(np.abs(d + 0.5 * (np.cos(g) + np.sin(g) - np.exp(-g)))))
    assert errs[0] / errs[1] >= 3.5


@settings(max_examples=30, deadline=None)
@given(rate=st.floats(0.1, 5.0), amp=st.floats(-2.0, 2.0), w=st.floats(0.1, 5.0))
def test_recurrence_matches_direct_sum(rate, amp, w):
    g = grid(2.0, 1e-2)
    R = cumulative_rate(lambda t: rate * (1.0 + 0.5 * math.sin(t)), g)
    f = amp * np.cos(w * g)
    assert np.allclose(forced_response(R, f, 1e-2), forced_response_direct(R, f, 1e-2), atol=1e-12)


def test_rates_must_be_positive():
    with pytest.raises(NonPositiveRate):
        cumulative_rate(lambda t: 1.0 - t, grid(2.0))


def test_grid_must_be_uniform():
    with pytest.raises(GridMismatch):
        delta_term(one, lambda u: 1.0, InputSignal.sinusoid(), np.array([0.0, 0.1, 0.3]))


# -- envelope_theorem1 ----------------------------------------------------

def test_theorem1_constant_input():
    u = InputSignal.constant(0.5)
    traj = integrate(linear, [0.0], u, 0.0, 20.0, 1e-3)
    rep = envelope_theorem1(id_cert, EnvelopeParams(), u, traj.times, 0.0)
    rep = check_containment(traj, rep)
    assert rep.contained
    assert rep.upper[-1] == pytest.approx(0.5)


def test_theorem1_unforced_with_inflated_beta():
    traj = integrate(linear, [1.0], InputSignal.constant(0.0), 0.0, 10.0, 1e-3)
    beta = fa.kl_exponential(1.01)
    rep = envelope_theorem1(id_cert, EnvelopeParams(beta=beta), InputSignal.constant(0.0), traj.times, 1.0)
    assert np.allclose(rep.upper, 1.01 * np.exp(-traj.times))
    assert check_containment(traj, rep).contained


def test_theorem1_sinusoid_equals_exact_representation():
    # x = e^{-t}(x0 - u0) + u(t) - int e^{-(t-s)} u' ds; |u| = u while sin t >= 0
    g = grid(math.pi)
    u = InputSignal.sinusoid()
    traj = integrate(linear, [0.3], u, 0.0, g[-1], 1e-3)
    rep = envelope_theorem1(id_cert, EnvelopeParams(k=one, L=1.0, alpha4=lambda v: 1.0), u, g, 0.3)
    mask = np.sin(g) >= 0
    assert np.max(np.abs(rep.upper[mask] - traj.samples[mask, 0])) <= 2e-5


def test_default_lagrange_constant():
    # alpha1 = 2s -> alpha1^-1 has slope 1/2 everywhere
    cert = ISSCertificate(fa.linear(2.0), ident, ident)
    assert default_lagrange_constant(cert, InputSignal.sinusoid(), grid(3.0, 0.1)) == pytest.approx(0.5)


# -- envelope_corollary1 --------------------------------------------------

def test_corollary1_limits():
    u = InputSignal.constant(2.0)
    cert = get_example("cubic_scalar").model.certificate
    g = grid(30.0, 1e-2)
    rep = envelope_corollary1(cert, one, fa.kl_exponential(), u, g, 1.5)
    assert rep.upper[0] == pytest.approx(1.5)
    assert rep.upper[-1] == pytest.approx(float(cert.gain(2.0)), rel=1e-9)


def test_corollary1_linear_saturation():
    u = InputSignal.constant(1.0)
    traj = integrate(linear, [0.0], u, 0.0, 10.0, 1e-3)
    rep = check_containment(traj, envelope_corollary1(id_cert, one, fa.kl_exponential(), u, traj.times, 0.0),
                            tol=1e-9)
    assert rep.contained and rep.max_violation == 0.0
    assert np.max(np.abs(rep.upper - traj.samples[:, 0])) <= 1e-9


def test_corollary1_inverts_numeric_alpha1():
    cert = ISSCertificate(fa.ComparisonFunction(lambda s: s**3 + s), ident, ident)
    rep = envelope_corollary1(cert, one, fa.kl_exponential(), InputSignal.constant(2.0), grid(40.0, 0.1), 0.0)
    assert rep.upper[-1] == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(a=st.floats(0.05, 3.0), b=st.floats(0.0, 2.0), w=st.floats(0.1, 4.0))
def test_corollary1_factor_is_monotone(a, b, w):
    g = grid(5.0, 1e-2)
    k = lambda t: a + b * math.sin(w * t) ** 2  # noqa: E731
    factor = 1.0 - np.exp(-cumulative_rate(k, g))
    assert np.all(np.diff(factor) >= 0) and factor[0] == 0.0 and factor[-1] < 1.0


# -- envelope_theorem2 ----------------------------------------------------

def test_theorem2_linear_exactness():
    u = InputSignal.sinusoid()
    traj = integrate(linear, [0.3], u, 0.0, 10.0, 1e-3)
    rep = envelope_theorem2(linear, EnvelopeParams(lambda1=one, lambda2=one), u, traj.times, [0.3])
    x = traj.samples[:, 0]
    assert np.max(np.abs(rep.upper - x)) <= 2e-5 and np.max(np.abs(rep.lower - x)) <= 2e-5


def _rates(sys_, u, radius):
    return scalar_bounds(error_matrix(sys_, u, radius), shells=16, samples_per_shell=8).rates()


def test_theorem2_cubic_constant_input():
    cubic = get_example("cubic_scalar").model
    slow, fast = _rates(cubic, 8.0, 2.0)
    assert 0 < slow <= fast
    u = InputSignal.constant(8.0)
    traj = integrate(cubic, [0.0], u, 0.0, 10.0, 1e-3)
    params = EnvelopeParams(lambda1=lambda t: slow, lambda2=lambda t: fast)
    rep = check_containment(traj, envelope_theorem2(cubic, params, u, traj.times, [0.0]), tol=1e-9)
    assert rep.contained
    assert rep.upper[-1] == pytest.approx(2.0, abs=1e-6)
    assert rep.lower[-1] == pytest.approx(2.0, abs=1e-6)


def test_theorem2_tan_constant_input_converges():
    tan = get_example("tan_scalar").model
    slow, fast = _rates(tan, 0.5, 0.6)
    u = InputSignal.constant(0.5)
    traj = integrate(tan, [-0.1], u, 0.0, 15.0, 1e-3)
    params = EnvelopeParams(lambda1=lambda t: slow, lambda2=lambda t: fast)
    rep = check_containment(traj, envelope_theorem2(tan, params, u, traj.times, [-0.1]), tol=1e-9)
    assert rep.contained
    assert abs(rep.upper[-1] - 0.5) < 1e-4 and abs(rep.lower[-1] - 0.5) < 1e-4


def scaled_linear(a):
    return SystemModel(lambda x, u, t: -a * (x - u), 1, 1, equilibrium_map=(ident,))


@settings(max_examples=25, deadline=None)
@given(a=st.floats(0.3, 3.0), lo=st.floats(0.2, 1.0), hi=st.floats(1.0, 3.0),
       x0=st.floats(-2.0, 2.0), amp=st.floats(-1.5, 1.5), w=st.floats(0.2, 3.0))
def test_theorem2_sandwich_for_any_rate_inside_the_bounds(a, lo, hi, x0, amp, w):
    # the true rate a lies in [lo*a, hi*a]; the envelope must contain the trajectory
    sys_ = scaled_linear(a)
    u = InputSignal.sinusoid(amp, w)
    h = 1e-2
    traj = integrate(sys_, [x0], u, 0.0, 6.0, h)
    params = EnvelopeParams(lambda1=lambda t: lo * a, lambda2=lambda t: hi * a)
    # when lo = hi = 1 the bound is tight, so allow the trapezoid error of the forced part:
    # |E| <= h^2/8 * int |f''| with f = exp(-c(t-s)) amp w cos(ws), i.e. <= h^2/8 |amp| w (c+w)^2 / c
    quad = max(h * h / 8 * abs(amp) * w * (c + w) ** 2 / c for c in (lo * a, hi * a))
    rep = check_containment(traj, envelope_theorem2(sys_, params, u, traj.times, [x0]), tol=quad + 1e-9)
    assert rep.contained, rep.max_violation


def test_theorem2_needs_equilibrium_map_and_scalar_input():
    ex3 = get_example("example3_coupled").model
    with pytest.raises(MissingEquilibriumMap):
        envelope_theorem2(ex3, EnvelopeParams(), InputSignal.constant(0.0), grid(1.0), [0.0, 0.0])
    two_in = SystemModel(lambda x, u, t: -x, 1, 2, equilibrium_map=(ident,))
    with pytest.raises(NotScalar):
        envelope_theorem2(two_in, EnvelopeParams(), InputSignal.constant([0.0, 0.0]), grid(1.0), [0.0])


def test_theorem2_rejects_inverted_rates():
    with pytest.raises(NonPositiveRate):
        envelope_theorem2(linear, EnvelopeParams(lambda1=lambda t: 2.0, lambda2=one),
                          InputSignal.constant(0.0), grid(1.0), [0.0])


def test_tracking_error_grows_with_frequency():
    errs = []
    for w in (0.1, 1.0, 10.0):
        g = grid(60.0, 1e-3)
        u = InputSignal.sinusoid(1.0, w)
        rep = envelope_theorem2(linear, EnvelopeParams(lambda1=one, lambda2=one), u, g, [0.0])
        errs.append(steady_tracking_error(rep, u.sample(g)[:, 0], after=30.0))
    assert errs[0] < errs[1] < errs[2]
    # steady-state amplitude of x - u is w / sqrt(1 + w^2)
    assert errs[1] == pytest.approx(1 / math.sqrt(2), abs=1e-3)


# -- envelope_corollary2 --------------------------------------------------

def test_corollary2_constant_input_band():
    u = InputSignal.constant(0.7)
    traj = integrate(linear, [0.0], u, 0.0, 20.0, 1e-3)
    rep = envelope_corollary2(linear, one, fa.kl_exponential(), u, traj.times, 0.0)
    rep = check_containment(traj, rep)
    assert rep.contained
    assert rep.upper[-1] == pytest.approx(0.7) and rep.lower[-1] == pytest.approx(0.0, abs=1e-8)


def test_corollary2_band_at_start_contains_x0():
    u = InputSignal.sinusoid(1.0, 1.0, 0.3)
    rep = envelope_corollary2(linear, one, fa.kl_exponential(), u, grid(1.0), 0.4)
    assert rep.lower[0] <= 0.4 <= rep.upper[0]
    assert rep.upper[0] == pytest.approx(0.4 + math.sin(0.3))


def test_corollary2_tan():
    tan = get_example("tan_scalar").model
    u = InputSignal.constant(0.5)
    traj = integrate(tan, [0.0], u, 0.0, 10.0, 1e-3)
    rep = check_containment(traj, envelope_corollary2(tan, one, fa.kl_exponential(), u, traj.times, 0.0))
    assert rep.contained
    assert traj.final[0] == pytest.approx(0.5, abs=1e-3)


def test_corollary2_is_scalar_only():
    ex3 = get_example("example3_coupled").model
    with pytest.raises(NotScalar):
        envelope_corollary2(ex3, one, fa.kl_exponential(), InputSignal.constant(0.0), grid(1.0), 0.0)


# -- containment ----------------------------------------------------------

def _exact_case():
    u = InputSignal.constant(1.0)
    traj = integrate(linear, [0.0], u, 0.0, 5.0, 1e-3)
    return traj, envelope_corollary1(id_cert, one, fa.kl_exponential(), u, traj.times, 0.0)


def test_containment_exact_equality():
    traj, rep = _exact_case()
    assert check_containment(traj, rep, tol=1e-4).contained


def test_containment_detects_shifted_bound():
    traj, rep = _exact_case()
    shifted = EnvelopeReport(rep.grid, rep.upper - 0.1)
    out = check_containment(traj, shifted)
    assert not out.contained
    assert out.max_violation == pytest.approx(0.1, abs=1e-9)
    assert len(out.violation_times) == traj.n


def test_containment_grid_mismatch():
    traj, rep = _exact_case()
    other = Trajectory(100.0, 1e-3, traj.samples)
    with pytest.raises(GridMismatch):
        check_containment(other, rep)
    with pytest.raises(GridMismatch):
        check_containment(Trajectory(0.0, 1e-3, traj.samples[:10]), rep)


def test_report_csv():
    rep = EnvelopeReport(np.array([0.0, 0.5]), np.array([1.0, 2.0]), np.array([-1.0, 0.0]), mode="component")
    assert rep.to_csv() == "t,upper,lower,x\n0,1,-1,\n0.5,2,0,\n# contained=unchecked max_violation=0\n"
    traj = Trajectory(0.0, 0.5, [0.5, 3.0])
    text = check_containment(traj, rep).to_csv()
    assert text.splitlines()[2] == "0.5,2,0,3"
    assert text.endswith("# contained=false max_violation=1\n")
    wide = EnvelopeReport(np.array([0.0]), np.array([[1.0, 2.0]]))
    assert wide.to_csv().splitlines()[0] == "t,upper1,lower1,x1,upper2,lower2,x2"
