import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isslab.dynamics import SystemModel
from isslab.errors import DefinitenessViolated, NoConvergence, NonFinite
from isslab.matrix_bounds import (FunctionMatrix, _directions, check_definiteness, eigen_real_parts, error_matrix,
                                  jacobian, sampling_seed, scalar_bounds)
from isslab.registry import get_example

ex3_jac = get_example("example3_coupled").extras["jacobian"]
ex3 = FunctionMatrix(lambda x: ex3_jac(x, None, 0.0), 2, 1.0)
isotropic = FunctionMatrix(lambda x: -(1.0 + float(x @ x)) * np.eye(2), 2, 1.0)


# -- jacobian -------------------------------------------------------------

def test_jacobian_linear_exact():
    assert np.array_equal(jacobian(get_example("linear_scalar").model, [0.3], [1.0]), [[-1.0]])


def test_jacobian_example3_finite_difference():
    rhs = get_example("example3_coupled").model.rhs
    fd = SystemModel(rhs, 2, 1)
    assert np.allclose(jacobian(fd, [1.0, 1.0], [0.0]), [[-9.0, 9.0], [6.0, -6.0]], atol=1e-5)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=9, max_size=9), st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_jacobian_of_linear_map_recovers_matrix(entries, x):
    A = np.array(entries).reshape(3, 3)
    sys_ = SystemModel(lambda v, u, t: A @ v, 3)
    assert np.allclose(jacobian(sys_, x), A, atol=1e-7)


def test_jacobian_non_finite():
    sys_ = SystemModel(lambda v, u, t: np.log(v), 1)
    with pytest.raises(NonFinite), np.errstate(divide="ignore", invalid="ignore"):
        jacobian(sys_, [0.0])


# -- eigenvalues ----------------------------------------------------------

@pytest.mark.parametrize("A,expected", [
    ([[0, 1], [-1, -1]], [-0.5, -0.5]),
    ([[-2, 0], [0, -1]], [-2.0, -1.0]),
    ([[-9, 9], [6, -6]], [-15.0, 0.0]),
])
def test_eigen_real_parts(A, expected):
    assert np.allclose(eigen_real_parts(A), expected, atol=1e-12)


def test_eigen_real_parts_errors(monkeypatch):
    with pytest.raises(ValueError):
        eigen_real_parts([[1.0, 2.0]])
    with pytest.raises(NonFinite):
        eigen_real_parts([[np.inf]])

    def boom(_):
        raise np.linalg.LinAlgError("no convergence")

    monkeypatch.setattr(np.linalg, "eigvals", boom)
    with pytest.raises(NoConvergence):
        eigen_real_parts([[1.0]])


# -- scalar bounds --------------------------------------------------------

def test_isotropic_closed_form():
    pair = scalar_bounds(isotropic)
    for s in pair.shells:
        assert pair.lambda2(s) == pytest.approx(-(1.0 + s * s), abs=1e-6)
    for s in np.linspace(0.0, 1.0, 37):
        assert pair.lambda1(s) == pytest.approx(-2.0, abs=1e-6)
    # inner-ball sup is attained at the centre
    assert pair.lambda2_ball(1.0) == pytest.approx(-1.0)
    assert pair.rates() == pytest.approx((1.0, 2.0))


def test_constant_matrix_is_exact():
    pair = scalar_bounds(FunctionMatrix(lambda x: np.diag([-3.0, -1.0]), 2, 2.0))
    for s in np.linspace(0.0, 2.0, 9):
        assert pair.lambda1(s) == -3.0 and pair.lambda2(s) == -1.0


def test_example3_violates_negative_definiteness():
    with pytest.raises(DefinitenessViolated) as info:
        scalar_bounds(ex3, definite="negative")
    assert info.value.value == pytest.approx(0.0, abs=1e-9)


def test_positive_assertion():
    with pytest.raises(DefinitenessViolated):
        scalar_bounds(FunctionMatrix(lambda x: -np.eye(2), 2, 1.0), definite="positive")
    scalar_bounds(FunctionMatrix(lambda x: np.eye(2), 2, 1.0), definite="positive")


def rotating(x, c=1.0, d=1.0):
    a, b = x
    return np.array([[-c - a * a, d * b], [-d * b, -c - 1.0 - b * b + a]])


@settings(max_examples=15, deadline=None)
@given(c=st.floats(0.5, 3.0), d=st.floats(-2.0, 2.0), radius=st.floats(0.2, 1.5))
def test_sandwich(c, d, radius):
    # every sampled point's eigen-real-parts lie between the bounds at its radius
    pair = scalar_bounds(FunctionMatrix(lambda x: rotating(x, c, d), 2, radius), shells=8, samples_per_shell=16)
    dirs = _directions(2, 16, sampling_seed())
    for s in pair.shells:
        for x in s * dirs:
            re = eigen_real_parts(rotating(x, c, d))
            assert pair.lambda1(s) - 1e-9 <= re[0] and re[-1] <= pair.lambda2(s) + 1e-9
            assert re[-1] <= pair.lambda2_ball(s) + 1e-9


def test_monotone_construction():
    pair = scalar_bounds(FunctionMatrix(rotating, 2, 1.0), shells=16, samples_per_shell=32)
    s = np.linspace(0.0, 1.0, 41)
    l1 = [pair.lambda1(v) for v in s]
    l2 = [pair.lambda2(v) for v in s]
    ball = [pair.lambda2_ball(v) for v in s]
    assert np.all(np.diff(l1) >= 0)
    assert np.all(np.diff(l2) <= 0)
    assert np.all(np.diff(ball) >= 0)


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("ISSLAB_SEED", "7")
    assert sampling_seed() == 7
    assert sampling_seed(3) == 3
    monkeypatch.delenv("ISSLAB_SEED")
    assert sampling_seed() == 0


def test_sampling_is_deterministic():
    A = FunctionMatrix(rotating, 2, 1.0)
    a = scalar_bounds(A, shells=8, samples_per_shell=16)
    b = scalar_bounds(A, shells=8, samples_per_shell=16)
    assert np.array_equal(a.lower_values, b.lower_values) and np.array_equal(a.upper_values, b.upper_values)


def test_function_matrix_guards():
    with pytest.raises(ValueError):
        FunctionMatrix(lambda x: -np.eye(1), 1, 0.0)
    with pytest.raises(NonFinite):
        FunctionMatrix(lambda x: np.array([[np.nan]]), 1, 1.0)([0.0])
    with pytest.raises(ValueError):
        scalar_bounds(isotropic, shells=0)


# -- definiteness ---------------------------------------------------------

def test_minus_identity_passes():
    rep = check_definiteness(FunctionMatrix(lambda x: -np.eye(2), 2, 1.0))
    assert rep.passed and rep.metrics["worst_quadratic_form"] == pytest.approx(-1.0)


def test_example1_matrix_fails_strict_form():
    rep = check_definiteness(FunctionMatrix(lambda x: np.array([[0.0, 1.0], [-1.0, -1.0]]), 2, 1.0))
    assert not rep.passed
    assert rep.metrics["worst_quadratic_form"] == pytest.approx(0.0, abs=1e-15)
    assert np.allclose(np.abs(rep.metrics["witness_e"]), [1.0, 0.0])
    # the spectral test alone would have passed
    assert rep.metrics["eigen_verdict"] is True


def test_flipped_sign_gives_axis_witness():
    rep = check_definiteness(FunctionMatrix(lambda x: np.diag([1.0, -2.0]), 2, 1.0))
    assert not rep.passed
    assert np.allclose(np.abs(rep.metrics["witness_e"]), [1.0, 0.0])
    assert rep.metrics["worst_quadratic_form"] == pytest.approx(1.0)


def test_example3_definiteness_report():
    rep = check_definiteness(ex3)
    assert not rep.passed and rep.metrics["eigen_verdict"] is False


def test_positive_sign_and_scalar_case():
    assert check_definiteness(FunctionMatrix(lambda x: np.eye(1) * (1 + x @ x), 1, 1.0), sign="positive").passed
    with pytest.raises(ValueError):
        check_definiteness(isotropic, sign="zero")


def test_error_matrix_cubic():
    cubic = get_example("cubic_scalar").model
    M = error_matrix(cubic, 8.0, 1.0)
    # f(2 + e) = -(2 + e)^3 + 8 = -(12 + 6e + e^2) e
    for e in (-1.0, -0.3, 0.5, 1.0):
        assert M([e])[0, 0] == pytest.approx(-(12.0 + 6.0 * e + e * e), rel=1e-12)
