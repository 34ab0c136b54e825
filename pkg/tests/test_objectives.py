import numpy as np
import pytest
from hypothesis import given, strategies as st

from ozd.errors import ConfigurationError
from ozd.objectives import (
    TABLE3_NAMES, affine, make_objective, make_quadratic, make_shifted_l1, make_table3_objective,
    power_iteration,
)
from ozd.rng import RngStream

points = st.lists(st.floats(-10, 10), min_size=9, max_size=9).map(np.array)


def test_quadratic_identity():
    assert make_quadratic(2, A=np.eye(2))([3.0, 4.0]) == 12.5


@pytest.mark.parametrize("seed", range(5))
def test_quadratic_minimum(seed):
    f = make_quadratic(7, RngStream(seed))
    assert f(np.zeros(7)) == 0.0 and f.f_star == 0.0


@pytest.mark.parametrize("seed", range(5))
def test_power_iteration_matches_eigvalsh(seed):
    f = make_quadratic(20, RngStream(seed))
    A = f.params["A"]
    top = np.linalg.eigvalsh(A.T @ A)[-1]
    assert abs(f.L1 - top) <= 1e-8 * top


def test_power_iteration_nonconvergence():
    with pytest.raises(ConfigurationError):
        power_iteration(np.diag([1.0, 0.999999]), tol=1e-16, max_iter=5)


def test_quadratic_gradient_matches_finite_differences():
    f = make_quadratic(5, RngStream(1))
    x = np.linspace(-1, 2, 5)
    eps = 1e-6
    fd = np.array([(f(x + eps * e) - f(x - eps * e)) / (2 * eps) for e in np.eye(5)])
    assert np.allclose(fd, f.grad(x), rtol=1e-6, atol=1e-6)


def test_quadratic_batch_shape():
    f = make_quadratic(3, RngStream(0))
    assert f.batch(np.ones((4, 2, 3))).shape == (4, 2)


def test_quadratic_rejects_wrong_shape():
    with pytest.raises(ConfigurationError):
        make_quadratic(3, A=np.eye(2))


def test_shifted_l1_values():
    f = make_shifted_l1(3)
    assert f([0, 1, 2]) == 0 and f([1, 1, 2]) == 1
    assert make_shifted_l1(50)(np.zeros(50)) == 1225
    assert make_shifted_l1(50).L0 == pytest.approx(np.sqrt(50))


def test_extended_examples():
    x = np.array([0.4, 0.0, 0.0])
    assert make_table3_objective("huber", 3)(x) == pytest.approx(0.08)
    assert make_table3_objective("l1", 5)(np.zeros(5)) == 0
    assert make_table3_objective("total-variation", 4)([0, 1, 1, 0]) == 2


def test_huber_linear_branch():
    f = make_table3_objective("huber", 2)
    assert f([3.0, 4.0]) == pytest.approx(0.5 * 5 - 0.125)


def test_unknown_name():
    with pytest.raises(ConfigurationError):
        make_table3_objective("rosenbrock", 4)
    with pytest.raises(ConfigurationError):
        make_table3_objective("total-variation", 1)


@pytest.mark.parametrize("name", TABLE3_NAMES)
def test_extended_minimum_at_origin(name):
    f = make_objective(name, 9)
    assert f(np.zeros(9)) == 0.0 and f.f_star == 0.0


@pytest.mark.parametrize("name", TABLE3_NAMES + ("shifted_l1",))
@given(x=points, y=points, t=st.floats(0, 1))
def test_convexity(name, x, y, t):
    f = make_objective(name, 9)
    lhs = f(t * x + (1 - t) * y)
    assert lhs <= t * f(x) + (1 - t) * f(y) + 1e-9 * (1 + abs(f(x)) + abs(f(y)))


@pytest.mark.parametrize("name", [n for n in TABLE3_NAMES if n != "elastic-net"] + ["shifted_l1"])
@given(x=points, y=points)
def test_lipschitz_constant(name, x, y):
    f = make_objective(name, 9)
    assert abs(f(x) - f(y)) <= f.L0 * np.linalg.norm(x - y) + 1e-9


@given(x=points, y=points)
def test_quadratic_smoothness(x, y):
    f = make_quadratic(9, RngStream(3))
    assert np.linalg.norm(f.grad(x) - f.grad(y)) <= f.L1 * np.linalg.norm(x - y) * (1 + 1e-9) + 1e-9


def test_huber_gradient():
    f = make_table3_objective("huber", 4)
    for x in (np.array([0.1, 0.2, 0.0, -0.1]), np.array([1.0, -2.0, 0.5, 3.0])):
        eps = 1e-6
        fd = np.array([(f(x + eps * e) - f(x - eps * e)) / (2 * eps) for e in np.eye(4)])
        assert np.allclose(fd, f.grad(x), atol=1e-6)


def test_affine():
    f = affine([1.0, 2.0], 3.0)
    assert f([1.0, 1.0]) == 6.0 and np.array_equal(f.grad(None), [1.0, 2.0])


def test_make_objective_aliases():
    assert make_objective("f2", 4).name == "shifted_l1"
    assert make_objective("f1", 4, RngStream(0)).name == "quadratic"
