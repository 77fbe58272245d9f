import numpy as np
import pytest

from routhsim.core import (ChordNewton, Trajectory, fd_gradient, fd_jacobian,
                           newton_solve)
from routhsim.errors import NoConvergence, SingularJacobian

# fixed point of cos, solved independently by bisection to 10 digits
COS_FIXED_POINT = 0.7390851332


def test_newton_scalar_fixed_point():
    root = newton_solve(lambda x: np.cos(x) - x, np.array([1.0]))
    assert abs(root[0] - COS_FIXED_POINT) < 1e-9


def test_newton_with_analytic_jacobian():
    def residual(x):
        return np.array([x[0] ** 2 + x[1] ** 2 - 1.0, x[0] - x[1]])

    def jacobian(x):
        return np.array([[2.0 * x[0], 2.0 * x[1]], [1.0, -1.0]])

    root = newton_solve(residual, np.array([1.0, 0.5]), jacobian=jacobian)
    assert np.allclose(root, np.sqrt(0.5), atol=1e-12)


def test_newton_no_convergence_carries_last_iterate():
    with pytest.raises(NoConvergence) as err:
        newton_solve(lambda x: np.array([x[0] ** 2 + 1.0]), np.array([0.5]),
                     max_iter=5)
    assert err.value.last_iterate is not None
    assert err.value.residual_norm > 0.0


def test_newton_singular_jacobian():
    with pytest.raises(SingularJacobian):
        newton_solve(lambda x: np.array([0.0 * x[0] + 1.0]), np.array([1.0]),
                     jacobian=lambda x: np.array([[0.0]]))


def test_chord_newton_matches_plain_newton():
    def residual(x):
        return np.array([np.exp(x[0]) - 2.0, x[1] ** 3 - 8.0])

    plain = newton_solve(residual, np.array([1.0, 1.5]))
    chord = ChordNewton().solve(residual, np.array([1.0, 1.5]))
    assert np.max(np.abs(plain - chord)) < 1e-12
    assert np.max(np.abs(residual(chord))) < 1e-12


def test_chord_newton_reuse_across_solves():
    solver = ChordNewton()
    for shift in (0.0, 0.01, 0.02, 0.03):
        root = solver.solve(lambda x, s=shift: np.array([x[0] ** 2 - 2.0 - s]),
                            np.array([1.4]))
        assert abs(root[0] - np.sqrt(2.0 + shift)) < 1e-12


def test_fd_jacobian_accuracy():
    rng = np.random.default_rng(7)
    A = rng.standard_normal((4, 4))
    x = rng.standard_normal(4)

    def f(z):
        return A @ z + np.array([np.sin(z[0]), 0.0, 0.0, z[3] ** 2])

    J = fd_jacobian(f, x)
    J_exact = A.copy()
    J_exact[0, 0] += np.cos(x[0])
    J_exact[3, 3] += 2.0 * x[3]
    assert np.max(np.abs(J - J_exact)) < 1e-7


def test_fd_gradient_accuracy():
    x = np.array([0.3, -1.2])
    g = fd_gradient(lambda z: np.sin(z[0]) * np.exp(z[1]), x)
    exact = np.array([np.cos(x[0]) * np.exp(x[1]),
                      np.sin(x[0]) * np.exp(x[1])])
    assert np.max(np.abs(g - exact)) < 1e-8


def test_trajectory_len():
    traj = Trajectory(times=np.arange(5) * 0.1, positions=np.zeros((5, 2)))
    assert len(traj) == 5
    assert traj.kind == "config"
