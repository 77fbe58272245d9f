import numpy as np
import sympy as sp
import pytest

from routhsim.errors import UnsupportedStageCount
from routhsim.sprk import (ButcherTableau, CotangentState, check_symplecticity,
                           gauss_tableau, run_sprk, sprk_step,
                           symplecticity_residual)
from routhsim.symbolic import AffineTrivialization, SymbolicMechanicalSystem


def harmonic_system():
    q, v = sp.symbols("q v")
    L = sp.Rational(1, 2) * v ** 2 - sp.Rational(1, 2) * q ** 2
    triv = AffineTrivialization(np.eye(1), np.zeros((1, 0)))
    return SymbolicMechanicalSystem([q], [v], L, triv, name="harmonic")


def test_gauss_tableau_values():
    t1 = gauss_tableau(1)
    assert t1.a[0, 0] == 0.5 and t1.b[0] == 1.0 and t1.order == 2
    t2 = gauss_tableau(2)
    s3 = np.sqrt(3.0)
    assert np.allclose(t2.a, [[0.25, 0.25 - s3 / 6.0],
                              [0.25 + s3 / 6.0, 0.25]], atol=1e-16)
    assert np.allclose(t2.b, [0.5, 0.5], atol=1e-16)
    assert np.allclose(t2.c, [0.5 - s3 / 6.0, 0.5 + s3 / 6.0], atol=1e-16)
    assert t2.order == 4


def test_gauss_tableaus_are_symplectic():
    assert symplecticity_residual(gauss_tableau(1)) == 0.0
    assert symplecticity_residual(gauss_tableau(2)) <= 1e-16
    assert check_symplecticity(gauss_tableau(1))
    assert check_symplecticity(gauss_tableau(2))


def test_symplectic_euler_tableau_passes():
    """The (explicit, implicit) Euler pairing satisfies the partitioned
    condition even though neither half does alone."""
    tab = ButcherTableau(a=np.array([[0.0]]), b=np.array([1.0]),
                         c=np.array([0.0]), at=np.array([[1.0]]),
                         bt=np.array([1.0]), order=1)
    assert check_symplecticity(tab)


def test_rk4_tableau_fails_symplecticity():
    a = np.array([[0.0, 0.0, 0.0, 0.0],
                  [0.5, 0.0, 0.0, 0.0],
                  [0.0, 0.5, 0.0, 0.0],
                  [0.0, 0.0, 1.0, 0.0]])
    b = np.array([1.0, 2.0, 2.0, 1.0]) / 6.0
    tab = ButcherTableau(a=a, b=b, c=a.sum(axis=1), at=a.copy(), bt=b.copy(),
                         order=4)
    assert not check_symplecticity(tab)
    assert symplecticity_residual(tab) > 1e-2


def test_unsupported_stage_count():
    with pytest.raises(UnsupportedStageCount):
        gauss_tableau(3)


def test_implicit_midpoint_harmonic_map():
    """One s=1 step on the harmonic oscillator is the Cayley rotation
    ((1 - h^2/4) q0 + h p0, ...) / (1 + h^2/4); at (1, 0), h = 0.1 the
    image is (0.995012468827930, -0.0997506234413966)."""
    h = 0.1
    sys_ = harmonic_system()
    out = sprk_step(sys_, gauss_tableau(1),
                    CotangentState(np.array([1.0]), np.array([0.0])), h)
    denom = 1.0 + h ** 2 / 4.0
    assert abs(out.q[0] - (1.0 - h ** 2 / 4.0) / denom) < 1e-13
    assert abs(out.p[0] - (-h / denom)) < 1e-13
    assert abs(out.q[0] - 0.995012468827930) < 1e-14
    assert abs(out.p[0] + 0.0997506234413966) < 1e-14


def test_s2_step_is_fourth_order_accurate():
    h = 0.1
    out = sprk_step(harmonic_system(), gauss_tableau(2),
                    CotangentState(np.array([1.0]), np.array([0.0])), h)
    assert abs(out.q[0] - np.cos(h)) < 1e-7
    assert abs(out.p[0] + np.sin(h)) < 1e-7


def test_energy_bounded_long_run():
    sys_ = harmonic_system()
    traj = run_sprk(sys_, gauss_tableau(1),
                    CotangentState(np.array([1.0]), np.array([0.0])), 0.1, 2000)
    E = 0.5 * (traj.positions[:, 0] ** 2 + traj.momenta[:, 0] ** 2)
    assert np.max(np.abs(E - 0.5)) < 1e-3  # oscillates, no drift


def test_momentum_exact_on_satellite(satellite_j2, circular_ic):
    q0, qdot0 = circular_ic
    p0 = satellite_j2.mass_matrix(q0) @ qdot0
    traj = run_sprk(satellite_j2, gauss_tableau(2), CotangentState(q0, p0),
                    0.3, 300)
    J = traj.momenta @ satellite_j2.group_generators().T
    assert np.max(np.abs(J - J[0])) < 1e-13


def test_s2_is_time_symmetric(satellite, circular_ic):
    q0, qdot0 = circular_ic
    p0 = satellite.mass_matrix(q0) @ qdot0
    tab = gauss_tableau(2)
    fwd = sprk_step(satellite, tab, CotangentState(q0, p0), 0.3)
    back = sprk_step(satellite, tab, fwd, -0.3)
    assert np.max(np.abs(back.q - q0)) < 1e-12
    assert np.max(np.abs(back.p - p0)) < 1e-12
