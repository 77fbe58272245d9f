import numpy as np
import sympy as sp
import pytest

from routhsim import diagnostics as dg
from routhsim.core import Trajectory
from routhsim.discrete_lagrangian import (legendre_inverse, midpoint_ld,
                                          run_del)
from routhsim.sprk import CotangentState, gauss_tableau, sprk_step
from routhsim.symbolic import AffineTrivialization, SymbolicMechanicalSystem


def harmonic_system():
    q, v = sp.symbols("q v")
    L = sp.Rational(1, 2) * v ** 2 - sp.Rational(1, 2) * q ** 2
    triv = AffineTrivialization(np.eye(1), np.zeros((1, 0)))
    return SymbolicMechanicalSystem([q], [v], L, triv, name="harmonic")


def free_particle_system():
    qs = sp.symbols("q0:3")
    vs = sp.symbols("v0:3")
    L = sum(sp.Rational(1, 2) * v ** 2 for v in vs)
    triv = AffineTrivialization(np.zeros((3, 0)), np.eye(3))
    return SymbolicMechanicalSystem(list(qs), list(vs), L, triv, name="free")


def test_energy_values(satellite):
    free = free_particle_system()
    assert abs(dg.energy(free, np.zeros(3), np.array([1.0, 0.0, 0.0])) - 0.5) < 1e-15
    q = np.array([1.0, 0.0, 0.0])
    qdot = np.array([0.0, 1.0, 0.0])
    assert abs(dg.energy(satellite, q, qdot) - (-0.5)) < 1e-14


def test_rk4_harmonic_oracle():
    """Hand-iterated classical RK4 on qdot = p, pdot = -q from (1, 0) at
    h = 0.1: q1 = 1 - h^2/2 + h^4/24, p1 = -(h - h^3/6)."""
    out = dg.rk4_step(harmonic_system(),
                      CotangentState(np.array([1.0]), np.array([0.0])), 0.1)
    assert abs(out.q[0] - 0.9950041666666667) < 1e-14
    assert abs(out.p[0] + 0.0998333333333333) < 1e-14
    h = 0.1
    assert abs(out.q[0] - (1.0 - h ** 2 / 2.0 + h ** 4 / 24.0)) < 1e-15
    assert abs(out.p[0] + (h - h ** 3 / 6.0)) < 1e-15


def test_rk4_free_particle_exact():
    free = free_particle_system()
    out = dg.rk4_step(free, CotangentState(np.zeros(3), np.array([1.0, 2.0, -1.0])),
                      0.5)
    assert np.max(np.abs(out.q - np.array([0.5, 1.0, -0.5]))) < 1e-15
    assert np.max(np.abs(out.p - np.array([1.0, 2.0, -1.0]))) < 1e-15


def test_rk4_energy_drift_has_consistent_sign():
    traj = dg.run_rk4(harmonic_system(),
                      CotangentState(np.array([1.0]), np.array([0.0])), 0.1, 5000)
    E = 0.5 * (traj.positions[:, 0] ** 2 + traj.momenta[:, 0] ** 2)
    diffs = np.diff(E[::100])
    assert np.all(diffs < 0.0)  # monotone dissipation, not oscillation


def test_momentum_drift_single_pair(satellite, circular_ic):
    q0, qdot0 = circular_ic
    ld = midpoint_ld(satellite, 0.3)
    traj = Trajectory(times=np.array([0.0, 0.3]),
                      positions=np.stack([q0, q0 + 0.3 * qdot0]), h=0.3)
    rep = dg.momentum_drift(traj, ld, satellite)
    assert len(rep.series) == 1
    assert rep.max_abs == 0.0
    assert rep.linear_trend == 0.0


def test_momentum_drift_on_del_run(satellite_j2, circular_ic):
    q0, qdot0 = circular_ic
    ld = midpoint_ld(satellite_j2, 0.3)
    p0 = satellite_j2.mass_matrix(q0) @ qdot0
    q1 = legendre_inverse(ld, q0, p0)
    rep = dg.momentum_drift(run_del(ld, q0, q1, 300), ld, satellite_j2)
    assert rep.max_abs < 1e-11
    times = [t for _, t, _ in rep.series]
    assert all(a < b for a, b in zip(times, times[1:]))


def test_momentum_drift_detects_synthetic_drift(satellite, circular_ic):
    q0, qdot0 = circular_ic
    p0 = satellite.mass_matrix(q0) @ qdot0
    ld = midpoint_ld(satellite, 0.3)
    N = 50
    ps = np.tile(p0, (N, 1))
    ps[:, 1] += 1e-6 * np.arange(N)  # leaks angular momentum linearly
    traj = Trajectory(times=0.3 * np.arange(N), positions=np.tile(q0, (N, 1)),
                      momenta=ps, kind="cotangent", h=0.3)
    rep = dg.momentum_drift(traj, ld, satellite)
    assert rep.max_abs > 1e-6
    assert rep.linear_trend > 0.0


def test_momentum_conserved_exactly_by_rk4(satellite_j2, circular_ic):
    """The momentum map is linear in p with group-invariant stage forces,
    so even the non-symplectic RK4 preserves it to round-off."""
    q0, qdot0 = circular_ic
    p0 = satellite_j2.mass_matrix(q0) @ qdot0
    ld = midpoint_ld(satellite_j2, 0.3)
    traj = dg.run_rk4(satellite_j2, CotangentState(q0, p0), 0.3, 500)
    rep = dg.momentum_drift(traj, ld, satellite_j2)
    assert rep.max_abs < 1e-13


def test_energy_drift_free_particle_zero():
    free = free_particle_system()
    p = np.array([1.0, 0.0, 0.0])
    qs = np.outer(np.arange(5) * 0.1, p)
    traj = Trajectory(times=np.arange(5) * 0.1, positions=qs,
                      momenta=np.tile(p, (5, 1)), kind="cotangent", h=0.1)
    rep = dg.energy_drift(traj, free)
    assert rep.max_abs == 0.0
    assert rep.relative  # E0 = 0.5, relative drift well defined


def test_energy_drift_absolute_fallback():
    free = free_particle_system()
    qs = np.zeros((4, 3))
    traj = Trajectory(times=np.arange(4) * 0.1, positions=qs,
                      momenta=np.zeros((4, 3)), kind="cotangent", h=0.1)
    rep = dg.energy_drift(traj, free)
    assert not rep.relative


def test_symplectic_check_scaling(satellite, circular_ic):
    """Central-difference Jacobians make the residual of a symplectic map
    scale as O(fd_scale^2)."""
    q0, qdot0 = circular_ic
    p0 = satellite.mass_matrix(q0) @ qdot0
    tab = gauss_tableau(2)
    n = satellite.n

    def step(z):
        out = sprk_step(satellite, tab, CotangentState(z[:n], z[n:]), 0.3)
        return np.concatenate([out.q, out.p])

    z0 = np.concatenate([q0, p0])
    form = dg.canonical_form(n)
    r_coarse = dg.symplectic_check(step, z0, form, fd_scale=1e-4)
    r_fine = dg.symplectic_check(step, z0, form, fd_scale=1e-5)
    assert r_fine < 1e-6
    assert 30.0 < r_coarse / r_fine < 300.0


def test_symplectic_check_flags_rk4(dsp, dsp_ic):
    _, _, _, q0, qdot0 = dsp_ic
    p0 = dsp.mass_matrix(q0) @ qdot0

    def step(z):
        out = dg.rk4_step(dsp, CotangentState(z[:4], z[4:]), 0.05)
        return np.concatenate([out.q, out.p])

    res = dg.symplectic_check(step, np.concatenate([q0, p0]),
                              dg.canonical_form(4))
    assert res > 1e-6  # visibly non-symplectic already at h = 0.05


def test_commutation_zero_steps(satellite, satellite_red, circular_ic):
    q0, qdot0 = circular_ic
    assert dg.commutation_check(satellite, satellite_red,
                                (q0, q0 + 0.3 * qdot0), 0, ("del", "dr"),
                                0.3) == 0.0


def test_commutation_check_pairs(satellite, satellite_red, circular_ic):
    q0, qdot0 = circular_ic
    ld = midpoint_ld(satellite, 0.1)
    p0 = satellite.mass_matrix(q0) @ qdot0
    q1 = legendre_inverse(ld, q0, p0)
    dist = dg.commutation_check(satellite, satellite_red, (q0, q1), 200,
                                ("del", "dr"), 0.1)
    assert dist < 1e-9
    dist = dg.commutation_check(satellite, satellite_red,
                                CotangentState(q0, p0), 200,
                                ("sprk", "rsprk"), 0.1)
    assert dist < 1e-9


def test_commutation_unknown_pair(satellite, satellite_red, circular_ic):
    q0, qdot0 = circular_ic
    with pytest.raises(ValueError):
        dg.commutation_check(satellite, satellite_red, (q0, q0), 1,
                             ("del", "rk4"), 0.1)


def test_convergence_order_synthetic():
    """Errors following C h^p exactly give slope p."""
    hs = [0.4, 0.2, 0.1, 0.05]
    rep = dg.convergence_order(lambda _sys, h: np.array([3.0 * h ** 4]),
                               None, np.array([0.0]), hs)
    assert abs(rep.slope - 4.0) < 1e-12
    assert rep.step_sizes == sorted(hs, reverse=True)
    assert all(e > 0 for e in rep.errors)


def test_convergence_order_midpoint_harmonic():
    sys_ = harmonic_system()
    tab = gauss_tableau(1)
    T = 1.0

    def final(system, h):
        cur = CotangentState(np.array([1.0]), np.array([0.0]))
        for _ in range(round(T / h)):
            cur = sprk_step(system, tab, cur, h)
        return np.array([cur.q[0], cur.p[0]])

    ref = np.array([np.cos(T), -np.sin(T)])
    rep = dg.convergence_order(final, sys_, ref, [0.1, 0.05, 0.025])
    assert abs(rep.slope - 2.0) < 0.05
