"""Structure-preservation diagnostics: conservation drift, symplecticity
residuals, reduced/unreduced commutation, convergence order, and a plain
(non-symplectic) RK4 integrator used as the drift-contrast baseline.

Every diagnostic is deterministic and side-effect-free.
"""

from dataclasses import dataclass

import numpy as np

from .core import Trajectory
from .discrete_lagrangian import discrete_momentum
from .reduction import (ConnectionOneForm, ReducedCotangentState, pi_mu,
                        project, reduce_lagrangian, run_dr, run_rsprk)
from .sprk import CotangentState


@dataclass
class DriftReport:
    """Time series of a conserved-quantity deviation plus summary stats.

    ``series`` holds (step index, time, value) triples; ``linear_trend`` is
    the least-squares slope of value against time.  ``relative`` is False
    when the reference value vanished and absolute drift is reported
    instead.
    """

    series: list
    max_abs: float
    linear_trend: float
    relative: bool = True


@dataclass
class OrderReport:
    """Global-error measurements against a reference at fixed final time."""

    step_sizes: list
    errors: list
    slope: float


def _summarize(indices, times, values, relative=True):
    values = np.asarray(values, dtype=float)
    times = np.asarray(times, dtype=float)
    if len(values) >= 2 and times[-1] > times[0]:
        trend = float(np.polyfit(times, values, 1)[0])
    else:
        trend = 0.0
    series = list(zip([int(k) for k in indices], times.tolist(), values.tolist()))
    return DriftReport(series=series, max_abs=float(np.max(np.abs(values))),
                       linear_trend=trend, relative=relative)


def energy(system, q, qdot):
    """Conserved energy E = qdot . dL/dqdot - L."""
    return system.energy(q, qdot)


def momentum_drift(traj, ld, system):
    """Deviation of the momentum map from its initial value along a run.

    Cotangent trajectories use the continuous pairing of the momenta with
    the group generators; configuration trajectories use the discrete
    momentum of consecutive pairs.
    """
    gen = system.group_generators()
    if traj.momenta is not None:
        vals = traj.momenta @ gen.T
        times = traj.times
        idx = np.arange(len(traj))
    else:
        qs = traj.positions
        vals = np.stack([discrete_momentum(ld, qs[k], qs[k + 1], system)
                         for k in range(len(qs) - 1)])
        times = traj.times[:-1]
        idx = np.arange(len(qs) - 1)
    dev = np.max(np.abs(vals - vals[0]), axis=1)
    return _summarize(idx, times, dev)


def energy_drift(traj, system):
    """Relative energy drift (E_k - E_0)/E_0 along a trajectory.

    Cotangent trajectories recover velocities through the mass matrix;
    reduced trajectories use the reduced energy s . xdot - R_hat at the
    trajectory's momentum value; configuration trajectories evaluate at
    pair midpoints with difference-quotient velocities.  When E_0 = 0 the
    report carries absolute drift with ``relative`` unset.
    """
    if traj.kind == "cotangent":
        E = np.array([system.energy(q, system.qdot_from_p(q, p))
                      for q, p in zip(traj.positions, traj.momenta)])
        times = traj.times
    elif traj.kind == "reduced":
        mu = traj.mu
        E = np.empty(len(traj))
        for k, (x, s) in enumerate(zip(traj.positions, traj.momenta)):
            xdot = system.xdot_from_s(x, s)
            E[k] = float(np.dot(s, xdot)) - system.routhian_hat(x, xdot, mu)
        times = traj.times
    else:
        qs = traj.positions
        h = traj.h
        E = np.array([system.energy(0.5 * (qs[k] + qs[k + 1]),
                                    (qs[k + 1] - qs[k]) / h)
                      for k in range(len(qs) - 1)])
        times = traj.times[:-1]
    idx = np.arange(len(E))
    if E[0] != 0.0:
        return _summarize(idx, times, (E - E[0]) / E[0])
    return _summarize(idx, times, E - E[0], relative=False)


def canonical_form(dim):
    """Constant canonical symplectic matrix on R^{2 dim} as a form field."""
    J = np.block([[np.zeros((dim, dim)), np.eye(dim)],
                  [-np.eye(dim), np.zeros((dim, dim))]])

    def form_at(z):
        return J

    return form_at


def reduced_form(reduced, mu):
    """Noncanonical reduced form: canonical plus the magnetic block.

    At z = (x, s) the matrix is [[-beta_mu(x), I], [-I, 0]].
    """
    d = reduced.shape_dim
    eye = np.eye(d)
    zero = np.zeros((d, d))

    def form_at(z):
        B = reduced.beta_mu(z[:d], mu)
        return np.block([[-B, eye], [-eye, zero]])

    return form_at


def symplectic_check(step_map, state, form_at, fd_scale=1e-5):
    """Residual of one-step preservation of a symplectic form.

    ``step_map`` maps a flat phase-space vector z to the next one; its
    Jacobian D is computed by central differences with per-component step
    fd_scale * (1 + |z_i|).  Returns the sup norm of
    D^T Omega(step(z)) D - Omega(z).
    """
    z = np.asarray(state, dtype=float)
    k = z.size
    z1 = np.asarray(step_map(z), dtype=float)
    D = np.empty((k, k))
    for i in range(k):
        hi = fd_scale * (1.0 + abs(z[i]))
        zp = z.copy()
        zm = z.copy()
        zp[i] += hi
        zm[i] -= hi
        D[:, i] = (np.asarray(step_map(zp), dtype=float)
                   - np.asarray(step_map(zm), dtype=float)) / (2.0 * hi)
    return float(np.max(np.abs(D.T @ form_at(z1) @ D - form_at(z))))


def commutation_check(system, reduced, seed, steps, method_pair, h, tol=1e-12):
    """Max distance between the projected unreduced run and the reduced run.

    ``method_pair`` is ("del", "dr") with seed = (q0, q1), or
    ("sprk", "rsprk") with seed = CotangentState; the momentum value is
    taken from the seed so both sides are matched.
    """
    from .discrete_lagrangian import midpoint_ld, run_del
    from .sprk import gauss_tableau, run_sprk

    if steps == 0:
        return 0.0
    pair = tuple(m.lower() for m in method_pair)
    if pair == ("del", "dr"):
        q0, q1 = seed
        ld = midpoint_ld(system, h)
        mu = discrete_momentum(ld, q0, q1, system)
        full = run_del(ld, q0, q1, steps)
        shape = project(full, system, wrap=False)
        lhat = reduce_lagrangian(ld, system, mu)
        aform = ConnectionOneForm(reduced)
        red = run_dr(lhat, aform, shape.positions[0], shape.positions[1], steps)
        return float(np.max(np.abs(shape.positions - red.positions)))
    if pair == ("sprk", "rsprk"):
        tab = gauss_tableau(2)
        mu = system.group_generators() @ np.asarray(seed.p, dtype=float)
        full = run_sprk(system, tab, seed, h, steps)
        down_x = np.empty((steps + 1, reduced.shape_dim))
        down_s = np.empty((steps + 1, reduced.shape_dim))
        for k in range(steps + 1):
            st, _ = pi_mu(system, reduced,
                          full.positions[k], full.momenta[k], mu)
            down_x[k], down_s[k] = st.x, st.s
        st0 = ReducedCotangentState(down_x[0], down_s[0])
        red = run_rsprk(reduced, tab, st0, h, steps, mu)
        return float(max(np.max(np.abs(down_x - red.positions)),
                         np.max(np.abs(down_s - red.momenta))))
    raise ValueError(f"unsupported method pair {method_pair}")


def convergence_order(method, system, reference, h_list):
    """Global-error slope of a one-parameter family of runs.

    ``method(system, h)`` returns the flat final state at a fixed final
    time; ``reference`` is the final state from a much finer run of an
    order-4 method.  Slope is the log-log least-squares fit.
    """
    hs = sorted((float(h) for h in h_list), reverse=True)
    ref = np.asarray(reference, dtype=float)
    errs = []
    for h in hs:
        out = np.asarray(method(system, h), dtype=float)
        errs.append(float(np.max(np.abs(out - ref))))
    slope = float(np.polyfit(np.log(hs), np.log(errs), 1)[0])
    return OrderReport(step_sizes=hs, errors=errs, slope=slope)


def rk4_step(system, state, h):
    """Classical explicit RK4 on the first-order Euler-Lagrange form

        qdot = M(q)^-1 p,   pdot = dL/dq(q, qdot).

    Not symplectic; used as the energy-drift baseline.
    """
    def f(q, p):
        qdot = system.qdot_from_p(q, p)
        return qdot, system.dL_dq(q, qdot)

    q0 = np.asarray(state.q, dtype=float)
    p0 = np.asarray(state.p, dtype=float)
    k1q, k1p = f(q0, p0)
    k2q, k2p = f(q0 + 0.5 * h * k1q, p0 + 0.5 * h * k1p)
    k3q, k3p = f(q0 + 0.5 * h * k2q, p0 + 0.5 * h * k2p)
    k4q, k4p = f(q0 + h * k3q, p0 + h * k3p)
    q1 = q0 + (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
    p1 = p0 + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
    return CotangentState(q=q1, p=p1)


def run_rk4(system, state, h, steps):
    """Iterate rk4_step; returns a cotangent Trajectory."""
    qs = np.empty((steps + 1, system.n))
    ps = np.empty((steps + 1, system.n))
    qs[0], ps[0] = state.q, state.p
    cur = state
    for k in range(steps):
        cur = rk4_step(system, cur, h)
        qs[k + 1], ps[k + 1] = cur.q, cur.p
    return Trajectory(times=h * np.arange(steps + 1), positions=qs,
                      momenta=ps, kind="cotangent", h=h)
