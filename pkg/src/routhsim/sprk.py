"""Symplectic partitioned Runge-Kutta stepping on the cotangent bundle.

Gauss collocation tableaus for s = 1 (implicit midpoint, order 2) and
s = 2 (order 4) are provided; both are self-adjoint and satisfy the
partitioned symplecticity condition exactly.
"""

from dataclasses import dataclass

import numpy as np

from .core import newton_solve
from .errors import StepRejected, UnsupportedStageCount

_SQRT3 = np.sqrt(3.0)


@dataclass(frozen=True)
class ButcherTableau:
    """Coefficients (a, b, c) for positions and (at, bt) for momenta."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    at: np.ndarray
    bt: np.ndarray
    order: int

    @property
    def stages(self):
        return len(self.b)


@dataclass
class CotangentState:
    q: np.ndarray
    p: np.ndarray


def gauss_tableau(stages):
    """Gauss collocation tableau with the given stage count (1 or 2)."""
    if stages == 1:
        a = np.array([[0.5]])
        b = np.array([1.0])
        c = np.array([0.5])
        order = 2
    elif stages == 2:
        a = np.array([[0.25, 0.25 - _SQRT3 / 6.0],
                      [0.25 + _SQRT3 / 6.0, 0.25]])
        b = np.array([0.5, 0.5])
        c = np.array([0.5 - _SQRT3 / 6.0, 0.5 + _SQRT3 / 6.0])
        order = 4
    else:
        raise UnsupportedStageCount(f"no Gauss tableau for s={stages}")
    return ButcherTableau(a=a, b=b, c=c, at=a.copy(), bt=b.copy(), order=order)


def symplecticity_residual(tab):
    """Max violation of b_i at_ij + bt_j a_ji = b_i bt_j and b = bt."""
    s = tab.stages
    cond = np.empty((s, s))
    for i in range(s):
        for j in range(s):
            cond[i, j] = tab.b[i] * tab.at[i, j] + tab.bt[j] * tab.a[j, i] \
                - tab.b[i] * tab.bt[j]
    return max(np.max(np.abs(cond)), np.max(np.abs(tab.b - tab.bt)))


def check_symplecticity(tab, tol=1e-14):
    return symplecticity_residual(tab) <= tol


def sprk_step(system, tab, state, h, guess=None, tol=1e-12, solver=None):
    """One partitioned Runge-Kutta step of Hamilton's equations for
    H = p . qdot - L with p = dL/dqdot.

    The stage unknowns are the stage velocities Qdot_i; the stage system is

        Q_i = q0 + h sum_j a_ij Qdot_j
        P_i = p0 + h sum_j at_ij dL_dq(Q_j, Qdot_j)
        0   = dL_dqdot(Q_i, Qdot_i) - P_i
    """
    n = system.n
    s = tab.stages
    q0 = np.asarray(state.q, dtype=float)
    p0 = np.asarray(state.p, dtype=float)
    if guess is None:
        qdot0 = system.qdot_from_p(q0, p0)
        guess = np.tile(qdot0, s)

    bundle = getattr(system, "stage_bundle", None)

    def unpack(w):
        V = w.reshape(s, n)
        Q = q0 + h * (tab.a @ V)
        if bundle is not None:
            F, Lv = bundle(Q, V)
        else:
            F = np.stack([system.dL_dq(Q[i], V[i]) for i in range(s)])
            Lv = np.stack([system.dL_dqdot(Q[i], V[i]) for i in range(s)])
        P = p0 + h * (tab.at @ F)
        return V, Q, F, P, Lv

    def residual(w):
        V, Q, F, P, Lv = unpack(w)
        return (Lv - P).ravel()

    w0 = np.asarray(guess, dtype=float).ravel()
    if solver is None:
        w = newton_solve(residual, w0, tol=tol)
    else:
        w = solver.solve(residual, w0)
    V, Q, F, P, _ = unpack(w)
    q1 = q0 + h * (tab.b @ V)
    p1 = p0 + h * (tab.bt @ F)
    if not system.in_chart(q1):
        raise StepRejected(f"configuration left the chart: {q1}")
    return CotangentState(q=q1, p=p1)


def run_sprk(system, tab, state, h, steps, tol=1e-12):
    """Iterate sprk_step; returns a cotangent Trajectory of steps+1 states."""
    from .core import ChordNewton, Trajectory

    solver = ChordNewton(tol=tol)
    qs = np.empty((steps + 1, system.n))
    ps = np.empty((steps + 1, system.n))
    qs[0], ps[0] = state.q, state.p
    cur = state
    for k in range(steps):
        cur = sprk_step(system, tab, cur, h, solver=solver)
        qs[k + 1], ps[k + 1] = cur.q, cur.p
    return Trajectory(times=h * np.arange(steps + 1), positions=qs,
                      momenta=ps, kind="cotangent", h=h)
