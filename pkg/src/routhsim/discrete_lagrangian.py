"""Discrete Lagrangian (midpoint quadrature), discrete Euler-Lagrange
stepping, discrete momentum and discrete Legendre transforms.
"""

import numpy as np

from .core import Trajectory, newton_solve
from .errors import StepRejected


def midpoint_ld(system, h):
    """Midpoint-rule discrete Lagrangian for a continuous system."""
    return MidpointLagrangian(system, h)


class MidpointLagrangian:
    """L_d(q0, q1) = h L((q0 + q1)/2, (q1 - q0)/h).

    First and second partial derivatives in the two slots are assembled
    from the continuous derivatives of the system's Lagrangian, all
    evaluated at the midpoint/average-velocity point.
    """

    _CACHE_LIMIT = 256

    def __init__(self, system, h):
        if h <= 0.0:
            raise ValueError(f"step size must be positive, got {h}")
        self.system = system
        self.h = h
        self._pair_cache = {}
        self._hess_cache = {}

    def _point(self, q0, q1):
        q0 = np.asarray(q0, dtype=float)
        q1 = np.asarray(q1, dtype=float)
        return 0.5 * (q0 + q1), (q1 - q0) / self.h

    def eval(self, q0, q1):
        qm, v = self._point(q0, q1)
        return self.h * self.system.lagrangian(qm, v)

    def _d1d2(self, q0, q1):
        """Both slot derivatives from a single evaluation of the continuous
        partials; cached per pair, since implicit solves revisit pairs."""
        q0 = np.asarray(q0, dtype=float)
        q1 = np.asarray(q1, dtype=float)
        key = (q0.tobytes(), q1.tobytes())
        hit = self._pair_cache.get(key)
        if hit is not None:
            return hit
        qm, v = self._point(q0, q1)
        bundle = getattr(self.system, "gradient_bundle", None)
        if bundle is not None:
            Lq, Lv = bundle(qm, v)
        else:
            Lq = self.system.dL_dq(qm, v)
            Lv = self.system.dL_dqdot(qm, v)
        half = 0.5 * self.h * Lq
        out = (half - Lv, half + Lv)
        if len(self._pair_cache) >= self._CACHE_LIMIT:
            self._pair_cache.clear()
        self._pair_cache[key] = out
        return out

    def d1(self, q0, q1):
        """Derivative in the first slot."""
        return self._d1d2(q0, q1)[0]

    def d2(self, q0, q1):
        """Derivative in the second slot."""
        return self._d1d2(q0, q1)[1]

    def _second(self, q0, q1):
        key = (np.asarray(q0).tobytes(), np.asarray(q1).tobytes())
        hit = self._hess_cache.get(key)
        if hit is not None:
            return hit
        qm, v = self._point(q0, q1)
        bundle = getattr(self.system, "hessian_bundle", None)
        if bundle is not None:
            Lqq, Lqv, M = bundle(qm, v)
        else:
            Lqq = self.system.d2L_dqdq(qm, v)
            Lqv = self.system.d2L_dqdqdot(qm, v)
            M = self.system.mass_matrix(qm)
        out = (0.25 * self.h * Lqq, 0.5 * Lqv, M / self.h)
        if len(self._hess_cache) >= self._CACHE_LIMIT:
            self._hess_cache.clear()
        self._hess_cache[key] = out
        return out

    def d11(self, q0, q1):
        A, C, Mh = self._second(q0, q1)
        return A - C - C.T + Mh

    def d12(self, q0, q1):
        """Mixed block; entry [i, j] is d^2 L_d / dq0_i dq1_j."""
        A, C, Mh = self._second(q0, q1)
        return A + C - C.T - Mh

    def d21(self, q0, q1):
        return self.d12(q0, q1).T

    def d22(self, q0, q1):
        A, C, Mh = self._second(q0, q1)
        return A + C + C.T + Mh


def del_step(ld, q_prev, q_curr, guess=None, tol=1e-12, solver=None):
    """Advance the discrete Euler-Lagrange equations by one step.

    Solves D2 L_d(q_prev, q_curr) + D1 L_d(q_curr, q_next) = 0 for q_next,
    with the exact mixed-block Jacobian.  Raises StepRejected if the
    accepted point leaves the chart.
    """
    if guess is None:
        guess = 2.0 * np.asarray(q_curr, dtype=float) - np.asarray(q_prev, dtype=float)
    rhs = ld.d2(q_prev, q_curr)

    def residual(q_next):
        return rhs + ld.d1(q_curr, q_next)

    jacobian = lambda q_next: ld.d12(q_curr, q_next)
    if solver is None:
        q_next = newton_solve(residual, guess, jacobian=jacobian, tol=tol)
    else:
        q_next = solver.solve(residual, guess, jacobian=jacobian)
    if not ld.system.in_chart(q_next):
        raise StepRejected(f"configuration left the chart: {q_next}")
    return q_next


def discrete_momentum(ld, q0, q1, system=None):
    """Discrete momentum map evaluated on a configuration pair.

    Component a is D2 L_d(q0, q1) paired with generator a; preserved
    exactly (up to solver tolerance) along discrete Euler-Lagrange
    trajectories of an invariant L_d.
    """
    if system is None:
        system = ld.system
    return system.group_generators() @ ld.d2(q0, q1)


def legendre_transforms(ld, q0, q1):
    """Both discrete Legendre transforms of a pair: (p0, p1).

    p0 = -D1 L_d(q0, q1) and p1 = D2 L_d(q0, q1), so a DEL trajectory is
    equivalently a map (q0, p0) -> (q1, p1) on phase space.
    """
    return -ld.d1(q0, q1), ld.d2(q0, q1)


def run_del(ld, q0, q1, steps, tol=1e-12):
    """Iterate del_step from a seed pair; returns a config Trajectory of
    steps+2 points (the seed pair plus one point per step)."""
    from .core import ChordNewton

    solver = ChordNewton(tol=tol)
    n = ld.system.n
    qs = np.empty((steps + 2, n))
    qs[0] = q0
    qs[1] = q1
    for k in range(steps):
        qs[k + 2] = del_step(ld, qs[k], qs[k + 1], solver=solver)
    return Trajectory(times=ld.h * np.arange(steps + 2), positions=qs,
                      kind="config", h=ld.h)


def legendre_inverse(ld, q0, p0, guess=None, tol=1e-12):
    """Find q1 with -D1 L_d(q0, q1) = p0 (inverse of the minus transform)."""
    if guess is None:
        qdot0 = ld.system.qdot_from_p(q0, p0)
        guess = np.asarray(q0, dtype=float) + ld.h * qdot0
    p0 = np.asarray(p0, dtype=float)

    def residual(q1):
        return ld.d1(q0, q1) + p0

    q1 = newton_solve(residual, guess,
                      jacobian=lambda q1: ld.d12(q0, q1), tol=tol)
    if not ld.system.in_chart(q1):
        raise StepRejected(f"configuration left the chart: {q1}")
    return q1
