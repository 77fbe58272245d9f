"""Discrete Routh reduction: the reduced discrete Lagrangian, the discrete
connection one-form, DR stepping, reduced discrete Legendre transforms,
RSPRK stepping on the reduced phase space, projection, and reconstruction.

Conventions (additive trivialization, shape coordinates x, group
coordinates g, fixed momentum value mu):

  * the lift of a shape pair (x0, x1) is ((x0, 0), (x1, dg)) with dg chosen
    so the discrete momentum of the lifted pair equals mu;
  * L_hat derivatives are directional derivatives along the shape
    directions of the lifted pair (the group displacement held at its
    constrained value enters only through the A_hat terms);
  * A_hat_1(x0, x1) = -mu.A(x0) and A_hat_2(x0, x1) = +mu.A(x1);
  * the reduced momentum is s = T^t p - mu.A(x), i.e. the shape part of p
    shifted by the connection.
"""

import numpy as np

from .core import ChordNewton, Trajectory, newton_solve
from .errors import MomentumMismatch, StepRejected
from .sprk import gauss_tableau

TWO_PI = 2.0 * np.pi


class ReducedDiscreteLagrangian:
    """Discrete Lagrangian dropped to shape space at fixed momentum.

    Every evaluation lifts the shape pair to a configuration pair carrying
    discrete momentum mu (a small Newton solve for the group displacement,
    linear for metrics independent of the group coordinates) and evaluates
    the underlying discrete Lagrangian there.  Lifts are cached per pair
    because a DR Newton iteration asks for d1/d2 at repeated arguments.
    """

    _CACHE_LIMIT = 128

    def __init__(self, ld, system, mu):
        self.ld = ld
        self.system = system
        self.h = ld.h
        self.mu = np.atleast_1d(np.asarray(mu, dtype=float))
        self._gen = system.group_generators()
        self._T = system.shape_jacobian()
        self._G = self._gen.T
        self._zero_g = np.zeros(system.m)
        self._cache = {}
        self._lift_solver = ChordNewton()
        self._last_dg = np.zeros(system.m)

    def delta_g(self, x0, x1, guess=None):
        """Group displacement of the momentum-mu lift of (x0, x1)."""
        return self.lift(x0, x1, guess=guess)[2]

    def lift(self, x0, x1, guess=None):
        """Configuration pair ((x0, 0), (x1, dg)) with J_d = mu; returns
        (q0, q1, dg)."""
        key = (np.asarray(x0).tobytes(), np.asarray(x1).tobytes())
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        q0 = self.system.from_shape(x0, self._zero_g)
        base1 = self.system.from_shape(x1, self._zero_g)

        def residual(dg):
            q1 = base1 + self._G @ dg
            return self._gen @ self.ld.d2(q0, q1) - self.mu

        def jacobian(dg):
            q1 = base1 + self._G @ dg
            return self._gen @ self.ld.d22(q0, q1) @ self._G

        if guess is None:
            guess = self._last_dg
        # With an additive group action the residual is affine in dg
        # (gen . Lq vanishes by invariance), so a single Newton step with
        # the analytic Jacobian is exact; verify and fall back to a full
        # iteration for Lagrangians where that structure does not hold.
        guess = np.atleast_1d(np.asarray(guess, dtype=float))
        r0 = residual(guess)
        J = jacobian(guess)
        if J.shape == (1, 1):
            dg = guess - r0 / J[0, 0]
        else:
            dg = guess - np.linalg.solve(J, r0)
        if np.max(np.abs(residual(dg))) > 1e-12:
            dg = self._lift_solver.solve(residual, dg, jacobian=jacobian)
        self._last_dg = dg
        q1 = base1 + self._G @ dg
        if len(self._cache) >= self._CACHE_LIMIT:
            self._cache.clear()
        self._cache[key] = (q0, q1, dg)
        return q0, q1, dg

    def eval(self, x0, x1):
        q0, q1, _ = self.lift(x0, x1)
        return self.ld.eval(q0, q1)

    def d1(self, x0, x1):
        """Shape-direction derivative in the first slot."""
        q0, q1, _ = self.lift(x0, x1)
        return self._T.T @ self.ld.d1(q0, q1)

    def d2(self, x0, x1):
        """Shape-direction derivative in the second slot."""
        q0, q1, _ = self.lift(x0, x1)
        return self._T.T @ self.ld.d2(q0, q1)

    def pair_jacobian(self, x0, x1):
        """Jacobian of d1(x0, .) — equivalently of d2 shifted — in its
        second shape argument, including the induced motion of the
        constrained group displacement."""
        q0, q1, _ = self.lift(x0, x1)
        D12 = self.ld.d12(q0, q1)
        D22 = self.ld.d22(q0, q1)
        K = self._gen @ D22 @ self._G
        ddg = -np.linalg.solve(K, self._gen @ D22 @ self._T)
        Jq = self._T + self._G @ ddg
        return self._T.T @ D12 @ Jq


def reduce_lagrangian(ld, system, mu):
    """Drop a discrete Lagrangian to shape space at momentum mu."""
    return ReducedDiscreteLagrangian(ld, system, mu)


class ConnectionOneForm:
    """The two slot-components of the discrete connection pairing.

    In the additive trivialization these evaluate pointwise through the
    local connection: A1(x0, x1) = -mu.A(x0), A2(x0, x1) = +mu.A(x1).
    """

    def __init__(self, reduced):
        self.reduced = reduced

    def A1(self, x0, x1, mu):
        return -(np.atleast_1d(mu) @ self.reduced.connection_A(x0))

    def A2(self, x0, x1, mu):
        return np.atleast_1d(mu) @ self.reduced.connection_A(x1)


class ReducedCotangentState:
    def __init__(self, x, s):
        self.x = np.asarray(x, dtype=float)
        self.s = np.asarray(s, dtype=float)


def dr_step(lhat, aform, x_prev, x_cur, mu=None, guess=None, tol=1e-12, solver=None):
    """One step of the discrete Routh equations:

        D2 L_hat(x_prev, x_cur) + D1 L_hat(x_cur, x_next)
            = A_hat_2(x_prev, x_cur) + A_hat_1(x_cur, x_next).
    """
    if mu is None:
        mu = lhat.mu
    if guess is None:
        guess = 2.0 * np.asarray(x_cur, dtype=float) - np.asarray(x_prev, dtype=float)
    lhs = lhat.d2(x_prev, x_cur) - aform.A2(x_prev, x_cur, mu)

    def residual(x_next):
        return lhs + lhat.d1(x_cur, x_next) - aform.A1(x_cur, x_next, mu)

    # A_hat_1(x_cur, .) is constant in x_next, so the Jacobian is just the
    # constrained-lift derivative of d1
    jacobian = lambda xn: lhat.pair_jacobian(x_cur, xn)
    if solver is None:
        x_next = newton_solve(residual, guess, jacobian=jacobian, tol=tol)
    else:
        x_next = solver.solve(residual, guess, jacobian=jacobian)
    if not aform.reduced.in_chart(x_next):
        raise StepRejected(f"shape point left the chart: {x_next}")
    return x_next


def reduced_legendre(lhat, aform, x0, x1, mu=None):
    """Reduced discrete Legendre transform: (x1, s1) with
    s1 = D2 L_hat(x0, x1) - A_hat_2(x0, x1)."""
    if mu is None:
        mu = lhat.mu
    return ReducedCotangentState(x1, lhat.d2(x0, x1) - aform.A2(x0, x1, mu))


def reduced_legendre_pre(lhat, aform, x0, x1, mu=None):
    """The minus-side transform: s0 = -D1 L_hat(x0, x1) + A_hat_1(x0, x1)."""
    if mu is None:
        mu = lhat.mu
    return ReducedCotangentState(x0, -lhat.d1(x0, x1) + aform.A1(x0, x1, mu))


def reduced_legendre_inverse(lhat, aform, x0, s0, mu=None, guess=None, tol=1e-12):
    """Solve for x1 given (x0, s0): the inverse of reduced_legendre_pre."""
    if mu is None:
        mu = lhat.mu
    s0 = np.asarray(s0, dtype=float)
    if guess is None:
        xdot = aform.reduced.xdot_from_s(x0, s0)
        guess = np.asarray(x0, dtype=float) + lhat.h * xdot
    a1 = aform.A1(x0, x0, mu)  # depends on the first argument only

    def residual(x1):
        return s0 + lhat.d1(x0, x1) - a1

    x1 = newton_solve(residual, guess,
                      jacobian=lambda xn: lhat.pair_jacobian(x0, xn), tol=tol)
    if not aform.reduced.in_chart(x1):
        raise StepRejected(f"shape point left the chart: {x1}")
    return x1


def _stage_data(reduced, x0, mu, X, V):
    """Per-stage quantities for the RSPRK system: dR/dxdot, the corrected
    stage force dR/dx + beta_mu xdot + (grad(mu.A)) xdot, and mu.A."""
    bundle = getattr(reduced, "stage_bundle", None)
    if bundle is not None:
        Rx, Rv, Wv, muA = bundle(X, V, mu)
        return Rv, Rx + Wv, muA
    s, d = X.shape
    Rv = np.empty((s, d))
    F = np.empty((s, d))
    muA = np.empty((s, d))
    for i in range(s):
        B = reduced.beta_mu(X[i], mu)
        dA = reduced.connection_dA(X[i])
        N = np.einsum("a,akl->kl", np.atleast_1d(mu), dA)
        Rv[i] = reduced.dR_dxdot(X[i], V[i], mu)
        F[i] = reduced.dR_dx(X[i], V[i], mu) + B @ V[i] + N @ V[i]
        muA[i] = np.atleast_1d(mu) @ reduced.connection_A(X[i])
    return Rv, F, muA


def rsprk_step(reduced, tab, state, h, mu, guess=None, tol=1e-12, solver=None):
    """One reduced symplectic partitioned Runge-Kutta step on (x, s).

    Stage system in the unknown stage velocities Xdot_i:

        X_i  = x0 + h sum_j a_ij Xdot_j
        Sdot_j = dR/dx(X_j, Xdot_j) + beta_mu(X_j) Xdot_j
        S_i  = s0 + h sum_j at_ij (Sdot_j + grad(mu.A)(X_j) Xdot_j)
                  - (mu.A(X_i) - mu.A(x0))
        0    = dR/dxdot(X_i, Xdot_i) - S_i

    with the matching quadrature for (x1, s1).  The bracketed connection
    corrections make this exactly the shape-space drop of the full-space
    SPRK method through the shift s = T^t p - mu.A(x).
    """
    d = reduced.shape_dim
    s = tab.stages
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    x0 = np.asarray(state.x, dtype=float)
    s0 = np.asarray(state.s, dtype=float)
    muA0 = mu @ reduced.connection_A(x0)
    if guess is None:
        guess = np.tile(reduced.xdot_from_s(x0, s0), s)

    def residual(w):
        V = w.reshape(s, d)
        X = x0 + h * (tab.a @ V)
        Rv, F, muA = _stage_data(reduced, x0, mu, X, V)
        S = s0 + h * (tab.at @ F) - (muA - muA0)
        return (Rv - S).ravel()

    w0 = np.asarray(guess, dtype=float).ravel()
    if solver is None:
        w = newton_solve(residual, w0, tol=tol)
    else:
        w = solver.solve(residual, w0)
    V = w.reshape(s, d)
    X = x0 + h * (tab.a @ V)
    _, F, _ = _stage_data(reduced, x0, mu, X, V)
    x1 = x0 + h * (tab.b @ V)
    s1 = s0 + h * (tab.bt @ F) - (mu @ reduced.connection_A(x1) - muA0)
    if not reduced.in_chart(x1):
        raise StepRejected(f"shape point left the chart: {x1}")
    return ReducedCotangentState(x1, s1)


def wrap_angle(theta):
    """Wrap into (-pi, pi]."""
    return theta - TWO_PI * np.ceil((theta - np.pi) / TWO_PI)


def project(traj, system, wrap=True):
    """Drop group coordinates of a configuration trajectory; angle-type
    shape coordinates are wrapped to (-pi, pi] unless wrap=False.

    Accepts either a Trajectory (returns a shape Trajectory with the same
    timestamps) or a plain array of configuration rows (returns an array).
    """
    is_traj = isinstance(traj, Trajectory)
    qs = np.atleast_2d(np.asarray(traj.positions if is_traj else traj,
                                  dtype=float))
    xs = np.array([system.to_shape(q) for q in qs])
    if wrap:
        mask = system.angle_shape_mask()
        xs[:, mask] = wrap_angle(xs[:, mask])
    if is_traj:
        return Trajectory(times=traj.times, positions=xs, kind="config",
                          h=traj.h, mu=traj.mu)
    return xs


def pi_mu(system, reduced, q, p, mu=None):
    """Momentum-shifted projection T*Q -> T*S: (q, p) with J(p) = mu maps
    to (x, s) = (shape(q), T^t p - mu.A(x))."""
    p = np.asarray(p, dtype=float)
    if mu is None:
        mu = system.group_generators() @ p
    x = system.to_shape(q)
    s = system.shape_jacobian().T @ p - np.atleast_1d(mu) @ reduced.connection_A(x)
    return ReducedCotangentState(x, s), np.atleast_1d(mu)


def reconstruct(shape_traj, q0, q1, ld, system, mu, tol=1e-12):
    """Recover the configuration trajectory over a shape trajectory.

    The group increment of each consecutive pair is solved from the
    discrete momentum constraint (previous increment as the Newton guess).
    Angle-type shape coordinates are unwrapped and re-based on q0 first, so
    a wrapped trajectory from project() round-trips exactly.
    """
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    gen = system.group_generators()
    G = gen.T
    jd0 = gen @ ld.d2(q0, q1)
    if np.max(np.abs(jd0 - mu)) > 1e-8:
        raise MomentumMismatch(
            f"seed pair carries momentum {jd0}, expected {mu}")

    xs = np.array(np.atleast_2d(shape_traj), dtype=float)
    mask = system.angle_shape_mask()
    if mask.any():
        xs[:, mask] = np.unwrap(xs[:, mask], axis=0)
        offset = TWO_PI * np.round((system.to_shape(q0)[mask] - xs[0, mask]) / TWO_PI)
        xs[:, mask] += offset

    qs = np.empty((len(xs), system.n))
    qs[0] = q0
    g = system.group_value(q0)
    dg_guess = system.group_value(q1) - g
    chord = ChordNewton(tol=tol)
    for k in range(1, len(xs)):
        q_prev = qs[k - 1]
        x_next = xs[k]

        def residual(dg):
            q_next = system.from_shape(x_next, g + dg)
            return gen @ ld.d2(q_prev, q_next) - mu

        def jacobian(dg):
            q_next = system.from_shape(x_next, g + dg)
            return gen @ ld.d22(q_prev, q_next) @ G

        dg = chord.solve(residual, dg_guess, jacobian=jacobian)
        g = g + dg
        dg_guess = dg
        qs[k] = system.from_shape(x_next, g)
    return qs


def dr_seed(lhat, aform, x0, xdot0, substeps=8):
    """Seed pair (x0, x1) for a DR run from a continuous reduced initial
    condition, using substeps of the order-4 reduced method as the
    high-accuracy reference for the first step."""
    reduced = aform.reduced
    x0 = np.asarray(x0, dtype=float)
    s0 = reduced.dR_dxdot(x0, np.asarray(xdot0, dtype=float), lhat.mu)
    state = ReducedCotangentState(x0, s0)
    tab = gauss_tableau(2)
    hh = lhat.h / substeps
    for _ in range(substeps):
        state = rsprk_step(reduced, tab, state, hh, lhat.mu)
    return x0, state.x


def run_dr(lhat, aform, x0, x1, steps, tol=1e-12):
    """Iterate dr_step from a seed pair; returns a shape Trajectory of
    steps+2 points (unwrapped angles)."""
    from .core import ChordNewton

    solver = ChordNewton(tol=tol)
    xs = np.empty((steps + 2, lhat.system.shape_dim))
    xs[0] = x0
    xs[1] = x1
    for k in range(steps):
        # quadratic extrapolation once three points are available; trims
        # a couple of chord iterations off every implicit solve
        guess = 3.0 * (xs[k + 1] - xs[k]) + xs[k - 1] if k > 0 else None
        xs[k + 2] = dr_step(lhat, aform, xs[k], xs[k + 1], guess=guess,
                            solver=solver)
    return Trajectory(times=lhat.h * np.arange(steps + 2), positions=xs,
                      kind="config", h=lhat.h, mu=lhat.mu)


def run_rsprk(reduced, tab, state, h, steps, mu, tol=1e-12):
    """Iterate rsprk_step; returns a reduced cotangent Trajectory."""
    from .core import ChordNewton

    solver = ChordNewton(tol=tol)
    d = reduced.shape_dim
    xs = np.empty((steps + 1, d))
    ss = np.empty((steps + 1, d))
    xs[0], ss[0] = state.x, state.s
    cur = state
    for k in range(steps):
        cur = rsprk_step(reduced, tab, cur, h, mu, solver=solver)
        xs[k + 1], ss[k + 1] = cur.x, cur.s
    return Trajectory(times=h * np.arange(steps + 1), positions=xs,
                      momenta=ss, kind="reduced", h=h,
                      mu=np.atleast_1d(np.asarray(mu, dtype=float)))
