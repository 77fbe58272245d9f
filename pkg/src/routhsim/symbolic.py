"""Sympy-backed construction of mechanical and reduced systems.

Connection and curvature data are precomputed symbolically once per system
and lambdified to plain float callables; the integrators never touch sympy
at run time.
"""

import numpy as np
import sympy as sp

from .core import MechanicalSystem, ReducedSystem


def _lamb(args, expr):
    """Lambdify to plain-math scalar code (much cheaper per call than the
    numpy backend at these tiny dimensions); matrix/array expressions are
    flattened and reshaped on the way out."""
    from .errors import NonFiniteValue

    if hasattr(expr, "shape"):
        shape = tuple(expr.shape)
        f = sp.lambdify(args, list(sp.flatten(expr)), modules="math", cse=True)

        def wrapped(*vals):
            try:
                return np.array(f(*vals), dtype=float).reshape(shape)
            except ValueError as exc:
                raise NonFiniteValue(f"evaluation failed: {exc}") from exc
    else:
        f = sp.lambdify(args, expr, modules="math", cse=True)

        def wrapped(*vals):
            try:
                return np.float64(f(*vals))
            except ValueError as exc:
                raise NonFiniteValue(f"evaluation failed: {exc}") from exc

    return wrapped


class AffineTrivialization:
    """Affine chart splitting q into shape and additive group coordinates.

    q = T x + G g, with [T | G] invertible.  Columns of T are the shape
    directions, columns of G the group generators.
    """

    def __init__(self, T, G):
        self.T = np.asarray(T, dtype=float)
        self.G = np.asarray(G, dtype=float)
        n = self.T.shape[0]
        Minv = np.linalg.inv(np.hstack([self.T, self.G]))
        d = self.T.shape[1]
        self.P = Minv[:d]        # shape projection, (d, n)
        self.gval = Minv[d:]     # group-coordinate extraction, (m, n)
        self.n = n
        self.d = d
        self.m = self.G.shape[1]


class SymbolicMechanicalSystem(MechanicalSystem):
    """Mechanical system with derivatives generated from a sympy Lagrangian."""

    def __init__(self, q_syms, v_syms, L_expr, trivialization, chart=None,
                 angle_mask=None, name=""):
        self.name = name
        self._triv = trivialization
        self.n = trivialization.n
        self.m = trivialization.m
        self.group_indices = tuple(
            int(i) for i in np.nonzero(np.any(trivialization.G != 0.0, axis=1))[0]
        )
        self._chart = chart
        self._angle_mask = (
            np.zeros(self.n - self.m, dtype=bool) if angle_mask is None
            else np.asarray(angle_mask, dtype=bool)
        )

        args = tuple(q_syms) + tuple(v_syms)
        qm = sp.Matrix(q_syms)
        vm = sp.Matrix(v_syms)
        Lq = L_expr.diff(qm)
        Lv = L_expr.diff(vm)
        self._L = _lamb(args, L_expr)
        self._Lq = _lamb(args, Lq)
        self._Lv = _lamb(args, Lv)
        self._Lqq = _lamb(args, Lq.jacobian(qm))
        self._Lqv = _lamb(args, Lq.jacobian(vm))
        self._M = _lamb(args, Lv.jacobian(vm))
        self._stage = sp.lambdify(args, list(Lq) + list(Lv), modules="math", cse=True)
        hess_exprs = (list(sp.flatten(Lq.jacobian(qm))) + list(sp.flatten(Lq.jacobian(vm)))
                      + list(sp.flatten(Lv.jacobian(vm))))
        self._hess = sp.lambdify(args, hess_exprs, modules="math", cse=True)

    def gradient_bundle(self, q, v):
        """(dL/dq, dL/dqdot) at one point, single fused call."""
        flat = self._stage(*q, *v)
        n = self.n
        return np.array(flat[:n]), np.array(flat[n:])

    def hessian_bundle(self, q, v):
        """(d2L/dqdq, d2L/dqdqdot, d2L/dqdotdqdot) in one fused call."""
        n = self.n
        flat = np.array(self._hess(*q, *v))
        k = n * n
        return (flat[:k].reshape(n, n), flat[k:2 * k].reshape(n, n),
                flat[2 * k:].reshape(n, n))

    def stage_bundle(self, Q, V):
        """(dL/dq, dL/dqdot) at all RK stages, one fused call per stage.

        Q and V have shape (stages, n); returns two (stages, n) arrays.
        """
        s, n = Q.shape
        flat = np.array([self._stage(*Q[i], *V[i]) for i in range(s)])
        return flat[:, :n], flat[:, n:]

    def lagrangian(self, q, qdot):
        return float(self._L(*q, *qdot))

    def dL_dq(self, q, qdot):
        return self._Lq(*q, *qdot).reshape(self.n)

    def dL_dqdot(self, q, qdot):
        return self._Lv(*q, *qdot).reshape(self.n)

    def mass_matrix(self, q):
        return self._M(*q, *np.zeros(self.n))

    def d2L_dqdq(self, q, qdot):
        return self._Lqq(*q, *qdot)

    def d2L_dqdqdot(self, q, qdot):
        return self._Lqv(*q, *qdot)

    def group_generators(self):
        return self._triv.G.T

    def shape_jacobian(self):
        return self._triv.T

    def to_shape(self, q):
        return self._triv.P @ np.asarray(q, dtype=float)

    def from_shape(self, x, g):
        g = np.atleast_1d(np.asarray(g, dtype=float))
        return self._triv.T @ np.asarray(x, dtype=float) + self._triv.G @ g

    def group_value(self, q):
        return self._triv.gval @ np.asarray(q, dtype=float)

    def in_chart(self, q):
        q = np.asarray(q, dtype=float)
        if not np.all(np.isfinite(q)):
            return False
        return True if self._chart is None else bool(self._chart(q))

    def angle_shape_mask(self):
        return self._angle_mask


class SymbolicReducedSystem(ReducedSystem):
    """Reduced system with Routhian and connection data generated from sympy.

    The magnetic 2-form is the exterior derivative of the mu-contracted
    local connection: B[k, l] = d_k(mu . A_l) - d_l(mu . A_k).
    """

    def __init__(self, x_syms, v_syms, mu_syms, R_expr, A_expr, Vmu_expr,
                 locked_inertia_expr=None, chart=None, angle_mask=None, name=""):
        self.name = name
        d = len(x_syms)
        m = len(mu_syms)
        self.shape_dim = d
        self.m = m
        self._chart = chart
        self._angle_mask = (
            np.zeros(d, dtype=bool) if angle_mask is None
            else np.asarray(angle_mask, dtype=bool)
        )

        xs = tuple(x_syms)
        vs = tuple(v_syms)
        mus = tuple(mu_syms)
        xm = sp.Matrix(x_syms)
        vm = sp.Matrix(v_syms)
        Rx = R_expr.diff(xm)
        Rv = R_expr.diff(vm)
        full = xs + vs + mus
        self._R = _lamb(full, R_expr)
        self._Rx = _lamb(full, Rx)
        self._Rv = _lamb(full, Rv)
        self._Rvv = _lamb(full, Rv.jacobian(vm))
        self._A = _lamb(xs, A_expr)
        dA = sp.Array([[[sp.diff(A_expr[a, k], x_syms[l]) for l in range(d)]
                        for k in range(d)] for a in range(m)])
        self._dA = _lamb(xs, dA)
        muA = [sum(mu_syms[a] * A_expr[a, k] for a in range(m)) for k in range(d)]
        B = sp.Matrix(d, d, lambda k, l:
                      sp.diff(muA[l], x_syms[k]) - sp.diff(muA[k], x_syms[l]))
        self._B = _lamb(xs + mus, B)
        self._Vmu = _lamb(xs + mus, Vmu_expr)
        self._I = None if locked_inertia_expr is None else _lamb(xs, locked_inertia_expr)

        # flat list of the per-stage quantities an implicit RK solve needs,
        # lambdified once so that all stages evaluate in a single call
        # (numpy broadcasting over arrays of stage values)
        Wv = [sum(mu_syms[a] * dA[a, l, k] * v_syms[l]
                  for a in range(m) for l in range(d)) for k in range(d)]
        stage_exprs = list(Rx) + list(Rv) + Wv + muA
        self._stage = sp.lambdify(full, stage_exprs, modules="math", cse=True)

    def stage_bundle(self, X, V, mu):
        """Evaluate (dR/dx, dR/dxdot, W xdot, mu.A) at all RK stages, one
        fused call per stage.

        X and V have shape (stages, shape_dim); mu is a length-m array.
        W is the transpose of the x-gradient of mu.A, so that
        W xdot = beta_mu xdot + (d(mu.A)/dx) xdot.  Returns four
        (stages, shape_dim) arrays.
        """
        s, d = X.shape
        mu = np.atleast_1d(mu)
        flat = np.array([self._stage(*X[i], *V[i], *mu) for i in range(s)])
        return flat[:, :d], flat[:, d:2 * d], flat[:, 2 * d:3 * d], flat[:, 3 * d:]

    def routhian_hat(self, x, xdot, mu):
        return float(self._R(*x, *xdot, *np.atleast_1d(mu)))

    def dR_dx(self, x, xdot, mu):
        return self._Rx(*x, *xdot, *np.atleast_1d(mu)).reshape(self.shape_dim)

    def dR_dxdot(self, x, xdot, mu):
        return self._Rv(*x, *xdot, *np.atleast_1d(mu)).reshape(self.shape_dim)

    def reduced_mass(self, x):
        zero = np.zeros(self.shape_dim)
        return self._Rvv(*x, *zero, *np.zeros(self.m))

    def connection_A(self, x):
        return self._A(*x).reshape(self.m, self.shape_dim)

    def connection_dA(self, x):
        return self._dA(*x).reshape(self.m, self.shape_dim, self.shape_dim)

    def beta_mu(self, x, mu):
        return self._B(*x, *np.atleast_1d(mu))

    def amended_potential(self, x, mu):
        return float(self._Vmu(*x, *np.atleast_1d(mu)))

    def locked_inertia(self, x):
        if self._I is None:
            raise NotImplementedError(f"no locked inertia for {self.name}")
        return float(self._I(*x))

    def in_chart(self, x):
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            return False
        return True if self._chart is None else bool(self._chart(x))

    def angle_shape_mask(self):
        return self._angle_mask
