"""Shared numerical scaffolding: root finding, finite differences, system interfaces.

Configurations, shape points, momenta and covectors are all plain float64
numpy arrays.  Everything here is pure: no function mutates its arguments.
"""

import abc
from dataclasses import dataclass, field

import numpy as np

from .errors import NoConvergence, NonFiniteValue, SingularJacobian

_SQRT_EPS = np.sqrt(np.finfo(float).eps)


def newton_solve(residual, guess, jacobian=None, tol=1e-12, max_iter=50):
    """Solve residual(x) = 0 by Newton's method with dense LU linear solves.

    Parameters
    ----------
    residual : callable
        Maps a length-k vector to a length-k vector.
    guess : array_like
        Starting point.
    jacobian : callable, optional
        Maps x to the k-by-k Jacobian of ``residual``.  When omitted a
        central finite-difference Jacobian is used.
    tol : float
        Convergence threshold on the sup norm of the residual.
    max_iter : int
        Iteration budget.

    Returns
    -------
    ndarray
        A vector x with ``max(abs(residual(x))) <= tol``.  After the
        tolerance is met one extra polishing update is taken (and kept only
        if it improves the residual), so long runs accumulate error at
        machine precision rather than at ``tol``.
    """
    x = np.atleast_1d(np.asarray(guess, dtype=float)).copy()
    if jacobian is None:
        jacobian = lambda z: fd_jacobian(residual, z)
    r = np.atleast_1d(np.asarray(residual(x), dtype=float))
    rnorm = np.max(np.abs(r))
    for _ in range(max_iter):
        if rnorm <= tol:
            break
        x, r, rnorm = _newton_update(residual, jacobian, x, r)
    else:
        if rnorm > tol:
            raise NoConvergence(
                f"no convergence after {max_iter} iterations "
                f"(residual {rnorm:.3e}, tol {tol:.1e})",
                last_iterate=x,
                residual_norm=rnorm,
            )
    if rnorm > 0.0:
        x_new, r_new, rnorm_new = _newton_update(residual, jacobian, x, r)
        if rnorm_new < rnorm:
            x = x_new
    return x


def _newton_update(residual, jacobian, x, r):
    J = np.atleast_2d(np.asarray(jacobian(x), dtype=float))
    try:
        dx = np.linalg.solve(J, r)
    except np.linalg.LinAlgError as exc:
        raise SingularJacobian(f"linear solve failed: {exc}") from exc
    if not np.all(np.isfinite(dx)):
        raise SingularJacobian("linear solve produced non-finite update")
    x_new = x - dx
    r_new = np.atleast_1d(np.asarray(residual(x_new), dtype=float))
    return x_new, r_new, np.max(np.abs(r_new))


class ChordNewton:
    """Newton iteration that reuses a cached Jacobian across iterations and
    across successive solves.

    Implicit RK stage systems at neighbouring steps have nearly identical
    Jacobians, so a stale Jacobian still contracts strongly; it is
    recomputed only when progress stalls.  Results satisfy the same
    residual tolerance as newton_solve (including the polishing update), so
    trajectories remain deterministic.
    """

    def __init__(self, tol=1e-12, max_iter=50):
        self.tol = tol
        self.max_iter = max_iter
        self._J = None

    def _refresh(self, residual, jacobian, x):
        if jacobian is None:
            self._J = fd_jacobian(residual, x)
        else:
            self._J = np.atleast_2d(np.asarray(jacobian(x), dtype=float))

    def _update(self, residual, x, r):
        try:
            dx = np.linalg.solve(self._J, r)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(f"linear solve failed: {exc}") from exc
        if not np.all(np.isfinite(dx)):
            raise SingularJacobian("linear solve produced non-finite update")
        x_new = x - dx
        r_new = np.atleast_1d(np.asarray(residual(x_new), dtype=float))
        return x_new, r_new, np.max(np.abs(r_new))

    def solve(self, residual, guess, jacobian=None):
        x = np.atleast_1d(np.asarray(guess, dtype=float)).copy()
        r = np.atleast_1d(np.asarray(residual(x), dtype=float))
        rnorm = np.max(np.abs(r))
        fresh = False
        if self._J is None or self._J.shape[0] != x.size:
            self._refresh(residual, jacobian, x)
            fresh = True
        for _ in range(self.max_iter):
            if rnorm <= self.tol:
                break
            x_new, r_new, rnorm_new = self._update(residual, x, r)
            # poor contraction with a stale Jacobian: recompute it here and
            # retry; with a fresh one, accept the step regardless
            if rnorm_new > 0.05 * rnorm and not fresh:
                self._refresh(residual, jacobian, x)
                fresh = True
                continue
            fresh = False
            x, r, rnorm = x_new, r_new, rnorm_new
        else:
            if rnorm > self.tol:
                raise NoConvergence(
                    f"no convergence after {self.max_iter} iterations "
                    f"(residual {rnorm:.3e}, tol {self.tol:.1e})",
                    last_iterate=x,
                    residual_norm=rnorm,
                )
        if rnorm > 0.0:
            x_new, r_new, rnorm_new = self._update(residual, x, r)
            if rnorm_new < rnorm:
                x = x_new
        return x


def fd_gradient(f, x, scale=1.0):
    """Central-difference gradient of a scalar function, O(h^2) accurate.

    Step per component: ``scale * sqrt(machine eps) * max(1, |x_i|)``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    grad = np.empty_like(x)
    for i in range(x.size):
        h = scale * _SQRT_EPS * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        fp, fm = f(xp), f(xm)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise NonFiniteValue(f"non-finite value in fd_gradient at component {i}")
        grad[i] = (fp - fm) / (2.0 * h)
    return grad


def fd_jacobian(f, x, scale=1.0):
    """Central-difference Jacobian of a vector function."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    cols = []
    for i in range(x.size):
        h = scale * _SQRT_EPS * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        fp = np.atleast_1d(np.asarray(f(xp), dtype=float))
        fm = np.atleast_1d(np.asarray(f(xm), dtype=float))
        if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
            raise NonFiniteValue(f"non-finite value in fd_jacobian at component {i}")
        cols.append((fp - fm) / (2.0 * h))
    return np.stack(cols, axis=-1)


@dataclass
class Trajectory:
    """Ordered sequence of timestamped states plus run metadata.

    ``kind`` is one of "config" (positions only, full chart), "cotangent"
    (positions + momenta on the full chart), or "reduced" (shape positions
    + shape momenta at fixed ``mu``).
    """

    times: np.ndarray
    positions: np.ndarray
    momenta: np.ndarray = None
    kind: str = "config"
    h: float = 0.0
    mu: np.ndarray = None

    def __len__(self):
        return len(self.times)


class MechanicalSystem(abc.ABC):
    """Continuous mechanical system on an n-dimensional configuration chart.

    The symmetry group is abelian of dimension ``m`` and acts additively in
    the chart: translating the configuration along each row of
    ``group_generators()`` leaves the Lagrangian unchanged.  Shape
    coordinates are related to configuration coordinates by the affine chart
    map ``from_shape`` / ``to_shape``.
    """

    n: int
    m: int
    group_indices: tuple

    @abc.abstractmethod
    def lagrangian(self, q, qdot):
        """L(q, qdot), a scalar."""

    @abc.abstractmethod
    def dL_dq(self, q, qdot):
        """Partial of L in the configuration slot, length n."""

    @abc.abstractmethod
    def dL_dqdot(self, q, qdot):
        """Partial of L in the velocity slot, length n."""

    @abc.abstractmethod
    def mass_matrix(self, q):
        """Velocity Hessian of L, an n-by-n symmetric matrix."""

    @abc.abstractmethod
    def d2L_dqdq(self, q, qdot):
        """Hessian of L in the configuration slot."""

    @abc.abstractmethod
    def d2L_dqdqdot(self, q, qdot):
        """Mixed Hessian; entry [i, j] is d^2 L / dq_i dqdot_j."""

    @abc.abstractmethod
    def group_generators(self):
        """(m, n) array; row a is the configuration direction of generator a."""

    @abc.abstractmethod
    def shape_jacobian(self):
        """(n, n-m) array; columns are configuration directions of shape coords."""

    @abc.abstractmethod
    def to_shape(self, q):
        """Project a configuration to its shape coordinates, length n-m."""

    @abc.abstractmethod
    def from_shape(self, x, g):
        """Assemble a configuration from shape coordinates and group values."""

    @abc.abstractmethod
    def group_value(self, q):
        """Group coordinates of q in the chart, length m."""

    def in_chart(self, q):
        """True when q lies in the validity region of the chart."""
        return bool(np.all(np.isfinite(q)))

    def angle_shape_mask(self):
        """Boolean mask over shape coordinates that are circle angles."""
        return np.zeros(self.n - self.m, dtype=bool)

    @property
    def shape_dim(self):
        return self.n - self.m

    def qdot_from_p(self, q, p):
        """Invert the Legendre transform p = M(q) qdot (kinetic Lagrangians)."""
        return np.linalg.solve(self.mass_matrix(q), p)

    def momentum(self, q, qdot):
        """Continuous momentum map: pairing of dL/dqdot with the generators."""
        return self.group_generators() @ self.dL_dqdot(q, qdot)

    def energy(self, q, qdot):
        """Conserved energy qdot . dL/dqdot - L."""
        return float(np.dot(qdot, self.dL_dqdot(q, qdot)) - self.lagrangian(q, qdot))


class ReducedSystem(abc.ABC):
    """Shape-space system carrying the reduced Routhian and connection data.

    All methods take the momentum value ``mu`` explicitly (a length-m
    array); instances are momentum-generic.
    """

    shape_dim: int
    m: int

    @abc.abstractmethod
    def routhian_hat(self, x, xdot, mu):
        """Reduced Routhian, a scalar."""

    @abc.abstractmethod
    def dR_dx(self, x, xdot, mu):
        """Partial of the reduced Routhian in the shape slot."""

    @abc.abstractmethod
    def dR_dxdot(self, x, xdot, mu):
        """Partial of the reduced Routhian in the velocity slot."""

    @abc.abstractmethod
    def reduced_mass(self, x):
        """Velocity Hessian of the reduced Routhian (horizontal metric)."""

    @abc.abstractmethod
    def connection_A(self, x):
        """Local connection coefficients, an (m, shape_dim) array."""

    @abc.abstractmethod
    def connection_dA(self, x):
        """Derivative tensor; entry [a, k, l] is dA[a, k] / dx_l."""

    @abc.abstractmethod
    def beta_mu(self, x, mu):
        """Magnetic 2-form matrix B with B[k, l] = d_k (mu A_l) - d_l (mu A_k)."""

    @abc.abstractmethod
    def amended_potential(self, x, mu):
        """Potential plus the momentum-squared term, a scalar."""

    def in_chart(self, x):
        return bool(np.all(np.isfinite(x)))

    def xdot_from_s(self, x, s):
        """Invert the reduced Legendre transform s = M(x) xdot."""
        return np.linalg.solve(self.reduced_mass(x), s)
