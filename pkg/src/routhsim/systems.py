"""Benchmark systems: axisymmetric orbit in an oblateness field, and a
double spherical pendulum in the hanging chart.

Both are built symbolically (see symbolic.py) and cached per parameter set.
"""

from functools import lru_cache

import numpy as np
import sympy as sp

from .symbolic import AffineTrivialization, SymbolicMechanicalSystem, SymbolicReducedSystem

CHART_MARGIN = 1e-9


def _satellite_potential(rho, z, J2):
    # attractive: V -> -1/rho as J2 -> 0
    return -(1 / rho + (J2 / rho**3) * (sp.Rational(3, 2) * z**2 / rho**2 - sp.Rational(1, 2)))


@lru_cache(maxsize=None)
def satellite_system(J2=0.0):
    """Point mass in an axisymmetric gravity field, cylindrical chart (r, theta, z).

    The potential is attractive, with an oblateness correction of strength J2.
    The symmetry is rotation about the z axis; theta is the group coordinate.
    """
    r, th, z, vr, vth, vz = sp.symbols("r th z vr vth vz")
    rho = sp.sqrt(r**2 + z**2)
    L = sp.Rational(1, 2) * (vr**2 + r**2 * vth**2 + vz**2) - _satellite_potential(rho, z, sp.Float(J2))
    triv = AffineTrivialization(
        T=[[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]],
        G=[[0.0], [1.0], [0.0]],
    )
    chart = lambda q: q[0] > CHART_MARGIN
    return SymbolicMechanicalSystem(
        (r, th, z), (vr, vth, vz), L, triv, chart=chart,
        angle_mask=[False, False], name=f"satellite(J2={J2})",
    )


@lru_cache(maxsize=None)
def satellite_reduced(J2=0.0):
    """Reduced satellite on shape space (r, z) at momentum mu.

    The connection vanishes identically (the group coordinate is metric-
    orthogonal to the shape directions), so there is no magnetic term; the
    amended potential carries the centrifugal contribution mu^2 / (2 r^2).
    """
    r, z, vr, vz, mu = sp.symbols("r z vr vz mu")
    rho = sp.sqrt(r**2 + z**2)
    Vmu = _satellite_potential(rho, z, sp.Float(J2)) + mu**2 / (2 * r**2)
    R = sp.Rational(1, 2) * (vr**2 + vz**2) - Vmu
    A = sp.zeros(1, 2)
    chart = lambda x: x[0] > CHART_MARGIN
    return SymbolicReducedSystem(
        (r, z), (vr, vz), (mu,), R, A, Vmu,
        locked_inertia_expr=r**2, chart=chart,
        angle_mask=[False, False], name=f"satellite_reduced(J2={J2})",
    )


def _dsp_geometry(m1, m2, l1, l2, grav):
    """Symbolic pieces shared by the full and reduced pendulum systems."""
    r1, th1, r2, th2 = sp.symbols("r1 th1 r2 th2")
    vr1, vth1, vr2, vth2 = sp.symbols("vr1 vth1 vr2 vth2")
    z1 = -sp.sqrt(l1**2 - r1**2)
    z2 = -sp.sqrt(l2**2 - r2**2)
    # mass 1 hangs from the origin, mass 2 hangs from mass 1
    p1 = sp.Matrix([r1 * sp.cos(th1), r1 * sp.sin(th1), z1])
    p2 = p1 + sp.Matrix([r2 * sp.cos(th2), r2 * sp.sin(th2), z2])
    subs = list(zip((r1, th1, r2, th2), (vr1, vth1, vr2, vth2)))
    v1 = sum((p1.diff(c) * vc for c, vc in subs), sp.zeros(3, 1))
    v2 = sum((p2.diff(c) * vc for c, vc in subs), sp.zeros(3, 1))
    K = sp.Rational(1, 2) * (m1 * v1.dot(v1) + m2 * v2.dot(v2))
    V = grav * (m1 * p1[2] + m2 * p2[2])
    return (r1, th1, r2, th2), (vr1, vth1, vr2, vth2), K, V


@lru_cache(maxsize=None)
def dsp_system(m1=1.0, m2=1.0, l1=1.0, l2=1.0, grav=9.8):
    """Double spherical pendulum, chart (r1, theta1, r2, theta2).

    Each bob is constrained to its sphere and parameterized by the
    horizontal distance from its pivot, with z_i = -sqrt(l_i^2 - r_i^2)
    (both bobs below their pivots).  Simultaneous rotation of theta1 and
    theta2 about the vertical is the symmetry.
    """
    m1, m2, l1, l2, grav = (sp.Float(v) for v in (m1, m2, l1, l2, grav))
    qs, vs, K, V = _dsp_geometry(m1, m2, l1, l2, grav)
    triv = AffineTrivialization(
        T=[[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        G=[[0.0], [1.0], [0.0], [1.0]],
    )
    L1, L2 = float(l1), float(l2)

    def chart(q):
        return (q[0] > CHART_MARGIN * L1 and q[2] > CHART_MARGIN * L2
                and L1**2 - q[0] ** 2 > CHART_MARGIN * L1**2
                and L2**2 - q[2] ** 2 > CHART_MARGIN * L2**2)

    return SymbolicMechanicalSystem(
        qs, vs, K - V, triv, chart=chart,
        angle_mask=[False, False, True],
        name="dsp",
    )


@lru_cache(maxsize=None)
def dsp_reduced(m1=1.0, m2=1.0, l1=1.0, l2=1.0, grav=9.8):
    """Reduced double spherical pendulum on shape space (r1, r2, phi).

    phi = theta2 - theta1 is the relative azimuth.  The Routhian is the
    kinetic energy of the horizontal part of the velocity minus the amended
    potential; the connection comes from the locked inertia of the
    simultaneous-rotation action.
    """
    m1s, m2s, l1s, l2s, gs = (sp.Float(v) for v in (m1, m2, l1, l2, grav))
    r1, r2, ph = sp.symbols("r1 r2 ph")
    v1, v2, vph = sp.symbols("v1 v2 vph")
    mu = sp.symbols("mu")

    Ilock = m1s * r1**2 + m2s * (r1**2 + r2**2 + 2 * r1 * r2 * sp.cos(ph))
    A = sp.Matrix([[-r2 * sp.sin(ph), r1 * sp.sin(ph), r2**2 + r1 * r2 * sp.cos(ph)]]) * (m2s / Ilock)

    # horizontal lift: theta1dot = -(A xdot), theta2dot = theta1dot + phidot
    qs, vqs, K, V = _dsp_geometry(m1s, m2s, l1s, l2s, gs)
    Axdot = (A @ sp.Matrix([v1, v2, vph]))[0]
    lift = {
        qs[0]: r1, qs[1]: sp.Integer(0), qs[2]: r2, qs[3]: ph,
        vqs[0]: v1, vqs[1]: -Axdot, vqs[2]: v2, vqs[3]: vph - Axdot,
    }
    Khor = K.subs(lift, simultaneous=True)
    Vmu = V.subs({qs[0]: r1, qs[2]: r2}) + mu**2 / (2 * Ilock)
    R = Khor - Vmu
    L1, L2 = float(l1s), float(l2s)

    def chart(x):
        return (x[0] > CHART_MARGIN * L1 and x[1] > CHART_MARGIN * L2
                and L1**2 - x[0] ** 2 > CHART_MARGIN * L1**2
                and L2**2 - x[1] ** 2 > CHART_MARGIN * L2**2)

    return SymbolicReducedSystem(
        (r1, r2, ph), (v1, v2, vph), (mu,), R, A, Vmu,
        locked_inertia_expr=Ilock, chart=chart,
        angle_mask=[False, False, True],
        name="dsp_reduced",
    )
