"""Config-driven simulation runner.

Subcommands: simulate (one run to CSV), compare (paired runs, one report),
order (convergence-slope measurement), check (fast invariant suite).

Config files are flat UTF-8 ``key = value`` lines with ``#`` comments;
command-line flags override file values.  Exit codes: 0 success, 2 config
error, 3 numerical failure (output truncated at the last valid step).
"""

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import diagnostics as diag
from .core import ChordNewton
from .discrete_lagrangian import (del_step, discrete_momentum,
                                  legendre_inverse, midpoint_ld)
from .errors import ConfigError, NonFiniteValue, RouthsimError
from .reduction import (ConnectionOneForm, ReducedCotangentState, dr_seed,
                        dr_step, pi_mu, project, reconstruct,
                        reduce_lagrangian, rsprk_step)
from .sprk import CotangentState, gauss_tableau, sprk_step
from .systems import dsp_reduced, dsp_system, satellite_reduced, satellite_system

_FULL_METHODS = ("del", "sprk", "rk4")
_REDUCED_METHODS = ("dr", "rsprk")

_COLS = {
    ("satellite", "full"): ["r", "theta", "z"],
    ("satellite", "reduced"): ["r", "z"],
    ("dsp", "full"): ["r1", "theta1", "r2", "theta2"],
    ("dsp", "reduced"): ["r1", "r2", "phi"],
}
_GROUP_COLS = {"satellite": ["theta"], "dsp": ["theta1"]}


def _fmt(v):
    return format(float(v), ".17g")


def _parse_vector(text, key):
    try:
        return np.array([float(t) for t in text.replace(",", " ").split()])
    except ValueError as exc:
        raise ConfigError(f"bad vector for {key!r}: {text!r}") from exc


def parse_kv_file(path):
    """Flat ``key = value`` config format; '#' starts a comment."""
    data = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, val = line.split("=", 1)
        data[key.strip()] = val.strip()
    return data


@dataclass
class RunConfig:
    """Validated description of one simulation run."""

    system: str = ""
    method: str = ""
    order: int = 4
    h: float = 0.0
    steps: int = 0
    mu: np.ndarray = None
    j2: float = 0.05
    m1: float = 1.0
    m2: float = 1.0
    l1: float = 1.0
    l2: float = 1.0
    g: float = 9.8
    q: np.ndarray = None
    qdot: np.ndarray = None
    x: np.ndarray = None
    xdot: np.ndarray = None
    out: str = "."
    emit: tuple = ("trajectory",)

    @classmethod
    def from_mapping(cls, data):
        cfg = cls()
        scalar = {"j2": "j2", "m1": "m1", "m2": "m2", "l1": "l1", "l2": "l2",
                  "g": "g", "h": "h"}
        for key, val in data.items():
            if key in ("system", "method", "out"):
                setattr(cfg, key, str(val))
            elif key in ("order", "steps"):
                try:
                    setattr(cfg, key, int(val))
                except ValueError as exc:
                    raise ConfigError(f"bad integer for {key!r}: {val!r}") from exc
            elif key in scalar:
                try:
                    setattr(cfg, scalar[key], float(val))
                except ValueError as exc:
                    raise ConfigError(f"bad number for {key!r}: {val!r}") from exc
            elif key == "mu":
                cfg.mu = _parse_vector(str(val), "mu")
            elif key in ("q", "qdot", "x", "xdot"):
                setattr(cfg, key, _parse_vector(str(val), key))
            elif key == "emit":
                cfg.emit = tuple(str(val).replace(",", " ").split())
            else:
                raise ConfigError(f"unknown config key {key!r}")
        cfg.validate()
        return cfg

    def validate(self):
        if self.system not in ("satellite", "dsp"):
            raise ConfigError(f"system must be 'satellite' or 'dsp', got {self.system!r}")
        if self.method not in _FULL_METHODS + _REDUCED_METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.order not in (2, 4):
            raise ConfigError(f"order must be 2 or 4, got {self.order}")
        if self.method in ("del", "dr") and self.order != 2:
            raise ConfigError(f"method {self.method!r} is second order; set order = 2")
        if not self.h > 0.0:
            raise ConfigError(f"h must be positive, got {self.h}")
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")
        full_ic = self.q is not None and self.qdot is not None
        red_ic = self.x is not None and self.xdot is not None
        if not full_ic and not red_ic:
            raise ConfigError("initial condition required: q/qdot or x/xdot")
        if self.method in _FULL_METHODS and not full_ic:
            raise ConfigError(f"method {self.method!r} needs a full-space IC (q, qdot)")
        if self.method in _REDUCED_METHODS and red_ic and self.mu is None:
            raise ConfigError(f"method {self.method!r} with a reduced IC needs mu")
        bad = set(self.emit) - {"trajectory", "energy", "momentum", "reconstruction"}
        if bad:
            raise ConfigError(f"unknown emit items: {sorted(bad)}")
        if "reconstruction" in self.emit and self.method not in _REDUCED_METHODS:
            raise ConfigError("reconstruction output needs a reduced method (dr/rsprk)")

    def build_systems(self):
        if self.system == "satellite":
            return satellite_system(self.j2), satellite_reduced(self.j2)
        return (dsp_system(self.m1, self.m2, self.l1, self.l2, self.g),
                dsp_reduced(self.m1, self.m2, self.l1, self.l2, self.g))


def _check_finite(arrs, count):
    """Largest prefix length <= count whose rows are all finite."""
    good = count
    for arr in arrs:
        finite = np.all(np.isfinite(arr[:count]), axis=tuple(range(1, arr.ndim)))
        bad = np.nonzero(~finite)[0]
        if bad.size:
            good = min(good, int(bad[0]))
    return good


def _run_full(cfg, system):
    """Integrate with a full-space method; returns (qs, ps, status)."""
    h, steps = cfg.h, cfg.steps
    n = system.n
    q0 = np.asarray(cfg.q, dtype=float)
    qdot0 = np.asarray(cfg.qdot, dtype=float)
    if q0.size != n or qdot0.size != n:
        raise ConfigError(f"IC dimension mismatch: expected {n} components")
    p0 = system.mass_matrix(q0) @ qdot0
    qs = np.empty((steps + 1, n))
    ps = np.empty((steps + 1, n))
    qs[0], ps[0] = q0, p0
    count, status = 1, 0
    try:
        if cfg.method == "del":
            ld = midpoint_ld(system, h)
            q1 = legendre_inverse(ld, q0, p0)
            qs[1], ps[1] = q1, ld.d2(q0, q1)
            count = 2
            solver = ChordNewton()
            for k in range(steps - 1):
                qn = del_step(ld, qs[count - 2], qs[count - 1], solver=solver)
                qs[count], ps[count] = qn, ld.d2(qs[count - 1], qn)
                count += 1
        elif cfg.method == "sprk":
            tab = gauss_tableau(cfg.order // 2)
            solver = ChordNewton()
            cur = CotangentState(q0, p0)
            for k in range(steps):
                cur = sprk_step(system, tab, cur, h, solver=solver)
                qs[count], ps[count] = cur.q, cur.p
                count += 1
        else:  # rk4
            cur = CotangentState(q0, p0)
            for k in range(steps):
                cur = diag.rk4_step(system, cur, h)
                if not (np.all(np.isfinite(cur.q)) and np.all(np.isfinite(cur.p))):
                    raise NonFiniteValue("non-finite state during rk4 run")
                qs[count], ps[count] = cur.q, cur.p
                count += 1
    except ConfigError:
        raise
    except RouthsimError:
        status = 3
    count = _check_finite((qs, ps), count)
    return qs[:count], ps[:count], status


def _reduced_seed(cfg, system, reduced):
    """Seed data for a reduced run: (mu, x0, and either x1 or s0).

    A full-space IC is dropped through the momentum map so reduced and
    unreduced runs from the same (q, qdot) are exactly matched; a reduced
    IC uses the supplied mu directly.
    """
    if cfg.q is not None and cfg.qdot is not None:
        q0 = np.asarray(cfg.q, dtype=float)
        qdot0 = np.asarray(cfg.qdot, dtype=float)
        if q0.size != system.n or qdot0.size != system.n:
            raise ConfigError(f"IC dimension mismatch: expected {system.n} components")
        p0 = system.mass_matrix(q0) @ qdot0
        mu = system.group_generators() @ p0
        if cfg.method == "dr":
            ld = midpoint_ld(system, cfg.h)
            q1 = legendre_inverse(ld, q0, p0)
            return mu, system.to_shape(q0), ("pair", system.to_shape(q1))
        state, mu = pi_mu(system, reduced, q0, p0, mu)
        return mu, state.x, ("state", state.s)
    mu = np.atleast_1d(np.asarray(cfg.mu, dtype=float))
    x0 = np.asarray(cfg.x, dtype=float)
    xdot0 = np.asarray(cfg.xdot, dtype=float)
    if x0.size != reduced.shape_dim or xdot0.size != reduced.shape_dim:
        raise ConfigError(f"IC dimension mismatch: expected {reduced.shape_dim} components")
    if cfg.method == "dr":
        ld = midpoint_ld(system, cfg.h)
        lhat = reduce_lagrangian(ld, system, mu)
        aform = ConnectionOneForm(reduced)
        _, x1 = dr_seed(lhat, aform, x0, xdot0)
        return mu, x0, ("pair", x1)
    return mu, x0, ("state", reduced.dR_dxdot(x0, xdot0, mu))


def _run_reduced(cfg, system, reduced):
    """Integrate with a reduced method; returns (xs, ss, mu, status)."""
    h, steps = cfg.h, cfg.steps
    d = reduced.shape_dim
    mu, x0, seed = _reduced_seed(cfg, system, reduced)
    xs = np.empty((steps + 1, d))
    ss = np.empty((steps + 1, d))
    xs[0] = x0
    count, status = 1, 0
    aform = ConnectionOneForm(reduced)
    try:
        if cfg.method == "dr":
            ld = midpoint_ld(system, h)
            lhat = reduce_lagrangian(ld, system, mu)
            xs[1] = seed[1]
            ss[0] = -lhat.d1(xs[0], xs[1]) + aform.A1(xs[0], xs[1], mu)
            ss[1] = lhat.d2(xs[0], xs[1]) - aform.A2(xs[0], xs[1], mu)
            count = 2
            solver = ChordNewton()
            for k in range(steps - 1):
                guess = (3.0 * (xs[count - 1] - xs[count - 2]) + xs[count - 3]
                         if count >= 3 else None)
                xn = dr_step(lhat, aform, xs[count - 2], xs[count - 1],
                             guess=guess, solver=solver)
                xs[count] = xn
                ss[count] = lhat.d2(xs[count - 1], xn) - aform.A2(xs[count - 1], xn, mu)
                count += 1
        else:  # rsprk
            tab = gauss_tableau(cfg.order // 2)
            cur = ReducedCotangentState(x0, seed[1])
            ss[0] = cur.s
            solver = ChordNewton()
            for k in range(steps):
                cur = rsprk_step(reduced, tab, cur, h, mu, solver=solver)
                xs[count], ss[count] = cur.x, cur.s
                count += 1
    except ConfigError:
        raise
    except RouthsimError:
        status = 3
    count = _check_finite((xs, ss), count)
    return xs[:count], ss[:count], mu, status


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _trajectory_rows(times, arrays):
    rows = []
    for k in range(len(times)):
        cells = [str(k), _fmt(times[k])]
        for arr in arrays:
            cells.extend(_fmt(v) for v in np.atleast_1d(arr[k]))
        rows.append(cells)
    return rows


def _energy_series(cfg, system, reduced, pos, mom, mu):
    if cfg.method in _FULL_METHODS:
        return np.array([system.energy(q, system.qdot_from_p(q, p))
                         for q, p in zip(pos, mom)])
    E = np.empty(len(pos))
    for k, (x, s) in enumerate(zip(pos, mom)):
        xdot = reduced.xdot_from_s(x, s)
        E[k] = float(np.dot(s, xdot)) - reduced.routhian_hat(x, xdot, mu)
    return E


def cmd_simulate(cfg):
    system, reduced = cfg.build_systems()
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)

    if cfg.method in _FULL_METHODS:
        pos, mom, status = _run_full(cfg, system)
        mu = system.group_generators() @ mom[0]
        cols = _COLS[(cfg.system, "full")]
        header = ["step", "t"] + cols + ["p_" + c for c in cols]
    else:
        pos, mom, mu, status = _run_reduced(cfg, system, reduced)
        cols = _COLS[(cfg.system, "reduced")]
        header = ["step", "t"] + cols + ["s_" + c for c in cols]
    times = cfg.h * np.arange(len(pos))

    arrays = [pos, mom]
    if "reconstruction" in cfg.emit:
        ld = midpoint_ld(system, cfg.h)
        lhat = reduce_lagrangian(ld, system, mu)
        q0 = system.from_shape(pos[0], np.zeros(system.m))
        q1 = system.from_shape(pos[1], lhat.delta_g(pos[0], pos[1]))
        qs = reconstruct(pos, q0, q1, ld, system, mu)
        groups = np.stack([system.group_value(q) for q in qs])
        arrays.append(groups)
        header = header + _GROUP_COLS[cfg.system]

    if "trajectory" in cfg.emit or "reconstruction" in cfg.emit:
        _write_csv(outdir / "trajectory.csv", header,
                   _trajectory_rows(times, arrays))

    if "energy" in cfg.emit:
        E = _energy_series(cfg, system, reduced, pos, mom, mu)
        drift = (E - E[0]) / E[0] if E[0] != 0.0 else E - E[0]
        rows = [[str(k), _fmt(times[k]), _fmt(E[k]), _fmt(drift[k])]
                for k in range(len(E))]
        _write_csv(outdir / "energy.csv", ["step", "t", "E", "drift"], rows)

    if "momentum" in cfg.emit:
        if cfg.method in _FULL_METHODS:
            J = mom @ system.group_generators().T
        else:
            J = np.tile(mu, (len(pos), 1))
        dev = np.max(np.abs(J - J[0]), axis=1)
        jcols = [f"J{a}" for a in range(J.shape[1])] if J.shape[1] > 1 else ["J"]
        rows = [[str(k), _fmt(times[k])] + [_fmt(v) for v in J[k]] + [_fmt(dev[k])]
                for k in range(len(J))]
        _write_csv(outdir / "momentum.csv", ["step", "t"] + jcols + ["dev"], rows)

    return status


def _shape_positions(cfg, system, pos):
    if cfg.method in _FULL_METHODS:
        return project(pos, system, wrap=False)
    return pos


def cmd_compare(cfg_a, cfg_b, outdir):
    if cfg_a.system != cfg_b.system:
        raise ConfigError("compare needs both runs on the same system")
    if abs(cfg_a.h * cfg_a.steps - cfg_b.h * cfg_b.steps) > 1e-9:
        raise ConfigError("compare needs matching final times")
    results = []
    for cfg in (cfg_a, cfg_b):
        system, reduced = cfg.build_systems()
        if cfg.method in _FULL_METHODS:
            pos, mom, status = _run_full(cfg, system)
            mu = system.group_generators() @ mom[0]
        else:
            pos, mom, mu, status = _run_reduced(cfg, system, reduced)
        E = _energy_series(cfg, system, reduced, pos, mom, mu)
        drift = (E - E[0]) / E[0] if E[0] != 0.0 else E - E[0]
        results.append((cfg, system, pos, drift, status))
    status = max(r[4] for r in results)
    if status != 0:
        return status  # a truncated run has no aligned series to report

    # align on the coarser grid (step ratios must be integral)
    (ca, sys_a, pos_a, dr_a, _), (cb, sys_b, pos_b, dr_b, _) = results
    if cb.steps % ca.steps == 0:
        r = cb.steps // ca.steps
        ia = np.arange(ca.steps + 1)
        ib = r * ia
        base_t = ca.h * ia
    elif ca.steps % cb.steps == 0:
        r = ca.steps // cb.steps
        ib = np.arange(cb.steps + 1)
        ia = r * ib
        base_t = cb.h * ib
    else:
        raise ConfigError("compare needs commensurate step counts")

    header = ["step", "t", "drift_a", "drift_b"]
    xa = _shape_positions(ca, sys_a, pos_a)[ia]
    xb = _shape_positions(cb, sys_b, pos_b)[ib]
    dist = None
    if xa.shape == xb.shape:
        dist = np.max(np.abs(xa - xb), axis=1)
        header.append("shape_dist")
    rows = []
    for k in range(len(base_t)):
        cells = [str(k), _fmt(base_t[k]), _fmt(dr_a[ia[k]]), _fmt(dr_b[ib[k]])]
        if dist is not None:
            cells.append(_fmt(dist[k]))
        rows.append(cells)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_csv(outdir / "compare.csv", header, rows)
    return 0


_ORDER_H = {"satellite": [2 * np.pi / n for n in (40, 60, 80, 120)],
            "dsp": [2.0 / n for n in (40, 60, 80, 120)]}


def _order_ic(system_name):
    if system_name == "satellite":
        inc = 0.3
        q0 = np.array([1.0, 0.0, 0.0])
        qdot0 = np.array([0.0, np.cos(inc), np.sin(inc)])
        return q0, qdot0, 2 * np.pi
    x0 = np.array([0.19538024, 0.22858555, 0.1])
    xdot0 = np.array([0.01, 0.02, 0.05])
    system = dsp_system()
    red = dsp_reduced()
    xi = (0.5 / red.locked_inertia(x0)
          - (red.connection_A(x0) @ xdot0).item())
    q0 = system.from_shape(x0, np.zeros(1))
    qdot0 = system.shape_jacobian() @ xdot0 + xi * system.group_generators()[0]
    return q0, qdot0, 2.0


def cmd_order(system_name, method, outdir):
    system = satellite_system(0.0) if system_name == "satellite" else dsp_system()
    reduced = satellite_reduced(0.0) if system_name == "satellite" else dsp_reduced()
    q0, qdot0, T = _order_ic(system_name)
    hs = _ORDER_H[system_name]

    def final_state(h):
        c = RunConfig(system=system_name, method=method,
                      order=2 if method in ("del", "dr") else 4,
                      h=h, steps=round(T / h), q=q0, qdot=qdot0,
                      j2=0.0)
        c.validate()
        if method in _FULL_METHODS:
            pos, mom, status = _run_full(c, system)
        else:
            pos, mom, _, status = _run_reduced(c, system, reduced)
        if status != 0 or len(pos) != c.steps + 1:
            raise ConfigError(f"order run at h={h} failed to complete")
        return np.concatenate([pos[-1], mom[-1]])

    href = min(hs) / 12.0
    ref_method = "rsprk" if method in _REDUCED_METHODS else "sprk"
    c_ref = RunConfig(system=system_name, method=ref_method, order=4,
                      h=T / round(T / href), steps=round(T / href),
                      q=q0, qdot=qdot0, j2=0.0)
    c_ref.validate()
    if ref_method == "sprk":
        pos, mom, _ = _run_full(c_ref, system)
    else:
        pos, mom, _, _ = _run_reduced(c_ref, system, reduced)
    ref = np.concatenate([pos[-1], mom[-1]])

    rep = diag.convergence_order(lambda _sys, h: final_state(h), system, ref, hs)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = [[_fmt(h), _fmt(e)] for h, e in zip(rep.step_sizes, rep.errors)]
    _write_csv(outdir / "order.csv", ["h", "error"], rows)
    print(f"slope = {rep.slope:.6f}")
    return 0


def cmd_check():
    """Fast invariant suite; prints one PASS/FAIL line per check."""
    failures = 0

    def report(name, value, bound):
        nonlocal failures
        ok = value <= bound
        failures += 0 if ok else 1
        print(f"{'PASS' if ok else 'FAIL'} {name}: {value:.3e} (bound {bound:.1e})")

    from .sprk import symplecticity_residual

    report("gauss tableau s=1 symplecticity", symplecticity_residual(gauss_tableau(1)), 1e-14)
    report("gauss tableau s=2 symplecticity", symplecticity_residual(gauss_tableau(2)), 1e-14)

    sat = satellite_system(0.05)
    satr = satellite_reduced(0.05)
    inc = 0.3
    q0 = np.array([1.0, 0.0, 0.0])
    qdot0 = np.array([0.0, np.cos(inc), np.sin(inc)])
    p0 = sat.mass_matrix(q0) @ qdot0
    ld = midpoint_ld(sat, 0.3)
    q1 = legendre_inverse(ld, q0, p0)
    from .discrete_lagrangian import run_del
    traj = run_del(ld, q0, q1, 500)
    rep = diag.momentum_drift(traj, ld, sat)
    report("satellite DEL momentum drift (500 steps)", rep.max_abs, 1e-10)

    report("satellite beta_mu vanishes",
           float(max(np.max(np.abs(satr.beta_mu(np.array([1.0 + 0.3 * k, 0.1 * k]),
                                                np.array([0.7]))))
                     for k in range(3))), 0.0)

    report("satellite DEL/DR commutation (100 steps)",
           diag.commutation_check(sat, satr, (q0, q1), 100, ("del", "dr"), 0.3), 1e-8)

    dsp = dsp_system()
    dspr = dsp_reduced()
    x0 = np.array([0.19538024, 0.22858555, 0.1])
    xdot0 = np.array([0.01, 0.02, 0.05])
    xi = 0.5 / dspr.locked_inertia(x0) - (dspr.connection_A(x0) @ xdot0).item()
    qd0 = dsp.from_shape(x0, np.zeros(1))
    qdd0 = dsp.shape_jacobian() @ xdot0 + xi * dsp.group_generators()[0]
    pd0 = dsp.mass_matrix(qd0) @ qdd0
    report("dsp SPRK/RSPRK commutation (100 steps)",
           diag.commutation_check(dsp, dspr, CotangentState(qd0, pd0), 100,
                                  ("sprk", "rsprk"), 0.01), 1e-8)

    tab = gauss_tableau(2)
    n = sat.n

    def smap(z):
        out = sprk_step(sat, tab, CotangentState(z[:n], z[n:]), 0.3)
        return np.concatenate([out.q, out.p])

    report("sprk symplecticity residual",
           diag.symplectic_check(smap, np.concatenate([q0, p0]),
                                 diag.canonical_form(n)), 1e-6)

    mu = np.array([0.5])
    d = dspr.shape_dim

    def rmap(z):
        out = rsprk_step(dspr, tab, ReducedCotangentState(z[:d], z[d:]), 0.01, mu)
        return np.concatenate([out.x, out.s])

    z0 = np.concatenate([x0, dspr.dR_dxdot(x0, xdot0, mu)])
    report("rsprk symplecticity residual",
           diag.symplectic_check(rmap, z0, diag.reduced_form(dspr, mu)), 1e-6)

    ldd = midpoint_ld(dsp, 0.01)
    q1d = legendre_inverse(ldd, qd0, pd0)
    full = run_del(ldd, qd0, q1d, 200)
    shape = project(full, dsp, wrap=True)
    mud = discrete_momentum(ldd, qd0, q1d, dsp)
    qs = reconstruct(shape.positions, qd0, q1d, ldd, dsp, mud)
    report("dsp reconstruction round trip (200 steps)",
           float(np.max(np.abs(qs - full.positions))), 1e-10)

    return 0 if failures == 0 else 3


def _merge_config(args):
    data = {}
    if getattr(args, "config", None):
        data.update(parse_kv_file(args.config))
    if getattr(args, "ic", None):
        data.update(parse_kv_file(args.ic))
    for key in ("system", "method", "order", "h", "steps", "mu", "out", "emit",
                "j2", "m1", "m2", "l1", "l2", "g"):
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    return RunConfig.from_mapping(data)


def _add_run_flags(sub):
    sub.add_argument("--config", help="key = value config file")
    sub.add_argument("--system", choices=["satellite", "dsp"])
    sub.add_argument("--method", choices=list(_FULL_METHODS + _REDUCED_METHODS))
    sub.add_argument("--order", type=int)
    sub.add_argument("--h", type=float)
    sub.add_argument("--steps", type=int)
    sub.add_argument("--mu")
    sub.add_argument("--j2", type=float)
    sub.add_argument("--m1", type=float)
    sub.add_argument("--m2", type=float)
    sub.add_argument("--l1", type=float)
    sub.add_argument("--l2", type=float)
    sub.add_argument("--g", type=float)
    sub.add_argument("--ic", help="key = value file with q/qdot or x/xdot")
    sub.add_argument("--out", help="output directory")
    sub.add_argument("--emit", help="subset of trajectory,energy,momentum,reconstruction")


def build_parser():
    parser = argparse.ArgumentParser(prog="routhsim")
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("simulate", help="run one simulation to CSV")
    _add_run_flags(sim)

    cmp_ = subs.add_parser("compare", help="paired runs, one report file")
    cmp_.add_argument("config_a")
    cmp_.add_argument("config_b")
    cmp_.add_argument("--out", default=".")

    order = subs.add_parser("order", help="measure a convergence slope")
    order.add_argument("--system", choices=["satellite", "dsp"], required=True)
    order.add_argument("--method", choices=list(_FULL_METHODS + _REDUCED_METHODS),
                       required=True)
    order.add_argument("--out", default=".")

    subs.add_parser("check", help="run the fast invariant suite")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(_merge_config(args))
        if args.command == "compare":
            cfg_a = RunConfig.from_mapping(parse_kv_file(args.config_a))
            cfg_b = RunConfig.from_mapping(parse_kv_file(args.config_b))
            return cmd_compare(cfg_a, cfg_b, args.out)
        if args.command == "order":
            return cmd_order(args.system, args.method, args.out)
        return cmd_check()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except RouthsimError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
